#include "pht/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "block_filler.hpp"
#include "pht/tau_select.hpp"

namespace pht {

namespace {

void check_groups(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.p() != y.p()) {
        throw InvalidInput("groups differ in dimension: " + std::to_string(x.p()) + " vs " +
                           std::to_string(y.p()));
    }
}

// True when y should be processed as the first group.
bool swap_for_canonical_order(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.n() != y.n()) return y.n() > x.n();
    const auto& a = x.values();
    const auto& b = y.values();
    return std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(),
                                        a.data() + a.size());
}

struct WithinSums {
    double statistic = 0.0;
    double trace = 0.0;
};

struct Weights {
    double own;
    double other;
};

Weights within_weights(std::size_t nOwn, std::size_t nOther, PooledWeighting weighting) {
    const double a = static_cast<double>(nOwn);
    const double b = static_cast<double>(nOther);
    if (weighting == PooledWeighting::Verbatim) {
        return {(a - 2.0) / (a + b - 2.0), b / (a + b - 2.0)};
    }
    return {(a - 3.0) / (a + b - 4.0), (b - 1.0) / (a + b - 4.0)};
}

std::vector<double> pooled_floor(const PairSummaries& a, double wa, const PairSummaries& b,
                                 double wb, double epsRel, const char* term) {
    std::vector<double> floor(a.p());
    for (std::size_t j = 0; j < a.p(); ++j) {
        if (a.constant_column(j) && b.constant_column(j)) {
            throw SingularBlock(BlockLocation{j, j, {}, {}, std::string(term) + ": constant coordinate"});
        }
        floor[j] = epsRel * (wa * a.full_var(j) + wb * b.full_var(j));
    }
    return floor;
}

// Within-group U-statistic sums with the pooled leave-two-out projector.
WithinSums within_group(const SampleMatrix& data, const PairSummaries& own,
                        const PairSummaries& other, const ScreeningSets& sets, Weights w,
                        const InversionPolicy& policy, bool wantStatistic, bool wantTrace,
                        const char* term) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    detail::BlockFiller filler(sets, policy,
                               pooled_floor(own, w.own, other, w.other, policy.epsRel, term));
    std::vector<double> otherVar(p);
    std::vector<double> otherCov(sets.pairs.size());
    for (std::size_t j = 0; j < p; ++j) otherVar[j] = w.other * other.full_var(j);
    for (std::size_t k = 0; k < sets.pairs.size(); ++k) otherCov[k] = w.other * other.full_cov(k);

    Vector u(static_cast<Eigen::Index>(p));
    Vector v(static_cast<Eigen::Index>(p));
    Vector cs(static_cast<Eigen::Index>(p));
    Vector ct(static_cast<Eigen::Index>(p));
    WithinSums sums;
    for (std::size_t s = 0; s + 1 < n; ++s) {
        u = data.row(s).transpose();
        for (std::size_t t = s + 1; t < n; ++t) {
            filler.fill(
                [&](std::size_t j) { return w.own * own.var_excluding(j, s, t) + otherVar[j]; },
                [&](std::size_t k) { return w.own * own.cov_excluding(k, s, t) + otherCov[k]; },
                term, s, t);
            const ProjectorBlocks& blocks = filler.blocks();
            v = data.row(t).transpose();
            if (wantStatistic) sums.statistic += projector_quadratic(sets, blocks, u, v);
            if (wantTrace) {
                for (std::size_t j = 0; j < p; ++j) {
                    const double m = own.mean_excluding(j, s, t);
                    const auto jj = static_cast<Eigen::Index>(j);
                    cs(jj) = u(jj) - m;
                    ct(jj) = v(jj) - m;
                }
                sums.trace += projector_quadratic(sets, blocks, cs, v) *
                              projector_quadratic(sets, blocks, ct, u);
            }
        }
    }
    const double norm = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    sums.statistic *= norm;
    sums.trace *= norm;
    return sums;
}

// (1/(n1 n2)) sum_{s,t} X_s' P12^{(s,t)} Y_t with S12,*^{(s,t)} built from
// single-observation downdates of each group.
double cross_term(const SampleMatrix& x, const SampleMatrix& y, const PairSummaries& sx,
                  const PairSummaries& sy, const ScreeningSets& sets,
                  const InversionPolicy& policy) {
    const std::size_t n1 = x.n();
    const std::size_t n2 = y.n();
    const std::size_t p = x.p();
    const double total = static_cast<double>(n1 + n2) - 2.0;
    const double w1 = (static_cast<double>(n1) - 1.0) / total;
    const double w2 = (static_cast<double>(n2) - 1.0) / total;
    detail::BlockFiller filler(sets, policy, pooled_floor(sx, w1, sy, w2, policy.epsRel, "cross"));

    // Leave-one-out moments of group 2, cached per t.
    const std::size_t np = sets.pairs.size();
    std::vector<double> var2(n2 * p);
    std::vector<double> cov2(n2 * np);
    for (std::size_t t = 0; t < n2; ++t) {
        for (std::size_t j = 0; j < p; ++j) var2[t * p + j] = w2 * sy.var_excluding(j, t);
        for (std::size_t k = 0; k < np; ++k) cov2[t * np + k] = w2 * sy.cov_excluding(k, t);
    }
    std::vector<double> var1(p);
    std::vector<double> cov1(np);
    Vector u(static_cast<Eigen::Index>(p));
    Vector v(static_cast<Eigen::Index>(p));
    double acc = 0.0;
    for (std::size_t s = 0; s < n1; ++s) {
        for (std::size_t j = 0; j < p; ++j) var1[j] = w1 * sx.var_excluding(j, s);
        for (std::size_t k = 0; k < np; ++k) cov1[k] = w1 * sx.cov_excluding(k, s);
        u = x.row(s).transpose();
        for (std::size_t t = 0; t < n2; ++t) {
            const double* vt = var2.data() + t * p;
            const double* ct = cov2.data() + t * np;
            filler.fill([&](std::size_t j) { return var1[j] + vt[j]; },
                        [&](std::size_t k) { return cov1[k] + ct[k]; }, "cross", s, t);
            v = y.row(t).transpose();
            acc += projector_quadratic(sets, filler.blocks(), u, v);
        }
    }
    return acc / (static_cast<double>(n1) * static_cast<double>(n2));
}

}  // namespace

namespace detail {

std::pair<SampleMatrix, SampleMatrix> center_pooled(const SampleMatrix& x, const SampleMatrix& y) {
    check_groups(x, y);
    const double n1 = static_cast<double>(x.n());
    const double n2 = static_cast<double>(y.n());
    const Vector grand = (n1 * x.column_means() + n2 * y.column_means()) / (n1 + n2);
    return {x.shifted(grand), y.shifted(grand)};
}

TwoPassResult two_sample_pass(const SampleMatrix& xIn, const SampleMatrix& yIn,
                              const ScreeningSets& sets, const TwoSampleOptions& options,
                              bool wantStatistic, bool wantTrace) {
    check_groups(xIn, yIn);
    if (sets.p != xIn.p()) throw InvalidInput("screening sets do not match data dimension");
    if (xIn.n() < 5 || yIn.n() < 5) {
        throw InsufficientSample("two-sample leave-out statistics need n1, n2 >= 5, got " +
                                 std::to_string(xIn.n()) + " and " + std::to_string(yIn.n()));
    }
    const bool swap = swap_for_canonical_order(xIn, yIn);
    const SampleMatrix* first = swap ? &yIn : &xIn;
    const SampleMatrix* second = swap ? &xIn : &yIn;
    std::pair<SampleMatrix, SampleMatrix> centred;
    if (options.centering == Centering::Pooled) {
        centred = center_pooled(*first, *second);
        first = &centred.first;
        second = &centred.second;
    }
    const SampleMatrix& x = *first;
    const SampleMatrix& y = *second;

    const PairSummaries sx(x, sets.pairs);
    const PairSummaries sy(y, sets.pairs);
    const auto wx = within_weights(x.n(), y.n(), options.weighting);
    const auto wy = within_weights(y.n(), x.n(), options.weighting);
    const auto gx = within_group(x, sx, sy, sets, wx, options.inversion, wantStatistic, wantTrace,
                                 "group-1");
    const auto gy = within_group(y, sy, sx, sets, wy, options.inversion, wantStatistic, wantTrace,
                                 "group-2");
    TwoPassResult out;
    if (wantStatistic) {
        out.statistic =
            gx.statistic + gy.statistic - 2.0 * cross_term(x, y, sx, sy, sets, options.inversion);
    }
    out.trace = 0.5 * (gx.trace + gy.trace);
    return out;
}

}  // namespace detail

PooledCovariance pooled_covariance(const PairSummaries& x, const PairSummaries& y) {
    if (x.p() != y.p() || x.pair_count() != y.pair_count()) {
        throw InvalidInput("summaries differ in shape");
    }
    const double total = static_cast<double>(x.n() + y.n()) - 2.0;
    const double w1 = (static_cast<double>(x.n()) - 1.0) / total;
    const double w2 = (static_cast<double>(y.n()) - 1.0) / total;
    PooledCovariance out;
    out.var.resize(x.p());
    out.cov.resize(x.pair_count());
    for (std::size_t j = 0; j < x.p(); ++j) out.var[j] = w1 * x.full_var(j) + w2 * y.full_var(j);
    for (std::size_t k = 0; k < x.pair_count(); ++k) {
        out.cov[k] = w1 * x.full_cov(k) + w2 * y.full_cov(k);
    }
    return out;
}

double statistic_w2(const SampleMatrix& x, const SampleMatrix& y, const InversionPolicy& policy) {
    check_groups(x, y);
    if (x.n() + y.n() < 5 || x.n() < 2 || y.n() < 2) {
        throw InsufficientSample("W2 needs N - 2 >= 3 and two observations per group");
    }
    const ScreeningSets sets = ScreeningSets::all_pairs(x.p());
    const PairSummaries sx(x, sets.pairs);
    const PairSummaries sy(y, sets.pairs);
    const PooledCovariance pooled = pooled_covariance(sx, sy);
    const double total = static_cast<double>(x.n() + y.n()) - 2.0;
    detail::BlockFiller filler(
        sets, policy,
        pooled_floor(sx, (static_cast<double>(x.n()) - 1.0) / total, sy,
                     (static_cast<double>(y.n()) - 1.0) / total, policy.epsRel, "W2"));
    filler.fill([&](std::size_t j) { return pooled.var[j]; },
                [&](std::size_t k) { return pooled.cov[k]; }, "W2", std::nullopt, std::nullopt);
    const Vector d = x.column_means() - y.column_means();
    const double n1 = static_cast<double>(x.n());
    const double n2 = static_cast<double>(y.n());
    return n1 * n2 / (n1 + n2) * projector_quadratic(sets, filler.blocks(), d, d);
}

double statistic_t2(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                    const TwoSampleOptions& options) {
    return detail::two_sample_pass(x, y, sets, options, true, false).statistic;
}

double phi_factor(std::size_t n1, std::size_t n2) {
    if (n1 < 2 || n2 < 2) throw InvalidInput("phi_factor needs n1, n2 >= 2");
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    return 2.0 / (a * (a - 1.0)) + 2.0 / (b * (b - 1.0)) + 4.0 / (a * b);
}

double trace_hat_two(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                     const TwoSampleOptions& options) {
    const double tr = detail::two_sample_pass(x, y, sets, options, false, true).trace;
    if (!(tr > 0.0)) {
        throw DegenerateVariance("trace estimate is not positive (" + std::to_string(tr) +
                                 "); samples too small to calibrate the test");
    }
    return tr;
}

TestOutcome test_two_sample(const SampleMatrix& x, const SampleMatrix& y,
                            const ScreeningSets& sets, const TwoSampleOptions& options) {
    const auto pass = detail::two_sample_pass(x, y, sets, options, true, true);
    if (!(pass.trace > 0.0)) {
        throw DegenerateVariance("trace estimate is not positive (" + std::to_string(pass.trace) +
                                 "); samples too small to calibrate the test");
    }
    TestOutcome out;
    out.statistic = pass.statistic;
    out.traceHat = pass.trace;
    out.z = pass.statistic / std::sqrt(phi_factor(x.n(), y.n()) * pass.trace);
    out.pValue = normal_upper_tail(out.z);
    out.tau0Used = sets.tau0;
    out.nPairs = sets.pairs.size();
    out.nSingles = sets.singles.size();
    return out;
}

TestOutcome test_two_sample(const SampleMatrix& x, const SampleMatrix& y, Tau0Choice tau0,
                            const TwoSampleOptions& options) {
    check_groups(x, y);
    double threshold = 0.0;
    if (tau0.is_auto()) {
        TauSelectConfig cfg;
        cfg.seed = options.seed;
        cfg.inversion = options.inversion;
        cfg.weighting = options.weighting;
        cfg.centering = options.centering;
        threshold = select_tau0(x, y, cfg);
    } else {
        threshold = *tau0.fixed;
    }
    const ScreeningSets sets =
        screen_two_sample(kendall_tau_matrix(x), kendall_tau_matrix(y), x.n(), y.n(), threshold);
    return test_two_sample(x, y, sets, options);
}

double power_two(const Vector& delta, const Matrix& sigma, const ScreeningSets& sets,
                 std::size_t n1, std::size_t n2, double alpha) {
    if (static_cast<std::size_t>(delta.size()) != sets.p) {
        throw InvalidInput("delta length does not match the screening sets");
    }
    const double signal = projector_quadratic(sets, population_blocks(sets, sigma), delta, delta);
    const double scale = std::sqrt(phi_factor(n1, n2) * population_trace(sets, sigma));
    return normal_cdf(-normal_upper_quantile(alpha) + signal / scale);
}

}  // namespace pht
