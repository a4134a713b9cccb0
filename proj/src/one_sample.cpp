#include "pht/one_sample.hpp"

#include <cmath>
#include <string>

#include "block_filler.hpp"
#include "pht/tau_select.hpp"

namespace pht {

bool TestOutcome::rejects(double alpha) const {
    if (alpha >= 1.0) return true;
    return z > normal_upper_quantile(alpha);
}

namespace {

void check_mu0(const SampleMatrix& x, const Vector& mu0) {
    if (static_cast<std::size_t>(mu0.size()) != x.p()) {
        throw InvalidInput("mu0 has length " + std::to_string(mu0.size()) + " but data has " +
                           std::to_string(x.p()) + " coordinates");
    }
}

void check_sets(const SampleMatrix& x, const ScreeningSets& sets) {
    if (sets.p != x.p()) throw InvalidInput("screening sets do not match data dimension");
}

std::vector<double> one_sample_floor(const PairSummaries& summ, double epsRel) {
    std::vector<double> floor(summ.p());
    for (std::size_t j = 0; j < summ.p(); ++j) {
        if (summ.constant_column(j)) {
            throw SingularBlock(BlockLocation{j, j, {}, {}, "constant coordinate"});
        }
        floor[j] = epsRel * summ.full_var(j);
    }
    return floor;
}

}  // namespace

namespace detail {

PassResult one_sample_pass(const SampleMatrix& y, const ScreeningSets& sets,
                           const InversionPolicy& policy, bool wantTrace) {
    check_sets(y, sets);
    const std::size_t n = y.n();
    const std::size_t p = y.p();
    if (n < 5) {
        throw InsufficientSample("leave-two-out statistics need n >= 5, got n = " +
                                 std::to_string(n));
    }
    const PairSummaries summ(y, sets.pairs);
    BlockFiller filler(sets, policy, one_sample_floor(summ, policy.epsRel));

    Vector u(static_cast<Eigen::Index>(p));
    Vector v(static_cast<Eigen::Index>(p));
    Vector cs(static_cast<Eigen::Index>(p));
    Vector ct(static_cast<Eigen::Index>(p));
    double statSum = 0.0;
    double traceSum = 0.0;
    for (std::size_t s = 0; s + 1 < n; ++s) {
        u = y.row(s).transpose();
        for (std::size_t t = s + 1; t < n; ++t) {
            filler.fill([&](std::size_t j) { return summ.var_excluding(j, s, t); },
                        [&](std::size_t k) { return summ.cov_excluding(k, s, t); }, "one-sample",
                        s, t);
            const ProjectorBlocks& blocks = filler.blocks();
            v = y.row(t).transpose();
            statSum += projector_quadratic(sets, blocks, u, v);
            if (wantTrace) {
                for (std::size_t j = 0; j < p; ++j) {
                    const double m = summ.mean_excluding(j, s, t);
                    const auto jj = static_cast<Eigen::Index>(j);
                    cs(jj) = u(jj) - m;
                    ct(jj) = v(jj) - m;
                }
                traceSum += projector_quadratic(sets, blocks, cs, v) *
                            projector_quadratic(sets, blocks, ct, u);
            }
        }
    }
    // Each unordered pair stands for (s,t) and (t,s).
    const double norm = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    return {statSum * norm, traceSum * norm};
}

}  // namespace detail

double statistic_w1(const SampleMatrix& x, const Vector& mu0, const InversionPolicy& policy) {
    check_mu0(x, mu0);
    const std::size_t n = x.n();
    const std::size_t p = x.p();
    if (n < 4) throw InsufficientSample("W1 needs n >= 4");
    const ScreeningSets sets = ScreeningSets::all_pairs(p);
    const PairSummaries summ(x, sets.pairs);
    detail::BlockFiller filler(sets, policy, one_sample_floor(summ, policy.epsRel));
    filler.fill([&](std::size_t j) { return summ.full_var(j); },
                [&](std::size_t k) { return summ.full_cov(k); }, "W1", std::nullopt,
                std::nullopt);
    const Vector d = x.column_means() - mu0;
    return static_cast<double>(n) * projector_quadratic(sets, filler.blocks(), d, d);
}

double statistic_t1(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                    const InversionPolicy& policy) {
    check_mu0(x, mu0);
    return detail::one_sample_pass(x.shifted(mu0), sets, policy, false).statistic;
}

double trace_hat_one(const SampleMatrix& x, const ScreeningSets& sets,
                     const InversionPolicy& policy) {
    const double tr = detail::one_sample_pass(x, sets, policy, true).trace;
    if (!(tr > 0.0)) {
        throw DegenerateVariance("trace estimate is not positive (" + std::to_string(tr) +
                                 "); sample too small to calibrate the test");
    }
    return tr;
}

TestOutcome test_one_sample(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                            const InversionPolicy& policy) {
    check_mu0(x, mu0);
    const auto pass = detail::one_sample_pass(x.shifted(mu0), sets, policy, true);
    if (!(pass.trace > 0.0)) {
        throw DegenerateVariance("trace estimate is not positive (" + std::to_string(pass.trace) +
                                 "); sample too small to calibrate the test");
    }
    const double n = static_cast<double>(x.n());
    TestOutcome out;
    out.statistic = pass.statistic;
    out.traceHat = pass.trace;
    out.z = pass.statistic / std::sqrt(2.0 * pass.trace / (n * n));
    out.pValue = normal_upper_tail(out.z);
    out.tau0Used = sets.tau0;
    out.nPairs = sets.pairs.size();
    out.nSingles = sets.singles.size();
    return out;
}

TestOutcome test_one_sample(const SampleMatrix& x, const Vector& mu0, Tau0Choice tau0,
                            const OneSampleOptions& options) {
    check_mu0(x, mu0);
    double threshold = 0.0;
    if (tau0.is_auto()) {
        TauSelectConfig cfg;
        cfg.seed = options.seed;
        cfg.inversion = options.inversion;
        threshold = select_tau0(x, mu0, cfg);
    } else {
        threshold = *tau0.fixed;
    }
    const ScreeningSets sets = screen(kendall_tau_matrix(x), threshold);
    return test_one_sample(x, mu0, sets, options.inversion);
}

double population_trace(const ScreeningSets& sets, const Matrix& sigma) {
    const Matrix po = projector_dense(sets, population_blocks(sets, sigma));
    const Matrix m = po * sigma;
    // tr(M M) = sum_ij M_ij M_ji
    return m.cwiseProduct(m.transpose()).sum();
}

double power_one(const Vector& delta, const Matrix& sigma, const ScreeningSets& sets,
                 std::size_t n, double alpha) {
    if (static_cast<std::size_t>(delta.size()) != sets.p) {
        throw InvalidInput("delta length does not match the screening sets");
    }
    const double signal = projector_quadratic(sets, population_blocks(sets, sigma), delta, delta);
    const double nn = static_cast<double>(n);
    const double scale = std::sqrt(2.0 * population_trace(sets, sigma) / (nn * nn));
    return normal_cdf(-normal_upper_quantile(alpha) + signal / scale);
}

}  // namespace pht
