#include "pht/core_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace pht {

SingularBlock::SingularBlock(BlockLocation where)
    : Error([&] {
          std::string msg = where.i == where.j
                                ? "singular variance for coordinate " + std::to_string(where.i)
                                : "singular covariance block for pair (" + std::to_string(where.i) +
                                      ", " + std::to_string(where.j) + ")";
          if (where.s && where.t) {
              msg += " excluding observations (" + std::to_string(*where.s) + ", " +
                     std::to_string(*where.t) + ")";
          }
          if (!where.term.empty()) msg += " in " + where.term;
          return msg;
      }()),
      where_(std::move(where)) {}

SampleMatrix::SampleMatrix(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) {
        for (Eigen::Index s = 0; s < values_.rows(); ++s) {
            for (Eigen::Index j = 0; j < values_.cols(); ++j) {
                if (!std::isfinite(values_(s, j))) {
                    throw InvalidInput("non-finite value at observation " + std::to_string(s) +
                                       ", coordinate " + std::to_string(j));
                }
            }
        }
    }
}

Vector SampleMatrix::column_means() const {
    if (values_.rows() == 0) return Vector::Zero(values_.cols());
    return values_.colwise().mean().transpose();
}

SampleMatrix SampleMatrix::select_rows(std::span<const std::size_t> rows) const {
    Matrix out(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= n()) throw InvalidInput("row index out of range");
        out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(rows[r]));
    }
    SampleMatrix result;
    result.values_ = std::move(out);
    return result;
}

SampleMatrix SampleMatrix::shifted(const Vector& shift) const {
    if (static_cast<std::size_t>(shift.size()) != p()) {
        throw InvalidInput("shift vector has length " + std::to_string(shift.size()) +
                           ", expected " + std::to_string(p()));
    }
    return SampleMatrix(values_.rowwise() - shift.transpose());
}

bool cov2_invertible(const Cov2& c, double epsRel) noexcept {
    if (!(c.a11 > 0.0) || !(c.a22 > 0.0)) return false;
    return c.det() > epsRel * c.a11 * c.a22;
}

Cov2 invert_cov2(const Cov2& c, double epsRel) {
    if (!cov2_invertible(c, epsRel)) throw SingularBlock(BlockLocation{0, 1, {}, {}, "invert_cov2"});
    const double d = c.det();
    return {c.a22 / d, -c.a12 / d, c.a11 / d};
}

bool try_invert_cov2(const Cov2& c, const InversionPolicy& policy, Cov2& out) noexcept {
    Cov2 m = c;
    if (!cov2_invertible(m, policy.epsRel)) {
        if (!policy.jitter) return false;
        const double bump = policy.epsRel * m.trace() / 2.0;
        m.a11 += bump;
        m.a22 += bump;
        if (!cov2_invertible(m, policy.epsRel)) return false;
    }
    const double d = m.det();
    out = {m.a22 / d, -m.a12 / d, m.a11 / d};
    return true;
}

// ---------------------------------------------------------------- summaries

PairSummaries::PairSummaries(const SampleMatrix& x, std::span<const Pair> pairs)
    : n_(x.n()), pairs_(pairs.begin(), pairs.end()) {
    const std::size_t p = x.p();
    const Vector means = x.column_means();
    centered_ = x.values().rowwise() - means.transpose();
    mean_.assign(means.data(), means.data() + p);
    colSum_.resize(p);
    sumSq_.resize(p);
    constant_.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = centered_.col(static_cast<Eigen::Index>(j));
        colSum_[j] = col.sum();
        sumSq_[j] = col.squaredNorm();
        const auto raw = x.col(j);
        constant_[j] = n_ == 0 || raw.maxCoeff() == raw.minCoeff();
    }
    crossSum_.resize(pairs_.size());
    index_.reserve(pairs_.size());
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
        Pair& pr = pairs_[k];
        if (pr.i > pr.j) std::swap(pr.i, pr.j);
        if (pr.j >= p || pr.i == pr.j) throw InvalidInput("invalid pair in summaries");
        crossSum_[k] = centered_.col(static_cast<Eigen::Index>(pr.i))
                           .dot(centered_.col(static_cast<Eigen::Index>(pr.j)));
        index_.emplace(key(pr.i, pr.j), k);
    }
}

std::uint64_t PairSummaries::key(std::size_t i, std::size_t j) noexcept {
    if (i > j) std::swap(i, j);
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

std::size_t PairSummaries::pair_index(std::size_t i, std::size_t j) const {
    const auto it = index_.find(key(i, j));
    if (it == index_.end()) {
        throw InvalidInput("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") has no summary");
    }
    return it->second;
}

double PairSummaries::full_var(std::size_t j) const noexcept {
    const double m = static_cast<double>(n_);
    return (sumSq_[j] - colSum_[j] * colSum_[j] / m) / (m - 1.0);
}

double PairSummaries::full_cov(std::size_t k) const noexcept {
    const Pair& pr = pairs_[k];
    const double m = static_cast<double>(n_);
    return (crossSum_[k] - colSum_[pr.i] * colSum_[pr.j] / m) / (m - 1.0);
}

double PairSummaries::var_excluding(std::size_t j, std::size_t s) const noexcept {
    const auto jj = static_cast<Eigen::Index>(j);
    const double xs = centered_(static_cast<Eigen::Index>(s), jj);
    const double m = static_cast<double>(n_ - 1);
    const double sx = colSum_[j] - xs;
    return (sumSq_[j] - xs * xs - sx * sx / m) / (m - 1.0);
}

double PairSummaries::var_excluding(std::size_t j, std::size_t s, std::size_t t) const noexcept {
    const auto jj = static_cast<Eigen::Index>(j);
    const double xs = centered_(static_cast<Eigen::Index>(s), jj);
    const double xt = centered_(static_cast<Eigen::Index>(t), jj);
    const double m = static_cast<double>(n_ - 2);
    const double sx = colSum_[j] - xs - xt;
    return (sumSq_[j] - xs * xs - xt * xt - sx * sx / m) / (m - 1.0);
}

double PairSummaries::cov_excluding(std::size_t k, std::size_t s) const noexcept {
    const Pair& pr = pairs_[k];
    const auto ss = static_cast<Eigen::Index>(s);
    const double xi = centered_(ss, static_cast<Eigen::Index>(pr.i));
    const double xj = centered_(ss, static_cast<Eigen::Index>(pr.j));
    const double m = static_cast<double>(n_ - 1);
    const double si = colSum_[pr.i] - xi;
    const double sj = colSum_[pr.j] - xj;
    return (crossSum_[k] - xi * xj - si * sj / m) / (m - 1.0);
}

double PairSummaries::cov_excluding(std::size_t k, std::size_t s, std::size_t t) const noexcept {
    const Pair& pr = pairs_[k];
    const auto ss = static_cast<Eigen::Index>(s);
    const auto tt = static_cast<Eigen::Index>(t);
    const auto ii = static_cast<Eigen::Index>(pr.i);
    const auto jj = static_cast<Eigen::Index>(pr.j);
    const double xsi = centered_(ss, ii), xsj = centered_(ss, jj);
    const double xti = centered_(tt, ii), xtj = centered_(tt, jj);
    const double m = static_cast<double>(n_ - 2);
    const double si = colSum_[pr.i] - xsi - xti;
    const double sj = colSum_[pr.j] - xsj - xtj;
    return (crossSum_[k] - xsi * xsj - xti * xtj - si * sj / m) / (m - 1.0);
}

double PairSummaries::mean_excluding(std::size_t j, std::size_t s, std::size_t t) const noexcept {
    const auto jj = static_cast<Eigen::Index>(j);
    const double xs = centered_(static_cast<Eigen::Index>(s), jj);
    const double xt = centered_(static_cast<Eigen::Index>(t), jj);
    return mean_[j] + (colSum_[j] - xs - xt) / static_cast<double>(n_ - 2);
}

Cov2 leave2out_cov2(const PairSummaries& summ, Pair pair, Exclusion excluded) {
    if (summ.n() < 5) {
        throw InsufficientSample("leave-two-out covariance needs n - 2 >= 3, got n = " +
                                 std::to_string(summ.n()));
    }
    if (excluded.s == excluded.t || excluded.s >= summ.n() || excluded.t >= summ.n()) {
        throw InvalidInput("excluded observations must be distinct and in range");
    }
    const auto [s, t] = excluded;
    if (pair.i == pair.j) {
        const double v = summ.var_excluding(pair.i, s, t);
        return {v, v, v};
    }
    const std::size_t k = summ.pair_index(pair.i, pair.j);
    const Pair& stored = summ.pair(k);
    return {summ.var_excluding(stored.i, s, t), summ.cov_excluding(k, s, t),
            summ.var_excluding(stored.j, s, t)};
}

double leave2out_mean(const PairSummaries& summ, std::size_t j, Exclusion excluded) {
    if (summ.n() < 3) throw InsufficientSample("leave-two-out mean needs n >= 3");
    if (excluded.s == excluded.t) throw InvalidInput("excluded observations must be distinct");
    return summ.mean_excluding(j, excluded.s, excluded.t);
}

// ---------------------------------------------------------------- kendall

TauMatrix::TauMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw InvalidInput("tau matrix must be square");
}

double TauMatrix::abs(std::size_t i, std::size_t j) const { return std::fabs(entries_(i, j)); }

TauMatrix kendall_tau_matrix(const SampleMatrix& x) {
    const std::size_t n = x.n();
    const std::size_t p = x.p();
    if (n < 2) throw InvalidInput("Kendall tau needs at least 2 observations");

    // Sign of every observation pair per column; tau_ij is then a dot product.
    const std::size_t npairs = n * (n - 1) / 2;
    std::vector<std::int8_t> signs(npairs * p);
    for (std::size_t j = 0; j < p; ++j) {
        std::int8_t* out = signs.data() + j * npairs;
        const auto col = x.col(j);
        std::size_t k = 0;
        for (std::size_t a = 0; a + 1 < n; ++a) {
            const double xa = col(static_cast<Eigen::Index>(a));
            for (std::size_t b = a + 1; b < n; ++b) {
                const double d = col(static_cast<Eigen::Index>(b)) - xa;
                out[k++] = static_cast<std::int8_t>((d > 0.0) - (d < 0.0));
            }
        }
    }

    Matrix r = Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    const double denom = static_cast<double>(npairs);
    for (std::size_t i = 0; i < p; ++i) {
        const std::int8_t* si = signs.data() + i * npairs;
        for (std::size_t j = i + 1; j < p; ++j) {
            const std::int8_t* sj = signs.data() + j * npairs;
            std::int32_t acc = 0;
            for (std::size_t k = 0; k < npairs; ++k) acc += si[k] * sj[k];
            const double v = static_cast<double>(acc) / denom;
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return TauMatrix(std::move(r));
}

TauMatrix gaussian_tau_matrix(const Matrix& sigma) {
    const Eigen::Index p = sigma.rows();
    Matrix r = Matrix::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const double rho = sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
            const double tau = 2.0 / std::numbers::pi * std::asin(std::clamp(rho, -1.0, 1.0));
            r(i, j) = tau;
            r(j, i) = tau;
        }
    }
    return TauMatrix(std::move(r));
}

// ---------------------------------------------------------------- normal

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper_tail(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_upper_quantile(double alpha) {
    if (alpha >= 1.0) return -std::numeric_limits<double>::infinity();
    if (alpha <= 0.0) return std::numeric_limits<double>::infinity();
    const boost::math::normal standard;
    return boost::math::quantile(boost::math::complement(standard, alpha));
}

}  // namespace pht
