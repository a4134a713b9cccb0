#pragma once

// Numerical substrate shared by every test: validated data matrices,
// leave-k-out covariance downdating, 2x2 block inversion and Kendall's tau.

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pht/errors.hpp"

namespace pht {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A covariate pair, always stored with i < j.
struct Pair {
    std::size_t i = 0;
    std::size_t j = 0;
    friend bool operator==(const Pair&, const Pair&) = default;
    friend auto operator<=>(const Pair&, const Pair&) = default;
};

/// Two distinct observations (rows) left out of a covariance estimate.
struct Exclusion {
    std::size_t s = 0;
    std::size_t t = 0;
};

/// n x p data matrix, rows are observations and columns covariates.
/// All entries are finite.
class SampleMatrix {
public:
    SampleMatrix() = default;
    explicit SampleMatrix(Matrix values);

    std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    double operator()(std::size_t s, std::size_t j) const { return values_(s, j); }
    const Matrix& values() const noexcept { return values_; }
    auto row(std::size_t s) const { return values_.row(static_cast<Eigen::Index>(s)); }
    auto col(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

    Vector column_means() const;
    SampleMatrix select_rows(std::span<const std::size_t> rows) const;
    /// Rows shifted by -shift (each row minus the vector).
    SampleMatrix shifted(const Vector& shift) const;

private:
    Matrix values_;
};

/// Symmetric 2x2 block [a11 a12; a12 a22].
struct Cov2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    double det() const noexcept { return a11 * a22 - a12 * a12; }
    double trace() const noexcept { return a11 + a22; }
    Cov2 operator*(double c) const noexcept { return {a11 * c, a12 * c, a22 * c}; }
    Cov2 operator+(const Cov2& o) const noexcept { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
};

inline constexpr double kDefaultEpsRel = 1e-12;

/// Singularity handling for covariance blocks. Jitter adds
/// epsRel * trace / 2 to the diagonal before retrying; off by default since
/// it changes the statistic's null law.
struct InversionPolicy {
    double epsRel = kDefaultEpsRel;
    bool jitter = false;
};

/// True when det > epsRel * a11 * a22 and both diagonals are positive.
bool cov2_invertible(const Cov2& c, double epsRel = kDefaultEpsRel) noexcept;

/// Closed-form inverse of a 2x2 covariance block. Throws SingularBlock.
Cov2 invert_cov2(const Cov2& c, double epsRel = kDefaultEpsRel);

/// Inverse honouring the jitter fallback; returns false when still singular.
bool try_invert_cov2(const Cov2& c, const InversionPolicy& policy, Cov2& out) noexcept;

/// Per-column and per-pair sums of the column-centred data. Downdating
/// these gives leave-one-out and leave-two-out (co)variances in O(1).
/// Centring at the full-sample mean keeps the downdates well conditioned.
class PairSummaries {
public:
    PairSummaries(const SampleMatrix& x, std::span<const Pair> pairs);

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return static_cast<std::size_t>(centered_.cols()); }
    std::size_t pair_count() const noexcept { return pairs_.size(); }
    const Pair& pair(std::size_t k) const { return pairs_[k]; }

    /// Index of pair (i,j) (order-insensitive); throws InvalidInput if absent.
    std::size_t pair_index(std::size_t i, std::size_t j) const;

    double mean(std::size_t j) const noexcept { return mean_[j]; }
    double full_var(std::size_t j) const noexcept;
    double full_cov(std::size_t k) const noexcept;

    // Leave-one-out (denominator n-2) and leave-two-out (denominator n-3).
    double var_excluding(std::size_t j, std::size_t s) const noexcept;
    double var_excluding(std::size_t j, std::size_t s, std::size_t t) const noexcept;
    double cov_excluding(std::size_t k, std::size_t s) const noexcept;
    double cov_excluding(std::size_t k, std::size_t s, std::size_t t) const noexcept;

    /// (n * mean_j - x_sj - x_tj) / (n - 2)
    double mean_excluding(std::size_t j, std::size_t s, std::size_t t) const noexcept;

    /// True when every observation of column j is identical.
    bool constant_column(std::size_t j) const noexcept { return constant_[static_cast<std::size_t>(j)]; }

private:
    static std::uint64_t key(std::size_t i, std::size_t j) noexcept;

    std::size_t n_;
    Matrix centered_;
    std::vector<double> mean_;
    std::vector<double> colSum_;
    std::vector<double> sumSq_;
    std::vector<bool> constant_;
    std::vector<Pair> pairs_;
    std::vector<double> crossSum_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Sample covariance of columns pair.i, pair.j over the n-2 rows kept after
/// dropping excluded.s and excluded.t. pair.i == pair.j gives the variance
/// on the diagonal. Throws InsufficientSample when n - 2 < 3.
Cov2 leave2out_cov2(const PairSummaries& summ, Pair pair, Exclusion excluded);

/// Mean of column j without rows s and t.
double leave2out_mean(const PairSummaries& summ, std::size_t j, Exclusion excluded);

/// p x p Kendall tau-a matrix: (concordant - discordant) / (n(n-1)/2).
/// Ties contribute zero. Symmetric with unit diagonal.
class TauMatrix {
public:
    TauMatrix() = default;
    explicit TauMatrix(Matrix entries);

    std::size_t p() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    double r(std::size_t i, std::size_t j) const { return entries_(i, j); }
    double abs(std::size_t i, std::size_t j) const;
    const Matrix& entries() const noexcept { return entries_; }

private:
    Matrix entries_;
};

TauMatrix kendall_tau_matrix(const SampleMatrix& x);

/// Population Kendall tau of a Gaussian law with covariance sigma:
/// (2/pi) asin(rho_ij).
TauMatrix gaussian_tau_matrix(const Matrix& sigma);

/// Standard normal helpers.
double normal_cdf(double z) noexcept;
double normal_upper_tail(double z) noexcept;
/// Upper-alpha quantile z_alpha (Phi(z_alpha) = 1 - alpha).
double normal_upper_quantile(double alpha);

}  // namespace pht
