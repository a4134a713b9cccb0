#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "pht/core_stats.hpp"
#include "pht/screening.hpp"

namespace pht {

/// Result of a standardized PHT test.
struct TestOutcome {
    double statistic = 0.0;  ///< T1 or T2
    double traceHat = 0.0;   ///< estimate of tr(Lambda_1^2)
    double z = 0.0;
    double pValue = 1.0;     ///< upper tail, 1 - Phi(z)
    double tau0Used = 1.0;
    std::size_t nPairs = 0;
    std::size_t nSingles = 0;

    /// One-sided rejection {z > z_alpha}; alpha = 1 always rejects.
    bool rejects(double alpha) const;
    bool operator==(const TestOutcome&) const = default;
};

/// Threshold choice for a test: a fixed value in [0, 1] or data-driven.
struct Tau0Choice {
    std::optional<double> fixed;  // nullopt = auto
    static Tau0Choice automatic() { return {}; }
    static Tau0Choice value(double tau0) { return {tau0}; }
    bool is_auto() const noexcept { return !fixed.has_value(); }
    bool operator==(const Tau0Choice&) const = default;
};

/// W1 = n (xbar - mu0)' [sum_{i<j} P_ij' S_ij^{-1} P_ij] (xbar - mu0) over
/// all pairs with the full-sample covariance.
double statistic_w1(const SampleMatrix& x, const Vector& mu0,
                    const InversionPolicy& policy = {});

/// Leave-two-out PHT statistic
///   T1 = 1/(n(n-1)) sum_{s != t} (X_s - mu0)' P^{(s,t)} (X_t - mu0).
double statistic_t1(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                    const InversionPolicy& policy = {});

/// U-statistic estimate of tr(Lambda_1^2) on the data as given. Each summand
/// multiplies two full quadratic forms. Throws DegenerateVariance when <= 0.
double trace_hat_one(const SampleMatrix& x, const ScreeningSets& sets,
                     const InversionPolicy& policy = {});

struct OneSampleOptions {
    InversionPolicy inversion;
    std::uint64_t seed = 0;  ///< used only when tau0 is automatic
};

/// Full one-sample test: Kendall screening at tau0 (or the data-driven
/// threshold), z = T1 / sqrt(2 tr / n^2), upper-tail p-value. The trace is
/// estimated on X - mu0, so under H0 the data it sees has mean zero.
TestOutcome test_one_sample(const SampleMatrix& x, const Vector& mu0, Tau0Choice tau0,
                            const OneSampleOptions& options = {});

/// Same test with precomputed screening sets.
TestOutcome test_one_sample(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                            const InversionPolicy& policy = {});

/// tr(P_O Sigma P_O Sigma) for the population projector of sets.
double population_trace(const ScreeningSets& sets, const Matrix& sigma);

/// Asymptotic power Phi(-z_alpha + delta' P_O delta / sqrt(2 tr / n^2)).
double power_one(const Vector& delta, const Matrix& sigma, const ScreeningSets& sets,
                 std::size_t n, double alpha);

namespace detail {

struct PassResult {
    double statistic = 0.0;
    double trace = 0.0;
};

/// Single sweep over s < t producing T1 (mu0 = 0) and the raw trace sum.
PassResult one_sample_pass(const SampleMatrix& y, const ScreeningSets& sets,
                           const InversionPolicy& policy, bool wantTrace);

}  // namespace detail

}  // namespace pht
