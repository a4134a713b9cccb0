#pragma once

#include <cstddef>
#include <cstdint>

#include "pht/core_stats.hpp"
#include "pht/one_sample.hpp"
#include "pht/screening.hpp"

namespace pht {

/// Weighting of the within-group pooled leave-two-out covariance.
///  Verbatim:         [(n1-2) S1^{(s,t)} + n2 S2] / (N-2)
///  DegreesOfFreedom: [(n1-3) S1^{(s,t)} + (n2-1) S2] / (N-4)
enum class PooledWeighting { Verbatim, DegreesOfFreedom };

/// Location handling before the two-sample statistics are formed.
/// Pooled subtracts the grand mean of both groups from every row.
enum class Centering { None, Pooled };

struct TwoSampleOptions {
    InversionPolicy inversion;
    PooledWeighting weighting = PooledWeighting::Verbatim;
    Centering centering = Centering::None;
    std::uint64_t seed = 0;  ///< used only when tau0 is automatic
};

/// Pooled covariance S12 = [(n1-1) S1 + (n2-1) S2] / (N-2) for the given
/// pairs; var(j) and cov(k) match PairSummaries conventions.
struct PooledCovariance {
    std::vector<double> var;
    std::vector<double> cov;
};
PooledCovariance pooled_covariance(const PairSummaries& x, const PairSummaries& y);

/// W2 = n1 n2 / N (xbar - ybar)' [sum_{i<j} P_ij' S12_ij^{-1} P_ij] (xbar - ybar).
double statistic_w2(const SampleMatrix& x, const SampleMatrix& y,
                    const InversionPolicy& policy = {});

/// Three-term leave-out PHT statistic on the raw data (no centring).
double statistic_t2(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                    const TwoSampleOptions& options = {});

/// 2/(n1(n1-1)) + 2/(n2(n2-1)) + 4/(n1 n2)
double phi_factor(std::size_t n1, std::size_t n2);

/// Average of the two within-group U-statistic trace estimates.
/// Throws DegenerateVariance when <= 0.
double trace_hat_two(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                     const TwoSampleOptions& options = {});

/// z = T2 / sqrt(phi(n1, n2) tr), upper-tail p-value.
TestOutcome test_two_sample(const SampleMatrix& x, const SampleMatrix& y, Tau0Choice tau0,
                            const TwoSampleOptions& options = {});

TestOutcome test_two_sample(const SampleMatrix& x, const SampleMatrix& y,
                            const ScreeningSets& sets, const TwoSampleOptions& options = {});

/// Phi(-z_alpha + delta' P_O delta / sqrt(phi(n1, n2) tr)).
double power_two(const Vector& delta, const Matrix& sigma, const ScreeningSets& sets,
                 std::size_t n1, std::size_t n2, double alpha);

namespace detail {

struct TwoPassResult {
    double statistic = 0.0;
    double trace = 0.0;
};

/// One sweep producing T2 and the trace estimate. The groups are put in a
/// canonical order first, so swapping x and y gives bit-identical output.
TwoPassResult two_sample_pass(const SampleMatrix& x, const SampleMatrix& y,
                              const ScreeningSets& sets, const TwoSampleOptions& options,
                              bool wantStatistic, bool wantTrace);

/// Rows of both samples minus their grand mean.
std::pair<SampleMatrix, SampleMatrix> center_pooled(const SampleMatrix& x, const SampleMatrix& y);

}  // namespace detail

}  // namespace pht
