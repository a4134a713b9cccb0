#pragma once

#include <cstdint>
#include <vector>

#include "pht/core_stats.hpp"
#include "pht/screening.hpp"
#include "pht/two_sample.hpp"

namespace pht {

/// Subsampling search for the threshold maximizing the estimated
/// signal-to-noise ratio T / sqrt(tr).
struct TauSelectConfig {
    std::vector<double> grid{0.7, 0.8, 0.9, 1.0};
    std::size_t repetitions = 10;
    /// Subsample size is floor(numerator * n / denominator).
    std::size_t fractionNumerator = 2;
    std::size_t fractionDenominator = 3;
    std::uint64_t seed = 0;
    InversionPolicy inversion;
    PooledWeighting weighting = PooledWeighting::Verbatim;
    Centering centering = Centering::None;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    std::size_t subsample_size(std::size_t n) const;
};

/// T1(tau0) / sqrt(tr) on X - mu0 with sets screened from x at tau0.
double snr_hat_one(const SampleMatrix& x, const Vector& mu0, double tau0);
double snr_hat_one(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                   const InversionPolicy& policy = {});

/// T2(tau0) / sqrt(tr) with the weighted two-sample screening.
double snr_hat_two(const SampleMatrix& x, const SampleMatrix& y, double tau0);
double snr_hat_two(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                   const TwoSampleOptions& options = {});

/// Per-repetition winners, reported for diagnostics.
struct TauSelection {
    double tau0 = 1.0;
    std::vector<double> winners;
};

/// One-sample selection (mu0 is the hypothesis constant, not re-estimated).
TauSelection select_tau0_detailed(const SampleMatrix& x, const Vector& mu0,
                                  const TauSelectConfig& cfg);
/// Two-sample selection.
TauSelection select_tau0_detailed(const SampleMatrix& x, const SampleMatrix& y,
                                  const TauSelectConfig& cfg);

double select_tau0(const SampleMatrix& x, const Vector& mu0, const TauSelectConfig& cfg);
double select_tau0(const SampleMatrix& x, const SampleMatrix& y, const TauSelectConfig& cfg);

}  // namespace pht
