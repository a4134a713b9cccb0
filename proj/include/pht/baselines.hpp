#pragma once

// Unscaled (UHT) and diagonal (DHT) Hotelling comparators with resampling
// calibration: sign flips around mu0 for one sample, label permutations
// for two samples.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

#include "pht/core_stats.hpp"

namespace pht {

enum class BaselineMethod { UHT, DHT };
enum class Calibration { SignFlip, Permutation };

std::string_view to_string(BaselineMethod m) noexcept;
std::string_view to_string(Calibration c) noexcept;

struct BaselineOutcome {
    double statistic = 0.0;
    double pValue = 1.0;
    BaselineMethod method = BaselineMethod::UHT;
    Calibration calibration = Calibration::Permutation;
    std::size_t nResamples = 0;
};

inline constexpr std::size_t kMinResamples = 99;

/// n ||xbar - mu0||^2
double uht_statistic(const SampleMatrix& x, const Vector& mu0);
/// n sum_j (xbar_j - mu0_j)^2 / s_jj; throws DegenerateVariance on s_jj = 0.
double dht_statistic(const SampleMatrix& x, const Vector& mu0);

/// n1 n2 / N ||xbar - ybar||^2
double uht_statistic_two(const SampleMatrix& x, const SampleMatrix& y);
/// n1 n2 / N sum_j (xbar_j - ybar_j)^2 / s_pooled,jj
double dht_statistic_two(const SampleMatrix& x, const SampleMatrix& y);

using OneSampleStatistic = std::function<double(const SampleMatrix&, const Vector&)>;
using TwoSampleStatistic = std::function<double(const SampleMatrix&, const SampleMatrix&)>;

/// Sign-flip null: rows X_s - mu0 get independent random signs.
/// p = (1 + #{resampled >= observed}) / (nResamples + 1).
double calibrate_sign_flip(const OneSampleStatistic& statistic, const SampleMatrix& x,
                           const Vector& mu0, std::size_t nResamples, std::uint64_t seed,
                           double* observed = nullptr);

/// Label-permutation null over the pooled rows.
double calibrate_permutation(const TwoSampleStatistic& statistic, const SampleMatrix& x,
                             const SampleMatrix& y, std::size_t nResamples, std::uint64_t seed,
                             double* observed = nullptr);

BaselineOutcome calibrate(BaselineMethod method, const SampleMatrix& x, const Vector& mu0,
                          std::size_t nResamples, std::uint64_t seed);
BaselineOutcome calibrate(BaselineMethod method, const SampleMatrix& x, const SampleMatrix& y,
                          std::size_t nResamples, std::uint64_t seed);

}  // namespace pht
