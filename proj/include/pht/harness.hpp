#pragma once

// Monte Carlo engine for size and power studies. Replicate r draws its data
// from substream_seed(seed, r), so a report depends only on the config and
// never on the worker count.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pht/datagen.hpp"
#include "pht/one_sample.hpp"
#include "pht/two_sample.hpp"

namespace pht {

enum class Method { PHT, UHT, DHT };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view s);

struct SimConfig {
    std::size_t n1 = 30;
    std::size_t n2 = 25;
    std::size_t p = 100;
    CovModel model;  ///< model.p is overwritten by p
    InnovationDist dist;
    MeanSpec mean;
    double alpha = 0.05;
    std::size_t reps = 1000;
    Tau0Choice tau0 = Tau0Choice::value(0.8);
    std::vector<Method> methods{Method::PHT};
    std::uint64_t seed = 1;
    std::size_t nResamples = 499;
    PooledWeighting weighting = PooledWeighting::Verbatim;
    Centering centering = Centering::None;

    /// Throws ConfigError naming the field. alpha may equal 1 (always reject).
    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct MethodSummary {
    Method method = Method::PHT;
    std::size_t reps = 0;
    std::size_t rejections = 0;
    std::size_t failures = 0;  ///< replicates where the test raised a numerical error
    double rate = 0.0;
    double mcSe = 0.0;         ///< sqrt(rate (1 - rate) / reps)
    std::vector<std::uint8_t> rejected;
    std::vector<double> pValues;
    std::vector<double> z;        ///< PHT only
    std::vector<double> tau0Used; ///< PHT only

    bool operator==(const MethodSummary&) const = default;
};

struct SimReport {
    SimConfig config;
    std::vector<MethodSummary> methods;
    double wallSeconds = 0.0;

    const MethodSummary& method(Method m) const;
    bool operator==(const SimReport&) const = default;
};

struct RunOptions {
    std::size_t threads = 1;
};

double mc_standard_error(double rate, std::size_t reps) noexcept;

/// Rejection rates under the configured design; meanSpec.kappa must be 0.
SimReport run_size(const SimConfig& config, const RunOptions& run = {});

/// One report per kappa. Innovations are shared across the grid (common
/// random numbers); only the mean changes.
std::vector<SimReport> run_power(const SimConfig& config, const std::vector<double>& kappaGrid,
                                 const RunOptions& run = {});

/// Any design (null or alternative) without the kappa = 0 check.
SimReport run_design(const SimConfig& config, const RunOptions& run = {});

/// Resampling study on two observed pools: null mimicry draws both
/// subclasses from the pooled rows, alternative mimicry draws one subclass
/// from each pool.
struct ResampleConfig {
    std::size_t n1 = 30;
    std::size_t n2 = 17;
    std::size_t reps = 1000;
    double alpha = 0.05;
    Tau0Choice tau0 = Tau0Choice::value(0.8);
    std::vector<Method> methods{Method::PHT};
    std::uint64_t seed = 1;
    std::size_t nResamples = 499;
    Centering centering = Centering::Pooled;

    void validate() const;
};

struct PositiveRateReport {
    ResampleConfig config;
    std::vector<MethodSummary> falsePositive;
    std::vector<MethodSummary> truePositive;
    double wallSeconds = 0.0;
};

PositiveRateReport run_false_true_positive(const SampleMatrix& xPool, const SampleMatrix& yPool,
                                           const ResampleConfig& config, const RunOptions& run = {});

/// Runs body(i) for i in [0, count) on `threads` workers; rethrows the first
/// exception after all workers finish.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body);

}  // namespace pht

#include "pht/detail/parallel_for.hpp"
