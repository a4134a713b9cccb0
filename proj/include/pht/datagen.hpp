#pragma once

// Simulation designs: structured covariance matrices, normal and
// standardized double-Pareto innovations, sparse mean alternatives.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "pht/core_stats.hpp"
#include "pht/random.hpp"

namespace pht {

enum class CovKind {
    AR,             ///< R = rho^{|i-j|}
    AlternatingAR,  ///< R = (-rho)^{|i-j|}
    BlockCS,        ///< block diagonal, blocks rho^{I(i != j)}
    Diagonal,       ///< R = I
};

std::string_view to_string(CovKind k) noexcept;
CovKind cov_kind_from_string(std::string_view s);

/// How the per-coordinate scales d_ii are chosen.
enum class ScaleMode {
    Uniform,  ///< d_ii ~ U[0.5, 1.5], drawn once from the experiment seed
    Unit,     ///< d_ii = 1
};

struct CovModel {
    CovKind kind = CovKind::Diagonal;
    std::size_t p = 1;
    double rho = 0.9;
    std::size_t blockSize = 5;
    ScaleMode scale = ScaleMode::Uniform;

    bool operator==(const CovModel&) const = default;

    /// Throws ConfigError for parameterizations that are not SPD.
    void validate() const;
};

/// Sigma = diag(d) R diag(d), together with its symmetric square root.
struct Covariance {
    Matrix sigma;
    Matrix root;
    Vector d;
    Matrix correlation;
};

Covariance build_sigma(const CovModel& model, std::uint64_t seed);

enum class InnovationKind { StandardNormal, DoublePareto };

std::string_view to_string(InnovationKind k) noexcept;
InnovationKind innovation_from_string(std::string_view s);

struct InnovationDist {
    InnovationKind kind = InnovationKind::StandardNormal;
    double a = 16.5;
    double b = 8.0;

    bool operator==(const InnovationDist&) const = default;

    /// Variance of the unstandardized draw, 2 b^2 / ((a-1)(a-2)).
    double raw_variance() const noexcept;
};

/// Sparse alternative: the first floor(beta p) coordinates are kappa * delta_j
/// with delta_j ~ N(1.5, 1); the rest are exactly zero.
struct MeanSpec {
    double kappa = 0.0;
    double beta = 0.0;

    bool operator==(const MeanSpec&) const = default;

    std::size_t nonzero(std::size_t p) const noexcept;
    Vector draw(std::size_t p, Rng& rng) const;
};

/// One double-Pareto draw U V (unstandardized), U by inverse CDF.
double draw_double_pareto(double a, double b, Rng& rng);

/// n draws of U V / c0 with c0^2 the raw variance; unit variance.
std::vector<double> sample_double_pareto(std::size_t n, std::uint64_t seed,
                                         const InnovationDist& dist = {
                                             InnovationKind::DoublePareto});

/// n x p matrix of i.i.d. unit-variance innovations.
Matrix draw_innovations(const InnovationDist& dist, std::size_t n, std::size_t p, Rng& rng);

/// n rows of Sigma^{1/2} Z + mean.
SampleMatrix generate_sample(const Covariance& cov, const InnovationDist& dist, const Vector& mean,
                             std::size_t n, Rng& rng);

/// Group 1 has mean zero, group 2 the mean drawn from meanSpec (redrawn per
/// call). Deterministic in seed.
std::pair<SampleMatrix, SampleMatrix> generate_two_sample(const Covariance& cov,
                                                          const InnovationDist& dist,
                                                          const MeanSpec& meanSpec, std::size_t n1,
                                                          std::size_t n2, std::uint64_t seed);

}  // namespace pht
