#include "pht/datagen.hpp"

#include <cmath>
#include <string>

namespace pht {

namespace {
constexpr std::uint64_t kScaleStream = 0x5ca1e;
}

std::string_view to_string(CovKind k) noexcept {
    switch (k) {
        case CovKind::AR: return "ar";
        case CovKind::AlternatingAR: return "alternating-ar";
        case CovKind::BlockCS: return "block-cs";
        case CovKind::Diagonal: return "diagonal";
    }
    return "diagonal";
}

CovKind cov_kind_from_string(std::string_view s) {
    if (s == "ar") return CovKind::AR;
    if (s == "alternating-ar") return CovKind::AlternatingAR;
    if (s == "block-cs") return CovKind::BlockCS;
    if (s == "diagonal") return CovKind::Diagonal;
    throw ConfigError("model", "unknown covariance model '" + std::string(s) + "'");
}

std::string_view to_string(InnovationKind k) noexcept {
    return k == InnovationKind::StandardNormal ? "normal" : "double-pareto";
}

InnovationKind innovation_from_string(std::string_view s) {
    if (s == "normal") return InnovationKind::StandardNormal;
    if (s == "double-pareto") return InnovationKind::DoublePareto;
    throw ConfigError("dist", "unknown innovation distribution '" + std::string(s) + "'");
}

void CovModel::validate() const {
    if (p < 1) throw ConfigError("p", "must be at least 1");
    switch (kind) {
        case CovKind::AR:
        case CovKind::AlternatingAR:
            if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho", "must lie in (-1, 1)");
            break;
        case CovKind::BlockCS: {
            if (blockSize < 1) throw ConfigError("block_size", "must be at least 1");
            const double lower = blockSize > 1 ? -1.0 / static_cast<double>(blockSize - 1) : -1.0;
            if (!(rho > lower && rho < 1.0)) {
                throw ConfigError("rho", "block correlation must lie in (" +
                                             std::to_string(lower) + ", 1)");
            }
            break;
        }
        case CovKind::Diagonal: break;
    }
}

namespace {

Matrix symmetric_root(const Matrix& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) throw Error(std::string("eigendecomposition failed for ") + what);
    const Vector lambda = eig.eigenvalues();
    if (!(lambda.minCoeff() > 0.0)) throw ConfigError("rho", std::string(what) + " is not positive definite");
    return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Covariance build_sigma(const CovModel& model, std::uint64_t seed) {
    model.validate();
    const auto p = static_cast<Eigen::Index>(model.p);
    Covariance out;
    out.d = Vector::Ones(p);
    if (model.scale == ScaleMode::Uniform) {
        Rng rng = make_rng(seed, kScaleStream);
        std::uniform_real_distribution<double> unif(0.5, 1.5);
        for (Eigen::Index j = 0; j < p; ++j) out.d(j) = unif(rng);
    }

    Matrix r = Matrix::Identity(p, p);
    switch (model.kind) {
        case CovKind::AR:
        case CovKind::AlternatingAR: {
            const double base = model.kind == CovKind::AR ? model.rho : -model.rho;
            for (Eigen::Index i = 0; i < p; ++i) {
                for (Eigen::Index j = 0; j < p; ++j) {
                    r(i, j) = std::pow(base, static_cast<double>(std::abs(i - j)));
                }
            }
            break;
        }
        case CovKind::BlockCS: {
            const auto bs = static_cast<Eigen::Index>(model.blockSize);
            for (Eigen::Index i = 0; i < p; ++i) {
                for (Eigen::Index j = 0; j < p; ++j) {
                    if (i != j && i / bs == j / bs) r(i, j) = model.rho;
                }
            }
            break;
        }
        case CovKind::Diagonal: break;
    }
    out.correlation = r;
    out.sigma = out.d.asDiagonal() * r * out.d.asDiagonal();

    switch (model.kind) {
        case CovKind::Diagonal: out.root = out.d.asDiagonal(); break;
        case CovKind::BlockCS: {
            out.root = Matrix::Zero(p, p);
            const auto bs = static_cast<Eigen::Index>(model.blockSize);
            for (Eigen::Index start = 0; start < p; start += bs) {
                const Eigen::Index len = std::min(bs, p - start);
                out.root.block(start, start, len, len) =
                    symmetric_root(out.sigma.block(start, start, len, len), "covariance block");
            }
            break;
        }
        default: out.root = symmetric_root(out.sigma, "covariance"); break;
    }
    return out;
}

double InnovationDist::raw_variance() const noexcept {
    return 2.0 * b * b / ((a - 1.0) * (a - 2.0));
}

std::size_t MeanSpec::nonzero(std::size_t p) const noexcept {
    // Guard against beta * p landing just below an integer.
    return static_cast<std::size_t>(std::floor(beta * static_cast<double>(p) + 1e-9));
}

Vector MeanSpec::draw(std::size_t p, Rng& rng) const {
    Vector mu = Vector::Zero(static_cast<Eigen::Index>(p));
    if (kappa == 0.0) return mu;
    std::normal_distribution<double> delta(1.5, 1.0);
    const std::size_t p0 = std::min(nonzero(p), p);
    for (std::size_t j = 0; j < p0; ++j) mu(static_cast<Eigen::Index>(j)) = kappa * delta(rng);
    return mu;
}

double draw_double_pareto(double a, double b, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = b * (std::pow(1.0 - unif(rng), -1.0 / a) - 1.0);
    return unif(rng) < 0.5 ? -u : u;
}

std::vector<double> sample_double_pareto(std::size_t n, std::uint64_t seed,
                                         const InnovationDist& dist) {
    Rng rng = make_rng(seed, 0);
    const double c0 = std::sqrt(dist.raw_variance());
    std::vector<double> out(n);
    for (double& z : out) z = draw_double_pareto(dist.a, dist.b, rng) / c0;
    return out;
}

Matrix draw_innovations(const InnovationDist& dist, std::size_t n, std::size_t p, Rng& rng) {
    Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    if (dist.kind == InnovationKind::StandardNormal) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index s = 0; s < z.rows(); ++s) {
            for (Eigen::Index j = 0; j < z.cols(); ++j) z(s, j) = normal(rng);
        }
    } else {
        const double c0 = std::sqrt(dist.raw_variance());
        for (Eigen::Index s = 0; s < z.rows(); ++s) {
            for (Eigen::Index j = 0; j < z.cols(); ++j) {
                z(s, j) = draw_double_pareto(dist.a, dist.b, rng) / c0;
            }
        }
    }
    return z;
}

SampleMatrix generate_sample(const Covariance& cov, const InnovationDist& dist, const Vector& mean,
                             std::size_t n, Rng& rng) {
    const auto p = static_cast<std::size_t>(cov.root.rows());
    if (static_cast<std::size_t>(mean.size()) != p) throw InvalidInput("mean length mismatch");
    Matrix x = draw_innovations(dist, n, p, rng) * cov.root;
    x.rowwise() += mean.transpose();
    return SampleMatrix(std::move(x));
}

std::pair<SampleMatrix, SampleMatrix> generate_two_sample(const Covariance& cov,
                                                          const InnovationDist& dist,
                                                          const MeanSpec& meanSpec, std::size_t n1,
                                                          std::size_t n2, std::uint64_t seed) {
    const auto p = static_cast<std::size_t>(cov.root.rows());
    // The mean has its own stream so that designs differing only in kappa
    // share innovations.
    Rng meanRng = make_rng(seed, 1);
    const Vector mu2 = meanSpec.draw(p, meanRng);
    Rng rng = make_rng(seed, 0);
    SampleMatrix x = generate_sample(cov, dist, Vector::Zero(static_cast<Eigen::Index>(p)), n1, rng);
    SampleMatrix y = generate_sample(cov, dist, mu2, n2, rng);
    return {std::move(x), std::move(y)};
}

}  // namespace pht
