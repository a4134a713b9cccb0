#include "pht/screening.hpp"

#include <cmath>
#include <string>

namespace pht {

namespace {

void check_threshold(double tau0) {
    if (!(tau0 >= 0.0 && tau0 <= 1.0)) {
        throw InvalidInput("tau0 must lie in [0, 1], got " + std::to_string(tau0));
    }
}

// Shared by the one- and two-sample paths; weight(i, j) returns the
// screening statistic for i < j.
template <class Weight>
ScreeningSets screen_by(std::size_t p, double tau0, Weight weight) {
    ScreeningSets sets;
    sets.tau0 = tau0;
    sets.p = p;
    std::vector<bool> covered(p, false);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            if (weight(i, j) > tau0) {
                sets.pairs.push_back({i, j});
                covered[i] = true;
                covered[j] = true;
            }
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        if (!covered[i]) sets.singles.push_back(i);
    }
    return sets;
}

}  // namespace

ScreeningSets ScreeningSets::diagonal(std::size_t p) {
    ScreeningSets sets;
    sets.tau0 = 1.0;
    sets.p = p;
    sets.singles.resize(p);
    for (std::size_t i = 0; i < p; ++i) sets.singles[i] = i;
    return sets;
}

ScreeningSets ScreeningSets::all_pairs(std::size_t p) {
    ScreeningSets sets;
    sets.tau0 = 0.0;
    sets.p = p;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) sets.pairs.push_back({i, j});
    }
    if (p == 1) sets.singles.push_back(0);
    return sets;
}

ScreeningSets screen(const TauMatrix& tau, double tau0) {
    check_threshold(tau0);
    return screen_by(tau.p(), tau0, [&](std::size_t i, std::size_t j) { return tau.abs(i, j); });
}

ScreeningSets screen_two_sample(const TauMatrix& tau1, const TauMatrix& tau2, std::size_t n1,
                                std::size_t n2, double tau0) {
    check_threshold(tau0);
    if (tau1.p() != tau2.p()) throw InvalidInput("tau matrices differ in dimension");
    if (n1 < 2 || n2 < 2) throw InvalidInput("two-sample screening needs n1, n2 >= 2");
    const double w1 = static_cast<double>(n1);
    const double w2 = static_cast<double>(n2);
    const double total = w1 + w2;
    return screen_by(tau1.p(), tau0, [&](std::size_t i, std::size_t j) {
        return (w1 * tau1.abs(i, j) + w2 * tau2.abs(i, j)) / total;
    });
}

double projector_quadratic(const ScreeningSets& sets, const ProjectorBlocks& blocks,
                           const Vector& u, const Vector& v) {
    if (blocks.pairInv.size() != sets.pairs.size() ||
        blocks.singleInv.size() != sets.singles.size()) {
        throw Error("projector blocks do not match the screening sets");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < sets.pairs.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(sets.pairs[k].i);
        const auto j = static_cast<Eigen::Index>(sets.pairs[k].j);
        const Cov2& b = blocks.pairInv[k];
        acc += u(i) * (b.a11 * v(i) + b.a12 * v(j)) + u(j) * (b.a12 * v(i) + b.a22 * v(j));
    }
    for (std::size_t k = 0; k < sets.singles.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(sets.singles[k]);
        acc += u(i) * v(i) * blocks.singleInv[k];
    }
    return acc;
}

Matrix projector_dense(const ScreeningSets& sets, const ProjectorBlocks& blocks) {
    const auto p = static_cast<Eigen::Index>(sets.p);
    Matrix m = Matrix::Zero(p, p);
    for (std::size_t k = 0; k < sets.pairs.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(sets.pairs[k].i);
        const auto j = static_cast<Eigen::Index>(sets.pairs[k].j);
        const Cov2& b = blocks.pairInv[k];
        m(i, i) += b.a11;
        m(i, j) += b.a12;
        m(j, i) += b.a12;
        m(j, j) += b.a22;
    }
    for (std::size_t k = 0; k < sets.singles.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(sets.singles[k]);
        m(i, i) += blocks.singleInv[k];
    }
    return m;
}

ProjectorBlocks population_blocks(const ScreeningSets& sets, const Matrix& sigma) {
    if (static_cast<std::size_t>(sigma.rows()) != sets.p || sigma.rows() != sigma.cols()) {
        throw InvalidInput("covariance dimension does not match the screening sets");
    }
    ProjectorBlocks blocks;
    blocks.pairInv.reserve(sets.pairs.size());
    for (const Pair& pr : sets.pairs) {
        const auto i = static_cast<Eigen::Index>(pr.i);
        const auto j = static_cast<Eigen::Index>(pr.j);
        Cov2 inv;
        if (!try_invert_cov2({sigma(i, i), sigma(i, j), sigma(j, j)}, InversionPolicy{}, inv)) {
            throw SingularBlock(BlockLocation{pr.i, pr.j, {}, {}, "population covariance"});
        }
        blocks.pairInv.push_back(inv);
    }
    blocks.singleInv.reserve(sets.singles.size());
    for (std::size_t i : sets.singles) {
        const double v = sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (!(v > 0.0)) throw SingularBlock(BlockLocation{i, i, {}, {}, "population covariance"});
        blocks.singleInv.push_back(1.0 / v);
    }
    return blocks;
}

}  // namespace pht
