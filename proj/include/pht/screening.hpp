#pragma once

#include <cstddef>
#include <vector>

#include "pht/core_stats.hpp"

namespace pht {

/// Strongly correlated pairs (|tau| > tau0) and weakly correlated single
/// coordinates (|tau| <= tau0 against every other coordinate). Pairs and
/// singles together cover every coordinate, and no single appears in a pair.
struct ScreeningSets {
    std::vector<Pair> pairs;
    std::vector<std::size_t> singles;
    double tau0 = 1.0;
    std::size_t p = 0;

    /// Every coordinate as a single, no pairs (the diagonal limit).
    static ScreeningSets diagonal(std::size_t p);
    /// All i < j pairs, no singles.
    static ScreeningSets all_pairs(std::size_t p);

    friend bool operator==(const ScreeningSets& a, const ScreeningSets& b) {
        return a.pairs == b.pairs && a.singles == b.singles && a.p == b.p;
    }
};

ScreeningSets screen(const TauMatrix& tau, double tau0);

/// Screening on the sample-size weighted |tau|: (n1|r1| + n2|r2|) / (n1 + n2).
ScreeningSets screen_two_sample(const TauMatrix& tau1, const TauMatrix& tau2, std::size_t n1,
                                std::size_t n2, double tau0);

/// Inverse blocks for a projector: one per pair (aligned with sets.pairs) and
/// one reciprocal variance per single (aligned with sets.singles).
struct ProjectorBlocks {
    std::vector<Cov2> pairInv;
    std::vector<double> singleInv;
};

/// u' P v for P = sum_pairs P_ij' B_ij P_ij + sum_singles e_i e_i' / s_ii,
/// evaluated without forming the p x p operator.
double projector_quadratic(const ScreeningSets& sets, const ProjectorBlocks& blocks,
                           const Vector& u, const Vector& v);

/// Dense p x p operator; used by power computations and oracles only.
Matrix projector_dense(const ScreeningSets& sets, const ProjectorBlocks& blocks);

/// Population projector blocks taken from sigma's 2x2 and 1x1 sub-blocks.
ProjectorBlocks population_blocks(const ScreeningSets& sets, const Matrix& sigma);

}  // namespace pht
