#pragma once

// Internal: assembles projector inverse blocks for one leave-out
// configuration from a covariance view.

#include <optional>
#include <vector>

#include "pht/core_stats.hpp"
#include "pht/screening.hpp"

namespace pht::detail {

class BlockFiller {
public:
    /// floor[j] is the smallest acceptable variance for coordinate j.
    BlockFiller(const ScreeningSets& sets, InversionPolicy policy, std::vector<double> floor)
        : sets_(sets), policy_(policy), floor_(std::move(floor)), var_(sets.p) {
        blocks_.pairInv.resize(sets.pairs.size());
        blocks_.singleInv.resize(sets.singles.size());
    }

    /// var(j) gives the variance of coordinate j, cov(k) the covariance of
    /// sets.pairs[k]; s/t only label errors.
    template <class Var, class Cov>
    void fill(Var&& var, Cov&& cov, const char* term, std::optional<std::size_t> s,
              std::optional<std::size_t> t) {
        for (std::size_t j = 0; j < sets_.p; ++j) var_[j] = var(j);
        for (std::size_t k = 0; k < sets_.singles.size(); ++k) {
            const std::size_t j = sets_.singles[k];
            const double v = var_[j];
            if (!(v > floor_[j]) && !(policy_.jitter && v > 0.0)) {
                throw SingularBlock(BlockLocation{j, j, s, t, term});
            }
            blocks_.singleInv[k] = 1.0 / v;
        }
        for (std::size_t k = 0; k < sets_.pairs.size(); ++k) {
            const Pair& pr = sets_.pairs[k];
            const Cov2 c{var_[pr.i], cov(k), var_[pr.j]};
            const bool diagOk = policy_.jitter || (c.a11 > floor_[pr.i] && c.a22 > floor_[pr.j]);
            if (!diagOk || !try_invert_cov2(c, policy_, blocks_.pairInv[k])) {
                throw SingularBlock(BlockLocation{pr.i, pr.j, s, t, term});
            }
        }
    }

    const ProjectorBlocks& blocks() const noexcept { return blocks_; }

private:
    const ScreeningSets& sets_;
    InversionPolicy policy_;
    std::vector<double> floor_;
    std::vector<double> var_;
    ProjectorBlocks blocks_;
};

}  // namespace pht::detail
