#include "pht/tau_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "pht/one_sample.hpp"
#include "pht/random.hpp"

namespace pht {

void TauSelectConfig::validate() const {
    if (grid.empty()) throw ConfigError("grid", "must contain at least one threshold");
    for (std::size_t h = 0; h < grid.size(); ++h) {
        if (!(grid[h] >= 0.0 && grid[h] <= 1.0)) {
            throw ConfigError("grid", "values must lie in [0, 1]");
        }
        if (h > 0 && !(grid[h] > grid[h - 1])) {
            throw ConfigError("grid", "values must be strictly increasing");
        }
    }
    if (repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
    if (fractionDenominator == 0 || fractionNumerator == 0 ||
        fractionNumerator > fractionDenominator) {
        throw ConfigError("subsample_fraction", "must lie in (0, 1]");
    }
}

std::size_t TauSelectConfig::subsample_size(std::size_t n) const {
    return fractionNumerator * n / fractionDenominator;
}

double snr_hat_one(const SampleMatrix& x, const Vector& mu0, const ScreeningSets& sets,
                   const InversionPolicy& policy) {
    if (static_cast<std::size_t>(mu0.size()) != x.p()) throw InvalidInput("mu0 length mismatch");
    const auto pass = detail::one_sample_pass(x.shifted(mu0), sets, policy, true);
    if (!(pass.trace > 0.0)) throw DegenerateVariance("trace estimate is not positive");
    return pass.statistic / std::sqrt(pass.trace);
}

double snr_hat_one(const SampleMatrix& x, const Vector& mu0, double tau0) {
    return snr_hat_one(x, mu0, screen(kendall_tau_matrix(x), tau0));
}

double snr_hat_two(const SampleMatrix& x, const SampleMatrix& y, const ScreeningSets& sets,
                   const TwoSampleOptions& options) {
    const auto pass = detail::two_sample_pass(x, y, sets, options, true, true);
    if (!(pass.trace > 0.0)) throw DegenerateVariance("trace estimate is not positive");
    return pass.statistic / std::sqrt(pass.trace);
}

double snr_hat_two(const SampleMatrix& x, const SampleMatrix& y, double tau0) {
    const auto sets =
        screen_two_sample(kendall_tau_matrix(x), kendall_tau_matrix(y), x.n(), y.n(), tau0);
    return snr_hat_two(x, y, sets);
}

namespace {

// Argmax over the grid, ties resolved toward the largest threshold. `snr`
// maps screening sets to the ratio; identical sets are not recomputed.
template <class Screen, class Snr>
std::optional<double> best_threshold(const std::vector<double>& grid, Screen&& screenAt, Snr&& snr) {
    std::optional<double> best;
    double bestValue = -std::numeric_limits<double>::infinity();
    std::optional<ScreeningSets> previous;
    double previousValue = 0.0;
    for (double tau0 : grid) {
        ScreeningSets sets = screenAt(tau0);
        double value = 0.0;
        if (previous && *previous == sets) {
            value = previousValue;
        } else {
            try {
                value = snr(sets);
            } catch (const SingularBlock&) {
                value = -std::numeric_limits<double>::infinity();
            } catch (const DegenerateVariance&) {
                value = -std::numeric_limits<double>::infinity();
            }
            previous = std::move(sets);
            previousValue = value;
        }
        if (std::isfinite(value) && value >= bestValue) {
            bestValue = value;
            best = tau0;
        }
    }
    return best;
}

double lower_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() + 1) / 2 - 1];
}

void check_subsample(std::size_t n, const TauSelectConfig& cfg) {
    const std::size_t m = cfg.subsample_size(n);
    if (m < 5) {
        throw ConfigError("subsample_fraction",
                          "subsample of " + std::to_string(m) + " rows from " + std::to_string(n) +
                              " is below the minimum of 5");
    }
}

}  // namespace

TauSelection select_tau0_detailed(const SampleMatrix& x, const Vector& mu0,
                                  const TauSelectConfig& cfg) {
    cfg.validate();
    check_subsample(x.n(), cfg);
    if (static_cast<std::size_t>(mu0.size()) != x.p()) throw InvalidInput("mu0 length mismatch");
    TauSelection out;
    for (std::size_t b = 0; b < cfg.repetitions; ++b) {
        Rng rng = make_rng(cfg.seed, b);
        const auto rows = sample_without_replacement(x.n(), cfg.subsample_size(x.n()), rng);
        const SampleMatrix sub = x.select_rows(rows);
        const TauMatrix tau = kendall_tau_matrix(sub);
        const auto best = best_threshold(
            cfg.grid, [&](double t0) { return screen(tau, t0); },
            [&](const ScreeningSets& sets) { return snr_hat_one(sub, mu0, sets, cfg.inversion); });
        if (!best) throw DegenerateVariance("no threshold in the grid gives a usable SNR estimate");
        out.winners.push_back(*best);
    }
    out.tau0 = lower_median(out.winners);
    return out;
}

TauSelection select_tau0_detailed(const SampleMatrix& x, const SampleMatrix& y,
                                  const TauSelectConfig& cfg) {
    cfg.validate();
    check_subsample(x.n(), cfg);
    check_subsample(y.n(), cfg);
    if (x.p() != y.p()) throw InvalidInput("groups differ in dimension");
    TwoSampleOptions options;
    options.inversion = cfg.inversion;
    options.weighting = cfg.weighting;
    options.centering = cfg.centering;
    TauSelection out;
    for (std::size_t b = 0; b < cfg.repetitions; ++b) {
        Rng rng = make_rng(cfg.seed, b);
        const auto rowsX = sample_without_replacement(x.n(), cfg.subsample_size(x.n()), rng);
        const auto rowsY = sample_without_replacement(y.n(), cfg.subsample_size(y.n()), rng);
        const SampleMatrix subX = x.select_rows(rowsX);
        const SampleMatrix subY = y.select_rows(rowsY);
        const TauMatrix tauX = kendall_tau_matrix(subX);
        const TauMatrix tauY = kendall_tau_matrix(subY);
        const auto best = best_threshold(
            cfg.grid,
            [&](double t0) { return screen_two_sample(tauX, tauY, subX.n(), subY.n(), t0); },
            [&](const ScreeningSets& sets) { return snr_hat_two(subX, subY, sets, options); });
        if (!best) throw DegenerateVariance("no threshold in the grid gives a usable SNR estimate");
        out.winners.push_back(*best);
    }
    out.tau0 = lower_median(out.winners);
    return out;
}

double select_tau0(const SampleMatrix& x, const Vector& mu0, const TauSelectConfig& cfg) {
    return select_tau0_detailed(x, mu0, cfg).tau0;
}

double select_tau0(const SampleMatrix& x, const SampleMatrix& y, const TauSelectConfig& cfg) {
    return select_tau0_detailed(x, y, cfg).tau0;
}

}  // namespace pht
