#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "pht/datagen.hpp"
#include "pht/tau_select.hpp"

using namespace pht;
using Catch::Approx;

namespace {

oracle::Sets to_oracle(const ScreeningSets& sets) {
    oracle::Sets out;
    for (const Pair& pr : sets.pairs) out.pairs.push_back({pr.i, pr.j});
    out.singles = sets.singles;
    return out;
}

Matrix shift_rows(const Matrix& x, const Vector& mu0) {
    return x.rowwise() - mu0.transpose();
}

std::string field_of(const TauSelectConfig& cfg) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return {};
}

}  // namespace

TEST_CASE("selection config validation names the field") {
    TauSelectConfig cfg;
    CHECK(field_of(cfg).empty());

    cfg.grid = {};
    CHECK(field_of(cfg) == "grid");
    cfg.grid = {0.8, 0.7};
    CHECK(field_of(cfg) == "grid");
    cfg.grid = {0.5, 1.2};
    CHECK(field_of(cfg) == "grid");
    cfg.grid = {0.7, 0.8};

    cfg.repetitions = 0;
    CHECK(field_of(cfg) == "repetitions");
    cfg.repetitions = 10;

    cfg.fractionNumerator = 4;
    CHECK(field_of(cfg) == "subsample_fraction");
    cfg.fractionNumerator = 0;
    CHECK(field_of(cfg) == "subsample_fraction");
}

TEST_CASE("subsample size floors two thirds of n") {
    const TauSelectConfig cfg;
    CHECK(cfg.subsample_size(30) == 20);
    CHECK(cfg.subsample_size(25) == 16);
    CHECK(cfg.subsample_size(7) == 4);
}

TEST_CASE("subsamples below five rows are a config error") {
    Rng rng(41);
    const SampleMatrix x = gen::sample(rng, 7, 3);
    CHECK_THROWS_AS(select_tau0(x, Vector::Zero(3), TauSelectConfig{}), ConfigError);
    const SampleMatrix y = gen::sample(rng, 12, 3);
    CHECK_THROWS_AS(select_tau0(y, x, TauSelectConfig{}), ConfigError);
}

TEST_CASE("one-sample SNR matches the oracle pipeline") {
    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = gen::uniform_size(rng, 6, 9);
        const std::size_t p = gen::uniform_size(rng, 2, 5);
        const SampleMatrix x = gen::sample(rng, n, p);
        Vector mu0(static_cast<Eigen::Index>(p));
        for (Eigen::Index j = 0; j < mu0.size(); ++j) mu0(j) = gen::uniform(rng, -1.0, 3.0);
        const ScreeningSets sets = gen::random_sets(rng, p);
        const auto os = to_oracle(sets);
        const double trace = oracle::trace1(shift_rows(x.values(), mu0), os);
        if (!(trace > 0.0)) continue;
        const double expected = oracle::t1(x.values(), mu0, os) / std::sqrt(trace);
        CHECK(snr_hat_one(x, mu0, sets) == Approx(expected).epsilon(1e-8).margin(1e-10));
    }
}

TEST_CASE("two-sample SNR matches the oracle pipeline") {
    Rng rng(43);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = gen::uniform_size(rng, 2, 4);
        const SampleMatrix x = gen::sample(rng, gen::uniform_size(rng, 5, 8), p);
        const SampleMatrix y = gen::sample(rng, gen::uniform_size(rng, 5, 8), p);
        const ScreeningSets sets = gen::random_sets(rng, p);
        const auto os = to_oracle(sets);
        const double trace = oracle::trace2(x.values(), y.values(), os);
        if (!(trace > 0.0)) continue;
        const double expected = oracle::t2(x.values(), y.values(), os) / std::sqrt(trace);
        CHECK(snr_hat_two(x, y, sets) == Approx(expected).epsilon(1e-8).margin(1e-10));
    }
}

TEST_CASE("selected threshold lies in the grid and repeats with the seed") {
    Rng rng(44);
    const SampleMatrix x = gen::sample(rng, 30, 8);
    const SampleMatrix y = gen::sample(rng, 25, 8);
    TauSelectConfig cfg;
    cfg.seed = 9;
    const TauSelection a = select_tau0_detailed(x, y, cfg);
    const TauSelection b = select_tau0_detailed(x, y, cfg);
    CHECK(a.winners == b.winners);
    CHECK(a.tau0 == b.tau0);
    CHECK(a.winners.size() == cfg.repetitions);
    for (double w : a.winners) {
        CHECK(std::find(cfg.grid.begin(), cfg.grid.end(), w) != cfg.grid.end());
    }
    const TauSelection one = select_tau0_detailed(x, Vector::Zero(8), cfg);
    CHECK(std::find(cfg.grid.begin(), cfg.grid.end(), one.tau0) != cfg.grid.end());
}

TEST_CASE("selection reports the lower median of the winners") {
    Rng rng(45);
    const SampleMatrix x = gen::sample(rng, 40, 10);
    TauSelectConfig cfg;
    cfg.repetitions = 6;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const TauSelection sel = select_tau0_detailed(x, Vector::Zero(10), cfg);
        auto w = sel.winners;
        std::sort(w.begin(), w.end());
        CHECK(sel.tau0 == w[2]);
    }
}

TEST_CASE("with one coordinate every threshold ties and the largest wins") {
    Rng rng(46);
    const SampleMatrix x = gen::sample(rng, 20, 1);
    const TauSelection sel = select_tau0_detailed(x, Vector::Constant(1, -0.5), TauSelectConfig{});
    for (double w : sel.winners) CHECK(w == 1.0);
}

TEST_CASE("under the null the subsample SNR centres near zero") {
    CovModel model;
    model.kind = CovKind::AR;
    model.p = 40;
    const Covariance cov = build_sigma(model, 3);
    double sum = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        Rng rng = make_rng(47, static_cast<std::uint64_t>(r));
        const SampleMatrix x = generate_sample(cov, {}, Vector::Zero(40), 20, rng);
        sum += snr_hat_one(x, Vector::Zero(40), 0.8);
    }
    CHECK(std::abs(sum / reps) < 0.3);
}

TEST_CASE("strong AR dependence with a dense signal selects a threshold below one") {
    CovModel model;
    model.kind = CovKind::AR;
    model.p = 60;
    const Covariance cov = build_sigma(model, 4);
    MeanSpec signal{0.25, 1.0};
    int below = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto [x, y] = generate_two_sample(cov, {}, signal, 30, 30, substream_seed(48, seed));
        TauSelectConfig cfg;
        cfg.seed = seed;
        below += select_tau0(x, y, cfg) < 1.0 ? 1 : 0;
    }
    CHECK(below >= 40);
}

TEST_CASE("independent coordinates mostly select the diagonal threshold") {
    CovModel model;
    model.kind = CovKind::Diagonal;
    model.p = 60;
    const Covariance cov = build_sigma(model, 5);
    MeanSpec signal{0.25, 1.0};
    int diagonal = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto [x, y] = generate_two_sample(cov, {}, signal, 30, 30, substream_seed(49, seed));
        TauSelectConfig cfg;
        cfg.seed = seed;
        diagonal += select_tau0(x, y, cfg) == 1.0 ? 1 : 0;
    }
    CHECK(diagonal > 25);
}
