#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "pht/datagen.hpp"
#include "pht/screening.hpp"

using namespace pht;
using Catch::Approx;

namespace {

TauMatrix tau3(double t12, double t13, double t23) {
    Matrix m = Matrix::Identity(3, 3);
    m(0, 1) = m(1, 0) = t12;
    m(0, 2) = m(2, 0) = t13;
    m(1, 2) = m(2, 1) = t23;
    return TauMatrix(m);
}

TauMatrix random_tau(Rng& rng, std::size_t p) {
    Matrix m = Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            // Coarse grid so exact ties with the threshold occur.
            m(i, j) = m(j, i) = std::round(gen::uniform(rng, -1.0, 1.0) * 10.0) / 10.0;
        }
    }
    return TauMatrix(m);
}

void check_structure(const ScreeningSets& sets) {
    std::set<std::size_t> covered;
    for (const Pair& pr : sets.pairs) {
        CHECK(pr.i < pr.j);
        covered.insert(pr.i);
        covered.insert(pr.j);
    }
    CHECK(std::is_sorted(sets.pairs.begin(), sets.pairs.end()));
    CHECK(std::adjacent_find(sets.pairs.begin(), sets.pairs.end()) == sets.pairs.end());
    CHECK(std::is_sorted(sets.singles.begin(), sets.singles.end()));
    for (std::size_t i : sets.singles) {
        CHECK_FALSE(covered.contains(i));
        covered.insert(i);
    }
    CHECK(covered.size() == sets.p);
}

}  // namespace

TEST_CASE("three coordinates with one strong pair") {
    const ScreeningSets sets = screen(tau3(0.9, 0.1, 0.2), 0.5);
    REQUIRE(sets.pairs.size() == 1);
    CHECK(sets.pairs[0] == Pair{0, 1});
    CHECK(sets.singles == std::vector<std::size_t>{2});
}

TEST_CASE("threshold one yields the diagonal sets") {
    Rng rng(21);
    const ScreeningSets sets = screen(kendall_tau_matrix(gen::sample(rng, 20, 6)), 1.0);
    CHECK(sets.pairs.empty());
    CHECK(sets == ScreeningSets::diagonal(6));
}

TEST_CASE("threshold zero on continuous data yields every pair") {
    Rng rng(22);
    const SampleMatrix x = gen::sample(rng, 31, 6);
    const TauMatrix tau = kendall_tau_matrix(x);
    bool allNonzero = true;
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = i + 1; j < 6; ++j) allNonzero = allNonzero && tau.r(i, j) != 0.0;
    }
    REQUIRE(allNonzero);  // odd n(n-1)/2 keeps tau-a away from zero here
    const ScreeningSets sets = screen(tau, 0.0);
    CHECK(sets.singles.empty());
    CHECK(sets == ScreeningSets::all_pairs(6));
}

TEST_CASE("ties at the threshold go to the singles") {
    const ScreeningSets sets = screen(tau3(0.5, 0.1, 0.2), 0.5);
    CHECK(sets.pairs.empty());
    CHECK(sets.singles == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("a coordinate with one strong partner is not a single") {
    // 0-1 strong, 1-2 strong, 0-2 weak: both pairs share coordinate 1.
    const ScreeningSets sets = screen(tau3(0.9, 0.1, 0.8), 0.5);
    CHECK(sets.pairs == std::vector<Pair>{{0, 1}, {1, 2}});
    CHECK(sets.singles.empty());
}

TEST_CASE("thresholds outside the unit interval are rejected") {
    CHECK_THROWS_AS(screen(tau3(0.1, 0.1, 0.1), -0.1), InvalidInput);
    CHECK_THROWS_AS(screen(tau3(0.1, 0.1, 0.1), 1.1), InvalidInput);
}

TEST_CASE("screening sets cover every coordinate exactly as pairs or singles") {
    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = gen::uniform_size(rng, 1, 12);
        const TauMatrix tau = random_tau(rng, p);
        const double tau0 = std::round(gen::uniform(rng, 0.0, 1.0) * 10.0) / 10.0;
        const ScreeningSets sets = screen(tau, tau0);
        CHECK(sets.p == p);
        check_structure(sets);
    }
}

TEST_CASE("raising the threshold shrinks pairs and grows singles") {
    Rng rng(24);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = gen::uniform_size(rng, 2, 10);
        const TauMatrix tau = random_tau(rng, p);
        const double lo = gen::uniform(rng, 0.0, 1.0);
        const double hi = gen::uniform(rng, lo, 1.0);
        const ScreeningSets a = screen(tau, lo);
        const ScreeningSets b = screen(tau, hi);
        CHECK(std::includes(a.pairs.begin(), a.pairs.end(), b.pairs.begin(), b.pairs.end()));
        CHECK(std::includes(b.singles.begin(), b.singles.end(), a.singles.begin(), a.singles.end()));
    }
}

TEST_CASE("two-sample screening weights absolute taus by sample size") {
    Matrix a = Matrix::Identity(2, 2);
    Matrix b = Matrix::Identity(2, 2);
    a(0, 1) = a(1, 0) = 0.8;
    b(0, 1) = b(1, 0) = -0.4;
    // equal sizes: (0.8 + 0.4) / 2 = 0.6
    CHECK(screen_two_sample(TauMatrix(a), TauMatrix(b), 10, 10, 0.5).pairs.size() == 1);
    CHECK(screen_two_sample(TauMatrix(a), TauMatrix(b), 10, 10, 0.6).pairs.empty());
    // 30 and 25: (30 * 0.8 + 25 * 0.4) / 55 = 0.61818...
    CHECK(screen_two_sample(TauMatrix(a), TauMatrix(b), 30, 25, 0.618).pairs.size() == 1);
    CHECK(screen_two_sample(TauMatrix(a), TauMatrix(b), 30, 25, 0.619).pairs.empty());
}

TEST_CASE("two-sample screening with equal matrices matches one-sample screening") {
    Rng rng(25);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = gen::uniform_size(rng, 1, 10);
        const TauMatrix tau = random_tau(rng, p);
        const double tau0 = gen::uniform(rng, 0.0, 1.0);
        CHECK(screen_two_sample(tau, tau, 30, 25, tau0) == screen(tau, tau0));
    }
}

TEST_CASE("projector quadratic with identity blocks") {
    ScreeningSets sets;
    sets.p = 3;
    sets.pairs = {{1, 2}};
    sets.singles = {0};
    const ProjectorBlocks blocks{{{1.0, 0.0, 1.0}}, {1.0}};
    const Vector e1 = Vector::Unit(3, 0);
    CHECK(projector_quadratic(sets, blocks, e1, e1) == 1.0);
}

TEST_CASE("projector quadratic ignores uncovered coordinates") {
    ScreeningSets sets;
    sets.p = 4;
    sets.pairs = {{0, 1}};
    sets.singles = {2};
    const ProjectorBlocks blocks{{{2.0, 0.5, 1.0}}, {3.0}};
    const Vector u = Vector::Unit(4, 3);
    Vector v(4);
    v << 1.0, -2.0, 0.5, 7.0;
    CHECK(projector_quadratic(sets, blocks, u, v) == 0.0);
}

TEST_CASE("projector quadratic matches dense assembly") {
    Rng rng(26);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = gen::uniform_size(rng, 1, 12);
        const ScreeningSets sets = gen::random_sets(rng, p);
        ProjectorBlocks blocks;
        for (std::size_t k = 0; k < sets.pairs.size(); ++k) blocks.pairInv.push_back(gen::spd_block(rng, 1e3));
        for (std::size_t k = 0; k < sets.singles.size(); ++k) blocks.singleInv.push_back(gen::uniform(rng, 0.1, 5.0));
        const Vector u = Vector::Random(static_cast<Eigen::Index>(p));
        const Vector v = Vector::Random(static_cast<Eigen::Index>(p));

        Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t k = 0; k < sets.pairs.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(sets.pairs[k].i);
            const auto j = static_cast<Eigen::Index>(sets.pairs[k].j);
            const Cov2& b = blocks.pairInv[k];
            dense(i, i) += b.a11;
            dense(i, j) += b.a12;
            dense(j, i) += b.a12;
            dense(j, j) += b.a22;
        }
        for (std::size_t k = 0; k < sets.singles.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(sets.singles[k]);
            dense(i, i) += blocks.singleInv[k];
        }
        const double expected = u.dot(dense * v);
        CHECK(projector_quadratic(sets, blocks, u, v) == Approx(expected).margin(1e-10));
        CHECK((projector_dense(sets, blocks) - dense).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("projector quadratic rejects mismatched blocks") {
    ScreeningSets sets = ScreeningSets::diagonal(3);
    const ProjectorBlocks blocks{{}, {1.0, 1.0}};
    const Vector u = Vector::Ones(3);
    CHECK_THROWS_AS(projector_quadratic(sets, blocks, u, u), Error);
}

TEST_CASE("population blocks invert sigma's sub-blocks") {
    Matrix sigma(3, 3);
    sigma << 2.0, 1.0, 0.0, 1.0, 2.0, 0.3, 0.0, 0.3, 4.0;
    ScreeningSets sets;
    sets.p = 3;
    sets.pairs = {{0, 1}};
    sets.singles = {2};
    const ProjectorBlocks blocks = population_blocks(sets, sigma);
    CHECK(blocks.pairInv[0].a11 == Approx(2.0 / 3.0));
    CHECK(blocks.pairInv[0].a12 == Approx(-1.0 / 3.0));
    CHECK(blocks.singleInv[0] == Approx(0.25));
}

TEST_CASE("screening recovers the block pairs more often with more data") {
    // Block model: within-block Gaussian tau is 2/pi asin(0.9) = 0.713.
    CovModel model;
    model.kind = CovKind::BlockCS;
    model.p = 20;
    const Covariance cov = build_sigma(model, 5);
    const ScreeningSets truth = screen(gaussian_tau_matrix(cov.sigma), 0.35);
    REQUIRE(truth.pairs.size() == 4 * 10);
    auto hit_rate = [&](std::size_t n) {
        int hits = 0;
        for (std::uint64_t r = 0; r < 100; ++r) {
            Rng rng = make_rng(1000 + n, r);
            const SampleMatrix x = generate_sample(cov, {}, Vector::Zero(20), n, rng);
            hits += screen(kendall_tau_matrix(x), 0.35).pairs == truth.pairs ? 1 : 0;
        }
        return hits / 100.0;
    };
    const double r50 = hit_rate(50);
    const double r100 = hit_rate(100);
    const double r200 = hit_rate(200);
    CHECK(r100 + 0.05 >= r50);
    CHECK(r200 + 0.05 >= r100);
    CHECK(r200 > 0.9);
}
