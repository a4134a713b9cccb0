#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "oracles.hpp"
#include "pht/core_stats.hpp"
#include "pht/errors.hpp"

using namespace pht;
using Catch::Approx;

namespace {

SampleMatrix columns(std::initializer_list<std::initializer_list<double>> cols) {
    const auto p = static_cast<Eigen::Index>(cols.size());
    const auto n = static_cast<Eigen::Index>(cols.begin()->size());
    Matrix m(n, p);
    Eigen::Index j = 0;
    for (const auto& c : cols) {
        Eigen::Index s = 0;
        for (double v : c) m(s++, j) = v;
        ++j;
    }
    return SampleMatrix(std::move(m));
}

}  // namespace

TEST_CASE("kendall tau of small hand-counted columns") {
    const TauMatrix same = kendall_tau_matrix(columns({{1, 2, 3}, {1, 2, 3}}));
    CHECK(same.r(0, 1) == 1.0);
    const TauMatrix reversed = kendall_tau_matrix(columns({{1, 2, 3}, {3, 2, 1}}));
    CHECK(reversed.r(0, 1) == -1.0);
    // pairs (1,2): concordant; (1,3), (2,3): discordant.
    const TauMatrix mixed = kendall_tau_matrix(columns({{1, 2, 3}, {2, 3, 1}}));
    CHECK(mixed.r(0, 1) == Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(mixed.abs(0, 1) == Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("kendall tau needs two observations") {
    CHECK_THROWS_AS(kendall_tau_matrix(columns({{1.0}, {2.0}})), InvalidInput);
}

TEST_CASE("kendall tau matrix agrees with naive concordance counts") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = gen::uniform_size(rng, 2, 30);
        const std::size_t p = gen::uniform_size(rng, 1, 7);
        const Matrix m = gen::correlated_rows(rng, n, p);
        const TauMatrix tau = kendall_tau_matrix(SampleMatrix(m));
        for (std::size_t i = 0; i < p; ++i) {
            CHECK(tau.r(i, i) == 1.0);
            for (std::size_t j = 0; j < p; ++j) {
                const auto a = static_cast<Eigen::Index>(i);
                const auto b = static_cast<Eigen::Index>(j);
                CHECK(tau.r(i, j) == tau.r(j, i));
                CHECK(tau.r(i, j) >= -1.0);
                CHECK(tau.r(i, j) <= 1.0);
                if (i != j) CHECK(tau.r(i, j) == Approx(oracle::kendall(m.col(a), m.col(b))).margin(1e-14));
            }
        }
    }
}

TEST_CASE("kendall tau treats ties as neither concordant nor discordant") {
    const TauMatrix tau = kendall_tau_matrix(columns({{1, 1, 2, 3}, {1, 2, 3, 4}}));
    // 5 of 6 pairs concordant, the tied pair scores 0.
    CHECK(tau.r(0, 1) == Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("kendall tau is unchanged by an increasing transform of a column") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = gen::uniform_size(rng, 5, 40);
        Matrix m = gen::correlated_rows(rng, n, 4);
        m.col(2) = m.col(2).array().abs() + 0.1;
        const TauMatrix before = kendall_tau_matrix(SampleMatrix(m));
        m.col(2) = m.col(2).array().cube();
        m.col(1) = m.col(1).array().exp();
        const TauMatrix after = kendall_tau_matrix(SampleMatrix(m));
        CHECK(before.entries() == after.entries());
    }
}

TEST_CASE("kendall tau is unchanged by reordering observations") {
    Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = gen::uniform_size(rng, 3, 40);
        const SampleMatrix x = gen::sample(rng, n, 5);
        const auto perm = gen::permutation(rng, n);
        const SampleMatrix shuffled = x.select_rows(perm);
        CHECK(kendall_tau_matrix(x).entries() == kendall_tau_matrix(shuffled).entries());
    }
}

TEST_CASE("gaussian tau is the arcsine of the correlation") {
    Matrix sigma(2, 2);
    sigma << 4.0, 0.9 * 2.0 * 0.5, 0.9 * 2.0 * 0.5, 0.25;
    const TauMatrix tau = gaussian_tau_matrix(sigma);
    CHECK(tau.r(0, 1) == Approx(2.0 / M_PI * std::asin(0.9)).epsilon(1e-14));
    CHECK(tau.r(0, 0) == 1.0);
}

TEST_CASE("leave-two-out variance of five points") {
    const SampleMatrix x = columns({{1, 2, 3, 4, 5}});
    const PairSummaries summ(x, {});
    const Cov2 c = leave2out_cov2(summ, {0, 0}, {0, 4});
    CHECK(c.a11 == Approx(1.0).epsilon(1e-14));
    CHECK(c.a22 == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("leave-two-out needs at least five observations") {
    const SampleMatrix x = columns({{1, 2, 3, 4}, {2, 1, 4, 3}});
    const std::vector<Pair> pairs{{0, 1}};
    const PairSummaries summ(x, pairs);
    CHECK_THROWS_AS(leave2out_cov2(summ, {0, 1}, {0, 1}), InsufficientSample);
}

TEST_CASE("downdated leave-out covariances match recomputation from retained rows") {
    Rng rng(14);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = gen::uniform_size(rng, 5, 40);
        const std::size_t p = gen::uniform_size(rng, 2, 6);
        Matrix m = gen::correlated_rows(rng, n, p);
        // Large offsets stress the downdate arithmetic.
        m.rowwise() += (Vector::Random(static_cast<Eigen::Index>(p)) * 1e3).transpose();
        const SampleMatrix x(m);
        const std::vector<Pair> pairs{{0, 1}, {0, p - 1}};
        const PairSummaries summ(x, pairs);
        const std::size_t s = gen::uniform_size(rng, 0, n - 1);
        std::size_t t = gen::uniform_size(rng, 0, n - 2);
        if (t >= s) ++t;

        const Matrix direct = oracle::covariance(oracle::drop_rows(m, {s, t}));
        const Vector directMean = oracle::mean(oracle::drop_rows(m, {s, t}));
        for (const Pair& pr : pairs) {
            const Cov2 c = leave2out_cov2(summ, pr, {s, t});
            const auto i = static_cast<Eigen::Index>(pr.i);
            const auto j = static_cast<Eigen::Index>(pr.j);
            const double scale = std::sqrt(direct(i, i) * direct(j, j));
            CHECK(std::abs(c.a11 - direct(i, i)) <= 1e-10 * direct(i, i));
            CHECK(std::abs(c.a22 - direct(j, j)) <= 1e-10 * direct(j, j));
            CHECK(std::abs(c.a12 - direct(i, j)) <= 1e-10 * scale);
        }
        for (std::size_t j = 0; j < p; ++j) {
            const double mj = leave2out_mean(summ, j, {s, t});
            CHECK(std::abs(mj - directMean(static_cast<Eigen::Index>(j))) <=
                  1e-12 * std::max(1.0, std::abs(directMean(static_cast<Eigen::Index>(j)))));
        }
        const Matrix one = oracle::covariance(oracle::drop_rows(m, {s}));
        const std::size_t k = summ.pair_index(pairs[0].i, pairs[0].j);
        CHECK(std::abs(summ.cov_excluding(k, s) - one(0, 1)) <= 1e-10 * std::sqrt(one(0, 0) * one(1, 1)));
        CHECK(std::abs(summ.var_excluding(0, s) - one(0, 0)) <= 1e-10 * one(0, 0));
    }
}

TEST_CASE("leave-two-out mean examples") {
    const SampleMatrix a = columns({{1, 2, 3}});
    CHECK(leave2out_mean(PairSummaries(a, {}), 0, {0, 2}) == Approx(2.0).epsilon(1e-15));
    const SampleMatrix b = columns({{4, 4, 4, 4}});
    const PairSummaries summ(b, {});
    CHECK(leave2out_mean(summ, 0, {1, 3}) == Approx(4.0).epsilon(1e-15));
    CHECK(summ.constant_column(0));
}

TEST_CASE("a column that is constant after exclusion gives a singular block") {
    const SampleMatrix x = columns({{1, 1, 1, 5, 9}, {1, 2, 3, 4, 5}});
    const std::vector<Pair> pairs{{0, 1}};
    const PairSummaries summ(x, pairs);
    const Cov2 c = leave2out_cov2(summ, {0, 1}, {3, 4});
    CHECK(std::abs(c.a11) < 1e-14);
    CHECK_FALSE(cov2_invertible(c));
    CHECK_THROWS_AS(invert_cov2(c), SingularBlock);
}

TEST_CASE("closed-form 2x2 inverse") {
    const Cov2 id = invert_cov2({1.0, 0.0, 1.0});
    CHECK(id.a11 == 1.0);
    CHECK(id.a12 == 0.0);
    CHECK(id.a22 == 1.0);
    const Cov2 inv = invert_cov2({2.0, 1.0, 2.0});
    CHECK(inv.a11 == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(inv.a12 == Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(inv.a22 == Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("2x2 inverse multiplies back to the identity") {
    Rng rng(15);
    for (int rep = 0; rep < 500; ++rep) {
        const Cov2 c = gen::spd_block(rng, 1e6);
        const Cov2 inv = invert_cov2(c);
        Eigen::Matrix2d a, b;
        a << c.a11, c.a12, c.a12, c.a22;
        b << inv.a11, inv.a12, inv.a12, inv.a22;
        CHECK((a * b - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
        const Cov2 back = invert_cov2(inv);
        const double scale = std::max(c.a11, c.a22);
        CHECK(std::abs(back.a11 - c.a11) <= 1e-10 * scale);
        CHECK(std::abs(back.a12 - c.a12) <= 1e-10 * scale);
        CHECK(std::abs(back.a22 - c.a22) <= 1e-10 * scale);
    }
}

TEST_CASE("near-singular blocks are rejected unless jitter is enabled") {
    const Cov2 c{1.0, 1.0 - 1e-14, 1.0};
    CHECK_FALSE(cov2_invertible(c));
    try {
        invert_cov2(c);
        FAIL("expected SingularBlock");
    } catch (const SingularBlock& e) {
        CHECK(std::string(e.what()).find("singular") != std::string::npos);
    }
    Cov2 out;
    CHECK_FALSE(try_invert_cov2(c, InversionPolicy{}, out));
    InversionPolicy jitter;
    jitter.jitter = true;
    CHECK(try_invert_cov2(c, jitter, out));
    CHECK(std::isfinite(out.a11));
}

TEST_CASE("sample matrices reject non-finite entries") {
    Matrix m = Matrix::Ones(3, 2);
    m(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SampleMatrix(m), InvalidInput);
    m(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(SampleMatrix(m), InvalidInput);
}

TEST_CASE("normal tail helpers") {
    CHECK(normal_upper_quantile(0.05) == Approx(1.6448536269514722).epsilon(1e-12));
    CHECK(normal_cdf(0.0) == Approx(0.5).epsilon(1e-15));
    CHECK(normal_upper_tail(1.6448536269514722) == Approx(0.05).epsilon(1e-12));
    CHECK(normal_upper_tail(40.0) >= 0.0);
    CHECK(normal_upper_quantile(1.0) == -std::numeric_limits<double>::infinity());
}
