#include <doctest.h>

#include <cmath>

#include "lplsh/lp_geometry.hpp"
#include "lplsh/stats.hpp"
#include "oracles.hpp"

using namespace lplsh;
using doctest::Approx;

TEST_CASE("lp_norm examples") {
    CHECK(lp_norm(Vector{3, 4}, LpSpace(2.0, 2)) == Approx(5.0).epsilon(1e-15));
    CHECK(lp_norm(Vector(7, 0.0), LpSpace(1.3, 7)) == 0.0);
    CHECK(lp_norm(Vector{1, 1}, LpSpace(1.5, 2)) == Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-14));
    CHECK(lp_norm(Vector{1, 1}, LpSpace(1.5, 2)) == Approx(1.587401).epsilon(1e-6));
}

TEST_CASE("lp_norm rejects dimension mismatch") {
    CHECK_THROWS_AS(lp_norm(Vector{1, 2, 3}, LpSpace(1.5, 2)), ContractError);
    CHECK_THROWS_AS(lp_distance(Vector{1, 2}, Vector{1}, LpSpace(1.5, 2)), ContractError);
    CHECK_THROWS_AS(smoothness_residual(Vector{1}, Vector{1, 2}, LpSpace(1.5, 2)), ContractError);
    CHECK_THROWS_AS(convexity_residual(Vector{1}, Vector{1}, LpSpace(1.5, 2)), ContractError);
}

TEST_CASE("LpSpace invariants") {
    CHECK_THROWS_AS(LpSpace(1.0, 3), ContractError);
    CHECK_THROWS_AS(LpSpace(2.5, 3), ContractError);
    CHECK_THROWS_AS(LpSpace(1.5, 0), ContractError);
    CHECK_NOTHROW(LpSpace(2.0, 1));
}

TEST_CASE("lp_norm survives huge and tiny coordinates") {
    const LpSpace s(2.0, 2);
    CHECK(lp_norm(Vector{1e200, 1e200}, s) == Approx(std::sqrt(2.0) * 1e200).epsilon(1e-14));
    CHECK(lp_norm(Vector{1e-200, 1e-200}, s) == Approx(std::sqrt(2.0) * 1e-200).epsilon(1e-14));
    const LpSpace s15(1.5, 3);
    CHECK(lp_norm(Vector{1e250, -1e250, 0}, s15) == Approx(std::pow(2.0, 1 / 1.5) * 1e250).epsilon(1e-13));
}

TEST_CASE("lp_norm agrees with the plain formula") {
    Rng rng(11);
    for (double p : {1.1, 1.25, 1.5, 1.9, 2.0}) {
        for (std::size_t d : {1u, 3u, 40u}) {
            const LpSpace s(p, d);
            for (int rep = 0; rep < 20; ++rep) {
                Vector v(d);
                for (auto& x : v) x = 10.0 * (uniform01(rng) - 0.5);
                CHECK(lp_norm(v, s) == Approx(oracle::lp_norm(v, p)).epsilon(1e-13));
                CHECK(lp_norm_pow(v, p) == Approx(std::pow(oracle::lp_norm(v, p), p)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("in_lp_ball matches the norm") {
    Rng rng(5);
    const LpSpace s(1.5, 4);
    for (int rep = 0; rep < 2000; ++rep) {
        Vector x(4), c(4);
        for (auto& v : x) v = 2 * uniform01(rng);
        for (auto& v : c) v = 2 * uniform01(rng);
        const double r = 1.5 * uniform01(rng);
        CHECK(in_lp_ball(x, c, r, 1.5) == (lp_distance(x, c, s) <= r));
    }
    CHECK(in_lp_ball(Vector{1, 0}, Vector{0, 0}, 1.0, 1.5));
}

TEST_CASE("ball_volume_ratio") {
    CHECK(ball_volume_ratio(1.0, 1) == 1.0);
    CHECK(ball_volume_ratio(1.0, 57) == 1.0);
    CHECK(ball_volume_ratio(0.5, 3) == 0.125);
    CHECK(ball_volume_ratio(2.0, 4) == 16.0);
    CHECK(ball_volume_ratio(0.0, 3) == 0.0);
    for (double a : {0.1, 0.7, 1.3, 9.0})
        for (int t : {1, 5, 20}) CHECK(ball_volume_ratio(a, t) * ball_volume_ratio(1.0 / a, t) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smoothness_residual examples") {
    const LpSpace s(1.5, 2);
    const Vector x{1, 0}, y{0, 1};
    CHECK(smoothness_residual(x, x, s) == Approx(0.0).epsilon(1e-15));
    CHECK(smoothness_residual(x, Vector{-1, 0}, s) == Approx(0.0).epsilon(1e-15));
    const double expect = 2 * std::pow(0.5, 1.5) * 2 - 1;
    CHECK(smoothness_residual(x, y, s) == Approx(expect).epsilon(1e-14));
    CHECK(smoothness_residual(x, y, s) == Approx(0.414214).epsilon(1e-6));
}

TEST_CASE("convexity_residual examples") {
    const LpSpace s(1.5, 2);
    const Vector x{1, 0}, y{0, 1};
    CHECK(convexity_residual(x, x, s) == Approx(0.0).epsilon(1e-15));
    const double half = std::pow(2.0, -1.0 / 3.0);
    CHECK(convexity_residual(x, y, s) == Approx(1 - half * half - 0.5 * half * half).epsilon(1e-14));
    CHECK(convexity_residual(x, y, s) == Approx(0.055).epsilon(2e-2).scale(0));
    CHECK(convexity_residual(x, Vector{-1, 0}, s) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("residuals, triangle inequality and homogeneity on random pairs") {
    Rng rng(2024);
    for (double p : {1.1, 1.5, 2.0}) {
        for (std::size_t d : {2u, 16u}) {
            const LpSpace s(p, d);
            for (int rep = 0; rep < 2000; ++rep) {
                Vector x(d), y(d), sum(d), ax(d);
                const double alpha = 6 * uniform01(rng) - 3;
                for (std::size_t i = 0; i < d; ++i) {
                    x[i] = 2 * uniform01(rng) - 1;
                    y[i] = rep % 3 ? 2 * uniform01(rng) - 1 : -0.7 * x[i];
                    sum[i] = x[i] + y[i];
                    ax[i] = alpha * x[i];
                }
                CHECK(smoothness_residual(x, y, s) >= -1e-9);
                CHECK(convexity_residual(x, y, s) >= -1e-9);
                CHECK(lp_norm(sum, s) <= lp_norm(x, s) + lp_norm(y, s) + 1e-12);
                CHECK(lp_norm(ax, s) == Approx(std::abs(alpha) * lp_norm(x, s)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("random_lp_direction") {
    SUBCASE("dim 1 gives +-1 evenly") {
        Rng rng(3);
        const LpSpace s(1.5, 1);
        int plus = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const Vector v = random_lp_direction(s, rng);
            REQUIRE(v.size() == 1);
            CHECK(std::abs(v[0]) == 1.0);
            plus += v[0] > 0;
        }
        CHECK(std::abs(plus / double(n) - 0.5) <= 3 * binomial_sigma(0.5, n));
    }
    SUBCASE("unit norm") {
        Rng rng(4);
        for (double p : {1.2, 1.5, 2.0}) {
            const LpSpace s(p, 33);
            for (int i = 0; i < 500; ++i) CHECK(lp_norm(random_lp_direction(s, rng), s) == Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("first coordinate is centered") {
        Rng rng(6);
        const LpSpace s(1.5, 5);
        std::vector<double> first;
        for (int i = 0; i < 100000; ++i) first.push_back(random_lp_direction(s, rng)[0]);
        const MeanStat m = mean_and_stderr(first);
        CHECK(std::abs(m.mean) <= 3 * m.std_error);
    }
}

TEST_CASE("generalized Gaussian second moment") {
    // E|u|^2 for density exp(-|u|^p) / (2 Gamma(1 + 1/p)) is Gamma(3/p) / Gamma(1/p).
    Rng rng(8);
    for (double p : {1.25, 1.5, 2.0}) {
        std::vector<double> sq;
        for (int i = 0; i < 200000; ++i) {
            const double u = sample_generalized_gaussian(p, rng);
            sq.push_back(u * u);
        }
        const MeanStat m = mean_and_stderr(sq);
        CHECK(std::abs(m.mean - std::tgamma(3 / p) / std::tgamma(1 / p)) <= 4 * m.std_error);
    }
}

TEST_CASE("sample_uniform_in_ball stays inside and fills uniformly") {
    Rng rng(9);
    const Vector center{1.0, -2.0, 0.5};
    const double radius = 2.0;
    const LpSpace s(1.5, 3);
    int inner = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const Vector z = sample_uniform_in_ball(center, radius, 1.5, rng);
        const double dist = lp_distance(z, center, s);
        CHECK(dist <= radius * (1 + 1e-12));
        inner += dist <= radius / 2;
    }
    // Volume scales as radius^t, so the half-radius ball holds 1/8 of the mass.
    CHECK(std::abs(inner / double(n) - 0.125) <= 3 * binomial_sigma(0.125, n));
}
