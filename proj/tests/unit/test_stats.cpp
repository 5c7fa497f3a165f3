#include <doctest.h>

#include "lplsh/common.hpp"
#include "lplsh/stats.hpp"

using namespace lplsh;
using doctest::Approx;

TEST_CASE("wilson_interval textbook values") {
    const Interval ci = wilson_interval(5, 10);
    CHECK(ci.lo == Approx(0.2366).epsilon(1e-3).scale(0));
    CHECK(ci.hi == Approx(0.7634).epsilon(1e-3).scale(0));

    const Interval zero = wilson_interval(0, 10);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi == Approx(0.2775).epsilon(1e-3).scale(0));
    CHECK(wilson_interval(10, 10).hi == 1.0);

    const Interval wide = wilson_interval(5, 10, kZ99);
    CHECK(wide.lo < ci.lo);
    CHECK(wide.hi > ci.hi);
    CHECK_THROWS_AS(wilson_interval(11, 10), ContractError);
}

TEST_CASE("binomial_sigma") {
    CHECK(binomial_sigma(0.5, 100) == Approx(0.05));
    CHECK(binomial_sigma(0.0, 100) == 0.0);
    CHECK(binomial_sigma(0.3, 0) == 0.0);
}

TEST_CASE("ks_two_sample") {
    std::vector<double> a{3, 1, 2}, b{6, 4, 5};
    KsResult r = ks_two_sample(a, b);
    CHECK(r.statistic == 1.0);
    CHECK(a == std::vector<double>{1, 2, 3});

    std::vector<double> c(500), d(500);
    for (int i = 0; i < 500; ++i) c[i] = d[i] = i;
    r = ks_two_sample(c, d);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);

    // Offsetting one grid by 60 of 1000 steps gives D = 0.06; the Kolmogorov
    // tail at the corrected lambda is 0.052486.
    std::vector<double> e(1000), f(1000);
    for (int i = 0; i < 1000; ++i) {
        e[i] = i;
        f[i] = i + 60;
    }
    r = ks_two_sample(e, f);
    CHECK(r.statistic == Approx(0.06).epsilon(1e-12));
    CHECK(r.p_value == Approx(0.05248612).epsilon(1e-6));

    std::vector<double> empty;
    CHECK_THROWS_AS(ks_two_sample(empty, e), ContractError);
}

TEST_CASE("mean_and_stderr") {
    const MeanStat m = mean_and_stderr({1, 2, 3, 4});
    CHECK(m.mean == 2.5);
    CHECK(m.std_error == Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(mean_and_stderr({}).mean == 0.0);
    CHECK(mean_and_stderr({7}).std_error == 0.0);
}

TEST_CASE("seed derivation is order free and distinct") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform01(rng);
        CHECK((u >= 0.0 && u < 1.0));
        const double v = uniform01_open_low(rng);
        CHECK((v > 0.0 && v <= 1.0));
    }
}
