#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "bcpp/constants.hpp"
#include "bcpp/green.hpp"
#include "bcpp/lattice.hpp"
#include "bcpp/rng.hpp"

using namespace bcpp;

// Independently computed reference values (lattice Green function at the
// origin, cross-checked against the d=3 Watson closed form):
static constexpr double kGamma3 = 0.659462670449001;
static constexpr double kGamma4 = 0.806798326775016;
static constexpr double kGamma5 = 0.864821390179345;
static constexpr double kGamma6 = 0.895284504371178;

TEST_CASE("torus neighbors") {
    SUBCASE("d=1 wrap") {
        Torus t(1, 4);
        Site x{};
        x[0] = 0;
        auto nb = t.neighbors(x);
        REQUIRE(nb.size() == 2);
        std::set<int> got{nb[0].first[0], nb[1].first[0]};
        CHECK(got == std::set<int>{1, 3});
    }
    SUBCASE("d=3 count") {
        Torus t(3, 40);
        Site x{};
        auto nb = t.neighbors(x);
        CHECK(nb.size() == 6);
    }
    SUBCASE("d=2 corner") {
        Torus t(2, 4);
        Site x{};
        x[0] = 3;
        x[1] = 3;
        auto nb = t.neighbors(x);
        std::set<std::pair<int, int>> got;
        for (auto& [s, dir] : nb) got.insert({s[0], s[1]});
        std::set<std::pair<int, int>> want{{0, 3}, {2, 3}, {3, 0}, {3, 2}};
        CHECK(got == want);
    }
    SUBCASE("flat index round trip") {
        Torus t(3, 6);
        for (int64_t i : {int64_t{0}, int64_t{17}, int64_t{215}}) {
            CHECK(t.index(t.site(i)) == i);
        }
        // neighbor via flat index agrees with coordinate arithmetic
        Site x{};
        x[0] = 5;
        x[1] = 2;
        int64_t idx = t.index(x);
        Site up = t.site(t.neighbor(idx, 0, +1));
        CHECK(up[0] == 0);
        CHECK(up[1] == 2);
    }
}

TEST_CASE("params validation") {
    ModelParams p;
    p.validate();
    p.L = 7;
    CHECK(p.violations().size() == 1); // odd side
    p.L = 40;
    p.lambda1 = 30.0;
    p.N = 10;
    p.lambda = 2.0;
    CHECK(!p.violations().empty()); // lambda < lambda1/N
}

TEST_CASE("gamma_d via Green function matches the Watson-integral oracle") {
    CHECK(gamma_d(3) == doctest::Approx(kGamma3).epsilon(1e-10));
    CHECK(gamma_d(4) == doctest::Approx(kGamma4).epsilon(1e-10));
    CHECK(gamma_d(5) == doctest::Approx(kGamma5).epsilon(1e-10));
    CHECK(gamma_d(6) == doctest::Approx(kGamma6).epsilon(1e-10));
    CHECK(gamma_d(5) > 0.8);
    CHECK(gamma_d(5) < 0.9);
    CHECK_THROWS_AS(gamma_d(2), std::invalid_argument);
}

TEST_CASE("escape probability Monte Carlo vs Green function") {
    auto est = estimate_gamma_d(3, 4000, 20000, 20240701);
    double tol = 4.0 * est.stderr_ + est.diag("bias_bound");
    CHECK(std::fabs(est.mean - kGamma3) <= tol);
    CHECK(est.diag("bias_bound") > 0.0);
    CHECK_THROWS_AS(estimate_gamma_d(1, 100, 100, 1), std::invalid_argument);

    auto est5 = estimate_gamma_d(5, 3000, 20000, 7);
    CHECK(est5.mean > 0.8);
    CHECK(est5.mean < 0.9);

    // monotone increasing in d within 3 combined stderr
    double prev = est.mean - 3.0 * est.stderr_;
    for (int d : {4, 5, 6}) {
        auto e = estimate_gamma_d(d, 3000, 20000, 100 + d);
        CHECK(e.mean + 3.0 * e.stderr_ > prev);
        prev = e.mean - 3.0 * e.stderr_;
    }
}

TEST_CASE("derived constants") {
    ModelParams p;
    p.d = 3;
    p.lambda = 2.0;
    auto c = derive_constants(p, kGamma3);
    CHECK(c.h_lambda == doctest::Approx(0.2174695).epsilon(1e-5));
    CHECK(c.second_moment_limit() == doctest::Approx(5.598345).epsilon(1e-5));
    CHECK(c.C_lambda_d == doctest::Approx(72.7785).epsilon(1e-4));
    CHECK(c.lambda_threshold == doctest::Approx(0.5225885).epsilon(1e-5));
    CHECK(c.supercritical);

    // h vanishes exactly at threshold
    p.lambda = c.lambda_threshold;
    auto c2 = derive_constants(p, kGamma3);
    CHECK(std::fabs(c2.h_lambda) < 1e-14);
    CHECK(!c2.supercritical);

    // subcritical flags, does not abort
    p.lambda = 0.1;
    auto c3 = derive_constants(p, kGamma3);
    CHECK(!c3.supercritical);
    CHECK(c3.h_lambda < 0.0);
}

TEST_CASE("geometric identity gamma/(gamma - (1+2ld)/(4ld)) = 1 + 1/h") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 3 + static_cast<int>(rng.below(8));
        double g = gamma_d(d);
        double thr = 1.0 / (2.0 * d * (2.0 * g - 1.0));
        double lam = thr * (1.001 + 60.0 * rng.uniform());
        ModelParams p;
        p.d = d;
        p.lambda = lam;
        auto c = derive_constants(p, g);
        REQUIRE(c.supercritical);
        double lhs = g / (g - (1.0 + 2.0 * lam * d) / (4.0 * lam * d));
        double rhs = 1.0 + 1.0 / c.h_lambda;
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::fabs(rhs));
    }
}

TEST_CASE("hitting probability k") {
    int o[3] = {0, 0, 0};
    CHECK(hitting_probability_k(std::span<const int>(o, 3), 3) == 1.0);

    int e1[3] = {1, 0, 0};
    CHECK(hitting_probability_k(std::span<const int>(e1, 3), 3) ==
          doctest::Approx(1.0 - kGamma3).epsilon(1e-8));

    SUBCASE("symmetry under permutation and sign flips") {
        int a[3] = {2, -5, 1};
        int b[3] = {5, 1, 2};
        int c[3] = {-1, 2, -5};
        double ka = hitting_probability_k(std::span<const int>(a, 3), 3);
        CHECK(hitting_probability_k(std::span<const int>(b, 3), 3) == doctest::Approx(ka));
        CHECK(hitting_probability_k(std::span<const int>(c, 3), 3) == doctest::Approx(ka));
    }

    SUBCASE("C |x|^{2-d} decay at d=3") {
        int r16[3] = {16, 0, 0};
        int r32[3] = {32, 0, 0};
        double k16 = hitting_probability_k(std::span<const int>(r16, 3), 3);
        double k32 = hitting_probability_k(std::span<const int>(r32, 3), 3);
        CHECK(k32 / k16 == doctest::Approx(0.5).epsilon(0.03));
        CHECK(k16 < 0.05);
    }

    CHECK_THROWS_AS(hitting_probability_k(std::span<const int>(e1, 2), 2),
                    std::invalid_argument);
}

TEST_CASE("scaled Bessel implementation agrees across regimes") {
    // series / std boundary
    for (double x : {0.5, 5.0, 50.0, 580.0}) {
        double direct = std::exp(-x) * std::cyl_bessel_i(0.0, x);
        CHECK(scaled_bessel_i(0, x) == doctest::Approx(direct).epsilon(1e-12));
    }
    // large-x path vs asymptotic series at the crossover
    double x = 700.0;
    double asym = (1.0 + 1.0 / (8 * x) + 9.0 / (128 * x * x)) / std::sqrt(2.0 * M_PI * x);
    CHECK(scaled_bessel_i(0, x) == doctest::Approx(asym).epsilon(1e-6));
    // high order at small argument is essentially zero
    CHECK(scaled_bessel_i(80, 1.0) < 1e-100);
}
