#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvfp/errors.hpp"
#include "mvfp/reduced.hpp"
#include "support.hpp"

using namespace mvfp;
using testing::kTwoPi;

namespace {

ScalarField2 smooth_density(std::array<int, 2> n, double a = 0.3) {
    return ScalarField2::from_function(n, [a](double x, double y) {
        return 1.0 + a * std::cos(kTwoPi * x) * std::sin(kTwoPi * y) + 0.5 * a * std::sin(kTwoPi * x);
    });
}

ReducedState heavy_state(const ScalarField2& N, double delta) {
    ReducedState s;
    s.N = N;
    s.species = Species::heavy;
    s.delta = delta;
    return s;
}

ScaledParams params_for(Species sp, double delta) {
    ScaledParams p;
    p.sigma = sp == Species::light ? -1 : 1;
    p.delta = delta;
    return p;
}

double l43_distance(const ScalarField2& a, const ScalarField2& b) { return lp_norm(a - b, 4.0 / 3.0); }

}  // namespace

TEST_CASE("drift field") {
    const std::array<int, 2> n{16, 16};
    for (int sigma : {-1, 1}) {
        const auto U = drift_field(ScalarField2(n, 0.7), std::nullopt, sigma);
        CHECK(max_abs(U[0]) == 0.0);
        CHECK(max_abs(U[1]) == 0.0);
    }
    const auto U = drift_field(ScalarField2::from_function(n, [](double x, double) { return std::sin(kTwoPi * x); }),
                               std::nullopt, 1);
    const ScalarField2 ex = ScalarField2::from_function(n, [](double x, double) { return kTwoPi * std::cos(kTwoPi * x); });
    CHECK(max_abs(U[0]) < 1e-13);
    CHECK(max_abs(U[1] - ex) < 1e-12);

    std::mt19937_64 rng(21);
    const ScalarField2 phit = testing::random_field2(n, rng);
    for (int sigma : {-1, 1}) {
        const auto a = drift_field(phit, std::nullopt, sigma);
        const auto b = drift_field(phit, ScalarField2(n, 1.0), sigma);
        CHECK(max_abs(a[0] - b[0]) == 0.0);
        CHECK(max_abs(a[1] - b[1]) == 0.0);
    }
    SUBCASE("variable amplitude with flat potential") {
        const ScalarField2 b = ScalarField2::from_function(n, [](double, double y) { return 1.0 + 0.2 * std::cos(kTwoPi * y); });
        for (int sigma : {-1, 1}) {
            const auto V = drift_field(ScalarField2(n, 0.0), b, sigma);
            // grad b = (0, -0.2 (2 pi) sin), perp = (0.2 (2 pi) sin, 0)
            const ScalarField2 ex1 = ScalarField2::from_function(n, [&](double, double y) {
                const double bb = 1.0 + 0.2 * std::cos(kTwoPi * y);
                return -sigma * 0.2 * kTwoPi * std::sin(kTwoPi * y) / (bb * bb);
            });
            CHECK(max_abs(V[0] - ex1) < 1e-12);
            CHECK(max_abs(V[1]) < 1e-13);
        }
    }
    ScalarField2 bad(n, 1.0);
    bad(3, 4) = 0.0;
    CHECK_THROWS_AS(drift_field(phit, bad, 1), InvalidParameter);
}

TEST_CASE("slaved density") {
    const std::array<int, 3> n{6, 6, 16};
    std::mt19937_64 rng(22);
    const ScalarField2 N = testing::unit_mean(smooth_density({6, 6}));
    const ScalarField2 f2 = testing::random_field2({6, 6}, rng);
    for (int sigma : {-1, 1}) {
        CHECK(max_abs(slaved_density(N, extend_parallel(f2, n[2]), sigma) - extend_parallel(N, n[2])) < 1e-14);
        const ScalarField3 phi = testing::random_field3(n, rng, 0.5);
        CHECK(max_abs(integrate_parallel(slaved_density(N, phi, sigma)) - N) < 1e-12);
    }
    const ScalarField3 c = ScalarField3::from_function(n, [](double, double, double z) { return std::cos(kTwoPi * z); });
    const ScalarField3 s = slaved_density(ScalarField2({6, 6}, 1.0), c, -1);
    const ScalarField3 ex = ScalarField3::from_function(n, [](double, double, double z) {
        return std::exp(std::cos(kTwoPi * z)) / testing::bessel_i0(1.0);
    });
    CHECK(max_abs(s - ex) < 1e-13);
}

TEST_CASE("gc_step") {
    const std::array<int, 2> n{32, 32};
    const ScalarField2 N = smooth_density(n);
    const ReducedState s = heavy_state(N, 1.0);
    const VectorField2 zero{ScalarField2(n, 0.0), ScalarField2(n, 0.0)};
    CHECK(max_abs(gc_step(s, zero, 0.1).N - N) == 0.0);

    const ScalarField2 phit = ScalarField2::from_function(n, [](double x, double y) {
        return std::cos(kTwoPi * x) + std::cos(kTwoPi * y);
    });
    const VectorField2 U = drift_field(phit, std::nullopt, 1);
    const double dmax = gc_max_dt(U);
    CHECK(max_abs(gc_step(heavy_state(ScalarField2(n, 1.0), 1.0), U, dmax).N - ScalarField2(n, 1.0)) < 1e-14);

    SUBCASE("mass is exact") {
        ReducedState t = s;
        for (int i = 0; i < 50; ++i) t = gc_step(t, U, dmax);
        CHECK(mean(t.N) == doctest::Approx(mean(N)).epsilon(1e-14));
        CHECK(t.time == doctest::Approx(50 * dmax));
    }
    SUBCASE("local error is fifth order") {
        double e[2];
        int k = 0;
        for (double dt : {dmax, 0.5 * dmax}) {
            const ScalarField2 one = gc_step(s, U, dt).N;
            const ScalarField2 two = gc_step(gc_step(s, U, 0.5 * dt), U, 0.5 * dt).N;
            e[k++] = max_abs(one - two);
        }
        CHECK(e[1] > 0);
        CHECK(e[0] / e[1] == doctest::Approx(32.0).epsilon(0.15));
    }
    SUBCASE("CFL violation") {
        try {
            gc_step(s, U, 1.01 * dmax);
            FAIL("expected CflViolation");
        } catch (const CflViolation& e) {
            CHECK(e.admissible_dt == doctest::Approx(dmax));
        }
    }
}

TEST_CASE("solve_reduced: equilibria are stationary") {
    ReducedOptions o;
    o.dt = 0.01;
    {
        const auto tr = solve_reduced(heavy_state(ScalarField2({16, 16}, 1.0), 0.5), params_for(Species::heavy, 0.5), 0.2, o);
        for (const auto& st : tr.states) CHECK(max_abs(st.N - ScalarField2({16, 16}, 1.0)) == 0.0);
        for (const auto& sm : tr.samples) CHECK(sm.max_u == 0.0);
    }
    {
        ReducedState s;
        s.species = Species::light;
        s.N = ScalarField2({8, 8}, 1.0);
        s.ubar = ScalarField3({8, 8, 8}, 1.0);
        s.delta = 0.5;
        const auto tr = solve_reduced(s, params_for(Species::light, 0.5), 0.1, o);
        for (const auto& st : tr.states) CHECK(max_abs(st.N - s.N) == 0.0);
    }
}

TEST_CASE("Picard iterates contract geometrically on a short horizon") {
    ReducedOptions o;
    o.mode = ReducedMode::picard;
    o.picard_iterations = 6;
    o.dt = 0.005;
    o.sample_every = 4;
    const ScalarField2 N = testing::unit_mean(smooth_density({16, 16}));
    const auto tr = solve_reduced(heavy_state(N, 0.3), params_for(Species::heavy, 0.3), 0.2, o);
    REQUIRE(tr.iterates.size() == 6);
    std::vector<double> d;
    for (std::size_t it = 0; it + 1 < tr.iterates.size(); ++it) {
        double m = 0;
        for (std::size_t k = 0; k < tr.iterates[it].size(); ++k)
            m = std::max(m, l43_distance(tr.iterates[it + 1][k], tr.iterates[it][k]));
        d.push_back(m);
    }
    REQUIRE(d.front() > 0);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        CHECK(d[i + 1] < 0.5 * d[i]);
    }
}

TEST_CASE("coupled heavy run: conservation and dimensional reduction") {
    ReducedOptions o;
    o.dt = 2e-3;
    o.sample_every = 100;
    o.check_mixed_residual = true;
    const ScalarField2 N = testing::unit_mean(smooth_density({16, 16}, 0.2));
    const double l2_0 = lp_norm(N, 2);
    const auto tr = solve_reduced(heavy_state(N, 0.5), params_for(Species::heavy, 0.5), 2.0, o);
    REQUIRE(tr.samples.size() == 11);
    for (const auto& sm : tr.samples) {
        CHECK(sm.mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(sm.l2 - l2_0) <= 1e-6 * l2_0);
        CHECK(sm.pb_residual <= 1e-8);
    }
    CHECK(tr.samples.back().max_u > 0);
}

TEST_CASE("coupled light run conserves mass") {
    ReducedState s;
    s.species = Species::light;
    s.N = testing::unit_mean(smooth_density({8, 8}, 0.2));
    s.ubar = ScalarField3::from_function({8, 8, 8}, [](double, double, double z) { return 1.0 + 0.2 * std::cos(kTwoPi * z); });
    s.delta = 0.5;
    ReducedOptions o;
    o.dt = 5e-3;
    o.sample_every = 10;
    const auto tr = solve_reduced(s, params_for(Species::light, 0.5), 0.2, o);
    for (const auto& sm : tr.samples) CHECK(sm.mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blow-up guard and invalid input") {
    ReducedOptions o;
    o.dt = 0.01;
    o.grad_bound = 1e-3;
    const ScalarField2 N = testing::unit_mean(smooth_density({16, 16}));
    CHECK_THROWS_AS(solve_reduced(heavy_state(N, 0.5), params_for(Species::heavy, 0.5), 0.1, o), BlowUpError);

    o.grad_bound = 1e3;
    ScalarField2 neg = N;
    neg(0, 0) = -0.1;
    neg(0, 1) += 0.1;
    CHECK_THROWS_AS(solve_reduced(heavy_state(neg, 0.5), params_for(Species::heavy, 0.5), 0.1, o), InvalidParameter);
    CHECK_THROWS_AS(solve_reduced(heavy_state(2.0 * N, 0.5), params_for(Species::heavy, 0.5), 0.1, o), InvalidParameter);
    o.mode = ReducedMode::external;
    CHECK_THROWS_AS(solve_reduced(heavy_state(N, 0.5), params_for(Species::heavy, 0.5), 0.1, o), InvalidParameter);
}
