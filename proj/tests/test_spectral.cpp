#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>

#include "mvfp/errors.hpp"
#include "mvfp/fft.hpp"
#include "mvfp/hermite.hpp"
#include "mvfp/simd/kernels.hpp"
#include "mvfp/spectral.hpp"
#include "support.hpp"

using namespace mvfp;
using testing::kTwoPi;

namespace {

double max_diff(const KineticState& a, const KineticState& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs_state(const KineticState& a) {
    double m = 0;
    for (double x : a.coeffs()) m = std::max(m, std::abs(x));
    return m;
}

KineticState single_mode(const Grid& g, int m1, int m2, int m3, double c = 1.0) {
    KineticState s(g);
    s.set_mode_field(m1, m2, m3, ScalarField3(g.nx, c));
    return s;
}

// <a, b> by direct quadrature of a(x, v) b(x, v) e^{-sigma phi} M(v) in (x, v).
double dense_inner(const KineticState& a, const KineticState& b, const ScalarField3& phi, int sigma) {
    const auto& g = a.grid();
    const auto r = testing::v_rule();
    const std::size_t q = r.v.size();
    double s = 0;
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const auto fa = testing::eval_point(a, x, r);
        const auto fb = testing::eval_point(b, x, r);
        double sx = 0;
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j)
                for (std::size_t k = 0; k < q; ++k) {
                    const std::size_t n = (i * q + j) * q + k;
                    sx += r.w[i] * r.w[j] * r.w[k] * fa[n] * fb[n];
                }
        s += std::exp(-sigma * phi[x]) * sx;
    }
    return s / static_cast<double>(g.n_space());
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_NOTHROW(validate_grid(Grid{{4, 4, 4}, {2, 2, 2}}));
    CHECK_THROWS_AS(validate_grid(Grid{{5, 4, 4}, {2, 2, 2}}), InvalidParameter);
    CHECK_THROWS_AS(validate_grid(Grid{{4, 4, 4}, {1, 2, 2}}), InvalidParameter);
}

TEST_CASE("Gauss-Hermite rule integrates Gaussian moments") {
    const auto r = gauss_hermite(8);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double v = r.nodes[i], w = r.weights[i];
        m0 += w;
        m2 += w * v * v;
        m4 += w * std::pow(v, 4);
        m6 += w * std::pow(v, 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-13));
    for (double v : {-2.3, 0.0, 0.7, 3.1}) {
        const auto a = hermite_values(7, v);
        const auto b = testing::herm(7, v);
        for (int k = 0; k < 7; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-13));
    }
}

TEST_CASE("ladder examples") {
    const Grid g{{2, 2, 2}, {4, 3, 3}};
    SUBCASE("lowering the ground mode gives zero") {
        for (int a = 0; a < 3; ++a) CHECK(max_abs_state(apply_ladder(single_mode(g, 0, 0, 0), a, Ladder::lower)) == 0.0);
    }
    SUBCASE("lowering mode (2,0,0) gives sqrt 2 times mode (1,0,0), by quadrature") {
        const KineticState out = apply_ladder(single_mode(g, 2, 0, 0), 0, Ladder::lower);
        // oracle: int d/dv H2 * H1 dM by trapezoid rule with a centred derivative
        const auto r = testing::v_rule(801, 12.0);
        double proj = 0;
        const double h = 1e-5;
        for (std::size_t i = 0; i < r.v.size(); ++i) {
            const double d = (testing::herm(3, r.v[i] + h)[2] - testing::herm(3, r.v[i] - h)[2]) / (2 * h);
            proj += r.w[i] * d * testing::herm(2, r.v[i])[1];
        }
        CHECK(proj == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
        CHECK(out.at(0, g.mode_index(1, 0, 0)) == doctest::Approx(proj).epsilon(1e-8));
        KineticState expect = single_mode(g, 1, 0, 0, std::sqrt(2.0));
        CHECK(max_diff(out, expect) < 1e-15);
    }
    SUBCASE("raise then lower multiplies mode k by k+1") {
        for (int k = 0; k + 1 < g.nv[0]; ++k) {
            const KineticState s = single_mode(g, k, 0, 0);
            const KineticState t = apply_ladder(apply_ladder(s, 0, Ladder::raise), 0, Ladder::lower);
            KineticState expect = s;
            expect *= k + 1.0;
            CHECK(max_diff(t, expect) < 1e-14);
        }
    }
    SUBCASE("raising past the truncation drops the mode") {
        CHECK(max_abs_state(apply_ladder(single_mode(g, 3, 0, 0), 0, Ladder::raise)) == 0.0);
    }
}

TEST_CASE("lowering is the adjoint of raising on padded states") {
    std::mt19937_64 rng(7);
    const Grid g{{4, 4, 4}, {4, 5, 3}};
    const ScalarField3 phi = normalize_phi(testing::random_field3(g.nx, rng), -1);
    for (int trial = 0; trial < 5; ++trial) {
        const KineticState a = testing::random_state(g, rng);
        const KineticState b = testing::random_state(g, rng);
        for (int ax = 0; ax < 3; ++ax) {
            const double l = weighted_inner(apply_ladder(a, ax, Ladder::lower), b, phi, -1);
            const double r = weighted_inner(a, apply_ladder(b, ax, Ladder::raise), phi, -1);
            CHECK(std::abs(l - r) <= 1e-10 * std::max(std::abs(l), 1.0));
        }
    }
}

TEST_CASE("|A*.A h|^2 = |grad_v h|^2 + |grad_v grad_v h|^2 on padded states") {
    std::mt19937_64 rng(11);
    const Grid g{{4, 2, 2}, {5, 4, 4}};
    const ScalarField3 phi(g.nx, 0.0);
    for (int trial = 0; trial < 5; ++trial) {
        const KineticState h = testing::random_state(g, rng);
        KineticState nh(g);
        double first = 0, second = 0;
        for (int i = 0; i < 3; ++i) {
            const KineticState li = apply_ladder(h, i, Ladder::lower);
            nh += apply_ladder(li, i, Ladder::raise);
            first += weighted_inner(li, li, phi, 1);
            for (int j = 0; j < 3; ++j) {
                const KineticState lij = apply_ladder(li, j, Ladder::lower);
                second += weighted_inner(lij, lij, phi, 1);
            }
        }
        const double lhs = weighted_inner(nh, nh, phi, 1);
        CHECK(lhs == doctest::Approx(first + second).epsilon(1e-8));
    }
}

TEST_CASE("x_derivative") {
    const std::array<int, 3> n{16, 8, 12};
    SUBCASE("constant field") {
        for (int a = 0; a < 3; ++a) CHECK(max_abs(x_derivative(ScalarField3(n, 2.5), a)) < 1e-12);
    }
    SUBCASE("cosine along x1") {
        const auto f = ScalarField3::from_function(n, [](double x, double, double) { return std::cos(kTwoPi * x); });
        const auto d = x_derivative(f, 0);
        const auto e = ScalarField3::from_function(n, [](double x, double, double) { return -kTwoPi * std::sin(kTwoPi * x); });
        CHECK(max_abs(d - e) < 1e-12);
        const auto f2 = ScalarField2::from_function({8, 10}, [](double, double y) { return std::cos(kTwoPi * 2 * y); });
        const auto e2 = ScalarField2::from_function({8, 10}, [](double, double y) { return -2 * kTwoPi * std::sin(kTwoPi * 2 * y); });
        CHECK(max_abs(x_derivative(f2, 1) - e2) < 1e-11);
    }
    SUBCASE("band-limited field against centred finite differences") {
        std::mt19937_64 rng(3);
        // spectral derivative vs analytic, then FD error on refined grids shrinks like dx^2
        const double c1 = 0.7, c2 = -0.4;
        auto f = [&](double x) { return c1 * std::sin(kTwoPi * x) + c2 * std::cos(kTwoPi * 3 * x); };
        auto df = [&](double x) { return c1 * kTwoPi * std::cos(kTwoPi * x) - c2 * 3 * kTwoPi * std::sin(kTwoPi * 3 * x); };
        const auto F = ScalarField3::from_function({16, 2, 2}, [&](double x, double, double) { return f(x); });
        const auto D = x_derivative(F, 0);
        double errs[2];
        int k = 0;
        for (int m : {64, 128}) {
            double e = 0;
            for (int i = 0; i < 16; ++i) {
                const double x = i / 16.0, h = 1.0 / m;
                const double fd = (f(x + h) - f(x - h)) / (2 * h);
                e = std::max(e, std::abs(fd - D(i, 0, 0)));
                CHECK(D(i, 0, 0) == doctest::Approx(df(x)).epsilon(1e-11));
            }
            errs[k++] = e;
        }
        CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.02));
    }
    SUBCASE("state derivative acts coefficient-wise and commutes with ladders") {
        std::mt19937_64 rng(5);
        const Grid g{{8, 4, 6}, {3, 3, 3}};
        const KineticState h = testing::random_state(g, rng, false);
        for (int a = 0; a < 3; ++a) {
            const KineticState d = x_derivative(h, a);
            const ScalarField3 ref = x_derivative(h.mode_field(1, 2, 0), a);
            CHECK(max_abs(d.mode_field(1, 2, 0) - ref) < 1e-12);
            for (int b = 0; b < 3; ++b)
                for (auto dir : {Ladder::raise, Ladder::lower}) {
                    const KineticState x1 = apply_ladder(x_derivative(h, a), b, dir);
                    const KineticState x2 = x_derivative(apply_ladder(h, b, dir), a);
                    // same algebra, different rounding order
                    CHECK(max_diff(x1, x2) <= 1e-14 * max_abs_state(x1));
                }
        }
    }
}

TEST_CASE("weighted inner product") {
    std::mt19937_64 rng(21);
    const Grid g{{4, 4, 4}, {3, 3, 3}};
    const ScalarField3 phi = normalize_phi(ScalarField3::from_function(g.nx, [](double x, double, double z) {
                                               return 0.3 * std::cos(kTwoPi * x) + 0.3 * std::cos(kTwoPi * z);
                                           }),
                                           -1);
    SUBCASE("unit mass of mu") {
        const KineticState one = KineticState::constant(g, 1.0);
        CHECK(weighted_inner(one, one, phi, -1) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("orthogonal modes") {
        CHECK(weighted_inner(single_mode(g, 1, 0, 2), single_mode(g, 0, 1, 2), phi, -1) == 0.0);
    }
    SUBCASE("random states against direct (x, v) quadrature") {
        const KineticState a = testing::random_state(g, rng, false);
        const KineticState b = testing::random_state(g, rng, false);
        const double w = weighted_inner(a, b, phi, -1);
        CHECK(w == doctest::Approx(dense_inner(a, b, phi, -1)).epsilon(1e-8));
        CHECK(w == weighted_inner(b, a, phi, -1));
    }
    SUBCASE("grid mismatch") {
        CHECK_THROWS_AS(weighted_inner(KineticState(g), KineticState(Grid{{4, 4, 4}, {2, 3, 3}}), phi, -1), GridMismatch);
    }
}

TEST_CASE("partial norms") {
    const Grid g{{4, 4, 4}, {4, 4, 4}};
    const ScalarField3 zero(g.nx, 0.0);
    SUBCASE("constant state") {
        const NormSet ns = partial_norms(KineticState::constant(g, -3.0), zero, 1);
        CHECK(ns.n0 == doctest::Approx(3.0));
        CHECK(ns.dv_par == 0.0);
        CHECK(ns.dv_perp == 0.0);
        CHECK(ns.dx_par == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ns.dx_perp < 1e-12);
        CHECK(ns.grad_v == 0.0);
    }
    SUBCASE("single mode (1,0,0) uniform in x") {
        const NormSet ns = partial_norms(single_mode(g, 1, 0, 0, 2.0), zero, 1);
        // oracle: d/dv1 (2 v1) = 2, whose L2(mu) norm is 2
        CHECK(ns.n0 == doctest::Approx(2.0));
        CHECK(ns.dv_perp == doctest::Approx(2.0));
        CHECK(ns.dv_par == 0.0);
        CHECK(ns.dx_par < 1e-12);
        CHECK(ns.dx_perp < 1e-12);
        CHECK(ns.grad_v == doctest::Approx(2.0));
        CHECK(ns.grad_v_dv_perp == 0.0);
    }
    SUBCASE("Cauchy-Schwarz on random states") {
        std::mt19937_64 rng(99);
        const Grid gs{{4, 4, 4}, {3, 3, 3}};
        for (int i = 0; i < 100; ++i) {
            const ScalarField3 phi = normalize_phi(testing::random_field3(gs.nx, rng), i % 2 ? 1 : -1);
            const NormSet ns = partial_norms(testing::random_state(gs, rng, false), phi, i % 2 ? 1 : -1, i % 10 == 0);
            CHECK(std::abs(ns.cross_par) <= ns.dv_par * ns.dx_par * (1 + 1e-12));
            CHECK(std::abs(ns.cross_perp) <= ns.dv_perp * ns.dx_perp * (1 + 1e-12));
            CHECK(ns.n0 >= 0.0);
        }
    }
    SUBCASE("entries against explicit ladder and derivative compositions") {
        std::mt19937_64 rng(4);
        const ScalarField3 phi = normalize_phi(testing::random_field3(g.nx, rng), -1);
        const KineticState h = testing::random_state(g, rng);
        const NormSet ns = partial_norms(h, phi, -1, true);
        auto nrm2 = [&](const KineticState& s) { return weighted_inner(s, s, phi, -1); };
        const KineticState dv3 = apply_ladder(h, 2, Ladder::lower), dx3 = x_derivative(h, 2);
        CHECK(ns.dv_par == doctest::Approx(std::sqrt(nrm2(dv3))).epsilon(1e-12));
        CHECK(ns.dx_par == doctest::Approx(std::sqrt(nrm2(dx3))).epsilon(1e-12));
        CHECK(ns.cross_par == doctest::Approx(weighted_inner(dv3, dx3, phi, -1)).epsilon(1e-12));
        double perp_v = 0, perp_x = 0, cross = 0, gdx = 0;
        for (int a = 0; a < 2; ++a) {
            const KineticState dv = apply_ladder(h, a, Ladder::lower), dx = x_derivative(h, a);
            perp_v += nrm2(dv);
            perp_x += nrm2(dx);
            cross += weighted_inner(dv, dx, phi, -1);
            for (int b = 0; b < 3; ++b) gdx += nrm2(apply_ladder(dx, b, Ladder::lower));
        }
        CHECK(ns.dv_perp == doctest::Approx(std::sqrt(perp_v)).epsilon(1e-12));
        CHECK(ns.dx_perp == doctest::Approx(std::sqrt(perp_x)).epsilon(1e-12));
        CHECK(ns.cross_perp == doctest::Approx(cross).epsilon(1e-12));
        CHECK(ns.grad_v_dx_perp == doctest::Approx(std::sqrt(gdx)).epsilon(1e-12));
        double gv = 0, gvv3 = 0;
        for (int b = 0; b < 3; ++b) {
            gv += nrm2(apply_ladder(h, b, Ladder::lower));
            gvv3 += nrm2(apply_ladder(dv3, b, Ladder::lower));
        }
        CHECK(ns.grad_v == doctest::Approx(std::sqrt(gv)).epsilon(1e-12));
        CHECK(ns.grad_v_dv_par == doctest::Approx(std::sqrt(gvv3)).epsilon(1e-12));
    }
}

TEST_CASE("vector kernels agree with the scalar reference") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> N(0, 1);
    const auto& ref = simd::scalar_kernels();
    INFO("active kernel table: " << simd::active_name());
    for (const simd::KernelTable* t : simd::available_kernels()) {
        INFO("table " << t->name);
        for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 15u, 16u, 33u, 64u, 127u, 512u}) {
            std::vector<double> x(n), y(n), d(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = N(rng);
                y[i] = N(rng);
                d[i] = N(rng);
            }
            auto y1 = y, y2 = y;
            ref.axpy(n, 0.37, x.data(), y1.data());
            t->axpy(n, 0.37, x.data(), y2.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
            ref.scale(n, -1.3, x.data(), y1.data());
            t->scale(n, -1.3, x.data(), y2.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);
            ref.mul(n, d.data(), x.data(), y1.data());
            t->mul(n, d.data(), x.data(), y2.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);
            y1 = y;
            y2 = y;
            ref.mul_add(n, d.data(), x.data(), y1.data());
            t->mul_add(n, d.data(), x.data(), y2.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
            const double s = ref.dot(n, x.data(), y.data());
            CHECK(t->dot(n, x.data(), y.data()) == doctest::Approx(s).epsilon(1e-13).scale(std::sqrt(double(n)) + 1));
            const double w = ref.wdot(n, d.data(), x.data(), y.data());
            CHECK(t->wdot(n, d.data(), x.data(), y.data()) == doctest::Approx(w).epsilon(1e-13).scale(std::sqrt(double(n)) + 1));
        }
        for (int m : {2, 5, 8, 16, 70}) {
            for (std::size_t len : {1u, 3u, 8u, 20u, 64u}) {
                const std::size_t stride = len + 3;
                std::vector<double> mat(m * m), in(m * stride), o1(m * stride, 0.0), o2(m * stride, 0.0);
                for (auto& v : mat) v = N(rng);
                for (auto& v : in) v = N(rng);
                ref.line_matmul(m, mat.data(), stride, len, in.data(), o1.data());
                t->line_matmul(m, mat.data(), stride, len, in.data(), o2.data());
                for (int j = 0; j < m; ++j)
                    for (std::size_t l = 0; l < len; ++l)
                        CHECK(o1[j * stride + l] == doctest::Approx(o2[j * stride + l]).epsilon(1e-13).scale(m));
            }
        }
    }
}

TEST_CASE("FFT helpers") {
    const std::array<int, 3> n{8, 8, 8};
    const auto f = ScalarField3::from_function(n, [](double x, double y, double) { return std::cos(kTwoPi * (x + 2 * y)); });
    CHECK(max_abs(laplacian(f) + (kTwoPi * kTwoPi * 5.0) * f) < 1e-10);
    const auto g = ScalarField2::from_function({12, 12}, [](double x, double y) {
        return 0.5 * std::cos(kTwoPi * x) + std::sin(kTwoPi * 5 * y);
    });
    const auto dg = dealias(g);
    const auto keep = ScalarField2::from_function({12, 12}, [](double x, double) { return 0.5 * std::cos(kTwoPi * x); });
    CHECK(max_abs(dg - keep) < 1e-14);
    // L2 of 0.5 cos is 0.5/sqrt 2; the k=5 mode is excluded at kmax 5
    CHECK(low_mode_l2(g, 5) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(low_mode_l2(g, 6) == doctest::Approx(std::sqrt(0.125 + 0.5)).epsilon(1e-13));
}

TEST_CASE("parallel integration and embedding") {
    std::mt19937_64 rng(8);
    const ScalarField2 f = testing::random_field2({6, 4}, rng);
    CHECK(max_abs(integrate_parallel(extend_parallel(f, 8)) - f) < 1e-15);
    const ScalarField3 F = testing::random_field3({6, 4, 8}, rng);
    CHECK(mean(integrate_parallel(F)) == doctest::Approx(mean(F)).epsilon(1e-14));
}

TEST_CASE("state checkpoint layout and round trip") {
    std::mt19937_64 rng(2);
    const Grid g{{4, 2, 6}, {3, 2, 4}};
    const KineticState s = testing::random_state(g, rng, false);
    std::stringstream ss;
    write_state(ss, s);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 6 * 4 + 8 * g.size());
    std::int32_t hdr[6];
    std::memcpy(hdr, bytes.data(), sizeof hdr);  // little-endian host
    CHECK(hdr[0] == 4);
    CHECK(hdr[2] == 6);
    CHECK(hdr[5] == 4);
    double first;
    std::memcpy(&first, bytes.data() + 24, 8);
    CHECK(first == s.data()[0]);
    const KineticState t = read_state(ss);
    CHECK(t.grid() == g);
    CHECK(max_diff(s, t) == 0.0);
}
