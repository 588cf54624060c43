#pragma once

// Shared helpers for the unit tests: seeded random data and independent
// quadrature oracles (own Hermite recurrence, fine trapezoid rule in v).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "mvfp/fields.hpp"
#include "mvfp/kinetic_state.hpp"

namespace testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Random coefficients; pad zeroes the top Hermite shell on each axis.
inline mvfp::KineticState random_state(const mvfp::Grid& g, std::mt19937_64& rng, bool pad = true,
                                       double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    mvfp::KineticState s(g);
    for (std::size_t x = 0; x < g.n_space(); ++x)
        for (std::size_t r = 0; r < g.n_modes(); ++r) {
            const auto m = g.mode_of(r);
            bool top = false;
            for (int a = 0; a < 3; ++a) top = top || m[a] == g.nv[a] - 1;
            s.at(x, r) = (pad && top) ? 0.0 : N(rng);
        }
    return s;
}

// Smooth field with a handful of random low Fourier modes.
inline mvfp::ScalarField3 random_field3(std::array<int, 3> n, std::mt19937_64& rng, double amp = 0.3,
                                        int kmax = 2) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    struct Mode {
        int k1, k2, k3;
        double a, ph;
    };
    std::vector<Mode> modes;
    for (int i = 0; i < 4; ++i)
        modes.push_back({static_cast<int>(std::lround(kmax * U(rng))), static_cast<int>(std::lround(kmax * U(rng))),
                         static_cast<int>(std::lround(kmax * U(rng))), amp * U(rng), std::numbers::pi * U(rng)});
    return mvfp::ScalarField3::from_function(n, [&](double x, double y, double z) {
        double v = 0;
        for (const auto& m : modes) v += m.a * std::cos(kTwoPi * (m.k1 * x + m.k2 * y + m.k3 * z) + m.ph);
        return v;
    });
}

inline mvfp::ScalarField2 random_field2(std::array<int, 2> n, std::mt19937_64& rng, double amp = 0.3,
                                        int kmax = 2) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<std::array<double, 4>> modes;
    for (int i = 0; i < 4; ++i)
        modes.push_back({std::round(kmax * U(rng)), std::round(kmax * U(rng)), amp * U(rng), std::numbers::pi * U(rng)});
    return mvfp::ScalarField2::from_function(n, [&](double x, double y) {
        double v = 0;
        for (const auto& m : modes) v += m[2] * std::cos(kTwoPi * (m[0] * x + m[1] * y) + m[3]);
        return v;
    });
}

inline mvfp::ScalarField2 unit_mean(mvfp::ScalarField2 f) {
    const double m = mvfp::mean(f);
    for (auto& v : f.values()) v /= m;
    return f;
}

inline mvfp::ScalarField3 unit_mean(mvfp::ScalarField3 f) {
    const double m = mvfp::mean(f);
    for (auto& v : f.values()) v /= m;
    return f;
}

// Orthonormal probabilists' Hermite functions by the three-term recurrence.
inline std::vector<double> herm(int n, double v) {
    std::vector<double> h(std::max(n, 2));
    h[0] = 1.0;
    h[1] = v;
    for (int k = 1; k + 1 < n; ++k) h[k + 1] = (v * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                                               std::sqrt(static_cast<double>(k + 1));
    h.resize(n);
    return h;
}

// Trapezoid rule for int g(v) M(v) dv on [-L, L]; spectrally accurate for
// Gaussian-weighted polynomials.
struct VRule {
    std::vector<double> v, w;
};

inline VRule v_rule(int n = 41, double L = 10.0) {
    VRule r;
    const double h = 2.0 * L / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double v = -L + i * h;
        r.v.push_back(v);
        r.w.push_back(h * std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi));
    }
    return r;
}

// Values of h(x, .) at the product nodes (q1, q2, q3) of a 1D rule.
inline std::vector<double> eval_point(const mvfp::KineticState& h, std::size_t x, const VRule& r) {
    const auto& g = h.grid();
    const std::size_t q = r.v.size();
    std::vector<std::vector<double>> H[3];
    for (int a = 0; a < 3; ++a)
        for (double v : r.v) H[a].push_back(herm(g.nv[a], v));
    std::vector<double> out(q * q * q, 0.0);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
            for (std::size_t k = 0; k < q; ++k) {
                double s = 0;
                for (std::size_t m = 0; m < g.n_modes(); ++m) {
                    const auto mm = g.mode_of(m);
                    s += h.at(x, m) * H[0][i][mm[0]] * H[1][j][mm[1]] * H[2][k][mm[2]];
                }
                out[(i * q + j) * q + k] = s;
            }
    return out;
}

// I0 by its power series.
inline double bessel_i0(double x) {
    double term = 1, sum = 1;
    for (int k = 1; k < 40; ++k) {
        term *= (x * x / 4) / (double(k) * k);
        sum += term;
    }
    return sum;
}

// Second-order finite differences for -d^2 phi'' + e^phi / <e^phi> = f on n periodic nodes,
// solved by shifted fixed-point iteration. f has unit mean; phi is returned with zero mean.
inline std::vector<double> fd_oracle(const std::vector<double>& f, double d) {
    const int n = static_cast<int>(f.size());
    const double h = 1.0 / n, kappa = 2.0;
    // dense LU of the circulant (-d^2 D2 + kappa), no pivoting needed (diagonally dominant)
    std::vector<double> a(std::size_t(n) * n, 0.0);
    auto A = [&](int i, int j) -> double& { return a[std::size_t(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        A(i, i) += 2 * d * d / (h * h) + kappa;
        A(i, (i + 1) % n) -= d * d / (h * h);
        A(i, (i + n - 1) % n) -= d * d / (h * h);
    }
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) {
            A(i, k) /= A(k, k);
            for (int j = k + 1; j < n; ++j) A(i, j) -= A(i, k) * A(k, j);
        }
    auto solve = [&](std::vector<double> b) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) b[i] -= A(i, j) * b[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) b[i] -= A(i, j) * b[j];
            b[i] /= A(i, i);
        }
        return b;
    };
    std::vector<double> phi(n, 0.0), rhs(n);
    for (int it = 0; it < 500; ++it) {
        double z = 0;
        for (double p : phi) z += std::exp(p) / n;
        for (int i = 0; i < n; ++i) rhs[i] = f[i] - std::exp(phi[i]) / z + kappa * phi[i];
        std::vector<double> next = solve(rhs);
        double m = 0;
        for (double v : next) m += v / n;
        double change = 0;
        for (int i = 0; i < n; ++i) {
            next[i] -= m;
            change = std::max(change, std::abs(next[i] - phi[i]));
        }
        phi = next;
        if (change < 1e-15) break;
    }
    return phi;
}

// Two Richardson levels from grids n, 3n, 9n, sampled at the n coarse nodes.
inline std::vector<double> richardson_oracle(int n, const std::function<double(double)>& f, double d) {
    std::vector<std::vector<double>> lv;
    for (int m : {n, 3 * n, 9 * n}) {
        std::vector<double> fm(m);
        for (int i = 0; i < m; ++i) fm[i] = f(double(i) / m);
        const auto p = fd_oracle(fm, d);
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) c[i] = p[std::size_t(i) * (m / n)];
        lv.push_back(c);
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double r1 = (9 * lv[1][i] - lv[0][i]) / 8, r2 = (9 * lv[2][i] - lv[1][i]) / 8;
        out[i] = (81 * r2 - r1) / 80;
    }
    return out;
}

}  // namespace testing
