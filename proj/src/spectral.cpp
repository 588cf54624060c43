#include "mvfp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mvfp/errors.hpp"
#include "mvfp/fft.hpp"
#include "mvfp/simd/kernels.hpp"

namespace mvfp {

namespace {

std::vector<double> build_diff_matrix(int n) {
    // D = F^{-1} diag(2 pi i k) F applied to unit vectors, Nyquist dropped
    std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
    const double tp = 2.0 * std::numbers::pi;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            const int s = ((j - l) % n + n) % n;
            double acc = 0.0;
            for (int q = 0; q < n; ++q) {
                const int k = signed_wavenumber(q, n);
                if (2 * std::abs(k) == n) continue;
                acc += -tp * k * std::sin(tp * k * s / n);
            }
            d[static_cast<std::size_t>(j) * n + l] = acc / n;
        }
    return d;
}

// Applies an m x m matrix along one axis of a row-major (n0, n1, n2, inner) array.
void along_axis(const double* in, double* out, const std::array<int, 3>& n, std::size_t inner, int axis,
                const std::vector<double>& mat) {
    const auto& k = simd::active();
    std::size_t outer = 1, stride = inner;
    for (int a = 0; a < axis; ++a) outer *= n[a];
    for (int a = axis + 1; a < 3; ++a) stride *= n[a];
    const std::size_t block = stride * n[axis];
    for (std::size_t o = 0; o < outer; ++o)
        k.line_matmul(n[axis], mat.data(), stride, stride, in + o * block, out + o * block);
}

bool is_uniform(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

const std::vector<double>& diff_matrix(int n) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<std::vector<double>>(build_diff_matrix(n));
    return *slot;
}

ScalarField3 x_derivative(const ScalarField3& f, int axis) {
    ScalarField3 out(f.shape());
    // the dense stencil leaves rounding on constants
    if (is_uniform(f.values())) return out;
    along_axis(f.data(), out.data(), f.shape(), 1, axis, diff_matrix(f.n(axis)));
    return out;
}

ScalarField2 x_derivative(const ScalarField2& f, int axis) {
    ScalarField2 out(f.shape());
    if (is_uniform(f.values())) return out;
    along_axis(f.data(), out.data(), {f.n(0), f.n(1), 1}, 1, axis, diff_matrix(f.n(axis)));
    return out;
}

void x_derivative_into(const KineticState& s, int axis, KineticState& out) {
    if (!(out.grid() == s.grid())) throw GridMismatch("output grid differs");
    const Grid& g = s.grid();
    along_axis(s.data(), out.data(), g.nx, g.n_modes(), axis, diff_matrix(g.nx[axis]));
}

KineticState x_derivative(const KineticState& s, int axis) {
    KineticState out(s.grid());
    x_derivative_into(s, axis, out);
    return out;
}

namespace {

struct LadderWeights {
    std::array<std::vector<double>, 3> lower, raise;
    std::array<std::vector<double>, 4> number;
};

const LadderWeights& ladder_weights(const Grid& g) {
    static std::mutex m;
    static std::map<std::array<int, 3>, std::unique_ptr<LadderWeights>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& slot = cache[g.nv];
    if (!slot) {
        slot = std::make_unique<LadderWeights>();
        const std::size_t M = g.n_modes();
        for (int a = 0; a < 4; ++a) slot->number[a].assign(M, 0.0);
        for (int a = 0; a < 3; ++a) {
            slot->lower[a].assign(M, 0.0);
            slot->raise[a].assign(M, 0.0);
        }
        for (std::size_t r = 0; r < M; ++r) {
            const auto mi = g.mode_of(r);
            for (int a = 0; a < 3; ++a) {
                slot->lower[a][r] = mi[a] + 1 < g.nv[a] ? std::sqrt(mi[a] + 1.0) : 0.0;
                slot->raise[a][r] = std::sqrt(static_cast<double>(mi[a]));
                slot->number[a][r] = mi[a];
            }
            slot->number[3][r] = mi[0] + mi[1] + mi[2];
        }
    }
    return *slot;
}

}  // namespace

const std::vector<double>& mode_number_weights(const Grid& g, int axis) { return ladder_weights(g).number[axis]; }

const std::vector<double>& ladder_factors(const Grid& g, int axis, Ladder dir) {
    const auto& lw = ladder_weights(g);
    return dir == Ladder::lower ? lw.lower[axis] : lw.raise[axis];
}

void apply_ladder_into(const KineticState& s, int axis, Ladder dir, KineticState& out) {
    if (!(out.grid() == s.grid())) throw GridMismatch("output grid differs");
    const Grid& g = s.grid();
    const auto& lw = ladder_weights(g);
    const auto& k = simd::active();
    const std::size_t M = g.n_modes();
    const std::size_t st = g.mode_stride(axis);
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const double* in = s.at_point(x);
        double* o = out.at_point(x);
        if (dir == Ladder::lower) {
            k.mul(M - st, lw.lower[axis].data(), in + st, o);
            for (std::size_t r = M - st; r < M; ++r) o[r] = 0.0;
        } else {
            for (std::size_t r = 0; r < st; ++r) o[r] = 0.0;
            k.mul(M - st, lw.raise[axis].data() + st, in, o + st);
        }
    }
}

KineticState apply_ladder(const KineticState& s, int axis, Ladder dir) {
    KineticState out(s.grid());
    apply_ladder_into(s, axis, dir, out);
    return out;
}

ScalarField3 gibbs_weight(const ScalarField3& phi, int sigma) {
    ScalarField3 w(phi.shape());
    for (std::size_t i = 0; i < phi.size(); ++i) w[i] = std::exp(-sigma * phi[i]);
    return w;
}

ScalarField3 normalize_phi(const ScalarField3& phi, int sigma) {
    // log-mean-exp of -sigma phi, shifted for range safety
    double mx = -INFINITY;
    for (double p : phi.values()) mx = std::max(mx, -sigma * p);
    double s = 0.0;
    for (double p : phi.values()) s += std::exp(-sigma * p - mx);
    const double lme = mx + std::log(s / static_cast<double>(phi.size()));
    ScalarField3 out = phi;
    for (double& p : out.values()) p += lme / sigma;
    return out;
}

double weighted_inner_w(const KineticState& a, const KineticState& b, const ScalarField3& weight) {
    if (!(a.grid() == b.grid())) throw GridMismatch("state grids differ");
    if (weight.shape() != a.grid().nx) throw GridMismatch("potential grid differs from state grid");
    const auto& k = simd::active();
    const std::size_t M = a.grid().n_modes();
    double s = 0.0;
    for (std::size_t x = 0; x < a.grid().n_space(); ++x) s += weight[x] * k.dot(M, a.at_point(x), b.at_point(x));
    return s / static_cast<double>(a.grid().n_space());
}

double weighted_inner(const KineticState& a, const KineticState& b, const ScalarField3& phi, int sigma) {
    return weighted_inner_w(a, b, gibbs_weight(phi, sigma));
}

double weighted_mode_inner(const KineticState& a, const KineticState& b, const ScalarField3& weight,
                           const std::vector<double>& d) {
    if (!(a.grid() == b.grid())) throw GridMismatch("state grids differ");
    const auto& k = simd::active();
    const std::size_t M = a.grid().n_modes();
    double s = 0.0;
    for (std::size_t x = 0; x < a.grid().n_space(); ++x)
        s += weight[x] * k.wdot(M, d.data(), a.at_point(x), b.at_point(x));
    return s / static_cast<double>(a.grid().n_space());
}

NormSet partial_norms(const KineticState& h, const ScalarField3& phi, int sigma, bool second_order) {
    const Grid& g = h.grid();
    const ScalarField3 w = gibbs_weight(phi, sigma);
    NormSet ns;
    ns.n0 = std::sqrt(std::max(0.0, weighted_inner_w(h, h, w)));

    KineticState dv(g), dx(g);
    double dv_sq[3], dx_sq[3], cross[3], dv_lap[3] = {0, 0, 0}, dx_lap[3] = {0, 0, 0};
    const auto& total = mode_number_weights(g, 3);
    for (int a = 0; a < 3; ++a) {
        apply_ladder_into(h, a, Ladder::lower, dv);
        x_derivative_into(h, a, dx);
        dv_sq[a] = weighted_inner_w(dv, dv, w);
        dx_sq[a] = weighted_inner_w(dx, dx, w);
        cross[a] = weighted_inner_w(dv, dx, w);
        if (second_order) {
            // sum_j |lower_j g|^2 = <|m| g, g>
            dv_lap[a] = weighted_mode_inner(dv, dv, w, total);
            dx_lap[a] = weighted_mode_inner(dx, dx, w, total);
        }
    }
    auto rt = [](double v) { return std::sqrt(std::max(0.0, v)); };
    ns.dv_par = rt(dv_sq[2]);
    ns.dx_par = rt(dx_sq[2]);
    ns.cross_par = cross[2];
    ns.dv_perp = rt(dv_sq[0] + dv_sq[1]);
    ns.dx_perp = rt(dx_sq[0] + dx_sq[1]);
    ns.cross_perp = cross[0] + cross[1];
    ns.grad_v = rt(dv_sq[0] + dv_sq[1] + dv_sq[2]);
    if (second_order) {
        ns.has_second_order = true;
        ns.grad_v_dv_par = rt(dv_lap[2]);
        ns.grad_v_dx_par = rt(dx_lap[2]);
        ns.grad_v_dv_perp = rt(dv_lap[0] + dv_lap[1]);
        ns.grad_v_dx_perp = rt(dx_lap[0] + dx_lap[1]);
    }
    return ns;
}

}  // namespace mvfp
