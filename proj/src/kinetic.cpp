#include "mvfp/kinetic.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mvfp/errors.hpp"
#include "mvfp/hermite.hpp"
#include "mvfp/simd/kernels.hpp"

namespace mvfp {

namespace {

void check_phi(const Grid& g, const ScalarField3& phi) {
    if (phi.shape() != g.nx) throw GridMismatch("potential grid differs from state grid");
}

// out[r] += J_axis in[r] over one mode block, J = raise + lower.
void add_jacobi(const simd::KernelTable& k, const Grid& g, int axis, const double* in, double* out) {
    const std::size_t M = g.n_modes(), st = g.mode_stride(axis);
    k.mul_add(M - st, ladder_factors(g, axis, Ladder::lower).data(), in + st, out);
    k.mul_add(M - st, ladder_factors(g, axis, Ladder::raise).data() + st, in, out + st);
}

double max_hermite_root(int n) {
    const auto r = gauss_hermite(n);
    return *std::max_element(r.nodes.begin(), r.nodes.end());
}

}  // namespace

KineticState apply_collision(const KineticState& h) {
    KineticState out(h.grid());
    const auto& k = simd::active();
    const auto& w = mode_number_weights(h.grid(), 3);
    const std::size_t M = h.grid().n_modes();
    for (std::size_t x = 0; x < h.grid().n_space(); ++x) k.mul(M, w.data(), h.at_point(x), out.at_point(x));
    return out;
}

KineticState apply_magnetic(const KineticState& h) {
    // a1^dagger a2 - a2^dagger a1
    KineticState out = apply_ladder(apply_ladder(h, 1, Ladder::lower), 0, Ladder::raise);
    out -= apply_ladder(apply_ladder(h, 0, Ladder::lower), 1, Ladder::raise);
    return out;
}

KineticState apply_transport(const KineticState& h, const ScalarField3& phi, int sigma) {
    TransportOperator op(h.grid(), phi, sigma);
    KineticState out(h.grid());
    op.apply(h, out);
    return out;
}

TransportOperator::TransportOperator(const Grid& g, const ScalarField3& phi, int sigma)
    : grid_(g), u_(g), d_{KineticState(g), KineticState(g), KineticState(g)}, buf_(g.n_modes()), buf2_(g.n_modes()), buf3_(g.n_modes()) {
    validate_grid(g);
    check_phi(g, phi);
    ScalarField3 s(g.nx);
    for (std::size_t x = 0; x < phi.size(); ++x) s[x] = std::exp(-0.5 * sigma * phi[x]);
    s_ = s.values();
    inv_s_.resize(s_.size());
    for (std::size_t x = 0; x < s_.size(); ++x) inv_s_[x] = 1.0 / s_[x];
    bound_ = 0.0;
    for (int a = 0; a < 3; ++a) {
        const ScalarField3 ds = x_derivative(s, a);
        q_[a].resize(s_.size());
        double qmax = 0.0;
        for (std::size_t x = 0; x < s_.size(); ++x) {
            q_[a][x] = -ds[x] * inv_s_[x];
            qmax = std::max(qmax, std::abs(q_[a][x]));
        }
        // |J| = |a^dagger - a| = largest Hermite root; |D| = 2 pi (n/2 - 1)
        const double kmax = 2.0 * std::numbers::pi * (g.nx[a] / 2 - 1);
        bound_ += max_hermite_root(g.nv[a]) * (kmax + qmax);
    }
}

void TransportOperator::apply(const KineticState& h, KineticState& out) const {
    if (!(h.grid() == grid_) || !(out.grid() == grid_)) throw GridMismatch("state grid differs from operator grid");
    const auto& k = simd::active();
    const std::size_t M = grid_.n_modes(), NX = grid_.n_space();
    for (std::size_t x = 0; x < NX; ++x) k.scale(M, s_[x], h.at_point(x), u_.at_point(x));
    for (int a = 0; a < 3; ++a) x_derivative_into(u_, a, d_[a]);
    // one fused pass per point keeps every block in L1
    std::array<const double*, 3> lo, up;
    std::array<std::size_t, 3> st;
    for (int a = 0; a < 3; ++a) {
        st[a] = grid_.mode_stride(a);
        lo[a] = ladder_factors(grid_, a, Ladder::lower).data();
        up[a] = ladder_factors(grid_, a, Ladder::raise).data();
    }
    double* b = buf_.data();
    double* c = buf2_.data();
    double* t = buf3_.data();
    for (std::size_t x = 0; x < NX; ++x) {
        std::fill(b, b + M, 0.0);
        std::fill(c, c + M, 0.0);
        const double* in = h.at_point(x);
        for (int a = 0; a < 3; ++a) {
            const double* d = d_[a].at_point(x);
            const std::size_t sa = st[a];
            // J = raise + lower on the derivative
            k.mul_add(M - sa, lo[a], d + sa, b);
            k.mul_add(M - sa, up[a] + sa, d, b + sa);
            // q (a^dagger - a) on h
            const double q = q_[a][x];
            if (q != 0.0) {
                k.mul(M - sa, lo[a], in + sa, t);
                k.axpy(M - sa, -q, t, c);
                k.mul(M - sa, up[a] + sa, in, t);
                k.axpy(M - sa, q, t, c + sa);
            }
        }
        double* o = out.at_point(x);
        k.scale(M, inv_s_[x], b, o);
        k.axpy(M, 1.0, c, o);
    }
}

void magnetic_shell_rotations(const Grid& g, double theta, std::vector<std::vector<int>>& m1_lists,
                              std::vector<std::vector<double>>& rotations) {
    const int n1 = g.nv[0], n2 = g.nv[1];
    const int nshell = n1 + n2 - 1;
    m1_lists.assign(nshell, {});
    rotations.assign(nshell, {});
    for (int s = 0; s < nshell; ++s) {
        auto& L = m1_lists[s];
        for (int m1 = 0; m1 < n1; ++m1)
            if (s - m1 >= 0 && s - m1 < n2) L.push_back(m1);
        const int k = static_cast<int>(L.size());
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
        for (int a = 0; a < k; ++a) {
            const int m1 = L[a], m2 = s - m1;
            for (int b = 0; b < k; ++b) {
                if (L[b] == m1 - 1) G(a, b) = std::sqrt(static_cast<double>(m1)) * std::sqrt(m2 + 1.0);
                if (L[b] == m1 + 1) G(a, b) = -std::sqrt(static_cast<double>(m2)) * std::sqrt(m1 + 1.0);
            }
        }
        const Eigen::MatrixXd R = (theta * G).exp();
        auto& out = rotations[s];
        out.resize(static_cast<std::size_t>(k) * k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) out[static_cast<std::size_t>(a) * k + b] = R(a, b);
    }
}

namespace {

void rotate_block(const Grid& g, const std::vector<std::vector<int>>& lists,
                  const std::vector<std::vector<double>>& rots, const double* in, double* out) {
    const int n3 = g.nv[2];
    for (std::size_t s = 0; s < lists.size(); ++s) {
        const auto& L = lists[s];
        const auto& R = rots[s];
        const std::size_t k = L.size();
        for (std::size_t a = 0; a < k; ++a) {
            double* o = out + g.mode_index(L[a], static_cast<int>(s) - L[a], 0);
            for (int m3 = 0; m3 < n3; ++m3) o[m3] = 0.0;
            for (std::size_t b = 0; b < k; ++b) {
                const double c = R[a * k + b];
                const double* x = in + g.mode_index(L[b], static_cast<int>(s) - L[b], 0);
                for (int m3 = 0; m3 < n3; ++m3) o[m3] += c * x[m3];
            }
        }
    }
}

}  // namespace

KineticState rotate_perpendicular(const KineticState& h, double theta) {
    std::vector<std::vector<int>> lists;
    std::vector<std::vector<double>> rots;
    magnetic_shell_rotations(h.grid(), theta, lists, rots);
    KineticState out(h.grid());
    for (std::size_t x = 0; x < h.grid().n_space(); ++x)
        rotate_block(h.grid(), lists, rots, h.at_point(x), out.at_point(x));
    return out;
}

KineticSolver::KineticSolver(const Grid& g, const ScaledParams& p, const ScalarField3& phi, StepOptions opt)
    : grid_(g), p_(p), phi_(phi), opt_(opt), transport_(g, phi, p.sigma), k_(g), acc_(g), tmp_(g) {
    if (!(p.eps > 0.0)) throw InvalidParameter("eps must be positive");
    if (p.sigma != 1 && p.sigma != -1) throw InvalidParameter("sigma must be -1 or +1");
}

double KineticSolver::max_dt() const {
    if (!opt_.transport) return INFINITY;
    const int nvmax = *std::max_element(grid_.nv.begin(), grid_.nv.end());
    const int nxmax = *std::max_element(grid_.nx.begin(), grid_.nx.end());
    return opt_.c_cfl * p_.eps * (1.0 / nxmax) / std::sqrt(2.0 * nvmax);
}

int KineticSolver::transport_substeps(double dt) const {
    if (!opt_.transport) return 0;
    const double y = dt * transport_.spectral_bound() / p_.eps;
    return std::max(1, static_cast<int>(std::ceil(y / opt_.rk4_margin)));
}

void KineticSolver::prepare(double dt) {
    if (dt == prepared_dt_) return;
    const double tau = 0.5 * dt;
    const std::size_t M = grid_.n_modes();
    const auto& num = mode_number_weights(grid_, 3);
    decay_.assign(M, 1.0);
    if (opt_.collision) {
        const double rate = std::pow(p_.eps, -(1.0 + p_.alpha));
        for (std::size_t r = 0; r < M; ++r) decay_[r] = std::exp(-num[r] * rate * tau);
    }
    shell_m1_.clear();
    shell_rot_.clear();
    if (opt_.magnetic && p_.sigma0 != 0) {
        const double theta = p_.sigma * p_.sigma0 * tau / (p_.eps * p_.eps);
        magnetic_shell_rotations(grid_, theta, shell_m1_, shell_rot_);
    }
    prepared_dt_ = dt;
}

void KineticSolver::exact_half(KineticState& h, double) {
    // collision and magnetic parts commute (shells keep |m|)
    const auto& k = simd::active();
    const std::size_t M = grid_.n_modes();
    std::vector<double> blk(M);
    for (std::size_t x = 0; x < grid_.n_space(); ++x) {
        double* c = h.at_point(x);
        if (!shell_rot_.empty()) {
            rotate_block(grid_, shell_m1_, shell_rot_, c, blk.data());
            k.mul(M, decay_.data(), blk.data(), c);
        } else if (opt_.collision) {
            k.mul(M, decay_.data(), c, c);
        }
    }
}

void KineticSolver::step(KineticState& h, double dt) {
    if (!(h.grid() == grid_)) throw GridMismatch("state grid differs from solver grid");
    if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
    const double lim = max_dt();
    if (dt > lim * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " violates the CFL bound; admissible dt <= " << lim;
        throw CflViolation(os.str(), lim);
    }
    prepare(dt);
    exact_half(h, 0.5 * dt);
    const int nsub = transport_substeps(dt);
    if (nsub > 0) {
        const double hdt = dt / nsub;
        const double c = -1.0 / p_.eps;
        const auto& kt = simd::active();
        const std::size_t M = grid_.n_modes(), NX = grid_.n_space();
        // acc += wa k and tmp = h + wt k in one pass per point
        auto combine = [&](double wa, double wt, bool first) {
            for (std::size_t x = 0; x < NX; ++x) {
                const double* kx = k_.at_point(x);
                const double* hx = h.at_point(x);
                double* ax = acc_.at_point(x);
                if (first) std::copy(hx, hx + M, ax);
                kt.axpy(M, wa, kx, ax);
                if (wt != 0.0) {
                    double* tx = tmp_.at_point(x);
                    std::copy(hx, hx + M, tx);
                    kt.axpy(M, wt, kx, tx);
                }
            }
        };
        for (int s = 0; s < nsub; ++s) {
            transport_.apply(h, k_);
            combine(c * hdt / 6.0, c * hdt / 2.0, true);
            transport_.apply(tmp_, k_);
            combine(c * hdt / 3.0, c * hdt / 2.0, false);
            transport_.apply(tmp_, k_);
            combine(c * hdt / 3.0, c * hdt, false);
            transport_.apply(tmp_, k_);
            combine(c * hdt / 6.0, 0.0, false);
            std::swap(h, acc_);
        }
    }
    exact_half(h, 0.5 * dt);
}

KineticState step(const KineticState& h, double dt, const ScaledParams& p, const ScalarField3& phi,
                  StepOptions opt) {
    KineticSolver solver(h.grid(), p, phi, opt);
    KineticState out = h;
    solver.step(out, dt);
    return out;
}

FreeEnergyReport free_energy_report(const KineticState& h, const ScalarField3& phi, int sigma, int nq) {
    const Grid& g = h.grid();
    check_phi(g, phi);
    std::array<int, 3> Q;
    std::array<GaussRule, 3> rule;
    std::array<std::vector<double>, 3> H;
    for (int a = 0; a < 3; ++a) {
        Q[a] = nq > 0 ? nq : g.nv[a];
        rule[a] = gauss_hermite(Q[a]);
        H[a] = hermite_matrix(g.nv[a], rule[a].nodes);
    }
    const int n1 = g.nv[0], n2 = g.nv[1], n3 = g.nv[2];
    const std::size_t nqt = static_cast<std::size_t>(Q[0]) * Q[1] * Q[2];
    std::vector<double> W(nqt), Mv(nqt);
    const double inv_sqrt = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (int a = 0; a < Q[0]; ++a)
        for (int b = 0; b < Q[1]; ++b)
            for (int c = 0; c < Q[2]; ++c) {
                const std::size_t i = (static_cast<std::size_t>(a) * Q[1] + b) * Q[2] + c;
                W[i] = rule[0].weights[a] * rule[1].weights[b] * rule[2].weights[c];
                const double v2 = rule[0].nodes[a] * rule[0].nodes[a] + rule[1].nodes[b] * rule[1].nodes[b] +
                                  rule[2].nodes[c] * rule[2].nodes[c];
                Mv[i] = std::exp(-0.5 * v2) * inv_sqrt * inv_sqrt * inv_sqrt;
            }
    std::vector<double> t1(static_cast<std::size_t>(Q[2]) * n1 * n2), t2(static_cast<std::size_t>(Q[2]) * Q[1] * n1),
        val(nqt);
    double sum = 0.0, fmin = INFINITY, fmax = -INFINITY, hmin = INFINITY;
    std::size_t clipped = 0;
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const double* c = h.at_point(x);
        const double w = std::exp(-sigma * phi[x]);
        // contract m3, then m2, then m1
        for (int q3 = 0; q3 < Q[2]; ++q3)
            for (int m1 = 0; m1 < n1; ++m1)
                for (int m2 = 0; m2 < n2; ++m2) {
                    const double* cc = c + g.mode_index(m1, m2, 0);
                    const double* hh = &H[2][static_cast<std::size_t>(q3) * n3];
                    double s = 0.0;
                    for (int m3 = 0; m3 < n3; ++m3) s += cc[m3] * hh[m3];
                    t1[(static_cast<std::size_t>(q3) * n1 + m1) * n2 + m2] = s;
                }
        for (int q3 = 0; q3 < Q[2]; ++q3)
            for (int q2 = 0; q2 < Q[1]; ++q2)
                for (int m1 = 0; m1 < n1; ++m1) {
                    const double* tt = &t1[(static_cast<std::size_t>(q3) * n1 + m1) * n2];
                    const double* hh = &H[1][static_cast<std::size_t>(q2) * n2];
                    double s = 0.0;
                    for (int m2 = 0; m2 < n2; ++m2) s += tt[m2] * hh[m2];
                    t2[(static_cast<std::size_t>(q3) * Q[1] + q2) * n1 + m1] = s;
                }
        double local = 0.0;
        for (int q1 = 0; q1 < Q[0]; ++q1)
            for (int q2 = 0; q2 < Q[1]; ++q2)
                for (int q3 = 0; q3 < Q[2]; ++q3) {
                    const double* tt = &t2[(static_cast<std::size_t>(q3) * Q[1] + q2) * n1];
                    const double* hh = &H[0][static_cast<std::size_t>(q1) * n1];
                    double v = 0.0;
                    for (int m1 = 0; m1 < n1; ++m1) v += tt[m1] * hh[m1];
                    const std::size_t i = (static_cast<std::size_t>(q1) * Q[1] + q2) * Q[2] + q3;
                    const double f = v * w * Mv[i];
                    fmin = std::min(fmin, f);
                    fmax = std::max(fmax, f);
                    hmin = std::min(hmin, v);
                    if (v <= 0.0) {
                        ++clipped;
                        v = 1e-300;
                    }
                    local += W[i] * v * std::log(v);
                }
        sum += w * local;
    }
    FreeEnergyReport rep;
    rep.value = sum / static_cast<double>(g.n_space());
    rep.clipped = clipped;
    rep.min_ratio = fmax > 0.0 ? fmin / fmax : -INFINITY;
    rep.min_h = hmin;
    if (fmin < -1e-8 * fmax) {
        std::ostringstream os;
        os << "distribution is substantially negative on the quadrature set (min f / max f = " << rep.min_ratio << ", min h = " << rep.min_h
           << ")";
        throw NegativityError(os.str());
    }
    return rep;
}

double free_energy(const KineticState& h, const ScalarField3& phi, int sigma) {
    return free_energy_report(h, phi, sigma).value;
}

MomentSet moments(const KineticState& h, const ScalarField3& phi, int sigma, double eps) {
    const Grid& g = h.grid();
    check_phi(g, phi);
    MomentSet m;
    m.n = ScalarField3(g.nx);
    for (int a = 0; a < 3; ++a) m.J_full[a] = ScalarField3(g.nx);
    const std::array<std::size_t, 3> e{g.mode_index(1, 0, 0), g.mode_index(0, 1, 0), g.mode_index(0, 0, 1)};
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const double w = std::exp(-sigma * phi[x]);
        m.n[x] = w * h.at(x, 0);
        for (int a = 0; a < 3; ++a) m.J_full[a][x] = w * h.at(x, e[a]) / eps;
    }
    m.N_perp = integrate_parallel(m.n);
    m.J_perp = {integrate_parallel(m.J_full[0]), integrate_parallel(m.J_full[1])};
    return m;
}

double total_mass(const KineticState& h, const ScalarField3& phi, int sigma) {
    const Grid& g = h.grid();
    check_phi(g, phi);
    double s = 0.0;
    for (std::size_t x = 0; x < g.n_space(); ++x) s += std::exp(-sigma * phi[x]) * h.at(x, 0);
    return s / static_cast<double>(g.n_space());
}

Distances maxwellian_distance(const KineticState& h, const ScalarField3& phi, int sigma) {
    const Grid& g = h.grid();
    check_phi(g, phi);
    const auto& k = simd::active();
    const std::size_t M = g.n_modes();
    ScalarField3 w = gibbs_weight(phi, sigma);
    const ScalarField2 Z = integrate_parallel(w);
    ScalarField3 n(g.nx);
    double dm = 0.0;
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const double* c = h.at_point(x);
        n[x] = w[x] * c[0];
        dm += w[x] * w[x] * k.dot(M - 1, c + 1, c + 1);
    }
    const ScalarField2 N = integrate_parallel(n);
    double dg = 0.0;
    for (int i = 0; i < g.nx[0]; ++i)
        for (int j = 0; j < g.nx[1]; ++j)
            for (int l = 0; l < g.nx[2]; ++l) {
                const double r = n(i, j, l) - N(i, j) * w(i, j, l) / Z(i, j);
                dg += r * r;
            }
    const double inv = 1.0 / static_cast<double>(g.n_space());
    return {std::sqrt(dm * inv), std::sqrt(dg * inv)};
}

double isotropic_distance(const KineticState& h, const ScalarField3& phi, int sigma) {
    const Grid& g = h.grid();
    const ScalarField3 w = gibbs_weight(phi, sigma);
    const double Z = mean(w);
    const double mass = total_mass(h, phi, sigma);
    double s = 0.0;
    for (std::size_t x = 0; x < g.n_space(); ++x) {
        const double r = w[x] * h.at(x, 0) - mass * w[x] / Z;
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(g.n_space()));
}

KineticDiagnostics diagnose(const KineticState& h, const ScalarField3& phi, int sigma, double t,
                            bool with_free_energy, bool second_order) {
    KineticDiagnostics d;
    d.time = t;
    d.mass = total_mass(h, phi, sigma);
    d.norm_set = partial_norms(h, phi, sigma, second_order);
    d.l2mu_sq = d.norm_set.n0 * d.norm_set.n0;
    if (with_free_energy) d.free_energy = free_energy(h, phi, sigma);
    const auto dist = maxwellian_distance(h, phi, sigma);
    d.d_maxwell = dist.d_maxwell;
    d.d_gibbs = dist.d_gibbs;
    return d;
}

}  // namespace mvfp
