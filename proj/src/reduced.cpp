#include "mvfp/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvfp/errors.hpp"
#include "mvfp/fft.hpp"
#include "mvfp/spectral.hpp"

namespace mvfp {

namespace {

int species_sign(Species s) { return s == Species::light ? -1 : 1; }

ScalarField2 times(const ScalarField2& a, const ScalarField2& b) {
    ScalarField2 r(a.shape());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] * b[i];
    return r;
}

double max_speed(const VectorField2& U) {
    double m = 0.0;
    for (std::size_t i = 0; i < U[0].size(); ++i) m = std::max(m, std::hypot(U[0][i], U[1][i]));
    return m;
}

double max_gradient(const ScalarField2& f) {
    const ScalarField2 g1 = x_derivative(f, 0), g2 = x_derivative(f, 1);
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::hypot(g1[i], g2[i]));
    return m;
}

// -div(N U) with every product dealiased
ScalarField2 advection_rhs(const ScalarField2& N, const VectorField2& U) {
    const ScalarField2 Nd = dealias(N);
    ScalarField2 out(N.shape());
    for (int a = 0; a < 2; ++a) {
        const ScalarField2 flux = dealias(times(Nd, dealias(U[a])));
        const ScalarField2 d = x_derivative(flux, a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= d[i];
    }
    return out;
}

void check_positivity(const ScalarField2& N, double t) {
    double mx = 0.0;
    for (double v : N.values()) mx = std::max(mx, v);
    if (min_value(N) < -1e-10 * mx) {
        std::ostringstream os;
        os << "reduced density undershoot " << min_value(N) << " at t=" << t;
        throw NegativityError(os.str());
    }
}

ReducedSample sample_of(const ReducedState& s, const VectorField2& U, const ScalarField2& phit) {
    ReducedSample r;
    r.time = s.time;
    r.mass = mean(s.N);
    r.l2 = lp_norm(s.N, 2.0);
    r.max_u = max_speed(U);
    r.max_grad_phit = max_gradient(phit);
    return r;
}

template <class RhsAt>
ScalarField2 rk4(const ScalarField2& N, double dt, RhsAt rhs) {
    const ScalarField2 k1 = rhs(N, 0.0);
    const ScalarField2 k2 = rhs(N + (0.5 * dt) * k1, 0.5);
    const ScalarField2 k3 = rhs(N + (0.5 * dt) * k2, 0.5);
    const ScalarField2 k4 = rhs(N + dt * k3, 1.0);
    ScalarField2 out = N;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Rescales tiny rounding drift so the elliptic data checks see unit mean.
ScalarField2 unit_mean(const ScalarField2& N) {
    ScalarField2 r = N;
    const double m = mean(N);
    for (double& v : r.values()) v /= m;
    return r;
}

}  // namespace

VectorField2 drift_field(const ScalarField2& phit, const std::optional<ScalarField2>& b, int sigma) {
    const ScalarField2 g1 = x_derivative(phit, 0), g2 = x_derivative(phit, 1);
    VectorField2 U{ScalarField2(phit.shape()), ScalarField2(phit.shape())};
    if (!b) {
        for (std::size_t i = 0; i < phit.size(); ++i) {
            U[0][i] = -g2[i];
            U[1][i] = g1[i];
        }
        return U;
    }
    if (b->shape() != phit.shape()) throw GridMismatch("b and phit grids differ");
    if (!(min_value(*b) > 0.0)) throw InvalidParameter("b must be positive");
    const ScalarField2 b1 = x_derivative(*b, 0), b2 = x_derivative(*b, 1);
    for (std::size_t i = 0; i < phit.size(); ++i) {
        const double bi = (*b)[i];
        U[0][i] = -g2[i] / bi + sigma * b2[i] / (bi * bi);
        U[1][i] = g1[i] / bi - sigma * b1[i] / (bi * bi);
    }
    return U;
}

ScalarField3 slaved_density(const ScalarField2& N, const ScalarField3& phi, int sigma) {
    if (N.n(0) != phi.n(0) || N.n(1) != phi.n(1)) throw GridMismatch("N and phi grids differ");
    const ScalarField2 phit = parallel_average(phi, sigma);
    ScalarField3 n(phi.shape());
    for (int i = 0; i < phi.n(0); ++i)
        for (int j = 0; j < phi.n(1); ++j)
            for (int k = 0; k < phi.n(2); ++k)
                n(i, j, k) = N(i, j) * std::exp(-sigma * (phi(i, j, k) - phit(i, j)));
    return n;
}

double gc_max_dt(const VectorField2& U, double c_cfl) {
    const double dx = 1.0 / std::max(U[0].n(0), U[0].n(1));
    const double u = max_speed(U);
    return u > 0.0 ? c_cfl * dx / u : INFINITY;
}

ReducedState gc_step(const ReducedState& s, const VectorField2& U, double dt, double c_cfl) {
    const double lim = gc_max_dt(U, c_cfl);
    if (dt > lim) {
        std::ostringstream os;
        os << "gc_step dt=" << dt << " exceeds CFL limit " << lim;
        throw CflViolation(os.str(), lim);
    }
    ReducedState out = s;
    out.N = rk4(s.N, dt, [&U](const ScalarField2& N, double) { return advection_rhs(N, U); });
    out.time = s.time + dt;
    return out;
}

ScalarField2 reduced_potential(const ReducedState& s, const ScaledParams& p, const ScalarField3* warm3,
                               const ScalarField2* warm2, ScalarField3* phi3_out, ScalarField2* phi2_out,
                               double tol) {
    NewtonOptions nopt;
    nopt.tol = tol;
    if (s.species == Species::heavy) {
        auto sol = solve_pb_heavy(unit_mean(s.N), p.delta, tol, nopt, warm2);
        if (phi2_out) *phi2_out = sol.phi;
        return sol.phi;
    }
    if (!s.ubar) throw InvalidParameter("light reduced model needs ubar");
    EllipticProblemLight prob{unit_mean(s.N), *s.ubar, p.delta};
    auto sol = solve_pb_light(prob, tol, nopt, warm3);
    ScalarField2 phit = parallel_average(sol.phi, -1);
    if (phi3_out) *phi3_out = std::move(sol.phi);
    return phit;
}

ReducedTrajectory solve_reduced(const ReducedState& initial, const ScaledParams& p, double horizon,
                                const ReducedOptions& opt) {
    if (!(horizon >= 0.0)) throw InvalidParameter("horizon must be nonnegative");
    if (!(opt.dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (!(p.delta > 0.0)) throw InvalidParameter("delta must be positive");
    require_finite(initial.N, "N_in");
    if (min_value(initial.N) < 0.0) throw InvalidParameter("N_in must be nonnegative");
    if (std::abs(mean(initial.N) - 1.0) > 1e-10) throw InvalidParameter("N_in must have unit mean");
    const int sigma = species_sign(initial.species);
    const auto& b = p.b_field;

    const int steps = horizon > 0.0 ? static_cast<int>(std::ceil(horizon / opt.dt - 1e-12)) : 0;
    const double dt = steps > 0 ? horizon / steps : 0.0;
    const int every = std::max(1, opt.sample_every);

    ReducedTrajectory traj;
    auto guard = [&](const ScalarField2& phit, double t) {
        const double g = max_gradient(phit);
        if (!(g <= opt.grad_bound)) {
            std::ostringstream os;
            os << "blow-up guard: max|grad phit| = " << g << " exceeds " << opt.grad_bound << " at t=" << t;
            throw BlowUpError(os.str());
        }
    };

    if (opt.mode == ReducedMode::external) {
        if (!opt.phi) throw InvalidParameter("external mode needs phi");
        const ScalarField2 phit = parallel_average(*opt.phi, sigma);
        guard(phit, 0.0);
        const VectorField2 U = drift_field(phit, b, sigma);
        ReducedState s = initial;
        traj.states.push_back(s);
        traj.samples.push_back(sample_of(s, U, phit));
        for (int k = 1; k <= steps; ++k) {
            s = gc_step(s, U, dt, opt.c_cfl);
            check_positivity(s.N, s.time);
            if (k % every == 0 || k == steps) {
                traj.states.push_back(s);
                traj.samples.push_back(sample_of(s, U, phit));
            }
        }
        return traj;
    }

    if (opt.mode == ReducedMode::coupled) {
        ScalarField3 w3;
        ScalarField2 w2;
        bool warm = false;
        auto potential = [&](const ScalarField2& N, double t) {
            ReducedState tmp = initial;
            tmp.N = N;
            ScalarField3 o3;
            ScalarField2 o2;
            ScalarField2 phit = reduced_potential(tmp, p, warm && initial.species == Species::light ? &w3 : nullptr,
                                                  warm && initial.species == Species::heavy ? &w2 : nullptr, &o3,
                                                  &o2, opt.pb_tol);
            if (initial.species == Species::light) w3 = std::move(o3);
            else w2 = std::move(o2);
            warm = true;
            guard(phit, t);
            return phit;
        };
        auto record = [&](const ReducedState& s, const ScalarField2& phit) {
            ReducedSample smp = sample_of(s, drift_field(phit, b, sigma), phit);
            if (opt.check_mixed_residual && s.species == Species::heavy)
                smp.pb_residual = max_abs(residual_heavy_mixed(extend_parallel(phit, opt.n_par), unit_mean(s.N), p.delta));
            traj.states.push_back(s);
            traj.samples.push_back(smp);
        };
        ReducedState s = initial;
        ScalarField2 phit = potential(s.N, s.time);
        record(s, phit);
        for (int k = 1; k <= steps; ++k) {
            const VectorField2 U0 = drift_field(phit, b, sigma);
            const double lim = gc_max_dt(U0, opt.c_cfl);
            if (dt > lim) {
                std::ostringstream os;
                os << "reduced dt=" << dt << " exceeds CFL limit " << lim << " at t=" << s.time;
                throw CflViolation(os.str(), lim);
            }
            const double t0 = s.time;
            bool first = true;
            s.N = rk4(s.N, dt, [&](const ScalarField2& N, double) {
                if (first) {
                    first = false;
                    return advection_rhs(N, U0);
                }
                return advection_rhs(N, drift_field(potential(N, t0), b, sigma));
            });
            s.time = t0 + dt;
            check_positivity(s.N, s.time);
            phit = potential(s.N, s.time);
            if (k % every == 0 || k == steps) record(s, phit);
        }
        return traj;
    }

    // Picard: N_{n+1} advected by the field of N_n, starting from a zero field.
    const int iters = std::max(1, opt.picard_iterations);
    const std::array<int, 2> shape = initial.N.shape();
    std::vector<ScalarField2> field(steps + 1, ScalarField2(shape));
    for (int n = 0; n < iters; ++n) {
        std::vector<ScalarField2> snaps;
        std::vector<ScalarField2> path;
        path.reserve(steps + 1);
        ReducedState s = initial;
        path.push_back(s.N);
        snaps.push_back(s.N);
        for (int k = 1; k <= steps; ++k) {
            const ScalarField2& fa = field[k - 1];
            const ScalarField2& fb = field[k];
            const VectorField2 Ua = drift_field(fa, b, sigma);
            const VectorField2 Ub = drift_field(fb, b, sigma);
            const double lim = std::min(gc_max_dt(Ua, opt.c_cfl), gc_max_dt(Ub, opt.c_cfl));
            if (dt > lim) throw CflViolation("picard step exceeds CFL limit", lim);
            s.N = rk4(s.N, dt, [&](const ScalarField2& N, double theta) {
                if (theta == 0.0) return advection_rhs(N, Ua);
                if (theta == 1.0) return advection_rhs(N, Ub);
                VectorField2 Um{0.5 * (Ua[0] + Ub[0]), 0.5 * (Ua[1] + Ub[1])};
                return advection_rhs(N, Um);
            });
            s.time += dt;
            check_positivity(s.N, s.time);
            path.push_back(s.N);
            if (k % every == 0 || k == steps) snaps.push_back(s.N);
        }
        traj.iterates.push_back(std::move(snaps));
        if (n + 1 == iters) {
            ReducedState st = initial;
            for (int k = 0; k <= steps; ++k) {
                if (!(k == 0 || k % every == 0 || k == steps)) continue;
                st.N = path[k];
                st.time = k * dt;
                traj.states.push_back(st);
                traj.samples.push_back(sample_of(st, drift_field(field[k], b, sigma), field[k]));
            }
            break;
        }
        ScalarField3 w3;
        ScalarField2 w2;
        for (int k = 0; k <= steps; ++k) {
            ReducedState tmp = initial;
            tmp.N = path[k];
            ScalarField3 o3;
            ScalarField2 o2;
            const bool warm = k > 0;
            field[k] = reduced_potential(tmp, p, warm && initial.species == Species::light ? &w3 : nullptr,
                                         warm && initial.species == Species::heavy ? &w2 : nullptr, &o3, &o2,
                                         opt.pb_tol);
            guard(field[k], k * dt);
            w3 = std::move(o3);
            w2 = std::move(o2);
        }
    }
    return traj;
}

}  // namespace mvfp
