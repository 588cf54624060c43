#include "mvfp/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mvfp/errors.hpp"
#include "mvfp/fft.hpp"
#include "mvfp/spectral.hpp"

namespace mvfp {

namespace {

template <class F>
double dot(const F& a, const F& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

template <class F>
double l2(const F& a) {
    return std::sqrt(dot(a, a));
}

template <class F>
void project_mean_zero(F& f) {
    const double m = mean(f);
    for (double& x : f.values()) x -= m;
}

template <class F>
void axpy(double a, const F& x, F& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

ScalarField3 shifted_inverse(const ScalarField3& r, double d2) {
    constexpr double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply_symbol(r, [d2](int a, int b, int c) { return 1.0 / (d2 * tp2 * (a * a + b * b + c * c) + 1.0); });
}

ScalarField2 shifted_inverse(const ScalarField2& r, double d2) {
    constexpr double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply_symbol(r, [d2](int a, int b) { return 1.0 / (d2 * tp2 * (a * a + b * b) + 1.0); });
}

// Column-wise e^psi / mean_par e^psi and ln mean_par e^psi.
void parallel_gibbs(const ScalarField3& psi, ScalarField3& p, ScalarField2& lme) {
    const int n0 = psi.n(0), n1 = psi.n(1), n2 = psi.n(2);
    p = ScalarField3(psi.shape());
    lme = ScalarField2({n0, n1});
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            double mx = -INFINITY;
            for (int k = 0; k < n2; ++k) mx = std::max(mx, psi(i, j, k));
            double s = 0.0;
            for (int k = 0; k < n2; ++k) {
                p(i, j, k) = std::exp(psi(i, j, k) - mx);
                s += p(i, j, k);
            }
            s /= n2;
            for (int k = 0; k < n2; ++k) p(i, j, k) /= s;
            lme(i, j) = mx + std::log(s);
        }
}

void global_gibbs(const ScalarField2& psi, ScalarField2& p, double& lme) {
    double mx = -INFINITY;
    for (double x : psi.values()) mx = std::max(mx, x);
    p = ScalarField2(psi.shape());
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        p[i] = std::exp(psi[i] - mx);
        s += p[i];
    }
    s /= static_cast<double>(psi.size());
    for (double& x : p.values()) x /= s;
    lme = mx + std::log(s);
}

struct LightProblem {
    using Field = ScalarField3;
    const EllipticProblemLight& prob;
    double d2;
    ScalarField3 p;
    ScalarField2 lme;

    void linearize(const ScalarField3& psi) { parallel_gibbs(psi, p, lme); }

    ScalarField3 gradient(const ScalarField3& psi) const {
        ScalarField3 g = laplacian(psi);
        const int n0 = psi.n(0), n1 = psi.n(1), n2 = psi.n(2);
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k)
                    g(i, j, k) = -d2 * g(i, j, k) - prob.ubar(i, j, k) + prob.N(i, j) * p(i, j, k);
        project_mean_zero(g);
        return g;
    }

    ScalarField3 hessian(const ScalarField3& chi) const {
        ScalarField3 h = laplacian(chi);
        const int n0 = chi.n(0), n1 = chi.n(1), n2 = chi.n(2);
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j) {
                double avg = 0.0;
                for (int k = 0; k < n2; ++k) avg += p(i, j, k) * chi(i, j, k);
                avg /= n2;
                for (int k = 0; k < n2; ++k)
                    h(i, j, k) = -d2 * h(i, j, k) + prob.N(i, j) * p(i, j, k) * (chi(i, j, k) - avg);
            }
        project_mean_zero(h);
        return h;
    }

    ScalarField3 precondition(const ScalarField3& r) const { return shifted_inverse(r, d2); }

    // E(psi + s) - E(psi) without cancellation against E itself
    double energy_delta(const ScalarField3& psi, const ScalarField3& s) const {
        const ScalarField3 ls = laplacian(s);
        double quad = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) quad += -(psi[i] + 0.5 * s[i]) * ls[i];
        quad *= d2 / static_cast<double>(s.size());
        const int n0 = s.n(0), n1 = s.n(1), n2 = s.n(2);
        double logt = 0.0;
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j) {
                double a = 0.0;
                for (int k = 0; k < n2; ++k) a += p(i, j, k) * std::expm1(s(i, j, k));
                logt += prob.N(i, j) * std::log1p(a / n2);
            }
        logt /= static_cast<double>(n0) * n1;
        return quad + logt - dot(prob.ubar, s);
    }
};

struct HeavyProblem {
    using Field = ScalarField2;
    const ScalarField2& N;
    double d2;
    ScalarField2 p;
    double lme = 0;

    void linearize(const ScalarField2& psi) { global_gibbs(psi, p, lme); }

    ScalarField2 gradient(const ScalarField2& psi) const {
        ScalarField2 g = laplacian(psi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = -d2 * g[i] - N[i] + p[i];
        project_mean_zero(g);
        return g;
    }

    ScalarField2 hessian(const ScalarField2& chi) const {
        ScalarField2 h = laplacian(chi);
        const double avg = dot(p, chi);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = -d2 * h[i] + p[i] * (chi[i] - avg);
        project_mean_zero(h);
        return h;
    }

    ScalarField2 precondition(const ScalarField2& r) const { return shifted_inverse(r, d2); }

    double energy_delta(const ScalarField2& psi, const ScalarField2& s) const {
        const ScalarField2 ls = laplacian(s);
        double quad = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) quad += -(psi[i] + 0.5 * s[i]) * ls[i];
        quad *= d2 / static_cast<double>(s.size());
        double a = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) a += p[i] * std::expm1(s[i]);
        a /= static_cast<double>(s.size());
        return quad + std::log1p(a) - dot(N, s);
    }
};

template <class P>
int pcg(const P& prob, const typename P::Field& b, typename P::Field& x, double atol, int max_iter) {
    using F = typename P::Field;
    x = F(b.shape());
    F r = b;
    F z = prob.precondition(r);
    project_mean_zero(z);
    F d = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        if (l2(r) <= atol) return it;
        const F Ad = prob.hessian(d);
        const double dAd = dot(d, Ad);
        if (!(dAd > 0.0)) return it;
        const double a = rz / dAd;
        axpy(a, d, x);
        axpy(-a, Ad, r);
        z = prob.precondition(r);
        project_mean_zero(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = z[i] + beta * d[i];
    }
    return max_iter;
}

template <class P>
EllipticSolution<typename P::Field> newton(P& prob, typename P::Field psi, double tol, const NewtonOptions& opt) {
    using F = typename P::Field;
    EllipticSolution<F> sol;
    project_mean_zero(psi);
    for (int it = 0;; ++it) {
        prob.linearize(psi);
        F g = prob.gradient(psi);
        const double r = l2(g);
        sol.residual_history.push_back(r);
        if (r <= tol) {
            sol.iterations = it;
            sol.residual_norm = r;
            break;
        }
        if (it >= opt.max_iter) {
            std::ostringstream os;
            os << "Newton did not converge in " << opt.max_iter << " iterations; last residual " << r;
            throw ConvergenceError(os.str(), r);
        }
        F rhs = g;
        for (double& v : rhs.values()) v = -v;
        F s;
        const double forcing = std::min(0.1, std::sqrt(r));
        sol.cg_iterations += pcg(prob, rhs, s, std::max(forcing * r, 0.05 * tol), opt.cg_max_iter);
        project_mean_zero(s);
        double slope = dot(g, s);
        if (!(slope < 0.0)) {
            s = prob.precondition(rhs);
            project_mean_zero(s);
            slope = dot(g, s);
        }
        double t = 1.0;
        double dE = 0.0;
        for (;;) {
            F trial = s;
            for (double& v : trial.values()) v *= t;
            dE = prob.energy_delta(psi, trial);
            if (std::isfinite(dE) && dE <= opt.armijo_c1 * t * slope && dE < 0.0) {
                axpy(1.0, trial, psi);
                project_mean_zero(psi);
                break;
            }
            t *= 0.5;
            if (t < 1e-14) {
                std::ostringstream os;
                os << "line search failed at residual " << r;
                throw ConvergenceError(os.str(), r);
            }
        }
        sol.energy_decrease.push_back(dE);
    }
    sol.phi = std::move(psi);
    return sol;
}

void check_density(const ScalarField2& f, const char* name) {
    require_finite(f, name);
    if (min_value(f) < 0.0) throw InvalidParameter(std::string(name) + " must be nonnegative");
    if (std::abs(mean(f) - 1.0) > 1e-10) throw InvalidParameter(std::string(name) + " must have unit mean");
}

void check_density(const ScalarField3& f, const char* name) {
    require_finite(f, name);
    if (min_value(f) < 0.0) throw InvalidParameter(std::string(name) + " must be nonnegative");
    if (std::abs(mean(f) - 1.0) > 1e-10) throw InvalidParameter(std::string(name) + " must have unit mean");
}

}  // namespace

double energy_light(const ScalarField3& psi, const EllipticProblemLight& prob) {
    const ScalarField3 lp = laplacian(psi);
    const double dir = -0.5 * prob.delta * prob.delta * dot(psi, lp);
    ScalarField3 p;
    ScalarField2 lme;
    parallel_gibbs(psi, p, lme);
    double s = 0.0;
    for (std::size_t i = 0; i < lme.size(); ++i) s += prob.N[i] * lme[i];
    s /= static_cast<double>(lme.size());
    return dir + s - dot(prob.ubar, psi);
}

ScalarField3 residual_light(const ScalarField3& psi, const EllipticProblemLight& prob) {
    LightProblem lp{prob, prob.delta * prob.delta, {}, {}};
    lp.linearize(psi);
    return lp.gradient(psi);
}

EllipticSolution<ScalarField3> solve_pb_light(const EllipticProblemLight& prob, double tol,
                                              const NewtonOptions& opt, const ScalarField3* initial) {
    if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
    if (!(prob.delta > 0.0)) throw InvalidParameter("delta must be positive");
    check_density(prob.N, "N");
    check_density(prob.ubar, "ubar");
    if (prob.N.n(0) != prob.ubar.n(0) || prob.N.n(1) != prob.ubar.n(1)) throw GridMismatch("N and ubar grids differ");
    LightProblem lp{prob, prob.delta * prob.delta, {}, {}};
    ScalarField3 psi0 = initial ? *initial : ScalarField3(prob.ubar.shape());
    auto sol = newton(lp, psi0, tol, opt);
    sol.energy = energy_light(sol.phi, prob);
    return sol;
}

double energy_heavy(const ScalarField2& psi, const ScalarField2& N, double delta) {
    const ScalarField2 lp = laplacian(psi);
    ScalarField2 p;
    double lme = 0;
    global_gibbs(psi, p, lme);
    return -0.5 * delta * delta * dot(psi, lp) - dot(N, psi) + lme;
}

ScalarField2 residual_heavy(const ScalarField2& psi, const ScalarField2& N, double delta) {
    HeavyProblem hp{N, delta * delta, {}, 0};
    hp.linearize(psi);
    return hp.gradient(psi);
}

EllipticSolution<ScalarField2> solve_pb_heavy(const ScalarField2& N, double delta, double tol,
                                              const NewtonOptions& opt, const ScalarField2* initial) {
    if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
    if (!(delta > 0.0)) throw InvalidParameter("delta must be positive");
    check_density(N, "N");
    HeavyProblem hp{N, delta * delta, {}, 0};
    ScalarField2 psi0 = initial ? *initial : ScalarField2(N.shape());
    auto sol = newton(hp, psi0, tol, opt);
    sol.energy = energy_heavy(sol.phi, N, delta);
    return sol;
}

ScalarField3 residual_heavy_mixed(const ScalarField3& phi, const ScalarField2& N, double delta) {
    ScalarField3 r = laplacian(phi);
    ScalarField3 neg = phi;
    for (double& v : neg.values()) v = -v;
    ScalarField3 pi;
    ScalarField2 lme;
    parallel_gibbs(neg, pi, lme);
    double mx = -INFINITY;
    for (double v : phi.values()) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : phi.values()) z += std::exp(v - mx);
    z /= static_cast<double>(phi.size());
    for (int i = 0; i < phi.n(0); ++i)
        for (int j = 0; j < phi.n(1); ++j)
            for (int k = 0; k < phi.n(2); ++k)
                r(i, j, k) = -delta * delta * r(i, j, k) - N(i, j) * pi(i, j, k) + std::exp(phi(i, j, k) - mx) / z;
    return r;
}

ScalarField2 parallel_average(const ScalarField3& phi, int sigma) {
    ScalarField3 a = phi;
    for (double& v : a.values()) v = -sigma * v;
    ScalarField3 p;
    ScalarField2 lme;
    parallel_gibbs(a, p, lme);
    for (double& v : lme.values()) v = -sigma * v;
    return lme;
}

namespace {

template <class F>
double h1_of(const F& f) {
    return std::sqrt(dot(f, f) - dot(f, laplacian(f)));
}

template <class F, int Dim>
double w2p_of(const F& f, double p) {
    auto pw = [p](const F& g) {
        const double n = lp_norm(g, p);
        return std::pow(n, p);
    };
    double s = pw(f);
    for (int a = 0; a < Dim; ++a) {
        const F da = x_derivative(f, a);
        s += pw(da);
        for (int b = 0; b < Dim; ++b) s += pw(x_derivative(da, b));
    }
    return std::pow(s, 1.0 / p);
}

}  // namespace

double h1_norm(const ScalarField3& f) { return h1_of(f); }
double h1_norm(const ScalarField2& f) { return h1_of(f); }
double w2p_norm(const ScalarField3& f, double p) { return w2p_of<ScalarField3, 3>(f, p); }
double w2p_norm(const ScalarField2& f, double p) { return w2p_of<ScalarField2, 2>(f, p); }

LipschitzReport lipschitz_probe(const EllipticProblemLight& prob, const EllipticProblemLight& perturbed, double p,
                                double tol) {
    const ScalarField2 dN = prob.N - perturbed.N;
    const double dn43 = lp_norm(dN, 4.0 / 3.0);
    const double dnp = lp_norm(dN, p);
    if (!(dn43 > 0.0)) throw InvalidParameter("perturbation is zero: Lipschitz ratio undefined");
    const auto a = solve_pb_light(prob, tol);
    const auto b = solve_pb_light(perturbed, tol, {}, &a.phi);
    const ScalarField3 d = a.phi - b.phi;
    LipschitzReport rep;
    rep.p = p;
    rep.dN_l43 = dn43;
    rep.dphi_h1 = h1_norm(d);
    rep.ratio_h1 = rep.dphi_h1 / dn43;
    rep.ratio_w2p = w2p_norm(d, p) / dnp;
    return rep;
}

LipschitzReport lipschitz_probe_heavy(const ScalarField2& N, const ScalarField2& Np, double delta, double p,
                                      double tol) {
    const ScalarField2 dN = N - Np;
    const double dn43 = lp_norm(dN, 4.0 / 3.0);
    const double dnp = lp_norm(dN, p);
    if (!(dn43 > 0.0)) throw InvalidParameter("perturbation is zero: Lipschitz ratio undefined");
    const auto a = solve_pb_heavy(N, delta, tol);
    const auto b = solve_pb_heavy(Np, delta, tol, {}, &a.phi);
    const ScalarField2 d = a.phi - b.phi;
    LipschitzReport rep;
    rep.p = p;
    rep.dN_l43 = dn43;
    rep.dphi_h1 = h1_norm(d);
    rep.ratio_h1 = rep.dphi_h1 / dn43;
    rep.ratio_w2p = w2p_norm(d, p) / dnp;
    return rep;
}

}  // namespace mvfp
