#include "mvfp/hypo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvfp/errors.hpp"

namespace mvfp {

HypoExponents exponent_table(double alpha) {
    if (!(std::abs(alpha) < 1.0)) throw InvalidParameter("alpha must lie in (-1, 1)");
    HypoExponents e;
    if (alpha >= 0.0) e.beta_par = {0.0, 2.0 * alpha, alpha};
    else e.beta_par = {-alpha, -alpha, -alpha};
    e.beta_perp = {1.0 - alpha, 2.0, 2.0 - alpha};
    return e;
}

CondbetaReport validate_condbeta(double alpha, const HypoExponents& e, double slack) {
    CondbetaReport r;
    auto add = [&](std::string name, double lhs, double rhs) {
        r.checks.push_back({std::move(name), lhs, rhs, lhs <= rhs + slack});
    };
    const auto& p = e.beta_perp;
    const auto& q = e.beta_par;
    add("perp3 >= 2 - alpha", 2.0 - alpha, p[2]);
    add("perp3 >= (perp1 + perp2)/2", 0.5 * (p[0] + p[1]), p[2]);
    add("perp3 <= alpha + 2 perp1", p[2], alpha + 2.0 * p[0]);
    add("perp3 <= alpha + 2 perp2", p[2], alpha + 2.0 * p[1]);
    add("perp3 <= perp2 - alpha", p[2], p[1] - alpha);
    add("par3 >= |alpha|", std::abs(alpha), q[2]);
    add("par3 >= (par1 + par2)/2", 0.5 * (q[0] + q[1]), q[2]);
    add("par3 <= alpha + 2 par1", q[2], alpha + 2.0 * q[0]);
    add("par3 <= alpha + 2 par2", q[2], alpha + 2.0 * q[1]);
    add("par3 <= par2 - alpha", q[2], q[1] - alpha);
    r.ok = std::all_of(r.checks.begin(), r.checks.end(), [](const CondbetaCheck& c) { return c.ok; });
    return r;
}

HypoWeights gamma_weights(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidParameter("eta must lie in (0, 1)");
    HypoWeights w;
    w.eta = eta;
    w.gamma_par = {eta, eta * eta, std::pow(eta, 1.75)};
    w.gamma_perp = w.gamma_par;
    return w;
}

double time_weight(double t, double eps, double alpha) {
    return std::min(1.0, t / std::pow(eps, 1.0 + alpha));
}

namespace {

void check_args(double t, double eps) {
    if (!(t >= 0.0)) throw InvalidParameter("t must be nonnegative");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
}

}  // namespace

double hypo_form(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e,
                 const HypoWeights& w) {
    check_args(t, eps);
    const double tau = time_weight(t, eps, alpha);
    const double t2 = tau * tau, t3 = t2 * tau;
    auto ep = [eps](double b) { return std::pow(eps, b); };
    const auto& gp = w.gamma_par;
    const auto& gq = w.gamma_perp;
    const auto& bp = e.beta_par;
    const auto& bq = e.beta_perp;
    return ns.n0 * ns.n0 + gp[0] * ep(bp[0]) * tau * ns.dv_par * ns.dv_par +
           gp[1] * ep(bp[1]) * t3 * ns.dx_par * ns.dx_par + 2.0 * gp[2] * ep(bp[2]) * t2 * ns.cross_par +
           gq[0] * ep(bq[0]) * tau * ns.dv_perp * ns.dv_perp + gq[1] * ep(bq[1]) * t3 * ns.dx_perp * ns.dx_perp +
           2.0 * gq[2] * ep(bq[2]) * t2 * ns.cross_perp;
}

double hypo_norm(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e,
                 const HypoWeights& w) {
    const double f = hypo_form(ns, t, eps, alpha, e, w);
    if (f < 0.0) {
        const double tau = time_weight(t, eps, alpha);
        const double cp = 2.0 * w.gamma_par[2] * std::pow(eps, e.beta_par[2]) * tau * tau * ns.cross_par;
        const double cq = 2.0 * w.gamma_perp[2] * std::pow(eps, e.beta_perp[2]) * tau * tau * ns.cross_perp;
        std::ostringstream os;
        os << "indefinite hypocoercive form (" << f << "): offending cross term "
           << (cp <= cq ? "<d_vpar h, d_xpar h>" : "<grad_vperp h, grad_xperp h>");
        throw InvalidParameter(os.str());
    }
    return std::sqrt(f);
}

double hypo_dissipation(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e) {
    check_args(t, eps);
    if (!ns.has_second_order) throw InvalidParameter("dissipation needs second-order norms");
    const double tau = time_weight(t, eps, alpha);
    const double t2 = tau * tau, t3 = t2 * tau;
    const double a = -(1.0 + alpha);
    auto ep = [eps](double b) { return std::pow(eps, b); };
    auto sq = [](double x) { return x * x; };
    const auto& bp = e.beta_par;
    const auto& bq = e.beta_perp;
    return ep(a) * sq(ns.grad_v) + ep(a + bp[0]) * tau * sq(ns.grad_v_dv_par) +
           ep(a + bp[1]) * t3 * sq(ns.grad_v_dx_par) + ep(-1.0 + bp[2]) * t2 * sq(ns.dx_par) +
           ep(a + bq[0]) * tau * sq(ns.grad_v_dv_perp) + ep(a + bq[1]) * t3 * sq(ns.grad_v_dx_perp) +
           ep(-1.0 + bq[2]) * t2 * sq(ns.dx_perp);
}

DecayCertificate certify_decay(const std::vector<DecaySample>& samples, double eps, double alpha, double eta) {
    if (samples.empty()) throw InvalidParameter("empty trajectory");
    if (samples.front().time != 0.0) throw InvalidParameter("trajectory must start at t = 0");
    const HypoExponents e = exponent_table(alpha);
    const HypoWeights w = gamma_weights(eta);
    DecayCertificate c;
    c.h0_norm = samples.front().ns.n0;
    const double budget = c.h0_norm * c.h0_norm * (1.0 + 1e-8);
    double integral = 0.0;
    double k = std::numeric_limits<double>::infinity();
    bool any_dissipation = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = samples[i].time;
        const double n = hypo_norm(samples[i].ns, t, eps, alpha, e, w);
        const double d = hypo_dissipation(samples[i].ns, t, eps, alpha, e);
        c.norms.push_back(n);
        c.dissipation.push_back(d);
        if (i > 0) {
            integral += 0.5 * (t - samples[i - 1].time) * (d + c.dissipation[i - 1]);
            if (n > c.norms[i - 1] * (1.0 + 1e-12) + 1e-300) c.monotone = false;
        }
        if (d > 0.0) any_dissipation = true;
        if (c.h0_norm > 0.0) c.max_norm_ratio = std::max(c.max_norm_ratio, n / c.h0_norm);
        if (n * n > budget && c.violation_time < 0.0) c.violation_time = t;
        if (integral > 0.0) k = std::min(k, (budget - n * n) / integral);
    }
    if (!any_dissipation) {
        c.equilibrium = true;
        c.K_hat = std::numeric_limits<double>::infinity();
        c.ok = c.violation_time < 0.0;
        return c;
    }
    c.K_hat = std::max(0.0, k);
    c.ok = c.violation_time < 0.0 && c.K_hat > 0.0;
    return c;
}

}  // namespace mvfp
