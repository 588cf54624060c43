#include "mvfp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mvfp/errors.hpp"
#include "mvfp/fft.hpp"
#include "mvfp/reduced.hpp"

namespace mvfp {

using nlohmann::json;

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw InvalidParameter("fit_rate needs at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [e, d] : points) {
        if (!(e > 0.0) || !std::isfinite(e)) throw InvalidParameter("fit_rate: eps must be positive");
        if (!(d > 0.0) || !std::isfinite(d)) throw InvalidParameter("fit_rate: distances must be positive");
        sx += std::log(e);
        sy += std::log(d);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [e, d] : points) {
        const double x = std::log(e) - mx;
        sxx += x * x;
        sxy += x * (std::log(d) - my);
    }
    if (!(sxx > 0.0)) throw InvalidParameter("fit_rate: eps values must not all coincide");
    RateFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r = 0;
    for (const auto& [e, d] : points) {
        const double res = std::log(d) - (f.intercept + f.slope * std::log(e));
        r += res * res;
    }
    f.residual = std::sqrt(r / n);
    return f;
}

// ---------------------------------------------------------------------------

TrajectoryResult run_trajectory(const Grid& g, const ScaledParams& p, const ScalarField3& phi,
                                const KineticState& h0, const TrajectoryOptions& opt, StepOptions sopt) {
    if (!(opt.t_max > 0.0)) throw InvalidParameter("t_max must be positive");
    if (opt.threshold < 0.0) throw InvalidParameter("threshold must be nonnegative");
    const bool hypo = opt.hypo && std::abs(p.alpha) < 1.0;
    KineticSolver solver(g, p, phi, sopt);
    const int sigma = p.sigma;
    const int every = std::max(1, opt.sample_every);

    TrajectoryResult r;
    const long n_max = static_cast<long>(std::ceil(opt.t_max / solver.max_dt() - 1e-12));
    r.dt = opt.t_max / static_cast<double>(n_max);

    KineticState h = h0;
    std::vector<DecaySample> decay;
    auto full_sample = [&](double t) {
        KineticDiagnostics d = diagnose(h, phi, sigma, t, opt.free_energy, hypo);
        if (hypo) {
            decay.push_back({t, d.norm_set});
            const HypoExponents e = exponent_table(p.alpha);
            d.hypo_norm = std::sqrt(std::max(0.0, hypo_form(d.norm_set, t, p.eps, p.alpha, e, gamma_weights(opt.eta))));
            d.hypo_dissipation = hypo_dissipation(d.norm_set, t, p.eps, p.alpha, e);
        } else {
            d.hypo_norm = std::numeric_limits<double>::quiet_NaN();
            d.hypo_dissipation = std::numeric_limits<double>::quiet_NaN();
        }
        if (!opt.free_energy) d.free_energy = std::numeric_limits<double>::quiet_NaN();
        if (opt.on_sample) opt.on_sample(h, d);
        r.samples.push_back(d);
    };

    auto content = [&]() {
        const double m = total_mass(h, phi, sigma);
        return std::max(0.0, weighted_inner(h, h, phi, sigma) - m * m);
    };

    r.content0 = content();
    Distances prev = maxwellian_distance(h, phi, sigma);
    double i1 = 0, i2 = 0;
    full_sample(0.0);
    double t = 0.0;
    long k = 0;
    bool sampled_last = true;
    while (k < n_max) {
        solver.step(h, r.dt);
        ++k;
        t = static_cast<double>(k) * r.dt;
        const Distances cur = maxwellian_distance(h, phi, sigma);
        i1 += 0.5 * r.dt * (prev.d_maxwell * prev.d_maxwell + cur.d_maxwell * cur.d_maxwell);
        i2 += 0.5 * r.dt * (prev.d_gibbs * prev.d_gibbs + cur.d_gibbs * cur.d_gibbs);
        prev = cur;
        sampled_last = false;
        if (k % every == 0) {
            full_sample(t);
            sampled_last = true;
        }
        if (opt.threshold > 0.0 && content() <= opt.threshold * r.content0) {
            r.reached_threshold = true;
            break;
        }
    }
    if (!sampled_last) full_sample(t);
    r.steps = k;
    r.final_time = t;
    r.content_end = content();
    r.D1 = std::sqrt(i1);
    r.D2 = std::sqrt(i2);
    if (hypo) r.certificate = certify_decay(decay, p.eps, p.alpha, opt.eta);
    return r;
}

// ---------------------------------------------------------------------------

json diagnostics_record(const KineticDiagnostics& d) {
    auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
    return {{"t", d.time},
            {"mass", d.mass},
            {"l2mu_sq", d.l2mu_sq},
            {"free_energy", num(d.free_energy)},
            {"d_maxwell", d.d_maxwell},
            {"d_gibbs", d.d_gibbs},
            {"hypo_norm", num(d.hypo_norm)},
            {"hypo_dissipation", num(d.hypo_dissipation)}};
}

void write_ndjson(std::ostream& os, const std::vector<json>& records) {
    for (const auto& r : records) os << r.dump() << '\n';
}

void write_ndjson(const std::string& path, const std::vector<json>& records) {
    std::ofstream out(path);
    if (!out) throw InvalidParameter("cannot open " + path);
    write_ndjson(out, records);
}

namespace {

// Runs f(i) for i in [0, n) on up to `degree` threads. Exceptions from f are
// the caller's business: f must not throw.
template <class F>
void parallel_for(std::size_t n, int degree, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, degree)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

std::string failure(const std::exception& e) { return std::string("failed: ") + e.what(); }

}  // namespace

RateReport run_rate_sweep(const SweepConfig& cfg, std::vector<json>* records) {
    if (cfg.eps.size() < 3) throw InvalidParameter("rate sweep needs at least 3 eps values");
    const Grid g = cfg.grid.grid();
    validate_grid(g);
    const ScalarField3 phi = make_phi(cfg.phi, g.nx, cfg.sigma);
    const KineticState h0 = make_initial(cfg.h0, g, phi, cfg.sigma);

    struct Job {
        double alpha, eps;
    };
    std::vector<Job> jobs;
    for (double a : cfg.alphas)
        for (double e : cfg.eps) jobs.push_back({a, e});

    std::vector<RateCell> cells(jobs.size());
    std::vector<std::vector<json>> cell_records(jobs.size());
    parallel_for(jobs.size(), cfg.parallel, [&](std::size_t i) {
        RateCell& c = cells[i];
        c.alpha = jobs[i].alpha;
        c.eps = jobs[i].eps;
        try {
            ScaledParams p;
            p.eps = c.eps;
            p.alpha = c.alpha;
            p.sigma = cfg.sigma;
            p.sigma0 = cfg.sigma0;
            validate_scaled(p);
            TrajectoryOptions opt;
            opt.t_max = cfg.t_max;
            opt.threshold = cfg.threshold;
            opt.eta = cfg.eta;
            KineticSolver probe(g, p, phi);
            const double dt = cfg.t_max / std::ceil(cfg.t_max / probe.max_dt() - 1e-12);
            opt.sample_every =
                std::max(1, static_cast<int>(std::floor(cfg.sample_fraction * std::pow(c.eps, 1.0 + c.alpha) / dt)));
            auto& rec = cell_records[i];
            opt.on_sample = [&](const KineticState&, const KineticDiagnostics& d) {
                json j = diagnostics_record(d);
                j["kind"] = "rate";
                j["alpha"] = c.alpha;
                j["eps"] = c.eps;
                rec.push_back(std::move(j));
            };
            const TrajectoryResult r = run_trajectory(g, p, phi, h0, opt);
            c.D1 = r.D1;
            c.D2 = r.D2;
            c.final_time = r.final_time;
            c.steps = r.steps;
            c.reached_threshold = r.reached_threshold;
            if (r.certificate) {
                c.cert_K = r.certificate->K_hat;
                c.cert_max_ratio = r.certificate->max_norm_ratio;
                c.cert_ok = r.certificate->ok;
            }
            if (r.content0 == 0.0 || (c.D1 == 0.0 && c.D2 == 0.0)) {
                c.status = "equilibrium";
                c.cert_ok = true;
            }
        } catch (const std::exception& e) {
            c.status = failure(e);
        }
    });

    if (records)
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            for (auto& j : cell_records[i]) records->push_back(std::move(j));
            const RateCell& c = cells[i];
            records->push_back({{"kind", "rate_cell"},
                                {"alpha", c.alpha},
                                {"eps", c.eps},
                                {"D1", c.D1},
                                {"D2", c.D2},
                                {"final_time", c.final_time},
                                {"steps", c.steps},
                                {"reached_threshold", c.reached_threshold},
                                {"status", c.status},
                                {"cert_K", std::isfinite(c.cert_K) ? json(c.cert_K) : json("inf")},
                                {"cert_max_ratio", c.cert_max_ratio},
                                {"cert_ok", c.cert_ok}});
        }

    RateReport rep;
    rep.cells = cells;
    rep.all_pass = true;
    rep.certificates_ok = true;
    for (double a : cfg.alphas) {
        AlphaFit f;
        f.alpha = a;
        f.predicted1 = 0.5 * (a + 1.0);
        f.predicted2 = 0.5 * (1.0 - std::abs(a));
        std::vector<std::pair<double, double>> p1, p2;
        bool complete = true, equilibrium = true;
        for (const auto& c : cells) {
            if (c.alpha != a) continue;
            if (c.status.rfind("failed", 0) == 0) complete = false;
            if (c.status != "equilibrium") equilibrium = false;
            if (!c.cert_ok) rep.certificates_ok = false;
            p1.emplace_back(c.eps, c.D1);
            p2.emplace_back(c.eps, c.D2);
        }
        f.complete = complete;
        f.equilibrium = equilibrium && complete;
        if (f.equilibrium) {
            f.pass1 = f.pass2 = true;
        } else if (complete) {
            try {
                const RateFit r1 = fit_rate(p1), r2 = fit_rate(p2);
                f.s1 = r1.slope;
                f.s2 = r2.slope;
                f.r1 = r1.residual;
                f.r2 = r2.residual;
                f.pass1 = f.s1 >= f.predicted1 - cfg.slope_tol;
                f.pass2 = f.s2 >= f.predicted2 - cfg.slope_tol;
            } catch (const InvalidParameter&) {
                f.complete = false;
            }
        }
        if (!(f.pass1 && f.pass2 && f.complete)) rep.all_pass = false;
        rep.fits.push_back(f);
    }
    return rep;
}

void write_rate_csv(std::ostream& os, const RateReport& r) {
    os << "alpha,eps,D1,D2,s1,s2,predicted1,predicted2,pass1,pass2\n";
    os.precision(17);
    for (const auto& c : r.cells) {
        const AlphaFit* f = nullptr;
        for (const auto& x : r.fits)
            if (x.alpha == c.alpha) f = &x;
        os << c.alpha << ',' << c.eps << ',' << c.D1 << ',' << c.D2 << ',';
        if (f && f->complete && !f->equilibrium) os << f->s1 << ',' << f->s2;
        else os << "nan,nan";
        os << ',' << (f ? f->predicted1 : 0.0) << ',' << (f ? f->predicted2 : 0.0) << ','
           << (f && f->pass1 ? "true" : "false") << ',' << (f && f->pass2 ? "true" : "false") << '\n';
    }
}

// ---------------------------------------------------------------------------

ProbeReport run_regime_probe(const ProbeConfig& cfg, std::vector<json>* records) {
    const Grid g = cfg.grid.grid();
    validate_grid(g);
    const ScalarField3 phi = make_phi(cfg.phi, g.nx, cfg.sigma);
    const KineticState h0 = make_initial(cfg.h0, g, phi, cfg.sigma);

    std::vector<ProbeResult> results(cfg.cases.size());
    std::vector<std::vector<json>> cell_records(cfg.cases.size());
    parallel_for(cfg.cases.size(), cfg.parallel, [&](std::size_t i) {
        ProbeResult& pr = results[i];
        pr.sigma0 = cfg.cases[i].sigma0;
        pr.alpha = cfg.cases[i].alpha;
        if (pr.alpha > 1.0) pr.regime = "freeze";
        else if (pr.alpha >= 1.0 || pr.alpha <= -1.0) pr.regime = "diffusive";
        else pr.regime = pr.sigma0 == 0 ? "isotropic" : "anisotropic";
        pr.has_criterion = pr.regime != "diffusive";
        try {
            if (pr.sigma0 != 0 && pr.sigma0 != 1) throw InvalidParameter("sigma0 must be 0 or 1");
            ScaledParams p;
            p.eps = cfg.eps;
            p.alpha = pr.alpha;
            p.sigma = cfg.sigma;
            p.sigma0 = pr.sigma0;
            validate_scaled(p, true);
            TrajectoryOptions opt;
            opt.t_max = cfg.t_max;
            opt.hypo = false;
            KineticSolver probe(g, p, phi);
            const long n = static_cast<long>(std::ceil(cfg.t_max / probe.max_dt() - 1e-12));
            const double dt = cfg.t_max / static_cast<double>(n);
            // window start on the step grid
            const long k1 = static_cast<long>(std::floor((1.0 - cfg.window) * static_cast<double>(n)));
            const double t1 = static_cast<double>(k1) * dt;
            // sample on a divisor of k1 so the window start is hit exactly
            long every = std::max<long>(1, n / 40);
            while (k1 % every != 0) --every;
            opt.sample_every = static_cast<int>(every);
            ScalarField3 n1;
            auto& rec = cell_records[i];
            opt.on_sample = [&](const KineticState& h, const KineticDiagnostics& d) {
                const double iso = isotropic_distance(h, phi, cfg.sigma);
                if (std::abs(d.time - t1) <= 0.5 * dt) n1 = moments(h, phi, cfg.sigma, cfg.eps).n;
                json j = diagnostics_record(d);
                j["kind"] = "probe";
                j["sigma0"] = pr.sigma0;
                j["alpha"] = pr.alpha;
                j["iso"] = iso;
                rec.push_back(std::move(j));
            };
            KineticState hend = h0;
            auto grab = opt.on_sample;
            opt.on_sample = [&](const KineticState& h, const KineticDiagnostics& d) {
                grab(h, d);
                hend = h;
            };
            const TrajectoryResult r = run_trajectory(g, p, phi, h0, opt);
            pr.final_time = r.final_time;
            pr.final_iso = isotropic_distance(hend, phi, cfg.sigma);
            pr.final_gibbs = r.samples.back().d_gibbs;
            const ScalarField3 n2 = moments(hend, phi, cfg.sigma, cfg.eps).n;
            pr.window_variation = n1.size() == n2.size() ? lp_norm(n2 - n1, 2.0)
                                                          : std::numeric_limits<double>::quiet_NaN();
            if (pr.regime == "isotropic") pr.pass = pr.final_iso < cfg.iso_threshold;
            else if (pr.regime == "anisotropic")
                pr.pass = pr.final_gibbs > 0.0 ? pr.final_iso / pr.final_gibbs >= cfg.anisotropy_ratio
                                               : pr.final_iso > 0.0;
            else if (pr.regime == "freeze") pr.pass = pr.window_variation < cfg.freeze_threshold;
            else pr.pass = true;
        } catch (const std::exception& e) {
            pr.status = failure(e);
            pr.pass = false;
        }
    });

    ProbeReport rep;
    rep.results = results;
    rep.all_pass = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& pr = results[i];
        if (pr.has_criterion && !pr.pass) rep.all_pass = false;
        if (records) {
            for (auto& j : cell_records[i]) records->push_back(std::move(j));
            auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
            records->push_back({{"kind", "probe_result"},
                                {"sigma0", pr.sigma0},
                                {"alpha", pr.alpha},
                                {"regime", pr.regime},
                                {"final_iso", num(pr.final_iso)},
                                {"final_gibbs", num(pr.final_gibbs)},
                                {"window_variation", num(pr.window_variation)},
                                {"final_time", pr.final_time},
                                {"has_criterion", pr.has_criterion},
                                {"pass", pr.pass},
                                {"status", pr.status}});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

CompareReport compare_kinetic_reduced(const CompareConfig& cfg, std::vector<json>* records) {
    if (cfg.eps.empty()) throw InvalidParameter("compare needs at least one eps");
    if (cfg.kmax < 1) throw InvalidParameter("kmax must be positive");
    const Grid g = cfg.grid.grid();
    validate_grid(g);
    const ScalarField3 phi = make_phi(cfg.phi, g.nx, cfg.sigma);
    const KineticState h0 = make_initial(cfg.h0, g, phi, cfg.sigma);
    const double spacing = cfg.horizon / cfg.samples;

    CompareReport rep;
    rep.eps = cfg.eps;
    for (int k = 0; k <= cfg.samples; ++k) rep.times.push_back(k * spacing);

    // reduced reference
    std::vector<ScalarField2> ref;
    const ScalarField2 N0 = moments(h0, phi, cfg.sigma, 1.0).N_perp;
    try {
        ReducedState s0;
        s0.N = N0;
        s0.species = cfg.sigma < 0 ? Species::light : Species::heavy;
        ScaledParams p;
        p.sigma = cfg.sigma;
        p.alpha = cfg.alpha;
        ReducedOptions ro;
        ro.mode = ReducedMode::external;
        ro.phi = phi;
        const int per = static_cast<int>(std::ceil(spacing / cfg.reduced_dt - 1e-12));
        ro.dt = spacing / per;
        ro.sample_every = per;
        const ReducedTrajectory tr = solve_reduced(s0, p, cfg.horizon, ro);
        for (const auto& st : tr.states) ref.push_back(st.N);
        if (ref.size() != rep.times.size()) throw InvalidParameter("reduced sampling mismatch");
    } catch (const std::exception& e) {
        rep.status = std::string("reduced ") + failure(e);
        return rep;
    }

    rep.discrepancy.assign(cfg.eps.size(), std::vector<double>(rep.times.size(), std::numeric_limits<double>::quiet_NaN()));
    std::vector<std::string> errors(cfg.eps.size());
    parallel_for(cfg.eps.size(), cfg.parallel, [&](std::size_t i) {
        try {
            ScaledParams p;
            p.eps = cfg.eps[i];
            p.alpha = cfg.alpha;
            p.sigma = cfg.sigma;
            p.sigma0 = 1;
            validate_scaled(p);
            KineticSolver solver(g, p, phi);
            const long per = static_cast<long>(std::ceil(spacing / solver.max_dt() - 1e-12));
            const double dt = spacing / static_cast<double>(per);
            KineticState h = h0;
            auto& d = rep.discrepancy[i];
            d[0] = low_mode_l2(moments(h, phi, cfg.sigma, p.eps).N_perp - ref[0], cfg.kmax);
            for (int k = 1; k <= cfg.samples; ++k) {
                for (long s = 0; s < per; ++s) solver.step(h, dt);
                d[k] = low_mode_l2(moments(h, phi, cfg.sigma, p.eps).N_perp - ref[k], cfg.kmax);
            }
        } catch (const std::exception& e) {
            errors[i] = failure(e);
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) {
            std::ostringstream os;
            os << "eps " << cfg.eps[i] << ": " << errors[i];
            rep.status = os.str();
        }

    rep.monotone = rep.status == "ok";
    // times[0] is matched by construction; strict decrease required afterwards
    for (std::size_t k = 1; k < rep.times.size() && rep.monotone; ++k)
        for (std::size_t i = 1; i < cfg.eps.size(); ++i) {
            const bool smaller_eps = cfg.eps[i] < cfg.eps[i - 1];
            const double a = rep.discrepancy[i - 1][k], b = rep.discrepancy[i][k];
            if (!(smaller_eps ? b < a : b > a)) rep.monotone = false;
        }

    if (records) {
        for (std::size_t i = 0; i < cfg.eps.size(); ++i)
            for (std::size_t k = 0; k < rep.times.size(); ++k) {
                const double v = rep.discrepancy[i][k];
                records->push_back({{"kind", "compare"},
                                    {"eps", cfg.eps[i]},
                                    {"t", rep.times[k]},
                                    {"discrepancy", std::isfinite(v) ? json(v) : json(nullptr)}});
            }
        records->push_back({{"kind", "compare_result"}, {"monotone", rep.monotone}, {"status", rep.status}});
    }
    return rep;
}

}  // namespace mvfp
