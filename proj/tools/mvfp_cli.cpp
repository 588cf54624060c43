#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvfp/config.hpp"
#include "mvfp/elliptic.hpp"
#include "mvfp/errors.hpp"
#include "mvfp/experiments.hpp"
#include "mvfp/hypo.hpp"
#include "mvfp/kinetic.hpp"
#include "mvfp/reduced.hpp"

using namespace mvfp;
using nlohmann::json;

namespace {

json config_or_empty(const std::string& path) { return path.empty() ? json::object() : load_json(path); }

void emit(const std::string& path, const std::vector<json>& records) {
    if (path.empty() || path == "-") write_ndjson(std::cout, records);
    else write_ndjson(path, records);
}

// smooth positive unit-mean random field built from a few low Fourier modes
template <class Field, class Fn>
Field random_density(std::mt19937_64& rng, Field f, int dims, Fn&& index_coords) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    constexpr double tp = 2.0 * std::numbers::pi;
    double c[3][2];
    for (auto& row : c)
        for (auto& x : row) x = 0.15 * U(rng);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = index_coords(i);
        double v = 1.0;
        for (int a = 0; a < dims; ++a) v += c[a][0] * std::cos(tp * x[a]) + c[a][1] * std::sin(tp * x[a]);
        f[i] = v;
    }
    const double m = mean(f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] /= m;
    return f;
}

int run_hypo_check(int points, double eta) {
    bool ok = true;
    for (int i = 0; i < points; ++i) {
        const double a = -0.99 + 1.98 * i / (points - 1);
        const auto rep = validate_condbeta(a, exponent_table(a));
        if (!rep.ok) {
            ok = false;
            for (const auto& c : rep.checks)
                if (!c.ok) std::cout << "alpha=" << a << " violates " << c.name << " (" << c.lhs << " > " << c.rhs << ")\n";
        }
    }
    const HypoWeights w = gamma_weights(eta);
    std::cout << "condbeta on " << points << " alpha values: " << (ok ? "pass" : "FAIL") << "\n";
    std::cout << "gamma = (" << w.gamma_par[0] << ", " << w.gamma_par[1] << ", " << w.gamma_par[2] << ")\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnetized Vlasov-Fokker-Planck toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = 12345;
    std::string config_path;
    app.add_option("--seed", seed, "seed for generated test data");
    app.add_option("--config", config_path, "JSON configuration file");

    // simulate-kinetic
    auto* sim = app.add_subcommand("simulate-kinetic", "integrate the kinetic equation and emit diagnostics");
    double eps = 0.1, alpha = 0.0, t_max = 0.5;
    int sigma = -1, sigma0 = 1, every = 10, nx = 16, nv = 8;
    bool free_energy = false;
    std::string out, state_out;
    sim->add_option("--eps", eps);
    sim->add_option("--alpha", alpha);
    sim->add_option("--sigma", sigma);
    sim->add_option("--sigma0", sigma0);
    sim->add_option("--t-max", t_max);
    sim->add_option("--every", every, "steps between samples");
    sim->add_option("--nx", nx);
    sim->add_option("--nv", nv);
    sim->add_flag("--free-energy", free_energy);
    sim->add_option("--out", out, "NDJSON diagnostics (default stdout)");
    sim->add_option("--state-out", state_out, "write the final state");

    // solve-reduced
    auto* red = app.add_subcommand("solve-reduced", "integrate the guiding-centre model");
    std::string species = "heavy", mode = "coupled";
    double horizon = 0.1, rdt = 1e-3, delta = 1.0, amp = 0.2;
    int rn = 32, picard = 6;
    red->add_option("--species", species)->check(CLI::IsMember({"light", "heavy"}));
    red->add_option("--mode", mode)->check(CLI::IsMember({"coupled", "picard", "external"}));
    red->add_option("--horizon", horizon);
    red->add_option("--dt", rdt);
    red->add_option("--delta", delta);
    red->add_option("--amplitude", amp, "N0 = 1 + a cos(2 pi x2)");
    red->add_option("--n", rn);
    red->add_option("--picard", picard);
    red->add_option("--out", out);

    // solve-pb
    auto* pb = app.add_subcommand("solve-pb", "solve the Poisson-Boltzmann problem on random data");
    double tol = 1e-10;
    int pn = 16;
    pb->add_option("--species", species)->check(CLI::IsMember({"light", "heavy"}));
    pb->add_option("--delta", delta);
    pb->add_option("--tol", tol);
    pb->add_option("--n", pn);

    int parallel = 0;
    auto* sweep = app.add_subcommand("rate-sweep", "convergence-rate sweep over (alpha, eps)");
    sweep->add_option("--parallel", parallel);
    auto* probe = app.add_subcommand("regime-probe", "collision-dominated and isotropic probes");
    probe->add_option("--parallel", parallel);
    auto* cmp = app.add_subcommand("compare", "kinetic versus reduced density");
    cmp->add_option("--parallel", parallel);

    auto* hypo = app.add_subcommand("hypo-check", "exponent conditions on an alpha grid");
    int points = 101;
    double eta = kEtaMax;
    hypo->add_option("--points", points);
    hypo->add_option("--eta", eta);

    CLI11_PARSE(app, argc, argv);

    try {
        std::mt19937_64 rng(seed);
        if (*sim) {
            Grid g{{nx, nx, nx}, {nv, nv, nv}};
            validate_grid(g);
            const json cfg = config_or_empty(config_path);
            PhiProfile pp;
            InitialProfile ip;
            if (cfg.contains("phi")) {
                pp.a1 = cfg["phi"].value("a1", pp.a1);
                pp.a3 = cfg["phi"].value("a3", pp.a3);
            }
            if (cfg.contains("h0")) {
                ip.kind = cfg["h0"].value("kind", ip.kind);
                ip.density = cfg["h0"].value("density", ip.density);
                ip.vpar = cfg["h0"].value("vpar", ip.vpar);
                ip.perp = cfg["h0"].value("perp", ip.perp);
            }
            ScaledParams p;
            p.eps = eps;
            p.alpha = alpha;
            p.sigma = sigma;
            p.sigma0 = sigma0;
            validate_scaled(p, true);
            const ScalarField3 phi = make_phi(pp, g.nx, sigma);
            const KineticState h0 = make_initial(ip, g, phi, sigma);
            TrajectoryOptions opt;
            opt.t_max = t_max;
            opt.sample_every = every;
            opt.free_energy = free_energy;
            std::vector<json> recs;
            KineticState last = h0;
            opt.on_sample = [&](const KineticState& h, const KineticDiagnostics& d) {
                recs.push_back(diagnostics_record(d));
                if (!state_out.empty()) last = h;
            };
            const auto r = run_trajectory(g, p, phi, h0, opt);
            recs.push_back({{"kind", "summary"}, {"D1", r.D1}, {"D2", r.D2}, {"steps", r.steps}, {"dt", r.dt}});
            emit(out, recs);
            if (!state_out.empty()) save_state(state_out, last);
            return 0;
        }
        if (*red) {
            constexpr double tp = 2.0 * std::numbers::pi;
            ReducedState s;
            s.species = species == "light" ? Species::light : Species::heavy;
            s.delta = delta;
            s.N = ScalarField2::from_function({rn, rn}, [&](double, double x2) { return 1.0 + amp * std::cos(tp * x2); });
            ScaledParams p;
            p.delta = delta;
            ReducedOptions o;
            o.mode = mode == "coupled" ? ReducedMode::coupled : mode == "picard" ? ReducedMode::picard : ReducedMode::external;
            o.dt = rdt;
            o.picard_iterations = picard;
            const int sg = s.species == Species::light ? -1 : 1;
            const ScalarField3 phi = make_phi(PhiProfile{}, {rn, rn, 16}, sg);
            if (s.species == Species::light) s.ubar = gibbs_weight(phi, sg);
            if (o.mode == ReducedMode::external) o.phi = phi;
            const auto tr = solve_reduced(s, p, horizon, o);
            std::vector<json> recs;
            for (const auto& x : tr.samples)
                recs.push_back({{"t", x.time}, {"mass", x.mass}, {"l2", x.l2}, {"max_u", x.max_u},
                                {"max_grad_phit", x.max_grad_phit}});
            emit(out, recs);
            return 0;
        }
        if (*pb) {
            if (species == "heavy") {
                const ScalarField2 N = random_density(rng, ScalarField2({pn, pn}), 2, [&](std::size_t i) {
                    return std::array<double, 3>{double(i / pn) / pn, double(i % pn) / pn, 0.0};
                });
                const auto sol = solve_pb_heavy(N, delta, tol);
                std::cout << "heavy: iterations " << sol.iterations << ", residual " << sol.residual_norm
                          << ", energy " << sol.energy << "\n";
                return sol.residual_norm <= tol ? 0 : 1;
            }
            const std::array<int, 3> n3{pn, pn, pn};
            auto coords = [&](std::size_t i) {
                const std::size_t k = i % pn, j = (i / pn) % pn, a = i / (std::size_t(pn) * pn);
                return std::array<double, 3>{double(a) / pn, double(j) / pn, double(k) / pn};
            };
            const ScalarField2 N = random_density(rng, ScalarField2({pn, pn}), 2, [&](std::size_t i) {
                return std::array<double, 3>{double(i / pn) / pn, double(i % pn) / pn, 0.0};
            });
            const ScalarField3 ub = random_density(rng, ScalarField3(n3), 3, coords);
            const auto sol = solve_pb_light(EllipticProblemLight{N, ub, delta}, tol);
            std::cout << "light: iterations " << sol.iterations << ", residual " << sol.residual_norm << ", energy "
                      << sol.energy << "\n";
            return sol.residual_norm <= tol ? 0 : 1;
        }
        if (*sweep) {
            SweepConfig c = sweep_config_from_json(config_or_empty(config_path));
            if (parallel > 0) c.parallel = parallel;
            std::vector<json> recs;
            const RateReport r = run_rate_sweep(c, c.ndjson.empty() ? nullptr : &recs);
            if (!c.ndjson.empty()) write_ndjson(c.ndjson, recs);
            if (c.csv.empty()) write_rate_csv(std::cout, r);
            else {
                std::ofstream f(c.csv);
                write_rate_csv(f, r);
            }
            std::ofstream summary_file;
            std::ostream& sum = c.summary.empty() ? std::cout : (summary_file.open(c.summary), summary_file);
            for (const auto& f : r.fits)
                sum << "alpha " << f.alpha << ": s1 " << f.s1 << " (>= " << f.predicted1 - c.slope_tol << ") "
                    << (f.pass1 ? "pass" : "FAIL") << ", s2 " << f.s2 << " (>= " << f.predicted2 - c.slope_tol << ") "
                    << (f.pass2 ? "pass" : "FAIL") << (f.complete ? "" : " [incomplete]") << "\n";
            for (const auto& cell : r.cells)
                if (cell.status != "ok") sum << "cell alpha " << cell.alpha << " eps " << cell.eps << ": " << cell.status << "\n";
            sum << "certificates: " << (r.certificates_ok ? "pass" : "FAIL") << "\n";
            return r.all_pass && r.certificates_ok ? 0 : 1;
        }
        if (*probe) {
            ProbeConfig c = probe_config_from_json(config_or_empty(config_path));
            if (parallel > 0) c.parallel = parallel;
            std::vector<json> recs;
            const ProbeReport r = run_regime_probe(c, &recs);
            if (!c.ndjson.empty()) write_ndjson(c.ndjson, recs);
            for (const auto& x : r.results)
                std::cout << "sigma0 " << x.sigma0 << " alpha " << x.alpha << " [" << x.regime << "]: iso " << x.final_iso
                          << ", gibbs " << x.final_gibbs << ", window " << x.window_variation << " -> "
                          << (x.has_criterion ? (x.pass ? "pass" : "FAIL") : "no criterion")
                          << (x.status == "ok" ? "" : " " + x.status) << "\n";
            return r.all_pass ? 0 : 1;
        }
        if (*cmp) {
            CompareConfig c = compare_config_from_json(config_or_empty(config_path));
            if (parallel > 0) c.parallel = parallel;
            std::vector<json> recs;
            const CompareReport r = compare_kinetic_reduced(c, &recs);
            if (!c.ndjson.empty()) write_ndjson(c.ndjson, recs);
            for (std::size_t i = 0; i < r.eps.size() && i < r.discrepancy.size(); ++i) {
                std::cout << "eps " << r.eps[i] << ":";
                for (double d : r.discrepancy[i]) std::cout << " " << d;
                std::cout << "\n";
            }
            std::cout << "monotone: " << (r.monotone ? "pass" : "FAIL") << (r.status == "ok" ? "" : " " + r.status) << "\n";
            return r.monotone ? 0 : 1;
        }
        if (*hypo) return run_hypo_check(points, eta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
