#include "mvfp/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "mvfp/errors.hpp"
#include "mvfp/kinetic.hpp"

namespace mvfp {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
    if (!j.is_object()) throw InvalidParameter(std::string(what) + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw InvalidParameter(std::string("unknown key '") + it.key() + "' in " + what);
}

template <class T>
void get(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidParameter(std::string("bad value for '") + key + "': " + e.what());
    }
}

PhiProfile phi_from(const json& j) {
    PhiProfile p;
    reject_unknown(j, {"a1", "a3"}, "phi");
    get(j, "a1", p.a1);
    get(j, "a3", p.a3);
    return p;
}

InitialProfile h0_from(const json& j, InitialProfile p) {
    reject_unknown(j, {"kind", "density", "vpar", "perp"}, "h0");
    get(j, "kind", p.kind);
    get(j, "density", p.density);
    get(j, "vpar", p.vpar);
    get(j, "perp", p.perp);
    if (p.kind != "default" && p.kind != "gibbs_perp" && p.kind != "maxwellian")
        throw InvalidParameter("h0.kind must be default, gibbs_perp or maxwellian");
    return p;
}

GridSpec grid_from(const json& j, GridSpec g) {
    reject_unknown(j, {"nx", "nv"}, "grid");
    get(j, "nx", g.nx);
    get(j, "nv", g.nv);
    validate_grid(g.grid());
    return g;
}

json phi_json(const PhiProfile& p) { return {{"a1", p.a1}, {"a3", p.a3}}; }
json h0_json(const InitialProfile& p) {
    return {{"kind", p.kind}, {"density", p.density}, {"vpar", p.vpar}, {"perp", p.perp}};
}
json grid_json(const GridSpec& g) { return {{"nx", g.nx}, {"nv", g.nv}}; }

void check_sigma(int s) {
    if (s != 1 && s != -1) throw InvalidParameter("sigma must be -1 or +1");
}

}  // namespace

SweepConfig sweep_config_from_json(const json& j) {
    SweepConfig c;
    reject_unknown(j,
                   {"alphas", "eps", "phi", "h0", "grid", "sigma", "sigma0", "threshold", "t_max", "sample_fraction",
                    "eta", "slope_tol", "parallel", "csv", "ndjson", "summary"},
                   "sweep config");
    get(j, "alphas", c.alphas);
    get(j, "eps", c.eps);
    if (j.contains("phi")) c.phi = phi_from(j["phi"]);
    if (j.contains("h0")) c.h0 = h0_from(j["h0"], c.h0);
    if (j.contains("grid")) c.grid = grid_from(j["grid"], c.grid);
    get(j, "sigma", c.sigma);
    get(j, "sigma0", c.sigma0);
    get(j, "threshold", c.threshold);
    get(j, "t_max", c.t_max);
    get(j, "sample_fraction", c.sample_fraction);
    get(j, "eta", c.eta);
    get(j, "slope_tol", c.slope_tol);
    get(j, "parallel", c.parallel);
    get(j, "csv", c.csv);
    get(j, "ndjson", c.ndjson);
    get(j, "summary", c.summary);
    check_sigma(c.sigma);
    for (double e : c.eps)
        if (!(e > 0.0 && e < 1.0)) throw InvalidParameter("eps values must lie in (0, 1)");
    for (double a : c.alphas)
        if (!(std::abs(a) < 1.0)) throw InvalidParameter("alphas must lie in (-1, 1)");
    if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw InvalidParameter("threshold must lie in (0, 1)");
    if (!(c.t_max > 0.0)) throw InvalidParameter("t_max must be positive");
    if (c.parallel < 1) throw InvalidParameter("parallel must be at least 1");
    return c;
}

ProbeConfig probe_config_from_json(const json& j) {
    ProbeConfig c;
    reject_unknown(j,
                   {"cases", "eps", "phi", "h0", "grid", "sigma", "t_max", "iso_threshold", "freeze_threshold",
                    "window", "anisotropy_ratio", "parallel", "ndjson"},
                   "probe config");
    if (j.contains("cases")) {
        c.cases.clear();
        for (const auto& e : j["cases"]) {
            ProbeCase pc;
            reject_unknown(e, {"sigma0", "alpha"}, "probe case");
            get(e, "sigma0", pc.sigma0);
            get(e, "alpha", pc.alpha);
            c.cases.push_back(pc);
        }
    }
    get(j, "eps", c.eps);
    if (j.contains("phi")) c.phi = phi_from(j["phi"]);
    if (j.contains("h0")) c.h0 = h0_from(j["h0"], c.h0);
    if (j.contains("grid")) c.grid = grid_from(j["grid"], c.grid);
    get(j, "sigma", c.sigma);
    get(j, "t_max", c.t_max);
    get(j, "iso_threshold", c.iso_threshold);
    get(j, "freeze_threshold", c.freeze_threshold);
    get(j, "window", c.window);
    get(j, "anisotropy_ratio", c.anisotropy_ratio);
    get(j, "parallel", c.parallel);
    get(j, "ndjson", c.ndjson);
    check_sigma(c.sigma);
    if (!(c.eps > 0.0 && c.eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
    if (!(c.window > 0.0 && c.window < 1.0)) throw InvalidParameter("window must lie in (0, 1)");
    if (c.parallel < 1) throw InvalidParameter("parallel must be at least 1");
    return c;
}

CompareConfig compare_config_from_json(const json& j) {
    CompareConfig c;
    reject_unknown(j,
                   {"eps", "phi", "h0", "grid", "sigma", "alpha", "horizon", "samples", "kmax", "reduced_dt",
                    "parallel", "ndjson"},
                   "compare config");
    get(j, "eps", c.eps);
    if (j.contains("phi")) c.phi = phi_from(j["phi"]);
    if (j.contains("h0")) c.h0 = h0_from(j["h0"], c.h0);
    if (j.contains("grid")) c.grid = grid_from(j["grid"], c.grid);
    get(j, "sigma", c.sigma);
    get(j, "alpha", c.alpha);
    get(j, "horizon", c.horizon);
    get(j, "samples", c.samples);
    get(j, "kmax", c.kmax);
    get(j, "reduced_dt", c.reduced_dt);
    get(j, "parallel", c.parallel);
    get(j, "ndjson", c.ndjson);
    check_sigma(c.sigma);
    for (double e : c.eps)
        if (!(e > 0.0 && e < 1.0)) throw InvalidParameter("eps values must lie in (0, 1)");
    if (!(c.horizon > 0.0)) throw InvalidParameter("horizon must be positive");
    if (c.samples < 1) throw InvalidParameter("samples must be at least 1");
    if (c.parallel < 1) throw InvalidParameter("parallel must be at least 1");
    return c;
}

json to_json(const SweepConfig& c) {
    return {{"alphas", c.alphas},       {"eps", c.eps},
            {"phi", phi_json(c.phi)},   {"h0", h0_json(c.h0)},
            {"grid", grid_json(c.grid)}, {"sigma", c.sigma},
            {"sigma0", c.sigma0},       {"threshold", c.threshold},
            {"t_max", c.t_max},         {"sample_fraction", c.sample_fraction},
            {"eta", c.eta},             {"slope_tol", c.slope_tol},
            {"parallel", c.parallel},   {"csv", c.csv},
            {"ndjson", c.ndjson},       {"summary", c.summary}};
}

json to_json(const ProbeConfig& c) {
    json cases = json::array();
    for (const auto& pc : c.cases) cases.push_back({{"sigma0", pc.sigma0}, {"alpha", pc.alpha}});
    return {{"cases", cases},
            {"eps", c.eps},
            {"phi", phi_json(c.phi)},
            {"h0", h0_json(c.h0)},
            {"grid", grid_json(c.grid)},
            {"sigma", c.sigma},
            {"t_max", c.t_max},
            {"iso_threshold", c.iso_threshold},
            {"freeze_threshold", c.freeze_threshold},
            {"window", c.window},
            {"anisotropy_ratio", c.anisotropy_ratio},
            {"parallel", c.parallel},
            {"ndjson", c.ndjson}};
}

json to_json(const CompareConfig& c) {
    return {{"eps", c.eps},         {"phi", phi_json(c.phi)},
            {"h0", h0_json(c.h0)},  {"grid", grid_json(c.grid)},
            {"sigma", c.sigma},     {"alpha", c.alpha},
            {"horizon", c.horizon}, {"samples", c.samples},
            {"kmax", c.kmax},       {"reduced_dt", c.reduced_dt},
            {"parallel", c.parallel}, {"ndjson", c.ndjson}};
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidParameter("config " + path + ": " + e.what());
    }
}

ScalarField3 make_phi(const PhiProfile& p, const std::array<int, 3>& nx, int sigma) {
    constexpr double tp = 2.0 * std::numbers::pi;
    return normalize_phi(ScalarField3::from_function(nx,
                                                     [&](double x1, double, double x3) {
                                                         return p.a1 * std::cos(tp * x1) + p.a3 * std::cos(tp * x3);
                                                     }),
                         sigma);
}

KineticState make_initial(const InitialProfile& p, const Grid& g, const ScalarField3& phi, int sigma) {
    constexpr double tp = 2.0 * std::numbers::pi;
    KineticState h(g);
    if (p.kind == "maxwellian") return KineticState::constant(g, 1.0);
    if (p.kind == "default") {
        h.set_mode_field(0, 0, 0, ScalarField3::from_function(g.nx, [&](double x1, double x2, double x3) {
                             return 1.0 + p.density * std::sin(tp * x3) * std::cos(tp * x2) +
                                    p.perp * std::cos(tp * x1);
                         }));
        if (g.nv[2] > 1)
            h.set_mode_field(0, 0, 1, ScalarField3::from_function(g.nx, [&](double, double, double x3) {
                                 return p.vpar * std::cos(tp * x3);
                             }));
    } else if (p.kind == "gibbs_perp") {
        const ScalarField2 Z = integrate_parallel(gibbs_weight(phi, sigma));
        ScalarField3 c0(g.nx);
        for (int i = 0; i < g.nx[0]; ++i)
            for (int j = 0; j < g.nx[1]; ++j) {
                const double N = 1.0 + p.perp * std::cos(tp * j / g.nx[1]);
                for (int k = 0; k < g.nx[2]; ++k) c0(i, j, k) = N / Z(i, j);
            }
        h.set_mode_field(0, 0, 0, c0);
    } else {
        throw InvalidParameter("unknown initial profile " + p.kind);
    }
    const double mass = total_mass(h, phi, sigma);
    h *= 1.0 / mass;
    return h;
}

}  // namespace mvfp
