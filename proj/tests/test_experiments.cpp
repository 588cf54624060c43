#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mvfp/config.hpp"
#include "mvfp/errors.hpp"
#include "mvfp/experiments.hpp"

using namespace mvfp;
using nlohmann::json;

namespace {

SweepConfig tiny_sweep() {
    SweepConfig c;
    c.alphas = {0.0, 0.5};
    c.eps = {0.4, 0.3, 0.2};
    c.grid = {{4, 4, 4}, {3, 3, 3}};
    c.t_max = 0.3;
    c.threshold = 1e-3;
    return c;
}

}  // namespace

TEST_CASE("fit_rate") {
    std::vector<std::pair<double, double>> p;
    for (double e : {0.4, 0.2, 0.1, 0.05}) p.push_back({e, std::pow(e, 0.75)});
    auto f = fit_rate(p);
    CHECK(f.slope == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(f.residual < 1e-12);

    for (auto& q : p) q.second = 3.0;
    CHECK(std::abs(fit_rate(p).slope) < 1e-12);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> n;
        for (double e : {0.4, 0.2, 0.1, 0.05}) n.push_back({e, std::sqrt(e) * (1 + u(rng))});
        CHECK(std::abs(fit_rate(n).slope - 0.5) < 0.05);
    }
    CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.2, 2.0}}), InvalidParameter);
    CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.2, 0.0}, {0.4, 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.1, 2.0}, {0.1, 1.0}}), InvalidParameter);
}

TEST_CASE("configuration parsing") {
    const SweepConfig d = sweep_config_from_json(json::object());
    CHECK(d.eps == std::vector<double>{0.4, 0.2, 0.1, 0.05});
    CHECK(d.alphas == std::vector<double>{-0.5, 0.0, 0.5});
    CHECK(d.slope_tol == 0.15);
    CHECK(d.grid.nx == std::array<int, 3>{16, 16, 16});

    const SweepConfig r = sweep_config_from_json(to_json(tiny_sweep()));
    CHECK(r.eps == tiny_sweep().eps);
    CHECK(r.grid.nv == tiny_sweep().grid.nv);

    CHECK_THROWS_AS(sweep_config_from_json(json{{"epsilon", {0.1}}}), InvalidParameter);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"phi", {{"a2", 0.1}}}}), InvalidParameter);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"eps", {0.1, 1.5}}}), InvalidParameter);
    CHECK_THROWS_AS(probe_config_from_json(json{{"window", 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(compare_config_from_json(json{{"h0", {{"kind", "bogus"}}}}), InvalidParameter);

    const ProbeConfig pc = probe_config_from_json(to_json(ProbeConfig{}));
    CHECK(pc.cases.size() == 4);
    CHECK(pc.cases[2].alpha == 1.5);
}

TEST_CASE("predicted exponents") {
    SweepConfig c = tiny_sweep();
    c.alphas = {-0.5, 0.0, 0.5};
    c.h0.kind = "maxwellian";
    const auto rep = run_rate_sweep(c);
    REQUIRE(rep.fits.size() == 3);
    CHECK(rep.fits[0].predicted1 == 0.25);
    CHECK(rep.fits[0].predicted2 == 0.25);
    CHECK(rep.fits[1].predicted1 == 0.5);
    CHECK(rep.fits[1].predicted2 == 0.5);
    CHECK(rep.fits[2].predicted1 == 0.75);
    CHECK(rep.fits[2].predicted2 == 0.25);
    SUBCASE("Maxwellian data gives equilibrium cells") {
        for (const auto& cell : rep.cells) {
            CHECK(cell.status == "equilibrium");
            CHECK(cell.D1 == 0.0);
            CHECK(cell.D2 == 0.0);
        }
        for (const auto& f : rep.fits) CHECK(f.equilibrium);
    }
}

TEST_CASE("sweep output is independent of parallelism") {
    SweepConfig c = tiny_sweep();
    std::vector<json> r1, r3;
    c.parallel = 1;
    const auto a = run_rate_sweep(c, &r1);
    c.parallel = 3;
    const auto b = run_rate_sweep(c, &r3);
    REQUIRE(a.cells.size() == 6);
    REQUIRE(b.cells.size() == 6);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].alpha == b.cells[i].alpha);
        CHECK(a.cells[i].eps == b.cells[i].eps);
        CHECK(a.cells[i].D1 == b.cells[i].D1);
        CHECK(a.cells[i].D2 == b.cells[i].D2);
        CHECK(a.cells[i].D1 > 0);
        CHECK(std::isfinite(a.cells[i].D2));
    }
    CHECK(r1 == r3);

    std::ostringstream csv;
    write_rate_csv(csv, a);
    std::istringstream in(csv.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "alpha,eps,D1,D2,s1,s2,predicted1,predicted2,pass1,pass2");
    int rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 6);

    SUBCASE("pass flags follow from the emitted slopes") {
        for (const auto& f : a.fits) {
            if (!f.complete) continue;
            CHECK(f.pass1 == (f.s1 >= f.predicted1 - c.slope_tol));
            CHECK(f.pass2 == (f.s2 >= f.predicted2 - c.slope_tol));
        }
    }
}

TEST_CASE("kinetic and reduced agree on a stationary configuration") {
    CompareConfig c;
    c.eps = {0.4, 0.2, 0.1};
    c.grid = {{8, 8, 8}, {3, 3, 3}};
    c.phi.a1 = 0.0;
    c.h0 = {"gibbs_perp", 0.0, 0.0, 0.0};
    c.horizon = 0.05;
    c.samples = 2;
    const auto rep = compare_kinetic_reduced(c);
    CHECK(rep.status == "ok");
    REQUIRE(rep.discrepancy.size() == 3);
    for (const auto& row : rep.discrepancy)
        for (double d : row) CHECK(d < 1e-12);
}

TEST_CASE("compare starts from matched data") {
    CompareConfig c;
    c.eps = {0.4, 0.2, 0.1};
    c.grid = {{8, 8, 8}, {3, 3, 3}};
    c.horizon = 0.05;
    c.samples = 2;
    const auto rep = compare_kinetic_reduced(c);
    REQUIRE(rep.status == "ok");
    REQUIRE(rep.times.size() == 3);
    CHECK(rep.times[0] == 0.0);
    for (const auto& row : rep.discrepancy) {
        CHECK(row[0] < 1e-12);
        for (double d : row) CHECK(std::isfinite(d));
    }
}

TEST_CASE("regime probe on a coarse grid") {
    ProbeConfig c;
    c.grid = {{4, 4, 4}, {3, 3, 3}};
    c.t_max = 0.4;
    c.cases = {{0, 0.0}, {1, 1.0}, {1, 1.5}};
    std::vector<json> rec;
    const auto rep = run_regime_probe(c, &rec);
    REQUIRE(rep.results.size() == 3);
    CHECK(rep.results[0].regime == "isotropic");
    CHECK(rep.results[1].regime == "diffusive");
    CHECK_FALSE(rep.results[1].has_criterion);
    CHECK(rep.results[2].regime == "freeze");
    for (const auto& r : rep.results) {
        CHECK(r.status == "ok");
        CHECK(r.final_time == doctest::Approx(0.4));
        CHECK(r.final_iso >= 0);
        CHECK(r.window_variation >= 0);
    }
    CHECK_FALSE(rec.empty());
}

TEST_CASE("diagnostics records") {
    KineticDiagnostics d;
    d.time = 0.5;
    d.mass = 1.0;
    d.l2mu_sq = 1.1;
    d.free_energy = std::nan("");
    d.d_maxwell = 0.01;
    d.d_gibbs = 0.02;
    const json j = diagnostics_record(d);
    for (const char* k : {"t", "mass", "l2mu_sq", "free_energy", "d_maxwell", "d_gibbs", "hypo_norm", "hypo_dissipation"})
        CHECK(j.contains(k));
    CHECK(j["free_energy"].is_null());
    CHECK(j["t"] == 0.5);
    std::ostringstream os;
    write_ndjson(os, {j, j});
    std::istringstream in(os.str());
    int lines = 0;
    for (std::string l; std::getline(in, l);) {
        CHECK(json::parse(l) == j);
        ++lines;
    }
    CHECK(lines == 2);
}
