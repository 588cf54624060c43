#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvfp/config.hpp"
#include "mvfp/hypo.hpp"
#include "mvfp/kinetic.hpp"

namespace mvfp {

struct RateFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;  // RMS misfit of ln(distance)
};

// Least-squares slope of ln(distance) against ln(eps). Needs >= 3 points,
// all positive.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// ---- kinetic trajectories -------------------------------------------------

struct TrajectoryOptions {
    double t_max = 1.0;
    // stop once |h - mass|^2 <= threshold |h0 - mass|^2; 0 runs to t_max
    double threshold = 0.0;
    // steps between full samples (NormSet, hypocoercive functionals)
    int sample_every = 1;
    bool free_energy = false;
    bool hypo = true;
    double eta = kEtaMax;
    // callback on every full sample
    std::function<void(const KineticState&, const KineticDiagnostics&)> on_sample;
};

struct TrajectoryResult {
    std::vector<KineticDiagnostics> samples;
    double D1 = 0;          // sqrt(int d_maxwell^2 dt), trapezoid over every step
    double D2 = 0;          // sqrt(int d_gibbs^2 dt)
    double final_time = 0;
    long steps = 0;
    double dt = 0;
    double content0 = 0;    // |h0 - mass|^2
    double content_end = 0;
    bool reached_threshold = false;
    std::optional<DecayCertificate> certificate;
};

// Integrates from h0 with the Strang solver at its largest stable dt.
// The hypocoercive functionals need |alpha| < 1 and eps < 1.
TrajectoryResult run_trajectory(const Grid& g, const ScaledParams& p, const ScalarField3& phi,
                                const KineticState& h0, const TrajectoryOptions& opt, StepOptions sopt = {});

// ---- rate sweep ------------------------------------------------------------

struct RateCell {
    double alpha = 0;
    double eps = 0;
    double D1 = 0;
    double D2 = 0;
    double final_time = 0;
    long steps = 0;
    std::string status = "ok";  // ok | equilibrium | failed: <reason>
    bool reached_threshold = false;
    double cert_K = 0;
    double cert_max_ratio = 0;
    bool cert_ok = false;
};

struct AlphaFit {
    double alpha = 0;
    double s1 = 0, s2 = 0;
    double r1 = 0, r2 = 0;  // fit residuals
    double predicted1 = 0, predicted2 = 0;
    bool pass1 = false, pass2 = false;
    bool complete = false;
    bool equilibrium = false;
};

struct RateReport {
    std::vector<RateCell> cells;
    std::vector<AlphaFit> fits;
    bool all_pass = false;
    bool certificates_ok = false;
};

// Diagnostics of every cell go to records (one JSON object per sample).
RateReport run_rate_sweep(const SweepConfig& cfg, std::vector<nlohmann::json>* records = nullptr);
void write_rate_csv(std::ostream& os, const RateReport& r);

// ---- regime probes ---------------------------------------------------------

struct ProbeResult {
    int sigma0 = 0;
    double alpha = 0;
    std::string regime;           // isotropic | anisotropic | freeze | diffusive
    double final_iso = 0;         // |n - e^{-sigma phi}/int e^{-sigma phi}|
    double final_gibbs = 0;       // d_gibbs at the end
    double window_variation = 0;  // |n(t2) - n(t1)| over the late window
    double final_time = 0;
    bool has_criterion = true;
    bool pass = false;
    std::string status = "ok";
};

struct ProbeReport {
    std::vector<ProbeResult> results;
    bool all_pass = false;
};

ProbeReport run_regime_probe(const ProbeConfig& cfg, std::vector<nlohmann::json>* records = nullptr);

// ---- kinetic versus reduced -----------------------------------------------

struct CompareReport {
    std::vector<double> times;
    std::vector<double> eps;
    // discrepancy[i][k]: eps[i] at times[k]
    std::vector<std::vector<double>> discrepancy;
    bool monotone = false;
    std::string status = "ok";
};

CompareReport compare_kinetic_reduced(const CompareConfig& cfg, std::vector<nlohmann::json>* records = nullptr);

// ---- output -----------------------------------------------------------------

nlohmann::json diagnostics_record(const KineticDiagnostics& d);
void write_ndjson(std::ostream& os, const std::vector<nlohmann::json>& records);
void write_ndjson(const std::string& path, const std::vector<nlohmann::json>& records);

}  // namespace mvfp
