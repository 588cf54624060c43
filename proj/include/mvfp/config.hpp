#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mvfp/fields.hpp"
#include "mvfp/kinetic_state.hpp"

namespace mvfp {

// phi = a1 cos(2 pi x1) + a3 cos(2 pi x3), shifted so that the grid mean of
// e^{-sigma phi} is one.
struct PhiProfile {
    double a1 = 0.3;
    double a3 = 0.3;
};

// Initial data h0 = f0 / (e^{-sigma phi} M), rescaled to unit mass.
//   default:     c_0 = 1 + density sin(2 pi x3) cos(2 pi x2) + perp cos(2 pi x1),
//                c_{e3} = vpar cos(2 pi x3)
//   gibbs_perp:  c_0 = (1 + perp cos(2 pi x2)) / Z_par(x_perp)   (anisotropic Gibbs)
//   maxwellian:  h0 = 1
struct InitialProfile {
    std::string kind = "default";
    double density = 0.1;
    double vpar = 0.05;
    double perp = 0.0;
};

struct GridSpec {
    std::array<int, 3> nx{16, 16, 16};
    std::array<int, 3> nv{8, 8, 8};
    Grid grid() const { return Grid{nx, nv}; }
};

struct SweepConfig {
    std::vector<double> alphas{-0.5, 0.0, 0.5};
    std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    PhiProfile phi;
    InitialProfile h0;
    GridSpec grid;
    int sigma = -1;
    int sigma0 = 1;
    // stop once |h - mass|^2 falls below threshold times its initial value
    double threshold = 1e-6;
    double t_max = 20.0;
    // NormSet samples are spaced by at most this fraction of eps^{1+alpha}
    double sample_fraction = 0.1;
    double eta = 1.0 / 16.0;
    double slope_tol = 0.15;
    int parallel = 1;
    std::string csv;
    std::string ndjson;
    std::string summary;
};

struct ProbeCase {
    int sigma0 = 0;
    double alpha = 0.0;
};

struct ProbeConfig {
    std::vector<ProbeCase> cases{{0, 0.0}, {1, 0.0}, {1, 1.5}, {0, 1.5}};
    double eps = 0.1;
    PhiProfile phi;
    InitialProfile h0{"default", 0.1, 0.05, 0.1};
    GridSpec grid{{8, 8, 8}, {6, 6, 6}};
    int sigma = -1;
    double t_max = 2.0;
    double iso_threshold = 1e-3;     // sigma0 = 0, |alpha| < 1
    double freeze_threshold = 1e-4;  // alpha > 1
    double window = 0.25;            // late window as a fraction of t_max
    double anisotropy_ratio = 10.0;  // sigma0 = 1, |alpha| < 1
    int parallel = 1;
    std::string ndjson;
};

struct CompareConfig {
    std::vector<double> eps{0.2, 0.1, 0.05};
    PhiProfile phi;
    InitialProfile h0{"gibbs_perp", 0.0, 0.0, 0.2};
    GridSpec grid;
    int sigma = -1;
    double alpha = 0.0;
    double horizon = 0.2;
    int samples = 4;
    int kmax = 5;
    double reduced_dt = 1e-3;
    int parallel = 1;
    std::string ndjson;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
ProbeConfig probe_config_from_json(const nlohmann::json& j);
CompareConfig compare_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& c);
nlohmann::json to_json(const ProbeConfig& c);
nlohmann::json to_json(const CompareConfig& c);

// Reads a JSON file; throws InvalidParameter on I/O or syntax errors.
nlohmann::json load_json(const std::string& path);

ScalarField3 make_phi(const PhiProfile& p, const std::array<int, 3>& nx, int sigma);
KineticState make_initial(const InitialProfile& p, const Grid& g, const ScalarField3& phi, int sigma);

}  // namespace mvfp
