#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mvfp/fields.hpp"

namespace mvfp {

enum class Species { light, heavy };

// SI units throughout.
struct PhysicalParams {
    double electron_mass = 9.1093837015e-31;
    double ion_mass = 3.3435837724e-27;  // deuteron
    double elementary_charge = 1.602176634e-19;
    int atomic_number = 1;
    double temperature = 1.16e7;
    double magnetic_amplitude = 1.0;
    double reference_density = 1e19;
    double system_length = 1.0;
    double collision_freq_ion = 1e4;
    double collision_freq_electron = 1e6;
    double vacuum_permittivity = 8.8541878128e-12;
    double boltzmann_constant = 1.380649e-23;
};

struct ScaledParams {
    double eps = 0.1;
    double alpha = 0.0;
    int sigma = -1;
    double delta = 1.0;
    int sigma0 = 1;
    double tau_obs = 1.0;
    std::optional<ScalarField2> b_field;
};

// Per-species arrays are indexed electron = 0, ion = 1.
struct DerivedScales {
    double debye_length = 0;
    std::array<double, 2> plasma_time{};
    std::array<double, 2> cyclotron_time{};
    std::array<double, 2> larmor_radius{};
    std::array<double, 2> mean_free_path{};
    std::array<double, 2> thermal_speed{};
    double lambda_mass_ratio = 0;
    double mu_larmor_ratio = 0;
    double gamma_mfp_ratio = 0;
    // 2 ln(l_e/l_i) / ln(lambda), reported for cross-checking only
    double implied_alpha = 0;
    double reference_length = 0;  // L = l_i
    double system_length_ratio = 0;  // system_length / L
};

struct Nondimensionalized {
    ScaledParams scaled;
    DerivedScales derived;
    bool regime_violation = false;
    std::vector<std::string> warnings;
};

inline constexpr int kElectron = 0;
inline constexpr int kIon = 1;

Nondimensionalized nondimensionalize(const PhysicalParams& phys, Species species, double alpha);

// Throws InvalidParameter listing every violated invariant by name.
// regime_probe admits alpha outside (-1, 1).
ScaledParams validate_scaled(const ScaledParams& p, bool regime_probe = false, double b_min = 1e-8);

}  // namespace mvfp
