#include "mvfp/params.hpp"

#include <cmath>
#include <sstream>

#include "mvfp/errors.hpp"

namespace mvfp {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be positive");
}

}  // namespace

Nondimensionalized nondimensionalize(const PhysicalParams& p, Species species, double alpha) {
    require_positive(p.electron_mass, "electron_mass");
    require_positive(p.ion_mass, "ion_mass");
    require_positive(p.elementary_charge, "elementary_charge");
    require_positive(p.temperature, "temperature");
    require_positive(p.magnetic_amplitude, "magnetic_amplitude");
    require_positive(p.reference_density, "reference_density");
    require_positive(p.system_length, "system_length");
    require_positive(p.collision_freq_ion, "collision_freq_ion");
    require_positive(p.collision_freq_electron, "collision_freq_electron");
    require_positive(p.vacuum_permittivity, "vacuum_permittivity");
    require_positive(p.boltzmann_constant, "boltzmann_constant");
    if (p.atomic_number < 1) throw InvalidParameter("atomic_number must be at least 1");
    if (!std::isfinite(alpha)) throw InvalidParameter("alpha must be finite");

    Nondimensionalized out;
    DerivedScales& d = out.derived;
    const double kT = p.boltzmann_constant * p.temperature;
    const double q = p.elementary_charge;
    const std::array<double, 2> mass{p.electron_mass, p.ion_mass};
    const std::array<double, 2> nu{p.collision_freq_electron, p.collision_freq_ion};

    d.debye_length = std::sqrt(p.vacuum_permittivity * kT / (q * q * p.reference_density));
    for (int s = 0; s < 2; ++s) {
        d.thermal_speed[s] = std::sqrt(kT / mass[s]);
        d.plasma_time[s] = d.debye_length / d.thermal_speed[s];
        d.cyclotron_time[s] = mass[s] / (q * p.magnetic_amplitude);
        d.larmor_radius[s] = d.thermal_speed[s] * d.cyclotron_time[s];
        d.mean_free_path[s] = d.thermal_speed[s] / nu[s];
    }
    const double L = d.mean_free_path[kIon];
    d.reference_length = L;
    d.system_length_ratio = p.system_length / L;
    d.lambda_mass_ratio = p.electron_mass / p.ion_mass;
    d.mu_larmor_ratio = d.larmor_radius[kIon] / L;
    d.gamma_mfp_ratio = std::pow(d.lambda_mass_ratio, alpha / 2.0);
    const double ln_lambda = std::log(d.lambda_mass_ratio);
    d.implied_alpha = ln_lambda != 0.0
                          ? 2.0 * std::log(d.mean_free_path[kElectron] / d.mean_free_path[kIon]) / ln_lambda
                          : 0.0;

    ScaledParams& s = out.scaled;
    s.delta = d.debye_length / L;
    s.sigma0 = 1;
    if (species == Species::light) {
        s.eps = std::sqrt(d.lambda_mass_ratio);
        s.alpha = alpha;
        s.sigma = -1;
        s.tau_obs = 1.0;
        if (d.lambda_mass_ratio >= 1.0) {
            out.regime_violation = true;
            out.warnings.push_back("mass ratio lambda >= 1: light-species regime does not apply");
        }
    } else {
        s.eps = d.mu_larmor_ratio;
        s.alpha = 0.0;
        s.sigma = 1;
        s.tau_obs = 1.0 / d.mu_larmor_ratio;
        if (alpha != 0.0) out.warnings.push_back("heavy species uses alpha = 0; requested alpha ignored");
    }
    if (std::abs(d.system_length_ratio - 1.0) > 1e-6)
        out.warnings.push_back("system_length differs from the ion mean free path; scaling uses L = l_i");
    return out;
}

ScaledParams validate_scaled(const ScaledParams& p, bool regime_probe, double b_min) {
    std::ostringstream err;
    if (!(p.eps > 0.0) || !std::isfinite(p.eps)) err << "eps must be positive; ";
    if (!(p.delta > 0.0) || !std::isfinite(p.delta)) err << "delta must be positive; ";
    if (p.sigma != -1 && p.sigma != 1) err << "sigma must be -1 or +1; ";
    if (p.sigma0 != 0 && p.sigma0 != 1) err << "sigma0 must be 0 or 1; ";
    if (!(p.tau_obs > 0.0)) err << "tau_obs must be positive; ";
    if (!std::isfinite(p.alpha)) err << "alpha must be finite; ";
    else if (!regime_probe && !(p.alpha > -1.0 && p.alpha < 1.0)) err << "alpha must lie in (-1, 1); ";
    if (p.b_field) {
        if (p.b_field->size() == 0 || !(min_value(*p.b_field) >= b_min)) err << "b not bounded away from zero; ";
    }
    std::string msg = err.str();
    if (!msg.empty()) {
        msg.resize(msg.size() - 2);
        throw InvalidParameter(msg);
    }
    return p;
}

}  // namespace mvfp
