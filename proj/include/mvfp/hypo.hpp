#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvfp/spectral.hpp"

namespace mvfp {

struct HypoExponents {
    std::array<double, 3> beta_par{};
    std::array<double, 3> beta_perp{};
};

struct HypoWeights {
    double eta = 1.0 / 16.0;
    std::array<double, 3> gamma_par{};
    std::array<double, 3> gamma_perp{};
};

inline constexpr double kEtaMax = 1.0 / 16.0;

// Throws InvalidParameter unless |alpha| < 1.
HypoExponents exponent_table(double alpha);

struct CondbetaCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool ok = false;
};

struct CondbetaReport {
    bool ok = false;
    std::vector<CondbetaCheck> checks;  // eight inequalities lhs <= rhs
};

CondbetaReport validate_condbeta(double alpha, const HypoExponents& e, double slack = 1e-12);

// gamma = (eta, eta^2, eta^{7/4}) in both directions. Throws unless 0 < eta < 1.
HypoWeights gamma_weights(double eta = kEtaMax);

// min(1, t / eps^{1+alpha})
double time_weight(double t, double eps, double alpha);

// Value of the seven-term quadratic form (may be negative for bad weights).
double hypo_form(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e, const HypoWeights& w);
// Square root of hypo_form. Throws InvalidParameter naming the cross term
// when the form is negative.
double hypo_norm(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e, const HypoWeights& w);
// Requires second-order entries.
double hypo_dissipation(const NormSet& ns, double t, double eps, double alpha, const HypoExponents& e);

struct DecaySample {
    double time = 0;
    NormSet ns;
};

struct DecayCertificate {
    bool equilibrium = false;
    bool ok = false;
    double K_hat = 0;            // infinite for equilibrium data
    double h0_norm = 0;
    double max_norm_ratio = 0;   // max_t hypo_norm(t) / |h0|
    double violation_time = -1;  // first sample with hypo_norm > |h0| (1 + 1e-8)
    bool monotone = true;        // hypo_norm non-increasing across samples
    std::vector<double> norms;
    std::vector<double> dissipation;
};

// Largest K with N^2(t) + K int_0^t D <= |h0|^2 (1 + 1e-8) at every sample,
// trapezoid rule in time. samples[0] must be t = 0.
DecayCertificate certify_decay(const std::vector<DecaySample>& samples, double eps, double alpha,
                               double eta = kEtaMax);

}  // namespace mvfp
