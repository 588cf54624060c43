#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mvfp/elliptic.hpp"
#include "mvfp/fields.hpp"
#include "mvfp/params.hpp"

namespace mvfp {

using VectorField2 = std::array<ScalarField2, 2>;

// U = (1/b)(grad phit)^perp - (sigma/b^2)(grad b)^perp with (g1, g2)^perp = (-g2, g1).
// Without b this is (grad phit)^perp. Throws InvalidParameter if min b <= 0.
VectorField2 drift_field(const ScalarField2& phit, const std::optional<ScalarField2>& b, int sigma);

// n = N e^{-sigma phi} / int_T e^{-sigma phi} dx_par
ScalarField3 slaved_density(const ScalarField2& N, const ScalarField3& phi, int sigma);

struct ReducedState {
    ScalarField2 N;
    double time = 0;
    Species species = Species::heavy;
    std::optional<ScalarField3> ubar;  // light species only
    double delta = 1.0;
};

// Mass and L2 norm of N and the largest drift speed at one sample time.
struct ReducedSample {
    double time = 0;
    double mass = 0;
    double l2 = 0;
    double max_u = 0;
    double max_grad_phit = 0;
    double pb_residual = 0;   // 3D mixed residual, heavy coupled runs only
};

// Largest dt accepted by gc_step for this drift.
double gc_max_dt(const VectorField2& U, double c_cfl = 0.5);

// One RK4 step of d_t N = -div(N U) with 2/3 dealiasing of every product.
// Throws CflViolation above gc_max_dt.
ReducedState gc_step(const ReducedState& s, const VectorField2& U, double dt, double c_cfl = 0.5);

enum class ReducedMode { coupled, picard, external };

struct ReducedOptions {
    ReducedMode mode = ReducedMode::coupled;
    int picard_iterations = 6;
    double dt = 1e-3;
    int sample_every = 1;
    double c_cfl = 0.5;
    double grad_bound = 1e3;    // blow-up guard on max |grad phit|
    double pb_tol = 1e-11;
    int n_par = 16;             // x_par resolution for heavy mixed residual checks
    bool check_mixed_residual = false;
    // Frozen potential for external mode (3D; averaged with the species sign).
    std::optional<ScalarField3> phi;
};

struct ReducedTrajectory {
    std::vector<ReducedState> states;    // sampled states
    std::vector<ReducedSample> samples;
    // picard mode: iterates[n][k] is N_n at the k-th sample time
    std::vector<std::vector<ScalarField2>> iterates;
};

// Species, delta and sigma0 come from p; sigma is implied by the species.
// Throws InvalidParameter, ConvergenceError, BlowUpError, NegativityError.
ReducedTrajectory solve_reduced(const ReducedState& initial, const ScaledParams& p, double horizon,
                                const ReducedOptions& opt);

// Potential phit for N: heavy solves the 2D problem, light the 3D one and averages.
ScalarField2 reduced_potential(const ReducedState& s, const ScaledParams& p, const ScalarField3* warm3,
                               const ScalarField2* warm2, ScalarField3* phi3_out = nullptr,
                               ScalarField2* phi2_out = nullptr, double tol = 1e-11);

}  // namespace mvfp
