#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mvfp/fields.hpp"
#include "mvfp/kinetic_state.hpp"
#include "mvfp/params.hpp"
#include "mvfp/spectral.hpp"

namespace mvfp {

// +A*.A h: mode m scaled by |m|.
KineticState apply_collision(const KineticState& h);
// B h = v.grad_x h - sigma grad_x phi . grad_v h.
KineticState apply_transport(const KineticState& h, const ScalarField3& phi, int sigma);
// (v_perp . grad_v) h = v1 d_{v2} h - v2 d_{v1} h.
KineticState apply_magnetic(const KineticState& h);

// Transport in the symmetrized form
//   B h = s^{-1} v.grad_x (s h) + q.(a^dagger - a) h,  s = e^{-sigma phi/2}, q = -grad s / s,
// which is skew-adjoint in L^2(mu) on the discrete grid and annihilates
// constants exactly.
class TransportOperator {
public:
    TransportOperator(const Grid& g, const ScalarField3& phi, int sigma);

    void apply(const KineticState& h, KineticState& out) const;
    // Upper bound on the spectral radius of B.
    double spectral_bound() const { return bound_; }
    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    std::vector<double> s_, inv_s_;
    std::array<std::vector<double>, 3> q_;
    double bound_ = 0;
    mutable KineticState u_;
    mutable std::array<KineticState, 3> d_;
    mutable std::vector<double> buf_, buf2_, buf3_;
};

struct StepOptions {
    bool transport = true;
    bool magnetic = true;
    bool collision = true;
    double c_cfl = 0.5;
    // RK4 imaginary-axis stability target for each transport substep.
    double rk4_margin = 2.6;
};

// Strang-split integrator for
//   d_t h = -(1/eps) B h + (sigma sigma0/eps^2)(v_perp.grad_v) h - eps^{-(1+alpha)} A*.A h
// with collision and magnetic parts solved exactly and transport by RK4.
class KineticSolver {
public:
    KineticSolver(const Grid& g, const ScaledParams& p, const ScalarField3& phi, StepOptions opt = {});

    // Largest dt accepted by step().
    double max_dt() const;
    // Number of RK4 transport substeps used for a step of size dt.
    int transport_substeps(double dt) const;
    void step(KineticState& h, double dt);

    const ScaledParams& params() const { return p_; }
    const ScalarField3& phi() const { return phi_; }
    const Grid& grid() const { return grid_; }
    const TransportOperator& transport() const { return transport_; }

private:
    void exact_half(KineticState& h, double tau);
    void prepare(double dt);

    Grid grid_;
    ScaledParams p_;
    ScalarField3 phi_;
    StepOptions opt_;
    TransportOperator transport_;
    double prepared_dt_ = -1;
    std::vector<double> decay_;
    // exp(theta G) restricted to each perpendicular shell m1 + m2 = s
    std::vector<std::vector<int>> shell_m1_;
    std::vector<std::vector<double>> shell_rot_;
    KineticState k_, acc_, tmp_;
};

KineticState step(const KineticState& h, double dt, const ScaledParams& p, const ScalarField3& phi,
                  StepOptions opt = {});

// Rotation matrices exp(theta G_s), G = a1^dagger a2 - a2^dagger a1, per shell s.
// Rows and columns follow the returned m1 lists.
void magnetic_shell_rotations(const Grid& g, double theta, std::vector<std::vector<int>>& m1_lists,
                              std::vector<std::vector<double>>& rotations);
KineticState rotate_perpendicular(const KineticState& h, double theta);

struct FreeEnergyReport {
    double value = 0;
    std::size_t clipped = 0;   // quadrature nodes where f <= 0
    double min_ratio = 0;      // min f / max f over the quadrature set
    double min_h = 0;          // min f / M over the quadrature set
};

// int int h ln h dmu with Gauss-Hermite nodes in v (nq per axis, default nv)
// and the grid in x. Throws NegativityError below -1e-8 max f.
FreeEnergyReport free_energy_report(const KineticState& h, const ScalarField3& phi, int sigma, int nq = 0);
double free_energy(const KineticState& h, const ScalarField3& phi, int sigma);

struct MomentSet {
    ScalarField3 n;
    ScalarField2 N_perp;
    std::array<ScalarField2, 2> J_perp;
    std::array<ScalarField3, 3> J_full;
};

MomentSet moments(const KineticState& h, const ScalarField3& phi, int sigma, double eps);

double total_mass(const KineticState& h, const ScalarField3& phi, int sigma);

struct Distances {
    double d_maxwell = 0;
    double d_gibbs = 0;
};

Distances maxwellian_distance(const KineticState& h, const ScalarField3& phi, int sigma);
// |n - e^{-sigma phi}/int_{T^3} e^{-sigma phi}| in L^2(T^3), scaled by the mass.
double isotropic_distance(const KineticState& h, const ScalarField3& phi, int sigma);

struct KineticDiagnostics {
    double time = 0;
    double mass = 0;
    double l2mu_sq = 0;
    double free_energy = 0;
    double d_maxwell = 0;
    double d_gibbs = 0;
    NormSet norm_set;
    double hypo_norm = 0;
    double hypo_dissipation = 0;
};

KineticDiagnostics diagnose(const KineticState& h, const ScalarField3& phi, int sigma, double t,
                            bool with_free_energy = true, bool second_order = true);

}  // namespace mvfp
