#pragma once

#include <vector>

#include "mvfp/fields.hpp"
#include "mvfp/kinetic_state.hpp"

namespace mvfp {

enum class Ladder { raise, lower };

// Dense Fourier differentiation matrix on n periodic nodes of the unit
// interval (row-major, Nyquist mode dropped). Cached per n.
const std::vector<double>& diff_matrix(int n);

ScalarField3 x_derivative(const ScalarField3& f, int axis);
ScalarField2 x_derivative(const ScalarField2& f, int axis);
KineticState x_derivative(const KineticState& s, int axis);
// out must already have the grid of s.
void x_derivative_into(const KineticState& s, int axis, KineticState& out);

// Lowering realizes d/dv_axis; raising is its adjoint. Raising past the
// truncation drops the coefficient.
KineticState apply_ladder(const KineticState& s, int axis, Ladder dir);
void apply_ladder_into(const KineticState& s, int axis, Ladder dir, KineticState& out);

// Per-mode weights of the ladder maps over one mode block: lower reads
// index r + stride with factor f[r], raise reads r - stride with factor f[r].
const std::vector<double>& ladder_factors(const Grid& g, int axis, Ladder dir);

// Per-mode factors m_axis (axis 0..2) or |m| (axis 3) over one mode block.
const std::vector<double>& mode_number_weights(const Grid& g, int axis);

// e^{-sigma phi}
ScalarField3 gibbs_weight(const ScalarField3& phi, int sigma);
// phi + c with c chosen so that the grid mean of e^{-sigma phi} is one.
ScalarField3 normalize_phi(const ScalarField3& phi, int sigma);

// <a, b> in L^2(mu): grid mean of e^{-sigma phi} sum_m a b.
double weighted_inner(const KineticState& a, const KineticState& b, const ScalarField3& phi, int sigma);
// Same with a precomputed e^{-sigma phi}.
double weighted_inner_w(const KineticState& a, const KineticState& b, const ScalarField3& weight);
// Grid mean of weight * sum_m d[m] a b with d one mode block of factors.
double weighted_mode_inner(const KineticState& a, const KineticState& b, const ScalarField3& weight,
                           const std::vector<double>& d);

struct NormSet {
    double n0 = 0;
    double dv_par = 0;
    double dx_par = 0;
    double dv_perp = 0;
    double dx_perp = 0;
    double cross_par = 0;
    double cross_perp = 0;
    bool has_second_order = false;
    double grad_v = 0;          // |grad_v h|
    double grad_v_dv_par = 0;   // |grad_v d_{v par} h|
    double grad_v_dx_par = 0;   // |grad_v d_{x par} h|
    double grad_v_dv_perp = 0;  // |grad_v grad_{v perp} h|
    double grad_v_dx_perp = 0;  // |grad_v grad_{x perp} h|
};

NormSet partial_norms(const KineticState& s, const ScalarField3& phi, int sigma, bool second_order = true);

}  // namespace mvfp
