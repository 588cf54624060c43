#pragma once

#include <optional>
#include <vector>

#include "mvfp/fields.hpp"

namespace mvfp {

struct EllipticProblemLight {
    ScalarField2 N;      // perpendicular density, unit mean
    ScalarField3 ubar;   // background density, unit mean
    double delta = 1.0;
};

template <class Field>
struct EllipticSolution {
    Field phi;
    double residual_norm = 0;
    int iterations = 0;
    double energy = 0;
    std::vector<double> residual_history;
    // energy change of each accepted Newton step (all negative)
    std::vector<double> energy_decrease;
    int cg_iterations = 0;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 200;
    int cg_max_iter = 400;
    double armijo_c1 = 1e-4;
};

// (delta^2/2) int |grad psi|^2 + int_{T^2} N ln(int_T e^psi dx_par) - int ubar psi
double energy_light(const ScalarField3& psi, const EllipticProblemLight& prob);
// -delta^2 Lap psi - ubar + N e^psi / int_T e^psi, projected to mean zero
ScalarField3 residual_light(const ScalarField3& psi, const EllipticProblemLight& prob);
// Throws InvalidParameter on negative or non-unit-mean data, ConvergenceError
// after max_iter.
EllipticSolution<ScalarField3> solve_pb_light(const EllipticProblemLight& prob, double tol = 1e-10,
                                              const NewtonOptions& opt = {},
                                              const ScalarField3* initial = nullptr);

// (delta^2/2) int |grad psi|^2 - int N psi + ln int e^psi on T^2
double energy_heavy(const ScalarField2& psi, const ScalarField2& N, double delta);
// -delta^2 Lap psi - N + e^psi / int e^psi, projected to mean zero
ScalarField2 residual_heavy(const ScalarField2& psi, const ScalarField2& N, double delta);
EllipticSolution<ScalarField2> solve_pb_heavy(const ScalarField2& N, double delta, double tol = 1e-10,
                                              const NewtonOptions& opt = {},
                                              const ScalarField2* initial = nullptr);

// Residual of the 3D mixed heavy problem:
// -delta^2 Lap phi - N e^{-phi}/int_T e^{-phi} + e^phi / int_{T^3} e^phi.
ScalarField3 residual_heavy_mixed(const ScalarField3& phi, const ScalarField2& N, double delta);

// phit = -sigma ln int_T e^{-sigma phi} dx_par, in log-sum-exp form.
ScalarField2 parallel_average(const ScalarField3& phi, int sigma);

double h1_norm(const ScalarField3& f);
double h1_norm(const ScalarField2& f);
double w2p_norm(const ScalarField3& f, double p);
double w2p_norm(const ScalarField2& f, double p);

struct LipschitzReport {
    double ratio_h1 = 0;    // |phi - phi'|_{H^1} / |N - N'|_{L^{4/3}}
    double ratio_w2p = 0;   // |phi - phi'|_{W^{2,p}} / |N - N'|_{L^p}
    double p = 2;
    double dN_l43 = 0;
    double dphi_h1 = 0;
};

// Throws InvalidParameter when N' = N.
LipschitzReport lipschitz_probe(const EllipticProblemLight& prob, const EllipticProblemLight& perturbed,
                                double p = 2.0, double tol = 1e-10);
LipschitzReport lipschitz_probe_heavy(const ScalarField2& N, const ScalarField2& N_perturbed, double delta,
                                      double p = 2.0, double tol = 1e-10);

}  // namespace mvfp
