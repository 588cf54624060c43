#pragma once

#include <vector>

namespace mvfp {

// Gauss quadrature for the unit Gaussian M(v) = exp(-v^2/2)/sqrt(2 pi).
// Weights sum to one.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_hermite(int n);

// Orthonormal probabilists' Hermite functions H~_0..H~_{n-1} evaluated at v.
std::vector<double> hermite_values(int n, double v);

// Row q holds hermite_values(n, nodes[q]).
std::vector<double> hermite_matrix(int n, const std::vector<double>& nodes);

}  // namespace mvfp
