#include "mvfp/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mvfp/errors.hpp"

namespace mvfp {

GaussRule gauss_hermite(int n) {
    if (n < 1) throw InvalidParameter("quadrature size must be positive");
    // Golub-Welsch on the Jacobi matrix of the orthonormal recurrence
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        const double c = es.eigenvectors()(0, i);
        r.weights[i] = c * c;
        total += r.weights[i];
    }
    for (double& w : r.weights) w /= total;
    // symmetrize to kill eigen-solver asymmetry
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
        const double w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = r.weights[j] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

std::vector<double> hermite_values(int n, double v) {
    std::vector<double> h(n, 0.0);
    if (n == 0) return h;
    h[0] = 1.0;
    if (n > 1) h[1] = v;
    for (int k = 1; k + 1 < n; ++k)
        h[k + 1] = (v * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) / std::sqrt(static_cast<double>(k + 1));
    return h;
}

std::vector<double> hermite_matrix(int n, const std::vector<double>& nodes) {
    std::vector<double> out(nodes.size() * n);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        auto h = hermite_values(n, nodes[q]);
        for (int k = 0; k < n; ++k) out[q * n + k] = h[k];
    }
    return out;
}

}  // namespace mvfp
