#include "mvfp/simd/kernels.hpp"

namespace mvfp::simd {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void mul(std::size_t n, const double* d, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void mul_add(std::size_t n, const double* d, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += d[i] * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot(std::size_t n, const double* d, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[i] * x[i] * y[i];
    return s;
}

void line_matmul(int m, const double* mat, std::size_t stride, std::size_t len,
                 const double* in, double* out) {
    for (int j = 0; j < m; ++j) {
        double* o = out + j * stride;
        for (std::size_t l = 0; l < len; ++l) o[l] = 0.0;
        for (int k = 0; k < m; ++k) {
            const double a = mat[j * m + k];
            if (a == 0.0) continue;
            const double* x = in + k * stride;
            for (std::size_t l = 0; l < len; ++l) o[l] += a * x[l];
        }
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable t{"scalar", axpy, scale, mul, mul_add, dot, wdot, line_matmul};
    return t;
}

}  // namespace mvfp::simd
