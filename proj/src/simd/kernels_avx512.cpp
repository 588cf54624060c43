#include <immintrin.h>

#include <cstring>

#include "mvfp/simd/kernels.hpp"

namespace mvfp::simd {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m512d va = _mm512_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
    if (i < n) {
        const __mmask8 k = static_cast<__mmask8>((1u << (n - i)) - 1u);
        __m512d yv = _mm512_maskz_loadu_pd(k, y + i);
        yv = _mm512_fmadd_pd(va, _mm512_maskz_loadu_pd(k, x + i), yv);
        _mm512_mask_storeu_pd(y + i, k, yv);
    }
}

void scale(std::size_t n, double a, const double* x, double* y) {
    const __m512d va = _mm512_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm512_storeu_pd(y + i, _mm512_mul_pd(va, _mm512_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

void mul(std::size_t n, const double* d, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_mul_pd(_mm512_loadu_pd(d + i), _mm512_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = d[i] * x[i];
}

void mul_add(std::size_t n, const double* d, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d acc = _mm512_loadu_pd(y + i);
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(d + i), _mm512_loadu_pd(x + i), acc);
        _mm512_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) y[i] += d[i] * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    __m512d s0 = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) s0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), s0);
    double s = _mm512_reduce_add_pd(s0);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot(std::size_t n, const double* d, const double* x, const double* y) {
    __m512d s0 = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d dx = _mm512_mul_pd(_mm512_loadu_pd(d + i), _mm512_loadu_pd(x + i));
        s0 = _mm512_fmadd_pd(dx, _mm512_loadu_pd(y + i), s0);
    }
    double s = _mm512_reduce_add_pd(s0);
    for (; i < n; ++i) s += d[i] * x[i] * y[i];
    return s;
}

void line_matmul(int m, const double* mat, std::size_t stride, std::size_t len,
                 const double* in, double* out) {
    std::size_t l = 0;
    // Power-of-two strides alias in L1, so each 32-column tile is packed first.
    alignas(64) double tile[64 * 32];
    for (; m <= 64 && l + 32 <= len; l += 32) {
        for (int k = 0; k < m; ++k) std::memcpy(tile + k * 32, in + k * stride + l, 32 * sizeof(double));
        for (int j = 0; j < m; ++j) {
            __m512d a0 = _mm512_setzero_pd(), a1 = _mm512_setzero_pd();
            __m512d a2 = _mm512_setzero_pd(), a3 = _mm512_setzero_pd();
            for (int k = 0; k < m; ++k) {
                const double c = mat[j * m + k];
                if (c == 0.0) continue;
                const __m512d vc = _mm512_set1_pd(c);
                const double* x = tile + k * 32;
                a0 = _mm512_fmadd_pd(vc, _mm512_loadu_pd(x), a0);
                a1 = _mm512_fmadd_pd(vc, _mm512_loadu_pd(x + 8), a1);
                a2 = _mm512_fmadd_pd(vc, _mm512_loadu_pd(x + 16), a2);
                a3 = _mm512_fmadd_pd(vc, _mm512_loadu_pd(x + 24), a3);
            }
            double* o = out + j * stride + l;
            _mm512_storeu_pd(o, a0);
            _mm512_storeu_pd(o + 8, a1);
            _mm512_storeu_pd(o + 16, a2);
            _mm512_storeu_pd(o + 24, a3);
        }
    }
    for (; l < len; ++l) {
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) {
                const double c = mat[j * m + k];
                if (c != 0.0) s += c * in[k * stride + l];
            }
            out[j * stride + l] = s;
        }
    }
}

}  // namespace

const KernelTable& avx512_kernels() {
    static const KernelTable t{"avx512", axpy, scale, mul, mul_add, dot, wdot, line_matmul};
    return t;
}

}  // namespace mvfp::simd
