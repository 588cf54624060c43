#include <immintrin.h>

#include <cstring>

#include "mvfp/simd/kernels.hpp"

namespace mvfp::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
        y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

void mul(std::size_t n, const double* d, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = d[i] * x[i];
}

void mul_add(std::size_t n, const double* d, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_loadu_pd(y + i);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i), acc);
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) y[i] += d[i] * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot(std::size_t n, const double* d, const double* x, const double* y) {
    __m256d s0 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i));
        s0 = _mm256_fmadd_pd(dx, _mm256_loadu_pd(y + i), s0);
    }
    double s = hsum(s0);
    for (; i < n; ++i) s += d[i] * x[i] * y[i];
    return s;
}

void line_matmul(int m, const double* mat, std::size_t stride, std::size_t len,
                 const double* in, double* out) {
    std::size_t l = 0;
    // 16-wide column blocks keep four accumulators in registers; tiles are
    // packed because power-of-two strides alias in L1
    alignas(32) double tile[64 * 16];
    for (; m <= 64 && l + 16 <= len; l += 16) {
        for (int k = 0; k < m; ++k) std::memcpy(tile + k * 16, in + k * stride + l, 16 * sizeof(double));
        for (int j = 0; j < m; ++j) {
            __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
            __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
            for (int k = 0; k < m; ++k) {
                const double c = mat[j * m + k];
                if (c == 0.0) continue;
                const __m256d vc = _mm256_set1_pd(c);
                const double* x = tile + k * 16;
                a0 = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x), a0);
                a1 = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + 4), a1);
                a2 = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + 8), a2);
                a3 = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + 12), a3);
            }
            double* o = out + j * stride + l;
            _mm256_storeu_pd(o, a0);
            _mm256_storeu_pd(o + 4, a1);
            _mm256_storeu_pd(o + 8, a2);
            _mm256_storeu_pd(o + 12, a3);
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

const KernelTable& avx2_kernels() {
    static const KernelTable t{"avx2", axpy, scale, mul, mul_add, dot, wdot, line_matmul};
    return t;
}

}  // namespace mvfp::simd
