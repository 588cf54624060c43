#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace mvfp::simd {

// Flat kernels over contiguous double arrays. Every variant must agree with
// the scalar table to rounding; the scalar table is the reference.
struct KernelTable {
    const char* name;
    // y += a*x
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    // y = a*x
    void (*scale)(std::size_t n, double a, const double* x, double* y);
    // y = d*x (elementwise)
    void (*mul)(std::size_t n, const double* d, const double* x, double* y);
    // y += d*x (elementwise)
    void (*mul_add)(std::size_t n, const double* d, const double* x, double* y);
    double (*dot)(std::size_t n, const double* x, const double* y);
    // sum d*x*y
    double (*wdot)(std::size_t n, const double* d, const double* x, const double* y);
    // out[j*stride + l] = sum_k mat[j*m + k] * in[k*stride + l] for j,k < m, l < len
    void (*line_matmul)(int m, const double* mat, std::size_t stride, std::size_t len,
                        const double* in, double* out);
};

const KernelTable& scalar_kernels();

// Tables compiled into this build and supported by the running CPU.
std::span<const KernelTable* const> available_kernels();

// Selected once per process: the widest supported table, unless the
// environment variable MVFP_SIMD names another one ("scalar", "avx2", "avx512").
const KernelTable& active();

std::string_view active_name();

}  // namespace mvfp::simd
