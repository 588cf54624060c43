#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "mvfp/fields.hpp"

namespace mvfp {

// Real-to-complex FFT on a 2D or 3D periodic grid (FFTW backed).
// The complex array is the usual half spectrum along the last axis.
class RealFft {
public:
    explicit RealFft(std::vector<int> dims);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    const std::vector<int>& dims() const { return dims_; }
    std::size_t real_size() const { return real_size_; }
    std::size_t complex_size() const { return complex_size_; }

    void forward(const double* in, std::complex<double>* out) const;
    // Inverse including the 1/N normalization.
    void backward(const std::complex<double>* in, double* out) const;

    // Signed wavenumbers of complex-array entry idx.
    std::array<int, 3> wavenumbers(std::size_t idx) const;

private:
    std::vector<int> dims_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

// Plans are cached per shape and shared; executing them is thread safe.
const RealFft& fft_for(const std::vector<int>& dims);

inline int signed_wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

// Multiplies the Fourier coefficients by a real symbol of the signed wavenumbers.
ScalarField3 apply_symbol(const ScalarField3& f, const std::function<double(int, int, int)>& symbol);
ScalarField2 apply_symbol(const ScalarField2& f, const std::function<double(int, int)>& symbol);

// Spectral Laplacian with symbol -(2 pi)^2 |k|^2 (Nyquist kept).
ScalarField3 laplacian(const ScalarField3& f);
ScalarField2 laplacian(const ScalarField2& f);

// Zeroes every mode with |k_i| > n_i/3 on some axis.
ScalarField2 dealias(const ScalarField2& f);

// L2 norm of the part of f carried by modes with |k_i| < kmax on both axes.
double low_mode_l2(const ScalarField2& f, int kmax);

}  // namespace mvfp
