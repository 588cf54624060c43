#include "mvfp/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mvfp/errors.hpp"

namespace mvfp {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() != 2 && dims_.size() != 3) throw InvalidParameter("fft rank must be 2 or 3");
    real_size_ = 1;
    for (int d : dims_) {
        if (d < 1) throw InvalidParameter("fft dimension must be positive");
        real_size_ *= static_cast<std::size_t>(d);
    }
    complex_size_ = real_size_ / dims_.back() * (dims_.back() / 2 + 1);
    std::vector<double> r(real_size_);
    std::vector<std::complex<double>> c(complex_size_);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c(static_cast<int>(dims_.size()), dims_.data(), r.data(), cp, flags);
    bwd_ = fftw_plan_dft_c2r(static_cast<int>(dims_.size()), dims_.data(), cp, r.data(), flags | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void RealFft::backward(const std::complex<double>* in, double* out) const {
    // c2r destroys its input
    std::vector<std::complex<double>> tmp(in, in + complex_size_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(tmp.data()), out);
    const double inv = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < real_size_; ++i) out[i] *= inv;
}

std::array<int, 3> RealFft::wavenumbers(std::size_t idx) const {
    std::array<int, 3> k{0, 0, 0};
    const int rank = static_cast<int>(dims_.size());
    const int nlast = dims_.back() / 2 + 1;
    k[rank - 1] = static_cast<int>(idx % nlast);
    idx /= nlast;
    for (int a = rank - 2; a >= 0; --a) {
        const int j = static_cast<int>(idx % dims_[a]);
        idx /= dims_[a];
        k[a] = signed_wavenumber(j, dims_[a]);
    }
    return k;
}

const RealFft& fft_for(const std::vector<int>& dims) {
    static std::mutex m;
    static std::map<std::vector<int>, std::unique_ptr<RealFft>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& slot = cache[dims];
    if (!slot) slot = std::make_unique<RealFft>(dims);
    return *slot;
}

ScalarField3 apply_symbol(const ScalarField3& f, const std::function<double(int, int, int)>& symbol) {
    const auto& plan = fft_for({f.n(0), f.n(1), f.n(2)});
    std::vector<std::complex<double>> c(plan.complex_size());
    plan.forward(f.data(), c.data());
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto k = plan.wavenumbers(i);
        c[i] *= symbol(k[0], k[1], k[2]);
    }
    ScalarField3 out(f.shape());
    plan.backward(c.data(), out.data());
    return out;
}

ScalarField2 apply_symbol(const ScalarField2& f, const std::function<double(int, int)>& symbol) {
    const auto& plan = fft_for({f.n(0), f.n(1)});
    std::vector<std::complex<double>> c(plan.complex_size());
    plan.forward(f.data(), c.data());
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto k = plan.wavenumbers(i);
        c[i] *= symbol(k[0], k[1]);
    }
    ScalarField2 out(f.shape());
    plan.backward(c.data(), out.data());
    return out;
}

ScalarField3 laplacian(const ScalarField3& f) {
    constexpr double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply_symbol(f, [](int a, int b, int c) { return -tp2 * (a * a + b * b + c * c); });
}

ScalarField2 laplacian(const ScalarField2& f) {
    constexpr double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply_symbol(f, [](int a, int b) { return -tp2 * (a * a + b * b); });
}

ScalarField2 dealias(const ScalarField2& f) {
    const int n0 = f.n(0), n1 = f.n(1);
    return apply_symbol(f, [n0, n1](int a, int b) {
        return (3 * std::abs(a) > n0 || 3 * std::abs(b) > n1) ? 0.0 : 1.0;
    });
}

double low_mode_l2(const ScalarField2& f, int kmax) {
    const auto& plan = fft_for({f.n(0), f.n(1)});
    std::vector<std::complex<double>> c(plan.complex_size());
    plan.forward(f.data(), c.data());
    const int nl = f.n(1);
    const double inv = 1.0 / static_cast<double>(f.size());
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto k = plan.wavenumbers(i);
        if (std::abs(k[0]) >= kmax || std::abs(k[1]) >= kmax) continue;
        // half spectrum: interior columns stand for a conjugate pair
        const bool paired = k[1] > 0 && 2 * k[1] != nl;
        s += (paired ? 2.0 : 1.0) * std::norm(c[i] * inv);
    }
    return std::sqrt(s);
}

}  // namespace mvfp
