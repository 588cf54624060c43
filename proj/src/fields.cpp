#include "mvfp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvfp/errors.hpp"

namespace mvfp {

ScalarField3::ScalarField3(std::array<int, 3> n, double fill)
    : n_(n), v_(static_cast<std::size_t>(n[0]) * n[1] * n[2], fill) {
    if (n[0] < 1 || n[1] < 1 || n[2] < 1) throw InvalidParameter("field shape must be positive");
}

ScalarField3 ScalarField3::from_function(std::array<int, 3> n,
                                         const std::function<double(double, double, double)>& f) {
    ScalarField3 out(n);
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k)
                out(i, j, k) = f(static_cast<double>(i) / n[0], static_cast<double>(j) / n[1],
                                 static_cast<double>(k) / n[2]);
    return out;
}

ScalarField2::ScalarField2(std::array<int, 2> n, double fill)
    : n_(n), v_(static_cast<std::size_t>(n[0]) * n[1], fill) {
    if (n[0] < 1 || n[1] < 1) throw InvalidParameter("field shape must be positive");
}

ScalarField2 ScalarField2::from_function(std::array<int, 2> n, const std::function<double(double, double)>& f) {
    ScalarField2 out(n);
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            out(i, j) = f(static_cast<double>(i) / n[0], static_cast<double>(j) / n[1]);
    return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double max_abs_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double lp_of(const std::vector<double>& v, double p) {
    if (std::isinf(p)) return max_abs_of(v);
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
}

template <class F>
F combine(const F& a, const F& b, double sb) {
    if (a.shape() != b.shape()) throw GridMismatch("field shapes differ");
    F out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sb * b[i];
    return out;
}

template <class F>
void check_finite(const F& f, const char* what) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) throw InvalidParameter(std::string(what) + " has a non-finite entry");
}

}  // namespace

double mean(const ScalarField3& f) { return mean_of(f.values()); }
double mean(const ScalarField2& f) { return mean_of(f.values()); }
double max_abs(const ScalarField3& f) { return max_abs_of(f.values()); }
double max_abs(const ScalarField2& f) { return max_abs_of(f.values()); }
double min_value(const ScalarField3& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double min_value(const ScalarField2& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double lp_norm(const ScalarField3& f, double p) { return lp_of(f.values(), p); }
double lp_norm(const ScalarField2& f, double p) { return lp_of(f.values(), p); }

ScalarField3 operator-(const ScalarField3& a, const ScalarField3& b) { return combine(a, b, -1.0); }
ScalarField2 operator-(const ScalarField2& a, const ScalarField2& b) { return combine(a, b, -1.0); }
ScalarField3 operator+(const ScalarField3& a, const ScalarField3& b) { return combine(a, b, 1.0); }
ScalarField2 operator+(const ScalarField2& a, const ScalarField2& b) { return combine(a, b, 1.0); }

ScalarField3 operator*(double s, const ScalarField3& a) {
    ScalarField3 out = a;
    for (auto& x : out.values()) x *= s;
    return out;
}

ScalarField2 operator*(double s, const ScalarField2& a) {
    ScalarField2 out = a;
    for (auto& x : out.values()) x *= s;
    return out;
}

ScalarField2 integrate_parallel(const ScalarField3& f) {
    ScalarField2 out({f.n(0), f.n(1)});
    const int n3 = f.n(2);
    for (int i = 0; i < f.n(0); ++i)
        for (int j = 0; j < f.n(1); ++j) {
            double s = 0.0;
            for (int k = 0; k < n3; ++k) s += f(i, j, k);
            out(i, j) = s / n3;
        }
    return out;
}

ScalarField3 extend_parallel(const ScalarField2& f, int n3) {
    ScalarField3 out({f.n(0), f.n(1), n3});
    for (int i = 0; i < f.n(0); ++i)
        for (int j = 0; j < f.n(1); ++j)
            for (int k = 0; k < n3; ++k) out(i, j, k) = f(i, j);
    return out;
}

void require_finite(const ScalarField3& f, const char* what) { check_finite(f, what); }
void require_finite(const ScalarField2& f, const char* what) { check_finite(f, what); }

}  // namespace mvfp
