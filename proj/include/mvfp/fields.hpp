#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace mvfp {

// Real grid function on the unit 3-torus, row-major (x1, x2, x3), x3 fastest.
// Node i along an axis of size n sits at x = i/n.
class ScalarField3 {
public:
    ScalarField3() = default;
    explicit ScalarField3(std::array<int, 3> n, double fill = 0.0);

    static ScalarField3 from_function(std::array<int, 3> n,
                                      const std::function<double(double, double, double)>& f);

    const std::array<int, 3>& shape() const { return n_; }
    int n(int axis) const { return n_[axis]; }
    std::size_t size() const { return v_.size(); }

    double& operator()(int i, int j, int k) { return v_[(static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + k]; }
    double operator()(int i, int j, int k) const { return v_[(static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + k]; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::array<int, 3> n_{0, 0, 0};
    std::vector<double> v_;
};

// Real grid function on the unit 2-torus, row-major (x1, x2).
class ScalarField2 {
public:
    ScalarField2() = default;
    explicit ScalarField2(std::array<int, 2> n, double fill = 0.0);

    static ScalarField2 from_function(std::array<int, 2> n, const std::function<double(double, double)>& f);

    const std::array<int, 2>& shape() const { return n_; }
    int n(int axis) const { return n_[axis]; }
    std::size_t size() const { return v_.size(); }

    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * n_[1] + j]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * n_[1] + j]; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::array<int, 2> n_{0, 0};
    std::vector<double> v_;
};

// Trapezoid (grid mean) quadrature over the unit torus.
double mean(const ScalarField3& f);
double mean(const ScalarField2& f);
double max_abs(const ScalarField3& f);
double max_abs(const ScalarField2& f);
double min_value(const ScalarField3& f);
double min_value(const ScalarField2& f);
double lp_norm(const ScalarField3& f, double p);
double lp_norm(const ScalarField2& f, double p);

ScalarField3 operator-(const ScalarField3& a, const ScalarField3& b);
ScalarField2 operator-(const ScalarField2& a, const ScalarField2& b);
ScalarField3 operator+(const ScalarField3& a, const ScalarField3& b);
ScalarField2 operator+(const ScalarField2& a, const ScalarField2& b);
ScalarField3 operator*(double s, const ScalarField3& a);
ScalarField2 operator*(double s, const ScalarField2& a);

// Integral over x3 (parallel direction) at each (x1, x2).
ScalarField2 integrate_parallel(const ScalarField3& f);
// Embeds a 2D field as independent of x3.
ScalarField3 extend_parallel(const ScalarField2& f, int n3);

void require_finite(const ScalarField3& f, const char* what);
void require_finite(const ScalarField2& f, const char* what);

}  // namespace mvfp
