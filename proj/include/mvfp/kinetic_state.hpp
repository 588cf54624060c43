#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvfp/fields.hpp"

namespace mvfp {

struct Grid {
    std::array<int, 3> nx{16, 16, 16};
    std::array<int, 3> nv{8, 8, 8};

    std::size_t n_space() const { return static_cast<std::size_t>(nx[0]) * nx[1] * nx[2]; }
    std::size_t n_modes() const { return static_cast<std::size_t>(nv[0]) * nv[1] * nv[2]; }
    std::size_t size() const { return n_space() * n_modes(); }
    // Offset between neighbouring Hermite indices along velocity axis a.
    std::size_t mode_stride(int a) const {
        return a == 0 ? static_cast<std::size_t>(nv[1]) * nv[2] : a == 1 ? static_cast<std::size_t>(nv[2]) : 1;
    }
    std::size_t mode_index(int m1, int m2, int m3) const {
        return (static_cast<std::size_t>(m1) * nv[1] + m2) * nv[2] + m3;
    }
    std::array<int, 3> mode_of(std::size_t r) const {
        const int m3 = static_cast<int>(r % nv[2]);
        r /= nv[2];
        return {static_cast<int>(r / nv[1]), static_cast<int>(r % nv[1]), m3};
    }
    std::size_t space_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * nx[1] + j) * nx[2] + k;
    }
    bool operator==(const Grid&) const = default;
};

// Throws InvalidParameter unless every size is >= 2 and every nx is even.
void validate_grid(const Grid& g);

// Coefficients of h(x, v) = sum_m c[x, m] H~_m(v), stored row-major over
// (x1, x2, x3, m1, m2, m3) so each spatial point owns a contiguous mode vector.
class KineticState {
public:
    KineticState() = default;
    explicit KineticState(const Grid& g, double fill = 0.0);

    static KineticState constant(const Grid& g, double c);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return c_.size(); }

    double* data() { return c_.data(); }
    const double* data() const { return c_.data(); }
    std::vector<double>& coeffs() { return c_; }
    const std::vector<double>& coeffs() const { return c_; }

    double* at_point(std::size_t x) { return c_.data() + x * grid_.n_modes(); }
    const double* at_point(std::size_t x) const { return c_.data() + x * grid_.n_modes(); }
    double& at(std::size_t x, std::size_t mode) { return c_[x * grid_.n_modes() + mode]; }
    double at(std::size_t x, std::size_t mode) const { return c_[x * grid_.n_modes() + mode]; }

    // Coefficient field of one Hermite mode.
    ScalarField3 mode_field(int m1, int m2, int m3) const;
    void set_mode_field(int m1, int m2, int m3, const ScalarField3& f);

    KineticState& operator+=(const KineticState& o);
    KineticState& operator-=(const KineticState& o);
    KineticState& operator*=(double s);
    void axpy(double a, const KineticState& x);

private:
    Grid grid_;
    std::vector<double> c_;
};

KineticState operator+(KineticState a, const KineticState& b);
KineticState operator-(KineticState a, const KineticState& b);
KineticState operator*(double s, KineticState a);

// Checkpoint layout: six little-endian int32 (nx1 nx2 nx3 nv1 nv2 nv3) then
// the coefficients as little-endian IEEE-754 doubles in storage order.
void write_state(std::ostream& os, const KineticState& s);
KineticState read_state(std::istream& is);
void save_state(const std::string& path, const KineticState& s);
KineticState load_state(const std::string& path);

}  // namespace mvfp
