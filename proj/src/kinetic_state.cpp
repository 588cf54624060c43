#include "mvfp/kinetic_state.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mvfp/errors.hpp"
#include "mvfp/simd/kernels.hpp"

namespace mvfp {

void validate_grid(const Grid& g) {
    for (int a = 0; a < 3; ++a) {
        if (g.nx[a] < 2 || g.nv[a] < 2) throw InvalidParameter("grid sizes must be at least 2");
        if (g.nx[a] % 2 != 0) throw InvalidParameter("spatial grid sizes must be even");
    }
}

KineticState::KineticState(const Grid& g, double fill) : grid_(g), c_(g.size(), fill) {}

KineticState KineticState::constant(const Grid& g, double c) {
    KineticState s(g);
    const std::size_t M = g.n_modes();
    for (std::size_t x = 0; x < g.n_space(); ++x) s.c_[x * M] = c;
    return s;
}

ScalarField3 KineticState::mode_field(int m1, int m2, int m3) const {
    ScalarField3 f(grid_.nx);
    const std::size_t r = grid_.mode_index(m1, m2, m3);
    for (std::size_t x = 0; x < grid_.n_space(); ++x) f[x] = at(x, r);
    return f;
}

void KineticState::set_mode_field(int m1, int m2, int m3, const ScalarField3& f) {
    if (f.shape() != grid_.nx) throw GridMismatch("mode field shape differs from grid");
    const std::size_t r = grid_.mode_index(m1, m2, m3);
    for (std::size_t x = 0; x < grid_.n_space(); ++x) at(x, r) = f[x];
}

KineticState& KineticState::operator+=(const KineticState& o) {
    axpy(1.0, o);
    return *this;
}

KineticState& KineticState::operator-=(const KineticState& o) {
    axpy(-1.0, o);
    return *this;
}

KineticState& KineticState::operator*=(double s) {
    simd::active().scale(c_.size(), s, c_.data(), c_.data());
    return *this;
}

void KineticState::axpy(double a, const KineticState& x) {
    if (!(x.grid_ == grid_)) throw GridMismatch("state grids differ");
    simd::active().axpy(c_.size(), a, x.c_.data(), c_.data());
}

KineticState operator+(KineticState a, const KineticState& b) { return a += b; }
KineticState operator-(KineticState a, const KineticState& b) { return a -= b; }
KineticState operator*(double s, KineticState a) { return a *= s; }

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InvalidParameter("truncated state stream");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_state(std::ostream& os, const KineticState& s) {
    for (int a = 0; a < 3; ++a) put_le<std::int32_t>(os, s.grid().nx[a]);
    for (int a = 0; a < 3; ++a) put_le<std::int32_t>(os, s.grid().nv[a]);
    for (double c : s.coeffs()) put_le<double>(os, c);
}

KineticState read_state(std::istream& is) {
    Grid g;
    for (int a = 0; a < 3; ++a) g.nx[a] = get_le<std::int32_t>(is);
    for (int a = 0; a < 3; ++a) g.nv[a] = get_le<std::int32_t>(is);
    validate_grid(g);
    KineticState s(g);
    for (double& c : s.coeffs()) c = get_le<double>(is);
    return s;
}

void save_state(const std::string& path, const KineticState& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidParameter("cannot open " + path);
    write_state(os, s);
}

KineticState load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidParameter("cannot open " + path);
    return read_state(is);
}

}  // namespace mvfp
