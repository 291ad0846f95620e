#pragma once

// Fixed-size complex 2x2 matrices for two-level-system dynamics.
// Everything here is a value type; no allocation in the hot paths.

#include <array>
#include <cmath>
#include <complex>

namespace minwork {

using cplx = std::complex<double>;

struct Mat2 {
    cplx m00{}, m01{}, m10{}, m11{};

    static Mat2 zero() { return {}; }
    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
    static Mat2 sigma_y() { return {0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0}; }
    static Mat2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }

    Mat2& operator+=(const Mat2& o) {
        m00 += o.m00; m01 += o.m01; m10 += o.m10; m11 += o.m11;
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        m00 -= o.m00; m01 -= o.m01; m10 -= o.m10; m11 -= o.m11;
        return *this;
    }
    Mat2& operator*=(cplx s) {
        m00 *= s; m01 *= s; m10 *= s; m11 *= s;
        return *this;
    }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
inline Mat2 operator*(cplx s, Mat2 a) { return a *= s; }
inline Mat2 operator*(Mat2 a, cplx s) { return a *= s; }

inline Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

inline Mat2 dagger(const Mat2& a) {
    return {std::conj(a.m00), std::conj(a.m10), std::conj(a.m01), std::conj(a.m11)};
}

inline cplx trace(const Mat2& a) { return a.m00 + a.m11; }

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return mul(a, b) - mul(b, a); }

inline Mat2 anticommutator(const Mat2& a, const Mat2& b) { return mul(a, b) + mul(b, a); }

// tr[a b], the Hilbert-Schmidt pairing used for expectation values tr[O rho].
inline cplx trace_prod(const Mat2& a, const Mat2& b) {
    return a.m00 * b.m00 + a.m01 * b.m10 + a.m10 * b.m01 + a.m11 * b.m11;
}

inline double expectation(const Mat2& op, const Mat2& rho) {
    return std::real(trace_prod(op, rho));
}

inline double max_abs(const Mat2& a) {
    return std::max(std::max(std::abs(a.m00), std::abs(a.m01)),
                    std::max(std::abs(a.m10), std::abs(a.m11)));
}

inline double hermiticity_deviation(const Mat2& a) { return max_abs(a - dagger(a)); }

// Eigenvalues of a Hermitian 2x2 matrix, closed form.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& a) {
    const double t = std::real(trace(a));
    const double dz = 0.5 * std::real(a.m00 - a.m11);
    const double r = std::sqrt(dz * dz + std::norm(a.m01));
    return {0.5 * t - r, 0.5 * t + r};
}

inline double min_eigenvalue(const Mat2& rho) { return hermitian_eigenvalues(rho)[0]; }

// Trace distance (1/2)||a - b||_1 for Hermitian a, b.
inline double trace_distance(const Mat2& a, const Mat2& b) {
    const Mat2 d = a - b;
    const auto ev = hermitian_eigenvalues(d);
    return 0.5 * (std::abs(ev[0]) + std::abs(ev[1]));
}

} // namespace minwork
