#pragma once

// Two-level system models driven by a control field lambda:
//   driven:  H_S(lambda) = eps sigma_z/2 + lambda sigma_x/2
//   tunable: H_S(lambda) = eps lambda sigma_z/2
// with coupling operator V_S = sigma_x and basis (|up>, |down>),
// sigma_z = diag(1, -1).

#include <cmath>
#include <stdexcept>
#include <string>

#include "minwork/matrix2.hpp"

namespace minwork::sys {

struct DegenerateGap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TwoLevelModel {
    enum class Kind { Driven, Tunable };

    Kind kind{Kind::Driven};
    double epsilon{1.0};
    double lambda_i{0.0};
    double lambda_f{1.0};

    static TwoLevelModel driven(double epsilon, double lambda_i, double lambda_f) {
        TwoLevelModel m{Kind::Driven, epsilon, lambda_i, lambda_f};
        m.validate();
        return m;
    }

    static TwoLevelModel tunable(double epsilon, double lambda_i, double lambda_f) {
        TwoLevelModel m{Kind::Tunable, epsilon, lambda_i, lambda_f};
        m.validate();
        return m;
    }

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("two-level model: epsilon must be > 0");
    }
};

inline Mat2 coupling_operator() { return Mat2::sigma_x(); }

inline Mat2 hamiltonian(const TwoLevelModel& m, double lambda) {
    if (m.kind == TwoLevelModel::Kind::Driven) {
        // eps sigma_z/2 + lambda sigma_x/2
        return {0.5 * m.epsilon, 0.5 * lambda, 0.5 * lambda, -0.5 * m.epsilon};
    }
    return {0.5 * m.epsilon * lambda, 0.0, 0.0, -0.5 * m.epsilon * lambda};
}

// dH/dlambda; exact since H is linear in lambda.
inline Mat2 hamiltonian_derivative(const TwoLevelModel& m) {
    if (m.kind == TwoLevelModel::Kind::Driven) return {0.0, 0.5, 0.5, 0.0};
    return {0.5 * m.epsilon, 0.0, 0.0, -0.5 * m.epsilon};
}

// Instantaneous eigenframe H_S = Omega sigma_z^theta / 2 with
// sigma_z^theta = cos(theta) sigma_z + sin(theta) sigma_x.
struct EigenFrame {
    double omega; // gap, >= 0
    double theta; // rotation angle in [0, 2 pi)
    double sign;  // sgn(cos theta)
};

inline EigenFrame eigenframe(const TwoLevelModel& m, double lambda) {
    if (m.kind == TwoLevelModel::Kind::Driven) {
        double theta = std::atan2(lambda, m.epsilon);
        if (theta < 0.0) theta += 2.0 * M_PI;
        return {std::sqrt(m.epsilon * m.epsilon + lambda * lambda), theta, 1.0};
    }
    if (lambda == 0.0)
        throw DegenerateGap("eigenframe: tunable model with lambda = 0 has a vanishing gap");
    if (lambda > 0.0) return {m.epsilon * lambda, 0.0, 1.0};
    return {m.epsilon * (-lambda), M_PI, -1.0};
}

// Rotation U_theta = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]; then
// U_theta^dag H U_theta = diag(Omega/2, -Omega/2).
inline Mat2 frame_rotation(double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return {c, -s, s, c};
}

// Weak-coupling equilibrium of the bare system at fixed lambda:
// exp(-beta H)/Z, stable for large beta via tanh.
inline Mat2 gibbs_state(const TwoLevelModel& m, double lambda, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("gibbs_state: beta must be > 0");
    const Mat2 h = hamiltonian(m, lambda);
    const double hz = std::real(h.m00);      // H = hz sigma_z + hx sigma_x
    const double hx = std::real(h.m01);
    const double half_gap = std::sqrt(hz * hz + hx * hx);
    Mat2 rho = Mat2::identity();
    rho *= 0.5;
    if (half_gap > 0.0) {
        const double w = 0.5 * std::tanh(beta * half_gap) / half_gap;
        rho.m00 -= w * hz;
        rho.m11 += w * hz;
        rho.m01 -= w * hx;
        rho.m10 -= w * hx;
    }
    return rho;
}

// Bare-system partition function 2 cosh(beta Omega / 2).
inline double partition_function(const TwoLevelModel& m, double lambda, double beta) {
    const Mat2 h = hamiltonian(m, lambda);
    const double half_gap = std::hypot(std::real(h.m00), std::real(h.m01));
    return 2.0 * std::cosh(beta * half_gap);
}

} // namespace minwork::sys
