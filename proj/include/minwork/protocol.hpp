#pragma once

// Control-field ansaetze lambda(t) on [0, tau]. Every protocol is pinned to
// lambda_i before the window and lambda_f after it; the interior field may
// jump at the boundaries.
//
// The finite-width impulse of the three-parameter impulse ansatz is rendered
// as an isosceles triangle of base width delta sitting on the interior line:
// rising over [0, delta/2], falling over [delta/2, delta], apex height h and
// signed area h*delta/2, mirrored with negative apex on [tau-delta, tau].

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "minwork/bath.hpp"
#include "minwork/system.hpp"

namespace minwork::protocol {

struct InvalidAnsatz : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Unit triangle pulse on [0,1]: peak 1 at s = 1/2, zero outside.
inline double triangle(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return s <= 0.5 ? 2.0 * s : 2.0 * (1.0 - s);
}

inline bool divides(double step, double whole) {
    const double ratio = whole / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

} // namespace detail

struct Protocol {
    enum class Kind { Constant, Linear, Imp3, Poly3, PiecewiseLinear };

    Kind kind{Kind::Linear};
    double lambda_i{0.0};
    double lambda_f{0.0};
    double tau{1.0};

    // Imp3
    double apex{0.0};   // triangle apex height above/below the interior line
    double alpha1{0.0}; // interior slope
    double alpha2{0.0}; // interior intercept
    double delta{0.0};  // impulse width / piecewise-linear node spacing

    // Poly3 coefficients of t(t-tau)(a1 t^2 + a2 t + a3)
    double a1{0.0}, a2{0.0}, a3{0.0};

    // PiecewiseLinear node values at n*delta, n = 0 .. tau/delta
    std::vector<double> values;

    static Protocol constant(double lambda, double tau) {
        Protocol p;
        p.kind = Kind::Constant;
        p.lambda_i = p.lambda_f = lambda;
        p.tau = tau;
        return p;
    }

    static Protocol linear(double lambda_i, double lambda_f, double tau) {
        Protocol p;
        p.kind = Kind::Linear;
        p.lambda_i = lambda_i;
        p.lambda_f = lambda_f;
        p.tau = tau;
        return p;
    }

    static Protocol imp3(double lambda_i, double lambda_f, double tau, double delta, double apex,
                         double alpha1, double alpha2) {
        if (!(delta > 0.0)) throw InvalidAnsatz("imp3: impulse width delta must be > 0");
        if (!(tau >= 2.0 * delta)) throw InvalidAnsatz("imp3: tau must be >= 2 delta");
        Protocol p;
        p.kind = Kind::Imp3;
        p.lambda_i = lambda_i;
        p.lambda_f = lambda_f;
        p.tau = tau;
        p.delta = delta;
        p.apex = apex;
        p.alpha1 = alpha1;
        p.alpha2 = alpha2;
        return p;
    }

    static Protocol poly3(double lambda_i, double lambda_f, double tau, double a1, double a2, double a3) {
        Protocol p;
        p.kind = Kind::Poly3;
        p.lambda_i = lambda_i;
        p.lambda_f = lambda_f;
        p.tau = tau;
        p.a1 = a1;
        p.a2 = a2;
        p.a3 = a3;
        return p;
    }

    static Protocol piecewise_linear(double lambda_i, double lambda_f, double tau, double delta,
                                     std::vector<double> values) {
        if (!(delta > 0.0)) throw InvalidAnsatz("piecewise_linear: node spacing delta must be > 0");
        if (!detail::divides(delta, tau))
            throw GridMismatch("piecewise_linear: delta must divide tau");
        const auto n = static_cast<std::size_t>(std::llround(tau / delta));
        if (values.size() != n + 1)
            throw InvalidAnsatz("piecewise_linear: expected " + std::to_string(n + 1) + " node values");
        Protocol p;
        p.kind = Kind::PiecewiseLinear;
        p.lambda_i = lambda_i;
        p.lambda_f = lambda_f;
        p.tau = tau;
        p.delta = delta;
        p.values = std::move(values);
        return p;
    }

    // The interior control field on the open window, extended continuously to
    // [0, tau]. Boundary jumps from lambda_i / to lambda_f live outside it.
    double interior(double t) const {
        t = std::min(std::max(t, 0.0), tau);
        switch (kind) {
        case Kind::Constant:
            return lambda_i;
        case Kind::Linear:
            return lambda_i + (lambda_f - lambda_i) * t / tau;
        case Kind::Imp3:
            return alpha1 * t + alpha2 + apex * detail::triangle(t / delta) -
                   apex * detail::triangle((tau - t) / delta);
        case Kind::Poly3:
            return lambda_i + (lambda_f - lambda_i) * t / tau +
                   t * (t - tau) * (a1 * t * t + a2 * t + a3);
        case Kind::PiecewiseLinear: {
            const double u = t / delta;
            const double r = std::round(u);
            if (std::abs(u - r) < 1e-9) return values[static_cast<std::size_t>(r)];
            const auto i = static_cast<std::size_t>(u);
            const double w = u - static_cast<double>(i);
            return values[i] * (1.0 - w) + values[i + 1] * w;
        }
        }
        return lambda_i;
    }

    // lambda(t) with the process endpoints pinned: lambda_i up to and
    // including t = 0, lambda_f from t = tau on.
    double evaluate(double t) const {
        if (t <= 0.0) return lambda_i;
        if (t >= tau) return lambda_f;
        return interior(t);
    }
};

// Deterministic protocol samples at t_n = n dt, using the interior limits at
// the window edges (the values the propagator integrates against).
inline std::vector<double> sample_on_grid(const Protocol& p, double dt) {
    if (!(dt > 0.0)) throw GridMismatch("sample_on_grid: dt must be > 0");
    if (!detail::divides(dt, p.tau)) throw GridMismatch("sample_on_grid: dt must divide tau");
    if ((p.kind == Protocol::Kind::Imp3 || p.kind == Protocol::Kind::PiecewiseLinear) &&
        !detail::divides(dt, p.delta))
        throw GridMismatch("sample_on_grid: dt must divide the protocol's delta");
    const auto n = static_cast<std::size_t>(std::llround(p.tau / dt));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = p.interior(static_cast<double>(i) * dt);
    return out;
}

// ---------------------------------------------------------------------------
// Physics-informed initial guesses
// ---------------------------------------------------------------------------

// Impulse parameters in the area convention: a guess height h corresponds to
// an impulse of signed area h*delta (rendered as a triangle of apex 2h).
struct Imp3Guess {
    double h;
    double alpha1;
    double alpha2;
    double zeta_eff; // 2 J(epsilon)
};

inline Protocol imp3_from_guess(const sys::TwoLevelModel& m, double tau, double delta,
                                const Imp3Guess& g) {
    return Protocol::imp3(m.lambda_i, m.lambda_f, tau, delta, 2.0 * g.h, g.alpha1, g.alpha2);
}

// Seed for the impulse ansatz: the driven system maps onto the Brownian
// oscillator in a moving Ohmic trap, whose optimum has slope/intercept/area
//   alpha1 = dl (eps^2/zeta) / (2 + eps^2 tau/zeta),
//   alpha2 = lambda_i + dl / (2 + eps^2 tau/zeta),
//   h delta = (dl/zeta) / (2 + eps^2 tau/zeta),
// with zeta = 2 J(eps). The tunable system uses the overdamped map
// eps^2/zeta -> 2 zeta/(beta_e eps) at the effective inverse temperature
// beta_e = (2/eps) tanh(beta eps / 2), and carries no impulse (h = 0).
inline Imp3Guess imp3_initial_guess(const sys::TwoLevelModel& m, const bath::SpectralDensity& j,
                                    double beta, double tau, double delta) {
    if (!(beta > 0.0)) throw std::invalid_argument("imp3_initial_guess: beta must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("imp3_initial_guess: delta must be > 0");
    const double zeta = 2.0 * j.value(m.epsilon);
    if (zeta == 0.0)
        throw std::invalid_argument("imp3_initial_guess: J(epsilon) = 0, bath decoupled from the system");
    const double dl = m.lambda_f - m.lambda_i;
    Imp3Guess g{};
    g.zeta_eff = zeta;
    if (m.kind == sys::TwoLevelModel::Kind::Driven) {
        const double denom = 2.0 + m.epsilon * m.epsilon * tau / zeta;
        g.alpha1 = dl * (m.epsilon * m.epsilon / zeta) / denom;
        g.alpha2 = m.lambda_i + dl / denom;
        g.h = (dl / zeta) / denom / delta;
    } else {
        const double beta_e = (2.0 / m.epsilon) * std::tanh(0.5 * beta * m.epsilon);
        const double rate = 2.0 * zeta / (beta_e * m.epsilon); // replaces eps^2/zeta
        const double denom = 2.0 + rate * tau;
        g.alpha1 = dl * rate / denom;
        g.alpha2 = m.lambda_i + dl / denom;
        g.h = 0.0;
    }
    return g;
}

// Normalised impulse height h' = h delta / (alpha2 - lambda_i); the optimiser
// works in (h', alpha1, alpha2). Degenerate reference alpha2 = lambda_i falls
// back to optimising the raw height.
struct Imp3Coords {
    double lambda_i, lambda_f, tau, delta;
    double h_ref; // (alpha2_guess - lambda_i)/delta, fixed at the seed
    bool raw_h{false};

    static Imp3Coords from_guess(const sys::TwoLevelModel& m, double tau, double delta,
                                 const Imp3Guess& g) {
        Imp3Coords c{m.lambda_i, m.lambda_f, tau, delta, 0.0, false};
        if (g.alpha2 == m.lambda_i) {
            c.raw_h = true;
        } else {
            c.h_ref = (g.alpha2 - m.lambda_i) / delta;
        }
        return c;
    }

    double height_to_coord(double h) const { return raw_h ? h : h / h_ref; }
    double coord_to_height(double hp) const { return raw_h ? hp : hp * h_ref; }

    Protocol build(double hp, double alpha1, double alpha2) const {
        return Protocol::imp3(lambda_i, lambda_f, tau, delta, 2.0 * coord_to_height(hp), alpha1,
                              alpha2);
    }
};

inline double reparam_height(const Imp3Guess& g, double lambda_i, double delta) {
    if (g.alpha2 == lambda_i)
        throw std::invalid_argument("reparam_height: degenerate reference alpha2 = lambda_i");
    return g.h * delta / (g.alpha2 - lambda_i);
}

} // namespace minwork::protocol
