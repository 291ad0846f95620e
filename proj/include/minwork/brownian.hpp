#pragma once

// Brownian particle in a moving harmonic trap: Green's-function machinery,
// the work functional as a quadratic form in x(t) = -lambda(t)/sqrt(2),
// its global optimum by a linear stationarity solve, the closed-form
// delta-impulse ansatz lambda(t) = alpha1 t + alpha2 + 2m[delta(t)-delta(t-tau)],
// and the analytic Markovian optima used as oracles.
//
// Conventions: x(0), x(tau) are pinned process endpoints. Delta impulses are
// parameterised by their in-window area: the control gains lambda-area +m
// just inside t = 0 and -m just inside t = tau (the boundary deltas of the
// 2m[delta(t) - delta(t-tau)] form carry half weight at the window edge).
// All impulse couplings below follow from the regularised narrow-pulse limit,
// and the convention is fixed empirically by the analytic Ohmic optimum.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minwork/bath.hpp"
#include "minwork/protocol.hpp"

namespace minwork::brownian {

using protocol::Protocol;

struct IndefiniteForm : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateAnsatz : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Regime { Underdamped, Overdamped };

struct TrapModel {
    double epsilon{1.0};
    bath::SpectralDensity j;
    double lambda_i{0.0};
    double lambda_f{1.0};
    double tau{0.5};
    Regime regime{Regime::Underdamped};

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("trap model: epsilon must be > 0");
        if (!(tau > 0.0)) throw std::invalid_argument("trap model: tau must be > 0");
    }

    void require_zero_lambda_i(const char* who) const {
        if (lambda_i != 0.0)
            throw std::invalid_argument(std::string(who) + ": requires lambda_i = 0");
    }
};

// Interior line alpha1 t + alpha2 with the process endpoints pinned outside:
// a two-node piecewise-linear protocol (jumps at both window edges).
inline Protocol line_with_jumps(double lambda_i, double lambda_f, double tau, double slope,
                                double intercept) {
    return Protocol::piecewise_linear(lambda_i, lambda_f, tau, tau,
                                      {intercept, slope * tau + intercept});
}

// ---------------------------------------------------------------------------
// Green's functions and kernels
// ---------------------------------------------------------------------------

// G_+(t): response of the trap coordinate to a unit velocity impulse,
//   Gdd = -2 eps int_0^t Delta(t-s) Gd(s) ds - eps^2 G,  G(0)=0, Gd(0)=1.
// The Ohmic delta part of Delta gives instantaneous friction zeta*Gd; the
// Drude part is carried by the auxiliary y(t) = int_0^t e^{-g(t-s)} Gd(s) ds.
struct KernelTable {
    double h{0.0};
    std::vector<double> g;    // G_+(n h)
    std::vector<double> gdot; // d/dt G_+(n h)
};

namespace detail {

struct TrapOde {
    double eps, zeta, gamma, xi;

    // state (q, v, y)
    void rhs(const double* s, double drive, double* ds) const {
        ds[0] = s[1];
        ds[1] = -zeta * s[1] - 2.0 * eps * gamma * xi * s[2] - eps * eps * s[0] + drive;
        ds[2] = s[1] - gamma * s[2];
    }
};

template <class Drive>
inline void rk4_step(const TrapOde& ode, double* s, double t, double h, const Drive& drive) {
    double k1[3], k2[3], k3[3], k4[3], tmp[3];
    ode.rhs(s, drive(t), k1);
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    ode.rhs(tmp, drive(t + 0.5 * h), k2);
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    ode.rhs(tmp, drive(t + 0.5 * h), k3);
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + h * k3[i];
    ode.rhs(tmp, drive(t + h), k4);
    for (int i = 0; i < 3; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

inline TrapOde make_ode(const TrapModel& m) {
    const bool has_drude = m.j.kind != bath::SpectralDensity::Kind::Ohmic;
    const bool has_ohmic = m.j.kind != bath::SpectralDensity::Kind::Drude;
    return {m.epsilon, has_ohmic ? m.j.zeta : 0.0, m.j.gamma, has_drude ? m.j.xi : 0.0};
}

inline int substeps(const TrapModel& m, double h) {
    const double scale = std::max({m.epsilon, m.j.gamma, m.j.zeta, 1.0});
    return std::max(1, static_cast<int>(std::ceil(h * scale / 5e-4)));
}

} // namespace detail

inline KernelTable green_plus(const TrapModel& m, double h, std::size_t n) {
    m.validate();
    const auto ode = detail::make_ode(m);
    const int nsub = detail::substeps(m, h);
    const double hs = h / nsub;
    KernelTable kt;
    kt.h = h;
    kt.g.reserve(n + 1);
    kt.gdot.reserve(n + 1);
    double s[3] = {0.0, 1.0, 0.0};
    kt.g.push_back(s[0]);
    kt.gdot.push_back(s[1]);
    auto zero = [](double) { return 0.0; };
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) * h;
        for (int k = 0; k < nsub; ++k) detail::rk4_step(ode, s, t0 + k * hs, hs, zero);
        kt.g.push_back(s[0]);
        kt.gdot.push_back(s[1]);
    }
    return kt;
}

// Overdamped response kernel F(t) with Laplace transform [eps + 2 z Dhat(z)]^{-1}
// for the combined Ohmic+Drude friction, inverted by partial fractions over
// the roots of zeta z^2 + (eps^2 + zeta g + 2 eps xi g) z + eps^2 g.
struct OverdampedKernel {
    std::complex<double> p1, p2, r1, r2;
    bool confluent{false};
    std::complex<double> pc, c0, c1; // F = (c0 + c1 t) e^{pc t} for a repeated root
    double f0{0.0};                  // F(0) = eps/zeta (Laplace initial-value theorem)

    double value(double t) const {
        if (confluent) return std::real((c0 + c1 * t) * std::exp(pc * t));
        return std::real(r1 * std::exp(p1 * t) + r2 * std::exp(p2 * t));
    }

    double derivative(double t) const {
        if (confluent) return std::real((c1 + pc * (c0 + c1 * t)) * std::exp(pc * t));
        return std::real(r1 * p1 * std::exp(p1 * t) + r2 * p2 * std::exp(p2 * t));
    }
};

inline OverdampedKernel overdamped_kernel(const TrapModel& m) {
    const auto& j = m.j;
    if (j.kind == bath::SpectralDensity::Kind::Drude || !(j.zeta > 0.0))
        throw std::invalid_argument("overdamped_kernel: requires an Ohmic friction component (zeta > 0)");
    const double eps = m.epsilon, zeta = j.zeta, g = j.gamma;
    const double xi = j.kind == bath::SpectralDensity::Kind::Ohmic ? 0.0 : j.xi;
    OverdampedKernel k;
    k.f0 = eps / zeta;
    if (xi == 0.0) {
        // Fhat(z) = eps / (eps^2 + zeta z)
        k.p1 = -eps * eps / zeta;
        k.r1 = eps / zeta;
        k.p2 = k.r2 = 0.0;
        return k;
    }
    const double a = zeta;
    const double b = eps * eps + zeta * g + 2.0 * eps * xi * g;
    const double c = eps * eps * g;
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * a * c, 0.0));
    const std::complex<double> z1 = (-b + disc) / (2.0 * a);
    const std::complex<double> z2 = (-b - disc) / (2.0 * a);
    if (std::abs(z1 - z2) < 1e-12 * std::max(1.0, std::abs(z1))) {
        k.confluent = true;
        k.pc = z1;
        k.c0 = eps / a;
        k.c1 = eps / a * (z1 + g);
        return k;
    }
    k.p1 = z1;
    k.p2 = z2;
    k.r1 = eps * (z1 + g) / (a * (z1 - z2));
    k.r2 = eps * (z2 + g) / (a * (z2 - z1));
    return k;
}

// ---------------------------------------------------------------------------
// Time-domain work evaluation
// ---------------------------------------------------------------------------

struct TrapPath {
    double w{0.0};
    double q_end{0.0};
    double v_end{0.0};
};

// W = (1/sqrt2)[lambda_f q(tau) - lambda_i q(0)] - (1/sqrt2) int lambda(t) v(t) dt,
// by parts from W = (1/sqrt2) int lambdadot <q> dt; boundary jumps are
// absorbed into the endpoint terms. Optional impulses of in-window area
// +m / -m enter as velocity kicks -/+ eps m / sqrt2 plus the closed-form work
//   eps m^2/4 - m v(0-)/sqrt2   at t = 0,
//   eps m^2/4 + m v(tau-)/sqrt2 at t = tau.
inline TrapPath trap_work(const TrapModel& m, const Protocol& p, double h, double delta_m = 0.0) {
    m.validate();
    if (!protocol::detail::divides(h, m.tau))
        throw std::invalid_argument("trap_work: h must divide tau");
    const auto n = static_cast<std::size_t>(std::llround(m.tau / h));
    if (n % 2 != 0) throw std::invalid_argument("trap_work: Simpson grid needs an even interval count");
    if (delta_m != 0.0 && m.regime != Regime::Underdamped)
        throw std::invalid_argument("trap_work: delta impulses are defined for the underdamped model");

    const double sq2 = std::sqrt(2.0);
    const int nsub = detail::substeps(m, h);
    const double hs = h / static_cast<double>(nsub);

    double w = 0.0;
    double simpson = 0.0;
    auto add = [&](std::size_t i, double val) {
        const double wt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        simpson += wt * val;
    };

    double q_end = 0.0, v_end = 0.0;
    if (m.regime == Regime::Underdamped) {
        const auto ode = detail::make_ode(m);
        auto drive = [&](double t) { return -m.epsilon * p.interior(t) / sq2; };
        double s[3] = {-m.lambda_i / (sq2 * m.epsilon), 0.0, 0.0};
        if (delta_m != 0.0) {
            w += 0.25 * m.epsilon * delta_m * delta_m - delta_m * s[1] / sq2;
            s[1] += -m.epsilon * delta_m / sq2;
        }
        const double q0 = s[0];
        add(0, p.interior(0.0) * s[1]);
        for (std::size_t i = 0; i < n; ++i) {
            const double t0 = static_cast<double>(i) * h;
            for (int k = 0; k < nsub; ++k) detail::rk4_step(ode, s, t0 + k * hs, hs, drive);
            add(i + 1, p.interior(t0 + h) * s[1]);
        }
        if (delta_m != 0.0) {
            w += 0.25 * m.epsilon * delta_m * delta_m + delta_m * s[1] / sq2;
            s[1] += m.epsilon * delta_m / sq2;
        }
        w += (p.lambda_f * s[0] - p.lambda_i * q0) / sq2;
        q_end = s[0];
        v_end = s[1];
    } else {
        const double zeta = m.j.zeta, g = m.j.gamma;
        const double xi = m.j.kind == bath::SpectralDensity::Kind::Ohmic ? 0.0 : m.j.xi;
        if (!(zeta > 0.0)) throw std::invalid_argument("trap_work: overdamped regime requires zeta > 0");
        // q' = (eps/zeta)(-eps q + x - 2 xi g y), y' = q' - g y; state (q, y)
        auto qdot = [&](const double* st, double t) {
            const double x = -p.interior(t) / sq2;
            return (m.epsilon / zeta) * (-m.epsilon * st[0] + x - 2.0 * xi * g * st[1]);
        };
        auto f = [&](const double* u, double tt, double* du) {
            du[0] = qdot(u, tt);
            du[1] = du[0] - g * u[1];
        };
        double s[2] = {-m.lambda_i / (sq2 * m.epsilon), 0.0};
        const double q0 = s[0];
        add(0, p.interior(0.0) * qdot(s, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const double t0 = static_cast<double>(i) * h;
            for (int k = 0; k < nsub; ++k) {
                const double t = t0 + k * hs;
                double k1[2], k2[2], k3[2], k4[2], tmp[2];
                f(s, t, k1);
                for (int q = 0; q < 2; ++q) tmp[q] = s[q] + 0.5 * hs * k1[q];
                f(tmp, t + 0.5 * hs, k2);
                for (int q = 0; q < 2; ++q) tmp[q] = s[q] + 0.5 * hs * k2[q];
                f(tmp, t + 0.5 * hs, k3);
                for (int q = 0; q < 2; ++q) tmp[q] = s[q] + hs * k3[q];
                f(tmp, t + hs, k4);
                for (int q = 0; q < 2; ++q) s[q] += hs / 6.0 * (k1[q] + 2.0 * (k2[q] + k3[q]) + k4[q]);
            }
            add(i + 1, p.interior(t0 + h) * qdot(s, t0 + h));
        }
        w += (p.lambda_f * s[0] - p.lambda_i * q0) / sq2;
        q_end = s[0];
        v_end = qdot(s, m.tau);
    }
    w -= simpson * h / 3.0 / sq2;
    return {w, q_end, v_end};
}

// ---------------------------------------------------------------------------
// Quadratic work form and its optimum
// ---------------------------------------------------------------------------

// Trapezoidal discretisation of
//   W[x] = int_0^tau dt int_0^t ds A(t-s) x(t) x(s) - int_0^tau b(t) x(t) dt
// on nodes t_n = n dg, symmetrised so the stationarity system has a symmetric
// matrix. Underdamped: A = eps Gdot, b = x(tau) eps G(tau-t). Overdamped:
// A = Fdot + 2 F(0) delta(t-s), b = x(tau) F(tau-t).
struct QuadraticWork {
    double dg{0.0};
    double x0{0.0}, xn{0.0}; // pinned boundary values of x
    std::vector<double> a;   // A(n dg), smooth part
    std::vector<double> b;   // b(n dg)
    double delta_diag{0.0};  // F(0): inner half-weight of the 2F(0) delta(t-s) term

    std::size_t last() const { return a.size() - 1; }

    double m_entry(std::size_t r, std::size_t c) const {
        const std::size_t n = last();
        auto w_out = [&](std::size_t i) { return (i == 0 || i == n) ? 0.5 : 1.0; };
        const std::size_t hi = std::max(r, c), lo = std::min(r, c);
        double v = 0.0;
        if (hi > 0) {
            const double w_in = (lo == 0 || lo == hi) ? 0.5 : 1.0;
            v = dg * dg * w_out(hi) * w_in * a[hi - lo];
            if (r != c) v *= 0.5; // symmetrisation of the lower-triangular form
        }
        if (r == c) v += dg * w_out(r) * delta_diag;
        return v;
    }

    Eigen::MatrixXd full_matrix() const {
        const auto n = static_cast<Eigen::Index>(last());
        Eigen::MatrixXd msym(n + 1, n + 1);
        for (Eigen::Index r = 0; r <= n; ++r)
            for (Eigen::Index c = 0; c <= n; ++c)
                msym(r, c) = m_entry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        return msym;
    }

    // Trapezoid weight of the linear source term, dg * w_out(r) * b(t_r).
    double b_weighted(std::size_t r) const {
        const std::size_t n = last();
        return dg * ((r == 0 || r == n) ? 0.5 : 1.0) * b[r];
    }

    // W(x) for a full node vector (boundaries included).
    double value(const std::vector<double>& x) const {
        const std::size_t n = last();
        double acc = 0.0;
        for (std::size_t r = 0; r <= n; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c <= n; ++c) row += m_entry(r, c) * x[c];
            acc += x[r] * row - b_weighted(r) * x[r];
        }
        return acc;
    }

    double value_lambda(const std::vector<double>& lambda_nodes) const {
        std::vector<double> x(lambda_nodes.size());
        const double sq2 = std::sqrt(2.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = -lambda_nodes[i] / sq2;
        return value(x);
    }
};

inline QuadraticWork discretize_work(const TrapModel& m, double dg) {
    m.validate();
    m.require_zero_lambda_i("discretize_work");
    if (!protocol::detail::divides(dg, m.tau))
        throw std::invalid_argument("discretize_work: grid step must divide tau");
    const auto n = static_cast<std::size_t>(std::llround(m.tau / dg));
    QuadraticWork q;
    q.dg = dg;
    q.x0 = -m.lambda_i / std::sqrt(2.0);
    q.xn = -m.lambda_f / std::sqrt(2.0);
    q.a.resize(n + 1);
    q.b.resize(n + 1);
    if (m.regime == Regime::Underdamped) {
        const auto kt = green_plus(m, dg, n);
        for (std::size_t i = 0; i <= n; ++i) {
            q.a[i] = m.epsilon * kt.gdot[i];
            q.b[i] = q.xn * m.epsilon * kt.g[n - i];
        }
    } else {
        const auto f = overdamped_kernel(m);
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) * dg;
            q.a[i] = f.derivative(t);
            q.b[i] = q.xn * f.value(m.tau - t);
        }
        q.delta_diag = f.f0;
    }
    return q;
}

struct QpSummary {
    double slope{0.0};
    double intercept{0.0};  // fitted interior line at t = 0
    double impulse_m{0.0};  // boundary spike area in the 2m delta convention
    double lambda_max{0.0}; // max |lambda*| over the window
};

struct QpResult {
    std::vector<double> lambda; // node values, boundaries pinned to lambda_i / lambda_f
    double w{0.0};
    double min_pivot{0.0}; // smallest LDLT pivot of the interior block
    QpSummary summary;
};

namespace detail {

inline QpSummary summarize_qp(const std::vector<double>& lambda, double dg) {
    QpSummary s;
    const std::size_t n = lambda.size() - 1;
    const auto lo = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(n)));
    const auto hi = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n)));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double t = static_cast<double>(i) * dg;
        sx += t;
        sy += lambda[i];
        sxx += t * t;
        sxy += t * lambda[i];
        cnt += 1.0;
    }
    s.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    s.intercept = (sy - s.slope * sx) / cnt;
    auto line = [&](double t) { return s.intercept + s.slope * t; };
    const auto edge = static_cast<std::size_t>(std::floor(0.15 * static_cast<double>(n)));
    double area0 = 0.0, area1 = 0.0;
    for (std::size_t i = 0; i <= edge; ++i) {
        const double w0 = (i == 0 || i == edge) ? 0.5 : 1.0;
        area0 += w0 * (lambda[i] - line(static_cast<double>(i) * dg)) * dg;
        const std::size_t jr = n - i;
        area1 += w0 * (lambda[jr] - line(static_cast<double>(jr) * dg)) * dg;
    }
    s.impulse_m = (area0 - area1) / 2.0; // each spike carries in-window area m, mirrored
    for (double v : lambda) s.lambda_max = std::max(s.lambda_max, std::abs(v));
    return s;
}

} // namespace detail

// Global optimum of the discretised work over the interior nodes, after a
// positive-definiteness check of the interior block.
inline QpResult qp_optimal_protocol(const TrapModel& m, double dg) {
    const QuadraticWork q = discretize_work(m, dg);
    const std::size_t n = q.last();
    const auto ni = static_cast<Eigen::Index>(n - 1);

    Eigen::MatrixXd mii(ni, ni);
    Eigen::VectorXd rhs(ni);
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t c = 1; c < n; ++c)
            mii(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = q.m_entry(r, c);
        rhs(static_cast<Eigen::Index>(r - 1)) =
            0.5 * q.b_weighted(r) - q.m_entry(r, 0) * q.x0 - q.m_entry(r, n) * q.xn;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(mii);
    QpResult out;
    out.min_pivot = ldlt.vectorD().minCoeff();
    if (ldlt.info() != Eigen::Success || !(out.min_pivot > 0.0))
        throw IndefiniteForm("qp_optimal_protocol: discretised quadratic form is not positive "
                             "definite; refine the grid step");
    const Eigen::VectorXd xi = ldlt.solve(rhs);

    std::vector<double> x(n + 1);
    x[0] = q.x0;
    x[n] = q.xn;
    for (std::size_t i = 1; i < n; ++i) x[i] = xi(static_cast<Eigen::Index>(i - 1));
    out.w = q.value(x);

    out.lambda.resize(n + 1);
    const double sq2 = std::sqrt(2.0);
    for (std::size_t i = 0; i <= n; ++i) out.lambda[i] = -sq2 * x[i];
    out.lambda[0] = m.lambda_i;
    out.lambda[n] = m.lambda_f;
    out.summary = detail::summarize_qp(out.lambda, dg);
    return out;
}

// ---------------------------------------------------------------------------
// Delta-impulse ansatz: closed 3x3 stationarity system
// ---------------------------------------------------------------------------

struct DeltaImp3Result {
    double alpha1{0.0};
    double alpha2{0.0};
    double m{0.0}; // in-window impulse area (+m at t=0, -m at t=tau)
    double w{0.0};
};

// Assemble W(alpha1, alpha2, m) = p^T Q p + L^T p by fine-grid quadrature of
// the kernel integrals and solve grad W = 0. The impulse couplings follow from
// the regularised pulse limit (in-window area convention):
//   Q_mm = [A(0) - A(tau)]/2,  Q_{m,a1} = (I2 - I4)/4,  Q_{m,a2} = 0,
//   L_m  = b(0)/sqrt2,
// with I2 = int A(u) u du, I4 = tau I1 - I2. For the overdamped kernel the
// delta self-energy 2F(0) delta(t-s) diverges on an impulse pair, so m is
// pinned to zero and the 2x2 line system is solved instead.
inline DeltaImp3Result imp3_delta_optimal(const TrapModel& m, std::size_t n_fine = 20000) {
    m.validate();
    m.require_zero_lambda_i("imp3_delta_optimal");
    if (n_fine % 2 != 0) ++n_fine;
    const double h = m.tau / static_cast<double>(n_fine);
    const double sq2 = std::sqrt(2.0);
    const double xf = -m.lambda_f / sq2;

    std::vector<double> a(n_fine + 1), bsrc(n_fine + 1);
    double delta_uu = 0.0;
    if (m.regime == Regime::Underdamped) {
        const auto kt = green_plus(m, h, n_fine);
        for (std::size_t i = 0; i <= n_fine; ++i) {
            a[i] = m.epsilon * kt.gdot[i];
            bsrc[i] = xf * m.epsilon * kt.g[n_fine - i];
        }
    } else {
        const auto f = overdamped_kernel(m);
        for (std::size_t i = 0; i <= n_fine; ++i) {
            const double t = static_cast<double>(i) * h;
            a[i] = f.derivative(t);
            bsrc[i] = xf * f.value(m.tau - t);
        }
        delta_uu = f.f0;
    }

    // prefix integrals P0(t) = int_0^t A(u) du, P1(t) = int_0^t A(u) u du,
    // cumulative Simpson (quartic end rule at odd nodes)
    auto t_of = [&](std::size_t i) { return static_cast<double>(i) * h; };
    auto cumulative = [&](auto&& f) {
        std::vector<double> p(n_fine + 1, 0.0);
        for (std::size_t i = 2; i <= n_fine; i += 2)
            p[i] = p[i - 2] + h / 3.0 * (f(i - 2) + 4.0 * f(i - 1) + f(i));
        for (std::size_t i = 1; i <= n_fine; i += 2) {
            if (i + 1 <= n_fine)
                p[i] = p[i - 1] + h / 12.0 * (5.0 * f(i - 1) + 8.0 * f(i) - f(i + 1));
            else
                p[i] = p[i - 1] + h / 12.0 * (-f(i - 2) + 8.0 * f(i - 1) + 5.0 * f(i));
        }
        return p;
    };
    const auto p0 = cumulative([&](std::size_t i) { return a[i]; });
    const auto p1 = cumulative([&](std::size_t i) { return a[i] * t_of(i); });

    auto integrate = [&](auto&& f) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= n_fine; ++i) {
            const double w = (i == 0 || i == n_fine) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += w * f(i);
        }
        return acc * h / 3.0;
    };

    const double i1 = p0[n_fine];
    const double i2 = p1[n_fine];
    const double i4 = m.tau * i1 - i2;
    const double d_tt = integrate([&](std::size_t i) { return t_of(i) * (t_of(i) * p0[i] - p1[i]); });
    const double d_t1 = integrate([&](std::size_t i) { return t_of(i) * p0[i]; });
    const double d_1t = integrate([&](std::size_t i) { return t_of(i) * p0[i] - p1[i]; });
    const double d_11 = integrate([&](std::size_t i) { return p0[i]; });
    const double jb0 = integrate([&](std::size_t i) { return bsrc[i]; });
    const double jb1 = integrate([&](std::size_t i) { return bsrc[i] * t_of(i); });

    // quadratic form in p = (alpha1, alpha2, m); u(t) = -(alpha1 t + alpha2)/sqrt2
    Eigen::Matrix3d qf = Eigen::Matrix3d::Zero();
    Eigen::Vector3d lin = Eigen::Vector3d::Zero();
    const double tau = m.tau;
    qf(0, 0) = 0.5 * d_tt + delta_uu * tau * tau * tau / 6.0;
    qf(1, 1) = 0.5 * d_11 + delta_uu * tau / 2.0;
    qf(0, 1) = qf(1, 0) = 0.25 * (d_t1 + d_1t) + delta_uu * tau * tau / 4.0;
    lin(0) = jb1 / sq2;
    lin(1) = jb0 / sq2;

    DeltaImp3Result out;
    if (m.regime == Regime::Underdamped) {
        qf(0, 2) = qf(2, 0) = 0.25 * (i2 - i4);
        qf(2, 2) = 0.5 * (a[0] - a[n_fine]);
        lin(2) = bsrc[0] / sq2;
        Eigen::FullPivLU<Eigen::Matrix3d> lu(qf);
        if (!lu.isInvertible())
            throw DegenerateAnsatz("imp3_delta_optimal: singular stationarity system");
        const Eigen::Vector3d p = lu.solve(-0.5 * lin);
        out.alpha1 = p(0);
        out.alpha2 = p(1);
        out.m = p(2);
        out.w = p.dot(qf * p) + lin.dot(p);
    } else {
        const Eigen::Matrix2d q2 = qf.topLeftCorner<2, 2>();
        const Eigen::Vector2d l2 = lin.head<2>();
        Eigen::FullPivLU<Eigen::Matrix2d> lu(q2);
        if (!lu.isInvertible())
            throw DegenerateAnsatz("imp3_delta_optimal: singular stationarity system");
        const Eigen::Vector2d p = lu.solve(-0.5 * l2);
        out.alpha1 = p(0);
        out.alpha2 = p(1);
        out.m = 0.0;
        out.w = p.dot(q2 * p) + l2.dot(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analytic Markovian optima (oracles)
// ---------------------------------------------------------------------------

struct AnalyticOptimum {
    double slope{0.0};
    double intercept{0.0}; // interior value lambda*(0+)
    double impulse_m{0.0}; // per-impulse coefficient in the 2m convention
    double w{0.0};
};

// Underdamped Ohmic trap: interior line
//   lambda*(t) = lambda_i + (1 + eps^2 t/zeta)/(2 + eps^2 tau/zeta) dl
// plus the impulse term 2m[delta(t) - delta(t-tau)], m = (dl/zeta)/(2 + eps^2 tau/zeta);
// the work is evaluated by propagating <q> with the impulses as velocity kicks.
inline AnalyticOptimum analytic_optimal_ohmic(double zeta, double eps, double tau, double lambda_i,
                                              double lambda_f, double h = 1e-4,
                                              bool compute_w = true) {
    if (!(zeta > 0.0)) throw std::invalid_argument("analytic_optimal_ohmic: zeta must be > 0");
    const double dl = lambda_f - lambda_i;
    const double denom = 2.0 + eps * eps * tau / zeta;
    AnalyticOptimum out;
    out.slope = dl * (eps * eps / zeta) / denom;
    out.intercept = lambda_i + dl / denom;
    out.impulse_m = (dl / zeta) / denom;
    if (!compute_w) return out;

    TrapModel m{eps, bath::SpectralDensity::ohmic(zeta, eps), lambda_i, lambda_f, tau,
                Regime::Underdamped};
    auto n = static_cast<std::size_t>(std::llround(tau / h));
    if (n % 2 != 0) ++n;
    const double h_adj = tau / static_cast<double>(n);
    const Protocol line = line_with_jumps(lambda_i, lambda_f, tau, out.slope, out.intercept);
    out.w = trap_work(m, line, h_adj, out.impulse_m).w;
    return out;
}

// Overdamped Ohmic trap: identical interior line, boundary jumps only.
inline AnalyticOptimum analytic_optimal_overdamped(double zeta, double eps, double tau,
                                                   double lambda_i, double lambda_f,
                                                   double h = 1e-4) {
    if (!(zeta > 0.0)) throw std::invalid_argument("analytic_optimal_overdamped: zeta must be > 0");
    const double dl = lambda_f - lambda_i;
    const double denom = 2.0 + eps * eps * tau / zeta;
    AnalyticOptimum out;
    out.slope = dl * (eps * eps / zeta) / denom;
    out.intercept = lambda_i + dl / denom;
    out.impulse_m = 0.0;

    TrapModel m{eps, bath::SpectralDensity::ohmic(zeta, eps), lambda_i, lambda_f, tau,
                Regime::Overdamped};
    auto n = static_cast<std::size_t>(std::llround(tau / h));
    if (n % 2 != 0) ++n;
    const double h_adj = tau / static_cast<double>(n);
    const Protocol line = line_with_jumps(lambda_i, lambda_f, tau, out.slope, out.intercept);
    out.w = trap_work(m, line, h_adj).w;
    return out;
}

} // namespace minwork::brownian
