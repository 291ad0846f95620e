#pragma once

// Propagators for the reduced two-level state under a time-dependent control:
//   * HEOM  - hierarchy of auxiliary 2x2 operators rho_j indexed by
//             multi-indices over the bath-expansion terms (numerically exact),
//   * TCL2  - second-order time-convolutionless master equation with the
//             memory integral carried by auxiliary operators C_k,
//   * A-GKSL - adiabatic GKSL equation in the instantaneous eigenframe.
// All are integrated with the same fixed-step RK4, with the control field
// evaluated exactly at the stage times.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "minwork/bath.hpp"
#include "minwork/matrix2.hpp"
#include "minwork/protocol.hpp"
#include "minwork/system.hpp"

namespace minwork::dyn {

using bath::ExponentialExpansion;
using protocol::Protocol;
using sys::TwoLevelModel;

enum class Method { Heom, Tcl2, Agksl };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::Heom: return "heom";
    case Method::Tcl2: return "tcl2";
    case Method::Agksl: return "agksl";
    }
    return "?";
}

struct PropagationFailure : std::runtime_error {
    PropagationFailure(const std::string& msg, std::size_t step_index)
        : std::runtime_error(msg), step(step_index) {}
    std::size_t step;
};

struct EquilibrationFailure : std::runtime_error {
    EquilibrationFailure(const std::string& msg, double residual_)
        : std::runtime_error(msg), residual(residual_) {}
    double residual;
};

namespace detail {

inline Mat2 load(const cplx* y) { return {y[0], y[1], y[2], y[3]}; }

inline void store(cplx* y, const Mat2& a) {
    y[0] = a.m00;
    y[1] = a.m01;
    y[2] = a.m10;
    y[3] = a.m11;
}

inline Mat2 sigx_left(const Mat2& a) { return {a.m10, a.m11, a.m00, a.m01}; }
inline Mat2 sigx_right(const Mat2& a) { return {a.m01, a.m00, a.m11, a.m10}; }
inline Mat2 sigx_comm(const Mat2& a) { return sigx_left(a) - sigx_right(a); }

// -i[H, a] for the real symmetric H = [[hz, hx], [hx, -hz]].
inline Mat2 minus_i_comm(double hz, double hx, const Mat2& a) {
    const Mat2 ha{hz * a.m00 + hx * a.m10, hz * a.m01 + hx * a.m11,
                  hx * a.m00 - hz * a.m10, hx * a.m01 - hz * a.m11};
    const Mat2 ah{a.m00 * hz + a.m01 * hx, a.m00 * hx - a.m01 * hz,
                  a.m10 * hz + a.m11 * hx, a.m10 * hx - a.m11 * hz};
    return cplx(0.0, -1.0) * (ha - ah);
}

} // namespace detail

// ---------------------------------------------------------------------------
// HEOM
// ---------------------------------------------------------------------------

// Index tables for the truncated hierarchy {j : sum_k j_k <= depth}.
struct HierarchyIndex {
    int n_terms{0};
    int depth{0};
    std::vector<std::vector<int>> multi; // block -> multi-index
    std::vector<int32_t> up, down;       // block*K + k -> neighbour or -1
    std::vector<double> sqrt_j, sqrt_j1; // block*K + k -> sqrt(j_k), sqrt(j_k+1)

    std::size_t blocks() const { return multi.size(); }

    static HierarchyIndex build(int n_terms, int depth) {
        if (depth < 0) throw std::invalid_argument("hierarchy depth must be >= 0");
        HierarchyIndex idx;
        idx.n_terms = n_terms;
        idx.depth = depth;
        std::vector<int> j(static_cast<std::size_t>(n_terms), 0);
        std::map<std::vector<int>, int> rank;
        enumerate(j, 0, depth, idx.multi, rank);
        const std::size_t nb = idx.multi.size();
        const auto k = static_cast<std::size_t>(n_terms);
        idx.up.assign(nb * k, -1);
        idx.down.assign(nb * k, -1);
        idx.sqrt_j.assign(nb * k, 0.0);
        idx.sqrt_j1.assign(nb * k, 0.0);
        for (std::size_t b = 0; b < nb; ++b) {
            std::vector<int> m = idx.multi[b];
            for (std::size_t kk = 0; kk < k; ++kk) {
                idx.sqrt_j[b * k + kk] = std::sqrt(static_cast<double>(m[kk]));
                idx.sqrt_j1[b * k + kk] = std::sqrt(static_cast<double>(m[kk] + 1));
                m[kk] += 1;
                if (auto it = rank.find(m); it != rank.end()) idx.up[b * k + kk] = it->second;
                m[kk] -= 2;
                if (m[kk] >= 0) {
                    if (auto it = rank.find(m); it != rank.end()) idx.down[b * k + kk] = it->second;
                }
                m[kk] += 1;
            }
        }
        return idx;
    }

  private:
    static void enumerate(std::vector<int>& j, std::size_t pos, int budget,
                          std::vector<std::vector<int>>& out, std::map<std::vector<int>, int>& rank) {
        if (pos == j.size()) {
            rank.emplace(j, static_cast<int>(out.size()));
            out.push_back(j);
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            j[pos] = v;
            enumerate(j, pos + 1, budget - v, out, rank);
        }
        j[pos] = 0;
    }
};

class HeomEngine {
  public:
    HeomEngine(const TwoLevelModel& m, const ExponentialExpansion& e, int depth)
        : model_(m), expansion_(e), idx_(HierarchyIndex::build(static_cast<int>(e.size()), depth)) {
        for (const auto& term : e.terms) {
            d_.push_back(term.d);
            dp_.push_back(term.d_conj);
            z_.push_back(term.z);
        }
        sum_z_.resize(idx_.blocks());
        for (std::size_t b = 0; b < idx_.blocks(); ++b) {
            cplx acc{};
            for (std::size_t k = 0; k < d_.size(); ++k)
                acc += z_[k] * static_cast<double>(idx_.multi[b][k]);
            sum_z_[b] = acc;
        }
    }

    Method method() const { return Method::Heom; }
    const TwoLevelModel& model() const { return model_; }
    const ExponentialExpansion& expansion() const { return expansion_; }
    int depth() const { return idx_.depth; }
    std::size_t blocks() const { return idx_.blocks(); }
    std::size_t dim() const { return 4 * idx_.blocks(); }

    std::vector<cplx> initial_state(const Mat2& rho0) const {
        std::vector<cplx> y(dim(), cplx{});
        detail::store(y.data(), rho0);
        return y;
    }

    Mat2 rho(const cplx* y) const { return detail::load(y); }

    void rhs(double lambda, const cplx* y, cplx* dy) const {
        const Mat2 h = sys::hamiltonian(model_, lambda);
        const double hz = std::real(h.m00);
        const double hx = std::real(h.m01);
        const double eta = expansion_.eta;
        const auto k = d_.size();
        for (std::size_t b = 0; b < idx_.blocks(); ++b) {
            const Mat2 r = detail::load(y + 4 * b);
            Mat2 acc = detail::minus_i_comm(hz, hx, r) - sum_z_[b] * r;
            if (eta != 0.0) acc -= eta * detail::sigx_comm(detail::sigx_comm(r));
            for (std::size_t kk = 0; kk < k; ++kk) {
                const auto dn = idx_.down[b * k + kk];
                if (dn >= 0) {
                    const Mat2 rm = detail::load(y + 4 * static_cast<std::size_t>(dn));
                    acc += idx_.sqrt_j[b * k + kk] *
                           (d_[kk] * detail::sigx_left(rm) - dp_[kk] * detail::sigx_right(rm));
                }
                const auto up = idx_.up[b * k + kk];
                if (up >= 0) {
                    const Mat2 rp = detail::load(y + 4 * static_cast<std::size_t>(up));
                    acc -= idx_.sqrt_j1[b * k + kk] * detail::sigx_comm(rp);
                }
            }
            detail::store(dy + 4 * b, acc);
        }
    }

  private:
    TwoLevelModel model_;
    ExponentialExpansion expansion_;
    HierarchyIndex idx_;
    std::vector<cplx> d_, dp_, z_, sum_z_;
};

// ---------------------------------------------------------------------------
// TCL2
// ---------------------------------------------------------------------------

// State layout [rho, C_1, ..., C_K] with Q(t) = sum_k C_k + eta V and
//   drho = -i[H, rho] - [V, Q rho - rho Q^dag],
//   dC_k = d_k V - z_k C_k - i[H, C_k],
// the auxiliary closure of Q(t) = int_0^t ds L(s) V^I(-s). The dissipator
// sign follows the Born second-order double commutator (and the first level
// of the hierarchy): +[V, .] would invert every relaxation rate.
class Tcl2Engine {
  public:
    Tcl2Engine(const TwoLevelModel& m, const ExponentialExpansion& e) : model_(m), expansion_(e) {
        for (const auto& term : e.terms) {
            d_.push_back(term.d);
            z_.push_back(term.z);
        }
    }

    Method method() const { return Method::Tcl2; }
    const TwoLevelModel& model() const { return model_; }
    const ExponentialExpansion& expansion() const { return expansion_; }
    std::size_t dim() const { return 4 * (1 + d_.size()); }

    std::vector<cplx> initial_state(const Mat2& rho0) const {
        std::vector<cplx> y(dim(), cplx{});
        detail::store(y.data(), rho0); // C_k(0) = 0
        return y;
    }

    Mat2 rho(const cplx* y) const { return detail::load(y); }

    void rhs(double lambda, const cplx* y, cplx* dy) const {
        const Mat2 h = sys::hamiltonian(model_, lambda);
        const double hz = std::real(h.m00);
        const double hx = std::real(h.m01);
        const Mat2 r = detail::load(y);
        Mat2 q = expansion_.eta * Mat2::sigma_x();
        for (std::size_t k = 0; k < d_.size(); ++k) q += detail::load(y + 4 * (k + 1));
        // -[V, Q rho - rho Q^dag]
        const Mat2 g = mul(q, r) - mul(r, dagger(q));
        Mat2 drho = detail::minus_i_comm(hz, hx, r) - detail::sigx_left(g) + detail::sigx_right(g);
        detail::store(dy, drho);
        for (std::size_t k = 0; k < d_.size(); ++k) {
            const Mat2 c = detail::load(y + 4 * (k + 1));
            Mat2 dc = d_[k] * Mat2::sigma_x() - z_[k] * c + detail::minus_i_comm(hz, hx, c);
            detail::store(dy + 4 * (k + 1), dc);
        }
    }

  private:
    TwoLevelModel model_;
    ExponentialExpansion expansion_;
    std::vector<cplx> d_, z_;
};

// ---------------------------------------------------------------------------
// A-GKSL
// ---------------------------------------------------------------------------

class AgkslEngine {
  public:
    AgkslEngine(const TwoLevelModel& m, const bath::SpectralDensity& j, double beta,
                const ExponentialExpansion& e)
        : model_(m), j_(j), beta_(beta), expansion_(e),
          d_zero_(std::real(bath::halfline_transform(e, 0.0))) {}

    Method method() const { return Method::Agksl; }
    const TwoLevelModel& model() const { return model_; }
    const ExponentialExpansion& expansion() const { return expansion_; }
    std::size_t dim() const { return 4; }

    std::vector<cplx> initial_state(const Mat2& rho0) const {
        std::vector<cplx> y(4);
        detail::store(y.data(), rho0);
        return y;
    }

    Mat2 rho(const cplx* y) const { return detail::load(y); }

    void rhs(double lambda, const cplx* y, cplx* dy) const {
        const auto frame = sys::eigenframe(model_, lambda);
        const double c = std::cos(frame.theta);
        const double s = std::sin(frame.theta);
        const Mat2 r = detail::load(y);

        const Mat2 sz_th{c, s, s, -c};                         // cos sz + sin sx
        const Mat2 sx_th{-s, c, c, s};                         // cos sx - sin sz
        const Mat2 sm_th = 0.5 * (sx_th - cplx(0, 1) * Mat2::sigma_y());
        const Mat2 sp_th = 0.5 * (sx_th + cplx(0, 1) * Mat2::sigma_y());

        const double jw = j_.value(frame.omega);
        const double n = 1.0 / std::expm1(beta_ * frame.omega);
        const double im_d = std::imag(bath::halfline_transform(expansion_, frame.omega));
        const double g_down = 2.0 * c * c * jw * (1.0 + n);
        const double g_up = 2.0 * c * c * jw * n;
        const double g_z = 2.0 * s * s * d_zero_;

        const double heff = 0.5 * (frame.omega + 2.0 * c * c * im_d);
        Mat2 acc = cplx(0.0, -1.0) * (heff * commutator(sz_th, r));
        acc += g_down * dissipator(sm_th, r);
        acc += g_up * dissipator(sp_th, r);
        acc += g_z * dissipator(sz_th, r);
        detail::store(dy, acc);
    }

  private:
    static Mat2 dissipator(const Mat2& o, const Mat2& r) {
        const Mat2 od = dagger(o);
        return mul(mul(o, r), od) - 0.5 * anticommutator(mul(od, o), r);
    }

    TwoLevelModel model_;
    bath::SpectralDensity j_;
    double beta_;
    ExponentialExpansion expansion_;
    double d_zero_;
};

// ---------------------------------------------------------------------------
// Fixed-step RK4 propagation
// ---------------------------------------------------------------------------

struct PropagationStats {
    std::size_t steps{0};
    double max_trace_dev{0.0};
    double max_herm_dev{0.0};
    double min_eigenvalue{1.0};
};

// Per-node reduced state and its generator value (the same k1 used to step).
struct NodeVisit {
    std::size_t n;
    double t;
    double lambda;
    Mat2 rho;
    Mat2 rhodot;
};

namespace detail {

inline void check_finite(const Mat2& r, std::size_t step) {
    if (!(std::isfinite(std::real(r.m00)) && std::isfinite(std::imag(r.m00)) &&
          std::isfinite(std::real(r.m01)) && std::isfinite(std::imag(r.m01)) &&
          std::isfinite(std::real(r.m11)) && std::isfinite(std::imag(r.m11))) ||
        max_abs(r) > 1e100)
        throw PropagationFailure("propagation diverged (non-finite reduced state) at step " +
                                     std::to_string(step),
                                 step);
}

inline void track(PropagationStats& st, const Mat2& r) {
    st.max_trace_dev = std::max(st.max_trace_dev, std::abs(trace(r) - 1.0));
    st.max_herm_dev = std::max(st.max_herm_dev, hermiticity_deviation(r));
    st.min_eigenvalue = std::min(st.min_eigenvalue, min_eigenvalue(0.5 * (r + dagger(r))));
}

} // namespace detail

// Integrate dy/dt = rhs(lambda(t), y) across [0, tau] with N = tau/dt steps,
// reporting every node to the observer. The observer sees the interior limit
// of the control field at the window edges.
template <class Engine, class OnNode>
PropagationStats propagate(const Engine& eng, std::vector<cplx>& y, const Protocol& p, double dt,
                           OnNode&& on_node) {
    if (!protocol::detail::divides(dt, p.tau))
        throw protocol::GridMismatch("propagate: dt must divide tau");
    const auto n_steps = static_cast<std::size_t>(std::llround(p.tau / dt));
    const std::size_t dim = eng.dim();
    if (y.size() != dim) throw std::invalid_argument("propagate: state size mismatch");

    std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    PropagationStats stats;
    stats.steps = n_steps;

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const double l0 = p.interior(t);
        const double lh = p.interior(t + 0.5 * dt);
        const double l1 = p.interior(t + dt);

        eng.rhs(l0, y.data(), k1.data());
        {
            const Mat2 r = eng.rho(y.data());
            detail::check_finite(r, n);
            detail::track(stats, r);
            on_node(NodeVisit{n, t, l0, r, eng.rho(k1.data())});
        }
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        eng.rhs(lh, tmp.data(), k2.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        eng.rhs(lh, tmp.data(), k3.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        eng.rhs(l1, tmp.data(), k4.data());
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < dim; ++i) y[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }

    const double l_end = p.interior(p.tau);
    eng.rhs(l_end, y.data(), k1.data());
    const Mat2 r = eng.rho(y.data());
    detail::check_finite(r, n_steps);
    detail::track(stats, r);
    on_node(NodeVisit{n_steps, p.tau, l_end, r, eng.rho(k1.data())});
    return stats;
}

// ---------------------------------------------------------------------------
// Trajectory recording
// ---------------------------------------------------------------------------

struct Trajectory {
    double dt{0.0};
    Method method{Method::Heom};
    int depth{0};       // hierarchy depth (HEOM), 0 otherwise
    std::size_t k{0};   // number of expansion terms
    std::vector<double> lambdas;
    std::vector<Mat2> states;
    std::vector<Mat2> rhodots;

    double time(std::size_t n) const { return static_cast<double>(n) * dt; }
    std::size_t nodes() const { return states.size(); }
};

template <class Engine>
Trajectory record_trajectory(const Engine& eng, std::vector<cplx>& y, const Protocol& p, double dt,
                             PropagationStats* stats_out = nullptr) {
    Trajectory traj;
    traj.dt = dt;
    traj.method = eng.method();
    traj.k = eng.expansion().size();
    if constexpr (std::is_same_v<Engine, HeomEngine>) traj.depth = eng.depth();
    const auto n = static_cast<std::size_t>(std::llround(p.tau / dt));
    traj.lambdas.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.rhodots.reserve(n + 1);
    auto stats = propagate(eng, y, p, dt, [&](const NodeVisit& v) {
        traj.lambdas.push_back(v.lambda);
        traj.states.push_back(v.rho);
        traj.rhodots.push_back(v.rhodot);
    });
    if (stats_out) *stats_out = stats;
    return traj;
}

// ---------------------------------------------------------------------------
// Equilibration
// ---------------------------------------------------------------------------

struct EquilibrationResult {
    std::vector<cplx> state;
    double time{0.0};
    double residual{0.0}; // last unit-time change of rho_S
};

// Evolve at fixed lambda until the reduced state is stationary: the change of
// rho_S over one unit of time stays below 1e-12 for a full unit of time.
template <class Engine>
EquilibrationResult equilibrate(const Engine& eng, double lambda_fixed, double beta, double dt,
                                double bath_gamma) {
    const double t_max = bath_gamma <= 0.25 ? 1e4 : 1e3;
    const double tol = 1e-12;

    std::vector<cplx> y = eng.initial_state(sys::gibbs_state(eng.model(), lambda_fixed, beta));
    const auto window = static_cast<std::size_t>(std::llround(1.0 / dt));
    std::vector<Mat2> ring(window + 1);
    ring[0] = eng.rho(y.data());

    const std::size_t dim = eng.dim();
    std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::size_t sustained = 0;
    double last_residual = 0.0;
    const auto max_steps = static_cast<std::size_t>(std::llround(t_max / dt));

    for (std::size_t n = 1; n <= max_steps; ++n) {
        eng.rhs(lambda_fixed, y.data(), k1.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        eng.rhs(lambda_fixed, tmp.data(), k2.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        eng.rhs(lambda_fixed, tmp.data(), k3.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        eng.rhs(lambda_fixed, tmp.data(), k4.data());
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < dim; ++i) y[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);

        const Mat2 r = eng.rho(y.data());
        detail::check_finite(r, n);
        const std::size_t slot = n % (window + 1);
        if (n >= window) {
            last_residual = max_abs(r - ring[(n - window) % (window + 1)]);
            sustained = last_residual < tol ? sustained + 1 : 0;
        }
        ring[slot] = r;
        if (sustained >= window)
            return {std::move(y), static_cast<double>(n) * dt, last_residual};
    }
    throw EquilibrationFailure("equilibrate: no steady state within t_max = " + std::to_string(t_max) +
                                   " (unit-time residual " + std::to_string(last_residual) + ")",
                               last_residual);
}

} // namespace minwork::dyn
