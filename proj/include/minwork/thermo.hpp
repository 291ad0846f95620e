#pragma once

// Work, free-energy difference, and the second-law check.
//
// The work along a protocol is evaluated in the integrated-by-parts form
//   W = tr[H(lambda_f) rho(tau) - H(lambda_i) rho(0)] - int_0^tau tr[H(lambda(t)) drho/dt] dt
// with drho/dt taken from the generator on the stored states and the integral
// by composite Simpson on the propagation grid.

#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "minwork/dynamics.hpp"

namespace minwork::thermo {

using dyn::Method;
using protocol::Protocol;
using sys::TwoLevelModel;

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct KahanSum {
    double sum{0.0}, comp{0.0};
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

} // namespace detail

// Streaming Simpson accumulator for -int tr[H(lambda) drho] plus boundary terms.
class WorkAccumulator {
  public:
    WorkAccumulator(const TwoLevelModel& m, double lambda_i, double lambda_f, double dt,
                    std::size_t n_steps)
        : model_(m), lambda_i_(lambda_i), lambda_f_(lambda_f), dt_(dt), n_(n_steps) {
        if (n_ == 0 || n_ % 2 != 0)
            throw GridError("work: Simpson integration needs an even number of intervals");
    }

    void operator()(const dyn::NodeVisit& v) {
        const double w = (v.n == 0 || v.n == n_) ? 1.0 : (v.n % 2 == 1 ? 4.0 : 2.0);
        integral_.add(w * expectation(sys::hamiltonian(model_, v.lambda), v.rhodot));
        if (v.n == 0) rho_start_ = v.rho;
        if (v.n == n_) {
            rho_end_ = v.rho;
            seen_end_ = true;
        }
    }

    double value() const {
        if (!seen_end_) throw GridError("work: propagation did not reach the final node");
        const double boundary = expectation(sys::hamiltonian(model_, lambda_f_), rho_end_) -
                                expectation(sys::hamiltonian(model_, lambda_i_), rho_start_);
        return boundary - integral_.sum * dt_ / 3.0;
    }

  private:
    TwoLevelModel model_;
    double lambda_i_, lambda_f_, dt_;
    std::size_t n_;
    detail::KahanSum integral_;
    Mat2 rho_start_{}, rho_end_{};
    bool seen_end_{false};
};

inline std::size_t work_grid_steps(double tau, double dt) {
    if (!protocol::detail::divides(dt, tau)) throw GridError("work: dt must divide tau");
    const auto n = static_cast<std::size_t>(std::llround(tau / dt));
    if (n == 0 || n % 2 != 0)
        throw GridError("work: Simpson integration needs an even number of intervals");
    return n;
}

inline double work_from_trajectory(const dyn::Trajectory& traj, const TwoLevelModel& m,
                                   double lambda_i, double lambda_f) {
    const std::size_t n = traj.nodes() - 1;
    if (n == 0 || n % 2 != 0)
        throw GridError("work: Simpson integration needs an even number of intervals");
    detail::KahanSum s;
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        s.add(w * expectation(sys::hamiltonian(m, traj.lambdas[i]), traj.rhodots[i]));
    }
    const double boundary = expectation(sys::hamiltonian(m, lambda_f), traj.states[n]) -
                            expectation(sys::hamiltonian(m, lambda_i), traj.states[0]);
    return boundary - s.sum * traj.dt / 3.0;
}

// Trapezoid variant of the same integral (used for cross-checks only).
inline double work_from_trajectory_trapezoid(const dyn::Trajectory& traj, const TwoLevelModel& m,
                                             double lambda_i, double lambda_f) {
    const std::size_t n = traj.nodes() - 1;
    detail::KahanSum s;
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        s.add(w * expectation(sys::hamiltonian(m, traj.lambdas[i]), traj.rhodots[i]));
    }
    const double boundary = expectation(sys::hamiltonian(m, lambda_f), traj.states[n]) -
                            expectation(sys::hamiltonian(m, lambda_i), traj.states[0]);
    return boundary - s.sum * traj.dt;
}

// ---------------------------------------------------------------------------
// One-shot runners
// ---------------------------------------------------------------------------

struct SolverSpec {
    Method method{Method::Heom};
    double dt{1e-3};
    int depth{6}; // HEOM hierarchy depth
};

template <class F>
auto with_engine(const SolverSpec& spec, const TwoLevelModel& m, const bath::SpectralDensity& j,
                 double beta, const bath::ExponentialExpansion& e, F&& f) {
    switch (spec.method) {
    case Method::Heom: return f(dyn::HeomEngine(m, e, spec.depth));
    case Method::Tcl2: return f(dyn::Tcl2Engine(m, e));
    case Method::Agksl: return f(dyn::AgkslEngine(m, j, beta, e));
    }
    throw std::logic_error("unknown method");
}

struct WorkRun {
    double w{0.0};
    dyn::PropagationStats stats;
};

// Work along a protocol starting from an equilibrated solver state (which is
// not consumed; the same equilibrium seeds many protocol evaluations).
template <class Engine>
WorkRun run_work(const Engine& eng, const std::vector<cplx>& equilibrated, const Protocol& p,
                 double dt) {
    const std::size_t n = work_grid_steps(p.tau, dt);
    WorkAccumulator acc(eng.model(), p.lambda_i, p.lambda_f, dt, n);
    std::vector<cplx> y = equilibrated;
    WorkRun out;
    out.stats = dyn::propagate(eng, y, p, dt, std::ref(acc));
    out.w = acc.value();
    return out;
}

// ---------------------------------------------------------------------------
// Free-energy difference
// ---------------------------------------------------------------------------

// Quasistatic horizons for the linear-protocol evaluation of dF.
inline double quasistatic_tau(const TwoLevelModel& m) {
    return m.kind == TwoLevelModel::Kind::Driven ? 2e4 : 2e3;
}

class DeltaFCache {
  public:
    explicit DeltaFCache(std::string path = {}) : path_(std::move(path)) { load(); }

    std::optional<double> get(const std::string& key) {
        std::lock_guard<std::mutex> lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        return std::nullopt;
    }

    void put(const std::string& key, double value) {
        std::lock_guard<std::mutex> lock(mu_);
        entries_[key] = value;
        if (path_.empty()) return;
        // rewrite-then-rename; identical keys always carry identical values,
        // so last-writer-wins between processes is harmless
        const std::string tmp = path_ + ".tmp";
        std::ofstream out(tmp);
        for (const auto& [k, v] : entries_) {
            out.precision(17);
            out << k << '\t' << v << '\n';
        }
        out.close();
        std::rename(tmp.c_str(), path_.c_str());
    }

  private:
    void load() {
        if (path_.empty()) return;
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            entries_[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
        }
    }

    std::string path_;
    std::mutex mu_;
    std::map<std::string, double> entries_;
};

inline std::string deltaf_cache_key(const TwoLevelModel& m, const bath::SpectralDensity& j,
                                    double beta, const SolverSpec& spec, std::size_t k_terms) {
    std::ostringstream os;
    os.precision(17);
    os << (m.kind == TwoLevelModel::Kind::Driven ? "driven" : "tunable") << ',' << m.epsilon << ','
       << m.lambda_i << ',' << m.lambda_f << "|drude," << j.gamma << ',' << j.xi << ',' << beta
       << '|' << dyn::method_name(spec.method) << ',' << spec.dt << ',' << spec.depth << ','
       << k_terms;
    return os.str();
}

// dF from the quasistatic linear protocol W_{tau_q}[lambda_linear]; a bath
// that is exactly decoupled has no relaxation channel, so the bare partition
// function is used directly in that case.
inline double free_energy_difference(const TwoLevelModel& m, const bath::SpectralDensity& j,
                                     double beta, const bath::ExponentialExpansion& e,
                                     const SolverSpec& spec, DeltaFCache* cache = nullptr,
                                     double tau_q_override = 0.0) {
    if (e.size() == 0 && e.eta == 0.0) {
        return -(1.0 / beta) * std::log(sys::partition_function(m, m.lambda_f, beta) /
                                        sys::partition_function(m, m.lambda_i, beta));
    }
    const double tau_q = tau_q_override > 0.0 ? tau_q_override : quasistatic_tau(m);
    std::string key;
    if (cache) {
        key = deltaf_cache_key(m, j, beta, spec, e.size()) + "|tq=" + std::to_string(tau_q);
        if (auto hit = cache->get(key)) return *hit;
    }
    const double value = with_engine(spec, m, j, beta, e, [&](const auto& eng) {
        const auto eq = dyn::equilibrate(eng, m.lambda_i, beta, spec.dt, j.gamma);
        return run_work(eng, eq.state, Protocol::linear(m.lambda_i, m.lambda_f, tau_q), spec.dt).w;
    });
    if (cache) cache->put(key, value);
    return value;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct WorkReport {
    double w{0.0};
    double delta_f{0.0};
    double w_excess{0.0};
    std::string method;
    std::string protocol;
};

inline WorkReport make_report(double w, double delta_f, Method method, std::string protocol_desc) {
    return {w, delta_f, w - delta_f, dyn::method_name(method), std::move(protocol_desc)};
}

struct SecondLawResult {
    bool pass{false};
    double margin{0.0};
};

// Pass iff W >= dF - tol. tol defaults below the RK4+Simpson error floor.
inline SecondLawResult second_law_check(double w, double delta_f, double tol = 1e-6) {
    const double margin = w - delta_f;
    return {margin >= -tol, margin};
}

} // namespace minwork::thermo
