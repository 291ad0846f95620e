#pragma once

// Work minimisation over protocol parameters: the impulse ansatz in the
// normalised coordinates (h', alpha1, alpha2), the cubic ansatz from the
// linear protocol, and the brute-force piecewise-linear ansatz seeded from
// the impulse optimum (with optional uniform-random restarts).

#include <atomic>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "minwork/nelder_mead.hpp"
#include "minwork/thermo.hpp"

namespace minwork::opt {

using dyn::Method;
using protocol::Protocol;
using sys::TwoLevelModel;
using thermo::SolverSpec;

enum class AnsatzKind { Linear, Imp3, Poly3, BruteForce };

inline const char* ansatz_name(AnsatzKind k) {
    switch (k) {
    case AnsatzKind::Linear: return "linear";
    case AnsatzKind::Imp3: return "imp3";
    case AnsatzKind::Poly3: return "poly3";
    case AnsatzKind::BruteForce: return "bf";
    }
    return "?";
}

struct ProtocolOptimum {
    Protocol protocol;
    double w{0.0};
    OptimizationResult result;
    double w_seed{0.0};                  // objective at the initial guess
    std::vector<double> restart_values;  // best W of each random restart (brute force)
};

// A problem instance: bath expansion and equilibrated solver state are built
// once and shared by every objective evaluation.
template <class Engine>
class WorkObjective {
  public:
    WorkObjective(const Engine& eng, std::vector<cplx> equilibrated, double dt)
        : eng_(eng), eq_(std::move(equilibrated)), dt_(dt) {}

    double operator()(const Protocol& p) const {
        try {
            return thermo::run_work(eng_, eq_, p, dt_).w;
        } catch (const dyn::PropagationFailure&) {
            // keep the simplex alive; the vertex is recorded by the optimiser log
            return std::numeric_limits<double>::infinity();
        }
    }

    const Engine& engine() const { return eng_; }
    const std::vector<cplx>& equilibrated() const { return eq_; }
    double dt() const { return dt_; }

  private:
    const Engine& eng_;
    std::vector<cplx> eq_;
    double dt_;
};

// The search starts at unit normalised height when the guess carries an
// impulse (h' = 1) and at zero height otherwise, with the guess's line
// parameters; the raw-height fallback seeds the guess height directly.
template <class Engine>
ProtocolOptimum optimize_imp3(const WorkObjective<Engine>& objective, const TwoLevelModel& m,
                              const bath::SpectralDensity& j, double beta, double tau, double delta,
                              const OptimizerConfig& cfg) {
    const auto guess = protocol::imp3_initial_guess(m, j, beta, tau, delta);
    const auto coords = protocol::Imp3Coords::from_guess(m, tau, delta, guess);
    const double h0 = coords.raw_h ? guess.h : (guess.h > 0.0 ? 1.0 : 0.0);
    const std::vector<double> x0 = {h0, guess.alpha1, guess.alpha2};
    auto f = [&](const std::vector<double>& x) { return objective(coords.build(x[0], x[1], x[2])); };
    ProtocolOptimum out;
    out.w_seed = f(x0);
    out.result = nelder_mead(f, x0, cfg);
    out.protocol = coords.build(out.result.best_x[0], out.result.best_x[1], out.result.best_x[2]);
    out.w = out.result.best_f;
    return out;
}

template <class Engine>
ProtocolOptimum optimize_poly3(const WorkObjective<Engine>& objective, const TwoLevelModel& m,
                               double tau, const OptimizerConfig& cfg) {
    auto f = [&](const std::vector<double>& x) {
        return objective(Protocol::poly3(m.lambda_i, m.lambda_f, tau, x[0], x[1], x[2]));
    };
    const std::vector<double> x0 = {0.0, 0.0, 0.0}; // the linear protocol
    ProtocolOptimum out;
    out.w_seed = f(x0);
    out.result = nelder_mead(f, x0, cfg);
    out.protocol =
        Protocol::poly3(m.lambda_i, m.lambda_f, tau, out.result.best_x[0], out.result.best_x[1],
                        out.result.best_x[2]);
    out.w = out.result.best_f;
    return out;
}

// Node seed for the brute-force ansatz: sample the impulse optimum, taking the
// boundary nodes at the impulse peaks so the spike area carries over to the
// piecewise-linear representation.
inline std::vector<double> bf_seed_from_protocol(const Protocol& seed, double tau, double delta) {
    const auto n = static_cast<std::size_t>(std::llround(tau / delta));
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = seed.interior(static_cast<double>(i) * delta);
    if (seed.kind == Protocol::Kind::Imp3) {
        values[0] = seed.interior(0.5 * delta);
        values[n] = seed.interior(tau - 0.5 * delta);
    }
    return values;
}

template <class Engine>
ProtocolOptimum optimize_brute_force(const WorkObjective<Engine>& objective, const TwoLevelModel& m,
                                     double tau, double delta, const Protocol& imp3_optimum,
                                     const OptimizerConfig& cfg) {
    auto f = [&](const std::vector<double>& x) {
        return objective(Protocol::piecewise_linear(m.lambda_i, m.lambda_f, tau, delta, x));
    };
    const auto x0 = bf_seed_from_protocol(imp3_optimum, tau, delta);
    ProtocolOptimum out;
    out.w_seed = f(x0);
    out.result = nelder_mead(f, x0, cfg);
    out.protocol = Protocol::piecewise_linear(m.lambda_i, m.lambda_f, tau, delta, out.result.best_x);
    out.w = out.result.best_f;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uniform(-10.0, 10.0);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        std::vector<double> xr(x0.size());
        for (auto& v : xr) v = uniform(rng);
        const auto rr = nelder_mead(f, xr, cfg);
        out.restart_values.push_back(rr.best_f);
        if (rr.best_f < out.w) {
            out.w = rr.best_f;
            out.result = rr;
            out.protocol =
                Protocol::piecewise_linear(m.lambda_i, m.lambda_f, tau, delta, rr.best_x);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// High-level driver
// ---------------------------------------------------------------------------

struct ProblemSpec {
    TwoLevelModel model;
    bath::SpectralDensity j;
    double beta{1.0};
    double bath_tol{1e-3};
    std::size_t bath_k_max{30};
    SolverSpec solver;
    double tau{0.5};
    double delta{1e-2};
};

// Equilibrate once, then minimise the work over the requested ansatz.
// Linear "optimisation" is a single evaluation of the fixed protocol.
inline ProtocolOptimum optimize_protocol(AnsatzKind kind, const ProblemSpec& ps,
                                         const OptimizerConfig& cfg,
                                         const Protocol* bf_seed = nullptr) {
    const auto expansion = bath::expand_correlation(ps.j, ps.beta, ps.bath_tol, ps.bath_k_max);
    return thermo::with_engine(ps.solver, ps.model, ps.j, ps.beta, expansion, [&](const auto& eng) {
        auto eq = dyn::equilibrate(eng, ps.model.lambda_i, ps.beta, ps.solver.dt, ps.j.gamma);
        WorkObjective objective(eng, std::move(eq.state), ps.solver.dt);
        switch (kind) {
        case AnsatzKind::Linear: {
            ProtocolOptimum out;
            out.protocol = Protocol::linear(ps.model.lambda_i, ps.model.lambda_f, ps.tau);
            out.w = objective(out.protocol);
            out.w_seed = out.w;
            out.result.best_f = out.w;
            out.result.converged = true;
            out.result.evaluations = 1;
            return out;
        }
        case AnsatzKind::Imp3:
            return optimize_imp3(objective, ps.model, ps.j, ps.beta, ps.tau, ps.delta, cfg);
        case AnsatzKind::Poly3:
            return optimize_poly3(objective, ps.model, ps.tau, cfg);
        case AnsatzKind::BruteForce: {
            Protocol seed = bf_seed ? *bf_seed
                                    : optimize_imp3(objective, ps.model, ps.j, ps.beta, ps.tau,
                                                    ps.delta, cfg)
                                          .protocol;
            return optimize_brute_force(objective, ps.model, ps.tau, ps.delta, seed, cfg);
        }
        }
        throw std::logic_error("unknown ansatz kind");
    });
}

// ---------------------------------------------------------------------------
// Parameter survey
// ---------------------------------------------------------------------------

struct SweepCell {
    double beta, gamma, xi, tau;
    AnsatzKind kind;
};

struct SweepRow {
    SweepCell cell;
    double w{0.0};
    double w_seed{0.0};
    std::size_t iterations{0};
    std::size_t evaluations{0};
    bool converged{false};
    bool failed{false};
    std::string error;
    Protocol optimum;
};

inline std::vector<SweepCell> enumerate_cells(const std::vector<double>& gammas,
                                              const std::vector<double>& betas,
                                              const std::vector<double>& xis,
                                              const std::vector<double>& taus,
                                              const std::vector<AnsatzKind>& kinds) {
    std::vector<SweepCell> cells;
    for (double b : betas)
        for (double g : gammas)
            for (double x : xis)
                for (double t : taus)
                    for (auto k : kinds) cells.push_back({b, g, x, t, k});
    return cells;
}

// Independent cells on a bounded worker pool; per-cell failures are recorded
// and the sweep continues.
inline std::vector<SweepRow> survey(const TwoLevelModel& model, const std::vector<double>& gammas,
                                    const std::vector<double>& betas, const std::vector<double>& xis,
                                    const std::vector<double>& taus,
                                    const std::vector<AnsatzKind>& kinds, const SolverSpec& solver,
                                    double delta, const OptimizerConfig& cfg,
                                    std::size_t workers = 1, double bath_tol = 1e-3,
                                    std::size_t bath_k_max = 30) {
    const auto cells = enumerate_cells(gammas, betas, xis, taus, kinds);
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto run_cell = [&](std::size_t i) {
        const auto& c = cells[i];
        rows[i].cell = c;
        try {
            ProblemSpec ps{model, bath::SpectralDensity::drude(c.gamma, c.xi), c.beta,
                           bath_tol,  bath_k_max,
                           solver,    c.tau,
                           delta};
            auto opt = optimize_protocol(c.kind, ps, cfg);
            rows[i].w = opt.w;
            rows[i].w_seed = opt.w_seed;
            rows[i].iterations = opt.result.iterations;
            rows[i].evaluations = opt.result.evaluations;
            rows[i].converged = opt.result.converged;
            rows[i].optimum = opt.protocol;
        } catch (const std::exception& ex) {
            rows[i].failed = true;
            rows[i].error = ex.what();
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    run_cell(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return rows;
}

} // namespace minwork::opt
