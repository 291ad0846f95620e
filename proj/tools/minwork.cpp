// minwork: work-minimizing control protocols for dissipative two-level systems
// and the Brownian moving-trap benchmarks.
//
// Subcommands: simulate, optimize, sweep, deltaf, brownian, validate-bath, repro.
// Exit codes: 0 success, 1 config error, 2 numeric failure, 3 non-convergence.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "minwork/config.hpp"
#include "minwork/output.hpp"

using nlohmann::json;
using namespace minwork;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numeric = 2;
constexpr int exit_no_convergence = 3;

// every key any subcommand may read; anything else is rejected
const std::vector<std::pair<std::string, std::string>> allowed_keys = {
    {"", "schema_version"},
    {"system", "kind"},      {"system", "epsilon"},   {"system", "lambda_i"}, {"system", "lambda_f"},
    {"bath", "kind"},        {"bath", "gamma"},       {"bath", "xi"},         {"bath", "zeta"},
    {"bath", "epsilon"},     {"bath", "beta"},        {"bath", "tol"},        {"bath", "k_max"},
    {"protocol", "kind"},    {"protocol", "tau"},     {"protocol", "delta"},  {"protocol", "h"},
    {"protocol", "alpha1"},  {"protocol", "alpha2"},  {"protocol", "a1"},     {"protocol", "a2"},
    {"protocol", "a3"},      {"protocol", "lambda"},  {"protocol", "values"},
    {"solver", "method"},    {"solver", "dt"},        {"solver", "depth"},
    {"optimizer", "xatol"},  {"optimizer", "fatol"},  {"optimizer", "max_iter"},
    {"optimizer", "restarts"}, {"optimizer", "seed"}, {"optimizer", "ansatz"},
    {"sweep", "gammas"},     {"sweep", "betas"},      {"sweep", "xis"},       {"sweep", "taus"},
    {"sweep", "ansatz"},     {"sweep", "deltaf"},
    {"trap", "kind"},        {"trap", "epsilon"},     {"trap", "zeta"},       {"trap", "gamma"},
    {"trap", "xi"},          {"trap", "lambda_i"},    {"trap", "lambda_f"},   {"trap", "tau"},
    {"trap", "grid"},        {"trap", "regime"},      {"trap", "n_fine"},
    {"output", "dir"},
};

void validate_schema(const cfg::KeyValues& kv) {
    for (const auto& [section, entries] : kv.raw()) {
        for (const auto& [key, value] : entries) {
            bool known = false;
            for (const auto& [s, k] : allowed_keys) {
                if (s == section && k == key) {
                    known = true;
                    break;
                }
            }
            if (!known)
                throw cfg::ConfigError("unknown key '" + key + "' in section [" + section + "]");
        }
    }
}

struct Flags {
    std::string config_path;
    std::string out_dir;
    std::string mode;   // brownian
    std::string target; // repro
    double dt = 0.0;    // 0: use config/default
    int depth = -1;
    long seed = -1;
    unsigned workers = 1;
};

json config_echo(const cfg::KeyValues& kv) {
    json j;
    for (const auto& [section, entries] : kv.raw()) {
        for (const auto& [key, value] : entries) j[section.empty() ? "_" : section][key] = value;
    }
    return j;
}

std::filesystem::path out_path(const Flags& f, const std::string& cfg_dir, const std::string& name) {
    const std::string dir = f.out_dir.empty() ? cfg_dir : f.out_dir;
    return std::filesystem::path(dir) / name;
}

json protocol_json(const protocol::Protocol& p) {
    json j;
    switch (p.kind) {
    case protocol::Protocol::Kind::Constant:
        j["kind"] = "constant";
        j["lambda"] = p.lambda_i;
        break;
    case protocol::Protocol::Kind::Linear:
        j["kind"] = "linear";
        break;
    case protocol::Protocol::Kind::Imp3:
        j["kind"] = "imp3";
        j["h"] = 0.5 * p.apex; // area convention: impulse area = h * delta
        j["apex"] = p.apex;
        j["alpha1"] = p.alpha1;
        j["alpha2"] = p.alpha2;
        j["delta"] = p.delta;
        break;
    case protocol::Protocol::Kind::Poly3:
        j["kind"] = "poly3";
        j["a1"] = p.a1;
        j["a2"] = p.a2;
        j["a3"] = p.a3;
        break;
    case protocol::Protocol::Kind::PiecewiseLinear:
        j["kind"] = "piecewise";
        j["delta"] = p.delta;
        j["values"] = p.values;
        break;
    }
    j["lambda_i"] = p.lambda_i;
    j["lambda_f"] = p.lambda_f;
    j["tau"] = p.tau;
    return j;
}

std::string protocol_csv(const protocol::Protocol& p, double dt) {
    io::Csv csv("t,lambda");
    const auto samples = protocol::sample_on_grid(p, dt);
    for (std::size_t i = 0; i < samples.size(); ++i)
        csv.row(static_cast<double>(i) * dt, samples[i]);
    return csv.str();
}

// dt for dumping a protocol: fine enough to resolve the impulse kinks and
// still an exact divisor of tau and delta.
double dump_step(const protocol::Protocol& p) {
    if (p.kind == protocol::Protocol::Kind::Imp3 ||
        p.kind == protocol::Protocol::Kind::PiecewiseLinear)
        return p.delta / 4.0;
    return p.tau / 400.0;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Flags& flags) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    const auto m = cfg::read_system(kv);
    double beta, tol;
    std::size_t k_max;
    const auto j = cfg::read_bath(kv, &beta, &tol, &k_max);
    double tau, delta;
    const auto p = cfg::read_protocol(kv, m, &tau, &delta);
    auto spec = cfg::read_solver(kv, m, j, j.xi);
    if (flags.dt > 0.0) spec.dt = flags.dt;
    if (flags.depth >= 0) spec.depth = flags.depth;
    const std::string cfg_dir = kv.take_or("output", "dir", "out");
    // unknown keys are rejected globally by validate_schema

    const auto expansion = bath::expand_correlation(j, beta, tol, k_max);
    return thermo::with_engine(spec, m, j, beta, expansion, [&](const auto& eng) {
        const auto eq = dyn::equilibrate(eng, m.lambda_i, beta, spec.dt, j.gamma);
        auto y = eq.state;
        dyn::PropagationStats stats;
        const auto traj = dyn::record_trajectory(eng, y, p, spec.dt, &stats);

        io::Csv csv("t,lambda,re_rho00,im_rho00,re_rho01,im_rho01,re_rho10,im_rho10,re_rho11,"
                    "im_rho11,sx,sz,min_eig");
        for (std::size_t n = 0; n < traj.nodes(); ++n) {
            const Mat2& r = traj.states[n];
            csv.row(traj.time(n), traj.lambdas[n], std::real(r.m00), std::imag(r.m00),
                    std::real(r.m01), std::imag(r.m01), std::real(r.m10), std::imag(r.m10),
                    std::real(r.m11), std::imag(r.m11), expectation(Mat2::sigma_x(), r),
                    expectation(Mat2::sigma_z(), r), min_eigenvalue(r));
        }
        io::atomic_write(out_path(flags, cfg_dir, "trajectory.csv"), csv.str());

        json summary;
        summary["schema_version"] = io::schema_version;
        summary["command"] = "simulate";
        summary["config"] = config_echo(kv);
        summary["method"] = dyn::method_name(spec.method);
        summary["expansion"] = {{"k", expansion.size()},
                                {"eta", expansion.eta},
                                {"fit_error", expansion.fit_error},
                                {"fit_scale", expansion.fit_scale}};
        summary["equilibration_time"] = eq.time;
        summary["work"] = thermo::work_from_trajectory(traj, m, p.lambda_i, p.lambda_f);
        summary["max_trace_dev"] = stats.max_trace_dev;
        summary["max_herm_dev"] = stats.max_herm_dev;
        summary["min_eigenvalue"] = stats.min_eigenvalue;
        io::atomic_write(out_path(flags, cfg_dir, "summary.json"), summary.dump(2) + "\n");
        std::cout << "simulate: W = " << summary["work"] << ", nodes = " << traj.nodes() << "\n";
        return exit_ok;
    });
}

int cmd_optimize(const Flags& flags) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    const auto m = cfg::read_system(kv);
    double beta, tol;
    std::size_t k_max;
    const auto j = cfg::read_bath(kv, &beta, &tol, &k_max);
    const double tau = kv.take_num("protocol", "tau");
    const double delta = kv.take_num_or("protocol", "delta", 1e-2);
    auto spec = cfg::read_solver(kv, m, j, j.xi);
    if (flags.dt > 0.0) spec.dt = flags.dt;
    if (flags.depth >= 0) spec.depth = flags.depth;
    auto ocfg = cfg::read_optimizer(kv);
    if (flags.seed >= 0) ocfg.seed = static_cast<std::uint64_t>(flags.seed);
    const auto ansatz = cfg::read_ansatz(kv.take_or("optimizer", "ansatz", "imp3"));
    const std::string cfg_dir = kv.take_or("output", "dir", "out");
    // unknown keys are rejected globally by validate_schema

    const opt::ProblemSpec ps{m, j, beta, tol, k_max, spec, tau, delta};
    const auto best = opt::optimize_protocol(ansatz, ps, ocfg);

    io::atomic_write(out_path(flags, cfg_dir, "protocol.csv"),
                     protocol_csv(best.protocol, dump_step(best.protocol)));

    json summary;
    summary["schema_version"] = io::schema_version;
    summary["command"] = "optimize";
    summary["config"] = config_echo(kv);
    summary["ansatz"] = opt::ansatz_name(ansatz);
    summary["seed"] = ocfg.seed;
    summary["work"] = best.w;
    summary["work_at_seed"] = best.w_seed;
    summary["iterations"] = best.result.iterations;
    summary["evaluations"] = best.result.evaluations;
    summary["converged"] = best.result.converged;
    summary["best_parameters"] = best.result.best_x;
    summary["protocol"] = protocol_json(best.protocol);
    if (!best.restart_values.empty()) summary["restart_values"] = best.restart_values;
    io::atomic_write(out_path(flags, cfg_dir, "summary.json"), summary.dump(2) + "\n");
    std::cout << "optimize[" << opt::ansatz_name(ansatz) << "]: W = " << best.w << " after "
              << best.result.iterations << " iterations\n";
    return best.result.converged ? exit_ok : exit_no_convergence;
}

int cmd_deltaf(const Flags& flags) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    const auto m = cfg::read_system(kv);
    double beta, tol;
    std::size_t k_max;
    const auto j = cfg::read_bath(kv, &beta, &tol, &k_max);
    auto spec = cfg::read_solver(kv, m, j, j.xi);
    if (flags.dt > 0.0) spec.dt = flags.dt;
    if (flags.depth >= 0) spec.depth = flags.depth;
    const std::string cfg_dir = kv.take_or("output", "dir", "out");
    // unknown keys are rejected globally by validate_schema

    const auto expansion = bath::expand_correlation(j, beta, tol, k_max);
    const std::string dir = flags.out_dir.empty() ? cfg_dir : flags.out_dir;
    std::filesystem::create_directories(dir);
    thermo::DeltaFCache cache((std::filesystem::path(dir) / "deltaf_cache.tsv").string());
    const double df = thermo::free_energy_difference(m, j, beta, expansion, spec, &cache);

    json summary;
    summary["schema_version"] = io::schema_version;
    summary["command"] = "deltaf";
    summary["config"] = config_echo(kv);
    summary["method"] = dyn::method_name(spec.method);
    summary["tau_q"] = thermo::quasistatic_tau(m);
    summary["delta_f"] = df;
    io::atomic_write(out_path(flags, cfg_dir, "summary.json"), summary.dump(2) + "\n");
    std::cout << "deltaf: dF = " << df << "\n";
    return exit_ok;
}

int cmd_sweep(const Flags& flags, const std::string& command_name = "sweep",
              std::vector<double> gammas = {}, std::vector<double> betas = {},
              std::vector<double> xis = {}, std::vector<double> taus = {},
              std::vector<opt::AnsatzKind> kinds = {}) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    const auto m = cfg::read_system(kv);
    double beta0, tol;
    std::size_t k_max;
    const auto j0 = cfg::read_bath(kv, &beta0, &tol, &k_max);
    const double delta = kv.take_num_or("protocol", "delta", 1e-2);
    if (kv.has("protocol", "tau")) kv.take_num("protocol", "tau");
    if (kv.has("protocol", "kind")) kv.take("protocol", "kind");
    auto spec = cfg::read_solver(kv, m, j0, j0.xi);
    if (flags.dt > 0.0) spec.dt = flags.dt;
    if (flags.depth >= 0) spec.depth = flags.depth;
    auto ocfg = cfg::read_optimizer(kv);
    if (flags.seed >= 0) ocfg.seed = static_cast<std::uint64_t>(flags.seed);
    bool with_deltaf = true;
    if (command_name == "sweep") {
        gammas = kv.take_list("sweep", "gammas");
        betas = kv.take_list("sweep", "betas");
        xis = kv.take_list("sweep", "xis");
        taus = kv.take_list("sweep", "taus");
        for (const auto& w : kv.take_words("sweep", "ansatz")) kinds.push_back(cfg::read_ansatz(w));
        with_deltaf = kv.take_or("sweep", "deltaf", "true") == "true";
    }
    const std::string cfg_dir = kv.take_or("output", "dir", "out");
    // unknown keys are rejected globally by validate_schema

    const auto rows = opt::survey(m, gammas, betas, xis, taus, kinds, spec, delta, ocfg,
                                  flags.workers, tol, k_max);

    const std::string dir = flags.out_dir.empty() ? cfg_dir : flags.out_dir;
    std::filesystem::create_directories(dir);
    thermo::DeltaFCache cache((std::filesystem::path(dir) / "deltaf_cache.tsv").string());

    io::Csv csv("beta,gamma,xi,tau,protocol,W,W_ex");
    json cells = json::array();
    for (const auto& r : rows) {
        json cell;
        cell["beta"] = r.cell.beta;
        cell["gamma"] = r.cell.gamma;
        cell["xi"] = r.cell.xi;
        cell["tau"] = r.cell.tau;
        cell["protocol"] = opt::ansatz_name(r.cell.kind);
        if (r.failed) {
            cell["error"] = r.error;
            csv.row(r.cell.beta, r.cell.gamma, r.cell.xi, r.cell.tau, opt::ansatz_name(r.cell.kind),
                    "nan", "nan");
        } else {
            double w_ex = std::numeric_limits<double>::quiet_NaN();
            if (with_deltaf) {
                const auto jc = bath::SpectralDensity::drude(r.cell.gamma, r.cell.xi);
                const auto ec = bath::expand_correlation(jc, r.cell.beta, tol, k_max);
                w_ex = r.w - thermo::free_energy_difference(m, jc, r.cell.beta, ec, spec, &cache);
                cell["W_ex"] = w_ex;
            }
            cell["W"] = r.w;
            cell["iterations"] = r.iterations;
            cell["evaluations"] = r.evaluations;
            cell["converged"] = r.converged;
            cell["optimum"] = protocol_json(r.optimum);
            csv.row(r.cell.beta, r.cell.gamma, r.cell.xi, r.cell.tau, opt::ansatz_name(r.cell.kind),
                    r.w, w_ex);
        }
        cells.push_back(cell);
    }
    io::atomic_write(
        out_path(flags, cfg_dir, command_name == "sweep" ? "sweep.csv" : "fig3_table.csv"),
        csv.str());
    json summary;
    summary["schema_version"] = io::schema_version;
    summary["command"] = command_name;
    summary["config"] = config_echo(kv);
    summary["seed"] = ocfg.seed;
    summary["cells"] = cells;
    io::atomic_write(out_path(flags, cfg_dir, "summary.json"), summary.dump(2) + "\n");

    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.failed ? 1 : 0;
    std::cout << command_name << ": " << rows.size() - failed << "/" << rows.size()
              << " cells completed\n";
    return failed == 0 ? exit_ok : exit_numeric;
}

int cmd_repro(const Flags& flags) {
    if (flags.target != "fig3")
        throw cfg::ConfigError("repro: unknown target '" + flags.target + "' (available: fig3)");
    // reduced-grid excess-work table: four (beta, gamma) panels at xi = 1
    return cmd_sweep(flags, "repro-fig3", {0.2, 1.0}, {0.2, 1.0}, {1.0}, {0.5, 5.0},
                     {opt::AnsatzKind::Linear, opt::AnsatzKind::Imp3, opt::AnsatzKind::Poly3});
}

int cmd_validate_bath(const Flags& flags) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    double beta, tol;
    std::size_t k_max;
    const auto j = cfg::read_bath(kv, &beta, &tol, &k_max);
    const std::string cfg_dir = kv.take_or("output", "dir", "out");
    // unknown keys are rejected globally by validate_schema

    const auto e = bath::expand_correlation(j, beta, tol, k_max);
    const auto grid = bath::detail::make_fit_grid(j, beta);
    io::Csv csv("t,re_L_exact,im_L_exact,re_L_fit,im_L_fit,abs_residual");
    for (std::size_t i = 0; i < grid.t.size(); i += 4) {
        const auto fit = e.eval(grid.t[i]);
        csv.row(grid.t[i], std::real(grid.exact[i]), std::imag(grid.exact[i]), std::real(fit),
                std::imag(fit), std::abs(fit - grid.exact[i]));
    }
    io::atomic_write(out_path(flags, cfg_dir, "bath_validation.csv"), csv.str());
    std::cout << "validate-bath: K = " << e.size() << ", eta = " << e.eta
              << ", sup residual = " << e.fit_error << " (tolerance " << tol * e.fit_scale << ")\n";
    return exit_ok;
}

int cmd_brownian(const Flags& flags) {
    auto kv = cfg::parse_file(flags.config_path);
    validate_schema(kv);
    const std::string kind = kv.take_or("trap", "kind", "ohmic");
    brownian::TrapModel m;
    m.epsilon = kv.take_num_or("trap", "epsilon", 1.0);
    if (kind == "ohmic")
        m.j = bath::SpectralDensity::ohmic(kv.take_num("trap", "zeta"), m.epsilon);
    else if (kind == "drude")
        m.j = bath::SpectralDensity::drude(kv.take_num("trap", "gamma"), kv.take_num("trap", "xi"));
    else if (kind == "ohmic_drude")
        m.j = bath::SpectralDensity::ohmic_drude(kv.take_num("trap", "zeta"),
                                                 kv.take_num("trap", "gamma"),
                                                 kv.take_num("trap", "xi"), m.epsilon);
    else
        throw cfg::ConfigError("trap.kind must be ohmic|drude|ohmic_drude");
    m.lambda_i = kv.take_num_or("trap", "lambda_i", 0.0);
    m.lambda_f = kv.take_num("trap", "lambda_f");
    m.tau = kv.take_num("trap", "tau");
    const std::string regime = kv.take_or("trap", "regime", "underdamped");
    if (regime == "underdamped")
        m.regime = brownian::Regime::Underdamped;
    else if (regime == "overdamped")
        m.regime = brownian::Regime::Overdamped;
    else
        throw cfg::ConfigError("trap.regime must be underdamped|overdamped");
    m.validate();
    const double dg = kv.take_num_or("trap", "grid", 2e-3);
    const auto n_fine = static_cast<std::size_t>(kv.take_num_or("trap", "n_fine", 20000));
    const std::string cfg_dir = kv.take_or("output", "dir", "out");

    json summary;
    summary["schema_version"] = io::schema_version;
    summary["command"] = "brownian";
    summary["mode"] = flags.mode;
    summary["config"] = config_echo(kv);

    if (flags.mode == "analytic") {
        // unknown keys are rejected globally by validate_schema
        if (m.j.kind != bath::SpectralDensity::Kind::Ohmic)
            throw cfg::ConfigError("brownian --mode analytic: requires trap.kind = ohmic");
        const auto a = m.regime == brownian::Regime::Underdamped
                           ? brownian::analytic_optimal_ohmic(m.j.zeta, m.epsilon, m.tau, m.lambda_i,
                                                              m.lambda_f)
                           : brownian::analytic_optimal_overdamped(m.j.zeta, m.epsilon, m.tau,
                                                                   m.lambda_i, m.lambda_f);
        summary["slope"] = a.slope;
        summary["intercept"] = a.intercept;
        summary["impulse_area"] = a.impulse_m;
        summary["W"] = a.w;
    } else if (flags.mode == "qp") {
        // unknown keys are rejected globally by validate_schema
        const auto qp = brownian::qp_optimal_protocol(m, dg);
        summary["slope"] = qp.summary.slope;
        summary["intercept"] = qp.summary.intercept;
        summary["impulse_area"] = qp.summary.impulse_m;
        summary["lambda_max"] = qp.summary.lambda_max;
        summary["W"] = qp.w;
        io::Csv csv("t,lambda");
        for (std::size_t i = 0; i < qp.lambda.size(); ++i)
            csv.row(static_cast<double>(i) * dg, qp.lambda[i]);
        io::atomic_write(out_path(flags, cfg_dir, "protocol.csv"), csv.str());
    } else if (flags.mode == "imp3") {
        // unknown keys are rejected globally by validate_schema
        const auto d = brownian::imp3_delta_optimal(m, n_fine);
        summary["slope"] = d.alpha1;
        summary["intercept"] = d.alpha2;
        summary["impulse_area"] = d.m;
        summary["W"] = d.w;
    } else if (flags.mode == "work") {
        double tau_unused, delta_unused;
        const auto sys_like = sys::TwoLevelModel::driven(1.0, m.lambda_i, m.lambda_f);
        const auto p = cfg::read_protocol(kv, sys_like, &tau_unused, &delta_unused);
        // unknown keys are rejected globally by validate_schema
        const auto r = brownian::trap_work(m, p, dg);
        summary["W"] = r.w;
        summary["q_end"] = r.q_end;
    } else {
        throw cfg::ConfigError("brownian: --mode must be analytic|qp|imp3|work");
    }
    io::atomic_write(out_path(flags, cfg_dir, "summary.json"), summary.dump(2) + "\n");
    std::cout << "brownian[" << flags.mode << "]: W = " << summary["W"] << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Work-minimizing control protocols for dissipative two-level systems.\n"
                 "Impulse protocols render each boundary impulse as an isosceles triangle of\n"
                 "base width delta sitting on the interior line; the config key protocol.h is\n"
                 "the area-preserving height (impulse area = h*delta, triangle apex = 2h)."};
    app.require_subcommand(1);

    Flags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "run configuration file")->required();
        sub->add_option("--out", flags.out_dir, "output directory (overrides [output] dir)");
        sub->add_option("--dt", flags.dt, "integrator step override");
        sub->add_option("--depth", flags.depth, "hierarchy depth override");
        sub->add_option("--workers", flags.workers, "worker pool size for sweep cells");
        sub->add_option("--seed", flags.seed, "PRNG seed for random restarts");
    };

    auto* simulate = app.add_subcommand("simulate", "propagate one protocol, dump the trajectory");
    add_common(simulate);
    auto* optimize = app.add_subcommand("optimize", "minimise the work over an ansatz");
    add_common(optimize);
    auto* sweep = app.add_subcommand("sweep", "optimize over a bath-parameter grid");
    add_common(sweep);
    auto* deltaf = app.add_subcommand("deltaf", "quasistatic free-energy difference");
    add_common(deltaf);
    auto* brown = app.add_subcommand("brownian", "moving harmonic trap benchmarks");
    add_common(brown);
    brown->add_option("--mode", flags.mode, "analytic|qp|imp3|work")->required();
    auto* vbath = app.add_subcommand("validate-bath", "bath correlation vs its expansion");
    add_common(vbath);
    auto* repro = app.add_subcommand("repro", "regenerate a reduced-scale result table");
    add_common(repro);
    repro->add_option("target", flags.target, "fig3")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(flags);
        if (optimize->parsed()) return cmd_optimize(flags);
        if (sweep->parsed()) return cmd_sweep(flags);
        if (deltaf->parsed()) return cmd_deltaf(flags);
        if (brown->parsed()) return cmd_brownian(flags);
        if (vbath->parsed()) return cmd_validate_bath(flags);
        if (repro->parsed()) return cmd_repro(flags);
    } catch (const cfg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const dyn::EquilibrationFailure& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return exit_no_convergence;
    } catch (const bath::FitFailure& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return exit_no_convergence;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_config;
}
