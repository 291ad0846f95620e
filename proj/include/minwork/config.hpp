#pragma once

// Run configuration: a flat, sectioned plain-text key-value format.
//   [section]
//   key = value        # comment
// Unknown sections or keys are rejected; every module precondition is
// validated before any compute. All quantities are in units eps = hbar = 1.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "minwork/brownian.hpp"
#include "minwork/optimize.hpp"

namespace minwork::cfg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

class KeyValues {
  public:
    void set(const std::string& section, const std::string& key, const std::string& value) {
        data_[section][key] = value;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = data_.find(section);
        return s != data_.end() && s->second.count(key) > 0;
    }

    std::string take(const std::string& section, const std::string& key) {
        const auto s = data_.find(section);
        if (s == data_.end() || !s->second.count(key))
            throw ConfigError("missing key '" + key + "' in section [" + section + "]");
        consumed_.insert(section + "." + key);
        return s->second.at(key);
    }

    std::string take_or(const std::string& section, const std::string& key, const std::string& def) {
        if (!has(section, key)) return def;
        return take(section, key);
    }

    double take_num(const std::string& section, const std::string& key) {
        return parse_num(section, key, take(section, key));
    }

    double take_num_or(const std::string& section, const std::string& key, double def) {
        if (!has(section, key)) return def;
        return take_num(section, key);
    }

    std::vector<double> take_list(const std::string& section, const std::string& key) {
        std::istringstream is(take(section, key));
        std::vector<double> out;
        std::string tok;
        while (is >> tok) out.push_back(parse_num(section, key, tok));
        if (out.empty()) throw ConfigError("empty list for '" + key + "' in [" + section + "]");
        return out;
    }

    std::vector<std::string> take_words(const std::string& section, const std::string& key) {
        std::istringstream is(take(section, key));
        std::vector<std::string> out;
        std::string tok;
        while (is >> tok) out.push_back(tok);
        return out;
    }

    // every parsed key must have been consumed by a reader
    void reject_unknown() const {
        for (const auto& [section, kv] : data_) {
            for (const auto& [key, value] : kv) {
                if (!consumed_.count(section + "." + key))
                    throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }

    const std::map<std::string, std::map<std::string, std::string>>& raw() const { return data_; }

  private:
    double parse_num(const std::string& section, const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' in [" + section + "] is not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> data_;
    std::set<std::string> consumed_;
};

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(line_no));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' at line " + std::to_string(line_no));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(line_no));
        kv.set(section, key, value);
    }
    return kv;
}

inline KeyValues parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_key_values(in);
}

// ---------------------------------------------------------------------------
// Typed blocks
// ---------------------------------------------------------------------------

struct RunConfig {
    sys::TwoLevelModel system;
    bath::SpectralDensity bath_j;
    double beta{1.0};
    double bath_tol{1e-3};
    std::size_t bath_k_max{30};

    protocol::Protocol protocol;
    double tau{0.5};
    double delta{1e-2};

    thermo::SolverSpec solver;
    opt::OptimizerConfig optimizer;
    opt::AnsatzKind ansatz{opt::AnsatzKind::Imp3};

    std::string out_dir{"out"};
};

inline sys::TwoLevelModel read_system(KeyValues& kv) {
    const std::string kind = kv.take("system", "kind");
    const double eps = kv.take_num_or("system", "epsilon", 1.0);
    const double li = kv.take_num("system", "lambda_i");
    const double lf = kv.take_num("system", "lambda_f");
    if (kind == "driven") return sys::TwoLevelModel::driven(eps, li, lf);
    if (kind == "tunable") return sys::TwoLevelModel::tunable(eps, li, lf);
    throw ConfigError("system.kind must be driven|tunable, got '" + kind + "'");
}

inline bath::SpectralDensity read_bath(KeyValues& kv, double* beta, double* tol, std::size_t* k_max) {
    const std::string kind = kv.take_or("bath", "kind", "drude");
    *beta = kv.take_num("bath", "beta");
    *tol = kv.take_num_or("bath", "tol", 1e-3);
    *k_max = static_cast<std::size_t>(kv.take_num_or("bath", "k_max", 30));
    if (kind == "drude")
        return bath::SpectralDensity::drude(kv.take_num("bath", "gamma"), kv.take_num("bath", "xi"));
    if (kind == "ohmic")
        return bath::SpectralDensity::ohmic(kv.take_num("bath", "zeta"),
                                            kv.take_num_or("bath", "epsilon", 1.0));
    if (kind == "ohmic_drude")
        return bath::SpectralDensity::ohmic_drude(
            kv.take_num("bath", "zeta"), kv.take_num("bath", "gamma"), kv.take_num("bath", "xi"),
            kv.take_num_or("bath", "epsilon", 1.0));
    throw ConfigError("bath.kind must be drude|ohmic|ohmic_drude, got '" + kind + "'");
}

inline protocol::Protocol read_protocol(KeyValues& kv, const sys::TwoLevelModel& m, double* tau,
                                        double* delta) {
    using protocol::Protocol;
    const std::string kind = kv.take("protocol", "kind");
    *tau = kv.take_num("protocol", "tau");
    *delta = kv.take_num_or("protocol", "delta", 1e-2);
    if (kind == "constant") return Protocol::constant(kv.take_num("protocol", "lambda"), *tau);
    if (kind == "linear") return Protocol::linear(m.lambda_i, m.lambda_f, *tau);
    if (kind == "imp3") {
        // h in the area convention: impulse area = h * delta (triangle apex 2h)
        const double h = kv.take_num("protocol", "h");
        return Protocol::imp3(m.lambda_i, m.lambda_f, *tau, *delta, 2.0 * h,
                              kv.take_num("protocol", "alpha1"), kv.take_num("protocol", "alpha2"));
    }
    if (kind == "poly3")
        return Protocol::poly3(m.lambda_i, m.lambda_f, *tau, kv.take_num("protocol", "a1"),
                               kv.take_num("protocol", "a2"), kv.take_num("protocol", "a3"));
    if (kind == "piecewise")
        return Protocol::piecewise_linear(m.lambda_i, m.lambda_f, *tau, *delta,
                                          kv.take_list("protocol", "values"));
    throw ConfigError("protocol.kind must be constant|linear|imp3|poly3|piecewise, got '" + kind +
                      "'");
}

inline thermo::SolverSpec read_solver(KeyValues& kv, const sys::TwoLevelModel& m,
                                      const bath::SpectralDensity& j, double xi_for_depth) {
    thermo::SolverSpec spec;
    const std::string method = kv.take_or("solver", "method", "heom");
    if (method == "heom")
        spec.method = dyn::Method::Heom;
    else if (method == "tcl2")
        spec.method = dyn::Method::Tcl2;
    else if (method == "agksl")
        spec.method = dyn::Method::Agksl;
    else
        throw ConfigError("solver.method must be heom|tcl2|agksl, got '" + method + "'");
    // defaults: dt = 1e-3 except the tunable system with gamma = 0.2 (2e-4);
    // hierarchy depth 6 at strong coupling, 4 otherwise
    const double dt_default =
        (m.kind == sys::TwoLevelModel::Kind::Tunable && j.gamma <= 0.25) ? 2e-4 : 1e-3;
    spec.dt = kv.take_num_or("solver", "dt", dt_default);
    spec.depth = static_cast<int>(kv.take_num_or("solver", "depth", xi_for_depth >= 0.5 ? 6 : 4));
    if (!(spec.dt > 0.0)) throw ConfigError("solver.dt must be > 0");
    if (spec.depth < 0) throw ConfigError("solver.depth must be >= 0");
    return spec;
}

inline opt::OptimizerConfig read_optimizer(KeyValues& kv) {
    opt::OptimizerConfig cfg;
    cfg.xatol = kv.take_num_or("optimizer", "xatol", 1e-2);
    cfg.fatol = kv.take_num_or("optimizer", "fatol", 1e-10);
    cfg.max_iter = static_cast<std::size_t>(kv.take_num_or("optimizer", "max_iter", 10000));
    cfg.restarts = static_cast<std::size_t>(kv.take_num_or("optimizer", "restarts", 0));
    cfg.seed = static_cast<std::uint64_t>(kv.take_num_or("optimizer", "seed", 12345));
    cfg.validate();
    return cfg;
}

inline opt::AnsatzKind read_ansatz(const std::string& word) {
    if (word == "linear") return opt::AnsatzKind::Linear;
    if (word == "imp3") return opt::AnsatzKind::Imp3;
    if (word == "poly3") return opt::AnsatzKind::Poly3;
    if (word == "bf") return opt::AnsatzKind::BruteForce;
    throw ConfigError("ansatz must be linear|imp3|poly3|bf, got '" + word + "'");
}

} // namespace minwork::cfg
