#pragma once

// Classical Nelder-Mead simplex minimiser with coefficients
// (reflection, expansion, contraction, shrink) = (1, 2, 0.5, 0.5).
// Deterministic: the iterate sequence depends only on x0 and the config.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace minwork::opt {

struct OptimizerConfig {
    double xatol{1e-2};        // simplex diameter tolerance (parameter updates)
    double fatol{1e-10};       // objective spread tolerance
    std::size_t max_iter{10000};
    std::size_t restarts{0};   // random restarts (brute-force seeding only)
    std::uint64_t seed{12345}; // PRNG seed for the random restarts

    void validate() const {
        if (!(xatol > 0.0) || !(fatol > 0.0))
            throw std::invalid_argument("optimizer: tolerances must be positive");
        if (max_iter < 1) throw std::invalid_argument("optimizer: max_iter must be >= 1");
    }
};

struct NanObjective : std::runtime_error {
    NanObjective(const std::string& msg, std::vector<double> at)
        : std::runtime_error(msg), x(std::move(at)) {}
    std::vector<double> x;
};

struct EvalRecord {
    std::vector<double> x;
    double f;
};

struct OptimizationResult {
    std::vector<double> best_x;
    double best_f{0.0};
    std::size_t iterations{0};
    std::size_t evaluations{0};
    bool converged{false};
    std::vector<EvalRecord> log;
};

// Initial simplex: each coordinate perturbed by 5% of its value, tiny
// absolute step for coordinates starting at zero (the convention of the
// reference simplex implementations this is validated against).
inline std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0) {
    std::vector<std::vector<double>> v(x0.size() + 1, x0);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        v[i + 1][i] = x0[i] != 0.0 ? 1.05 * x0[i] : 0.00025;
    }
    return v;
}

inline OptimizationResult nelder_mead_from(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<std::vector<double>>& simplex, const OptimizerConfig& cfg) {
    cfg.validate();
    if (simplex.empty() || simplex.front().empty())
        throw std::invalid_argument("nelder_mead: empty simplex");
    const std::size_t d = simplex.front().size();
    if (simplex.size() != d + 1)
        throw std::invalid_argument("nelder_mead: simplex needs d+1 vertices");

    OptimizationResult res;
    // simplex methods revisit vertices; memoise exact parameter vectors
    std::map<std::vector<double>, double> memo;
    auto eval = [&](const std::vector<double>& x) {
        if (auto it = memo.find(x); it != memo.end()) return it->second;
        const double f = objective(x);
        if (std::isnan(f)) throw NanObjective("nelder_mead: objective returned NaN", x);
        memo.emplace(x, f);
        ++res.evaluations;
        res.log.push_back({x, f});
        return f;
    };

    auto verts = simplex;
    std::vector<double> f(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) f[i] = eval(verts[i]);

    std::vector<std::size_t> order(verts.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    };

    for (res.iterations = 0; res.iterations < cfg.max_iter; ++res.iterations) {
        sort_simplex();
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];

        double diam = 0.0, spread = 0.0;
        for (std::size_t i = 1; i <= d; ++i) {
            spread = std::max(spread, std::abs(f[order[i]] - f[best]));
            for (std::size_t c = 0; c < d; ++c)
                diam = std::max(diam, std::abs(verts[order[i]][c] - verts[best][c]));
        }
        if (diam < cfg.xatol && spread < cfg.fatol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t c = 0; c < d; ++c) centroid[c] += verts[i][c];
        }
        for (auto& c : centroid) c /= static_cast<double>(d);

        auto along = [&](double s) {
            std::vector<double> x(d);
            for (std::size_t c = 0; c < d; ++c) x[c] = centroid[c] + s * (centroid[c] - verts[worst][c]);
            return x;
        };

        const auto xr = along(1.0);
        const double fr = eval(xr);
        if (fr < f[best]) {
            const auto xe = along(2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                verts[worst] = xe;
                f[worst] = fe;
            } else {
                verts[worst] = xr;
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[second]) {
            verts[worst] = xr;
            f[worst] = fr;
            continue;
        }
        if (fr < f[worst]) { // outside contraction
            const auto xc = along(0.5);
            const double fc = eval(xc);
            if (fc <= fr) {
                verts[worst] = xc;
                f[worst] = fc;
                continue;
            }
        } else { // inside contraction
            const auto xc = along(-0.5);
            const double fc = eval(xc);
            if (fc < f[worst]) {
                verts[worst] = xc;
                f[worst] = fc;
                continue;
            }
        }
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t c = 0; c < d; ++c)
                verts[i][c] = verts[best][c] + 0.5 * (verts[i][c] - verts[best][c]);
            f[i] = eval(verts[i]);
        }
    }

    sort_simplex();
    res.best_x = verts[order[0]];
    res.best_f = f[order[0]];
    return res;
}

inline OptimizationResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                      const std::vector<double>& x0, const OptimizerConfig& cfg) {
    return nelder_mead_from(objective, initial_simplex(x0), cfg);
}

} // namespace minwork::opt
