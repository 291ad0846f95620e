#include <doctest.h>

#include <cmath>

#include "minwork/nelder_mead.hpp"

using namespace minwork;
using opt::OptimizerConfig;

TEST_CASE("convex quadratic converges to the minimiser") {
    auto f = [](const std::vector<double>& x) {
        double acc = 0.0;
        for (double v : x) acc += (v - 1.0) * (v - 1.0);
        return acc;
    };
    OptimizerConfig cfg;
    cfg.max_iter = 2000;
    const auto r = opt::nelder_mead(f, {0.0, 0.0, 0.0}, cfg);
    CHECK(r.converged);
    for (double v : r.best_x) CHECK(v == doctest::Approx(1.0).epsilon(cfg.xatol));
    CHECK(r.best_f <= std::max_element(r.log.begin(), r.log.end(),
                                       [](const auto& a, const auto& b) { return a.f < b.f; })
                          ->f);
}

TEST_CASE("rosenbrock from the standard start") {
    auto rosen = [](const std::vector<double>& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    OptimizerConfig cfg;
    cfg.max_iter = 200;
    cfg.fatol = 1e-12;
    cfg.xatol = 1e-6;
    const auto r = opt::nelder_mead(rosen, {-1.2, 1.0}, cfg);
    CHECK(r.best_f < 1e-6);
}

TEST_CASE("deterministic iterate sequence") {
    auto f = [](const std::vector<double>& x) {
        return std::sin(3.0 * x[0]) + x[0] * x[0] + 0.3 * std::cos(7.0 * x[1]) + x[1] * x[1];
    };
    OptimizerConfig cfg;
    cfg.max_iter = 500;
    const auto a = opt::nelder_mead(f, {0.7, -0.4}, cfg);
    const auto b = opt::nelder_mead(f, {0.7, -0.4}, cfg);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].f == b.log[i].f);
        CHECK(a.log[i].x == b.log[i].x);
    }
    CHECK(a.best_x == b.best_x);
}

TEST_CASE("best value never exceeds any logged evaluation") {
    auto f = [](const std::vector<double>& x) { return std::abs(x[0] - 2.0) + 0.1 * x[1] * x[1]; };
    OptimizerConfig cfg;
    cfg.max_iter = 300;
    const auto r = opt::nelder_mead(f, {5.0, 3.0}, cfg);
    for (const auto& e : r.log) CHECK(r.best_f <= e.f);
}

TEST_CASE("NaN objective aborts with the offending vector") {
    auto f = [](const std::vector<double>& x) {
        return x[0] < -1.0 ? std::nan("") : (x[0] - 3.0) * (x[0] - 3.0);
    };
    OptimizerConfig cfg;
    cfg.max_iter = 100;
    bool threw = false;
    try {
        opt::nelder_mead(f, {-0.99, 0.0}, cfg); // simplex will probe x < -1
    } catch (const opt::NanObjective& e) {
        threw = true;
        CHECK(e.x.size() == 2);
        CHECK(e.x[0] < -1.0);
    } catch (...) {
    }
    if (!threw) {
        // the path may converge without probing; force it
        CHECK_THROWS_AS(opt::nelder_mead(f, {-2.0, 0.0}, cfg), opt::NanObjective);
    }
}

TEST_CASE("infinite objective values keep the simplex alive") {
    auto f = [](const std::vector<double>& x) {
        if (x[0] > 4.0) return std::numeric_limits<double>::infinity();
        return (x[0] - 2.0) * (x[0] - 2.0);
    };
    OptimizerConfig cfg;
    cfg.max_iter = 500;
    const auto r = opt::nelder_mead(f, {3.9, 0.0}, cfg);
    CHECK(r.best_f < 1e-2);
}
