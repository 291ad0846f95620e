#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "minwork/brownian.hpp"

using namespace minwork;
using namespace minwork::brownian;
using bath::SpectralDensity;

namespace {

TrapModel ohmic_trap(double zeta, double eps, double tau, double lf,
                     Regime regime = Regime::Underdamped) {
    return {eps, SpectralDensity::ohmic(zeta, eps), 0.0, lf, tau, regime};
}

TrapModel drude_trap(double gamma, double xi, double tau, double lf,
                     Regime regime = Regime::Underdamped) {
    return {1.0, SpectralDensity::drude(gamma, xi), 0.0, lf, tau, regime};
}

} // namespace

TEST_CASE("green function: initial conditions and the Ohmic closed form") {
    const auto m = ohmic_trap(1.0, 1.0, 2.0, 1.0);
    const auto kt = green_plus(m, 0.01, 200);
    CHECK(kt.g[0] == 0.0);
    CHECK(kt.gdot[0] == 1.0);
    const double s3 = std::sqrt(3.0);
    for (std::size_t i = 0; i <= 200; i += 10) {
        const double t = 0.01 * static_cast<double>(i);
        const double g = (2.0 / s3) * std::exp(-0.5 * t) * std::sin(0.5 * s3 * t);
        const double gd = std::exp(-0.5 * t) *
                          (std::cos(0.5 * s3 * t) - std::sin(0.5 * s3 * t) / s3);
        CHECK(kt.g[i] == doctest::Approx(g).epsilon(1e-8));
        CHECK(kt.gdot[i] == doctest::Approx(gd).epsilon(1e-8));
    }
}

TEST_CASE("green function: stiff-memory Drude limit recovers the Ohmic kernel") {
    // gamma -> inf at 2 eps xi = zeta turns the Drude friction into Ohmic friction
    const auto drude = drude_trap(50.0, 0.5, 2.0, 1.0);
    const auto ohm = ohmic_trap(1.0, 1.0, 2.0, 1.0);
    const auto kd = green_plus(drude, 0.02, 100);
    const auto ko = green_plus(ohm, 0.02, 100);
    for (std::size_t i = 20; i <= 100; i += 10) {
        CHECK(kd.g[i] == doctest::Approx(ko.g[i]).epsilon(0.08)); // O(1/gamma)
    }
}

TEST_CASE("overdamped kernel: pure Ohmic pole and the initial-value theorem") {
    const auto m = ohmic_trap(0.8, 1.3, 1.0, 1.0, Regime::Overdamped);
    const auto f = overdamped_kernel(m);
    CHECK(f.f0 == doctest::Approx(1.3 / 0.8));
    for (double t : {0.0, 0.2, 1.0}) {
        CHECK(f.value(t) ==
              doctest::Approx((1.3 / 0.8) * std::exp(-1.3 * 1.3 * t / 0.8)).epsilon(1e-12));
    }

    // combined kernel: F(0) = eps/zeta independently of the Drude part
    TrapModel c{1.0, SpectralDensity::ohmic_drude(0.7, 2.0, 0.6, 1.0), 0.0, 1.0, 1.0,
                Regime::Overdamped};
    const auto fc = overdamped_kernel(c);
    CHECK(fc.value(0.0) == doctest::Approx(1.0 / 0.7).epsilon(1e-12));

    TrapModel bad{1.0, SpectralDensity::drude(1.0, 1.0), 0.0, 1.0, 1.0, Regime::Overdamped};
    CHECK_THROWS_AS(overdamped_kernel(bad), std::invalid_argument);
}

TEST_CASE("analytic Ohmic optimum: canonical values and limits") {
    const auto opt = analytic_optimal_ohmic(1.0, 1.0, 0.5, 0.0, 1.0);
    CHECK(opt.slope == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(opt.intercept == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(opt.intercept + opt.slope * 0.5 == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(opt.impulse_m == doctest::Approx(0.4).epsilon(1e-14));

    const auto slow = analytic_optimal_ohmic(1.0, 1.0, 1e6, 0.0, 1.0, 1e-4, false);
    CHECK(slow.impulse_m == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(slow.slope * 1e6 == doctest::Approx(1.0).epsilon(1e-4)); // midline recovers dl

    const auto still = analytic_optimal_ohmic(1.0, 1.0, 0.5, 0.7, 0.7);
    CHECK(still.impulse_m == 0.0);
    CHECK(still.w == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analytic overdamped optimum: jumps only, symmetric") {
    const auto u = analytic_optimal_ohmic(1.0, 1.0, 0.5, 0.0, 1.0);
    const auto o = analytic_optimal_overdamped(1.0, 1.0, 0.5, 0.0, 1.0);
    CHECK(o.slope == doctest::Approx(u.slope));
    CHECK(o.intercept == doctest::Approx(u.intercept));
    CHECK(o.impulse_m == 0.0);
    // jump sizes at both ends are equal
    const double up = o.intercept - 0.0;
    const double down = 1.0 - (o.intercept + o.slope * 0.5);
    CHECK(up == doctest::Approx(down).epsilon(1e-12));

    // eps^2 tau / zeta -> 0: half-jump plateau
    const auto plateau = analytic_optimal_overdamped(1.0, 1.0, 1e-4, 0.0, 1.0, 1e-6);
    CHECK(plateau.intercept == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("delta-impulse stationarity reproduces the analytic Ohmic optimum") {
    const auto m = ohmic_trap(1.0, 1.0, 0.5, 1.0);
    const auto opt = imp3_delta_optimal(m, 60000);
    const auto ana = analytic_optimal_ohmic(1.0, 1.0, 0.5, 0.0, 1.0, 5e-5);
    CHECK(std::abs(opt.alpha1 - ana.slope) < 1e-8);
    CHECK(std::abs(opt.alpha2 - ana.intercept) < 1e-8);
    CHECK(std::abs(opt.m - ana.impulse_m) < 1e-8);
    CHECK(std::abs(opt.w - ana.w) < 1e-8);
}

TEST_CASE("overdamped delta-impulse ansatz pins m to zero") {
    const auto m = ohmic_trap(1.0, 1.0, 0.5, 1.0, Regime::Overdamped);
    const auto opt = imp3_delta_optimal(m, 20000);
    CHECK(opt.m == 0.0);
    const auto ana = analytic_optimal_overdamped(1.0, 1.0, 0.5, 0.0, 1.0);
    CHECK(opt.alpha1 == doctest::Approx(ana.slope).epsilon(1e-6));
    CHECK(opt.alpha2 == doctest::Approx(ana.intercept).epsilon(1e-6));
}

TEST_CASE("qp optimum matches the analytic Ohmic solution") {
    const auto m = ohmic_trap(1.0, 1.0, 0.5, 1.0);
    const auto qp = qp_optimal_protocol(m, 5e-3);
    const auto ana = analytic_optimal_ohmic(1.0, 1.0, 0.5, 0.0, 1.0);
    CHECK(qp.summary.slope == doctest::Approx(ana.slope).epsilon(0.01));
    CHECK(qp.summary.intercept == doctest::Approx(ana.intercept).epsilon(0.01));
    CHECK(qp.summary.impulse_m == doctest::Approx(ana.impulse_m).epsilon(0.01));
    CHECK(qp.w == doctest::Approx(ana.w).epsilon(0.01));
}

TEST_CASE("qp on the overdamped pure-Ohmic kernel: jumps, no spikes") {
    const auto m = ohmic_trap(1.0, 1.0, 0.5, 1.0, Regime::Overdamped);
    const auto qp = qp_optimal_protocol(m, 2e-3);
    const auto ana = analytic_optimal_overdamped(1.0, 1.0, 0.5, 0.0, 1.0);
    CHECK(qp.summary.slope == doctest::Approx(ana.slope).epsilon(0.02));
    CHECK(qp.summary.intercept == doctest::Approx(ana.intercept).epsilon(0.02));
    CHECK(std::abs(qp.summary.impulse_m) < 0.02);
    CHECK(qp.w == doctest::Approx(ana.w).epsilon(0.01));
}

TEST_CASE("qp with a Drude admixture suppresses the boundary jumps") {
    TrapModel weak{1.0, SpectralDensity::ohmic_drude(1.0, 1.0, 0.05, 1.0), 0.0, 1.0, 0.5,
                   Regime::Overdamped};
    TrapModel strong{1.0, SpectralDensity::ohmic_drude(1.0, 1.0, 1.5, 1.0), 0.0, 1.0, 0.5,
                     Regime::Overdamped};
    const auto qw = qp_optimal_protocol(weak, 2e-3);
    const auto qs = qp_optimal_protocol(strong, 2e-3);
    const double jump_w = std::abs(qw.lambda[1] - 0.0);
    const double jump_s = std::abs(qs.lambda[1] - 0.0);
    CHECK(jump_s < jump_w);
}

TEST_CASE("normalisation scale of the non-Markovian qp optimum") {
    const auto m = drude_trap(1.0, 1.0, 0.5, 1.0);
    const auto qp = qp_optimal_protocol(m, 5e-3);
    CHECK(qp.summary.lambda_max > 6.0e3);
    CHECK(qp.summary.lambda_max < 1.4e4);
}

TEST_CASE("quadratic form is positive semidefinite on the optimisation block") {
    // the pinned boundary nodes carry only cross couplings (their diagonal is
    // empty by construction), so convexity is a statement about the interior
    for (const auto& m :
         {ohmic_trap(1.0, 1.0, 0.5, 1.0), drude_trap(1.0, 1.0, 0.5, 1.0),
          drude_trap(5.0, 0.2, 0.5, 1.0), ohmic_trap(1.0, 1.0, 0.5, 1.0, Regime::Overdamped)}) {
        const auto q = discretize_work(m, 5e-3);
        const Eigen::MatrixXd full = q.full_matrix();
        const auto ni = full.rows() - 2;
        const Eigen::MatrixXd interior = full.block(1, 1, ni, ni);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(interior);
        CHECK(es.eigenvalues().minCoeff() > -1e-10 * interior.norm());
    }
}

TEST_CASE("dual-route work evaluation: quadratic form vs time domain") {
    const auto m = drude_trap(1.0, 1.0, 0.5, 1.0);
    const auto p = protocol::Protocol::poly3(0.0, 1.0, 0.5, 0.0, 0.0, 50.0);
    const double w_time = trap_work(m, p, 1e-3).w;
    auto form_at = [&](double dg) {
        const auto q = discretize_work(m, dg);
        std::vector<double> nodes(static_cast<std::size_t>(std::llround(0.5 / dg)) + 1);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            nodes[i] = p.interior(static_cast<double>(i) * dg);
        return q.value_lambda(nodes);
    };
    const double w2 = form_at(2e-3);
    CHECK(std::abs(w2 - w_time) < 1e-4 * std::abs(w_time));
    // the two routes approach each other at the trapezoid's quadratic rate
    const double r = std::abs(form_at(4e-3) - w_time) / std::abs(w2 - w_time);
    CHECK(r > 3.0);
    CHECK(r < 5.0);
}

TEST_CASE("time-domain work of the qp optimum agrees with the form value") {
    const auto m = ohmic_trap(1.0, 1.0, 0.5, 1.0);
    const double dg = 2e-3;
    const auto qp = qp_optimal_protocol(m, dg);
    const auto pwl = protocol::Protocol::piecewise_linear(0.0, 1.0, 0.5, dg, qp.lambda);
    const double w_time = trap_work(m, pwl, dg).w;
    CHECK(w_time == doctest::Approx(qp.w).epsilon(0.01));
}

TEST_CASE("constant trap protocol does no work") {
    TrapModel m{1.0, SpectralDensity::ohmic(1.0, 1.0), 0.7, 0.7, 1.0, Regime::Underdamped};
    const auto p = protocol::Protocol::constant(0.7, 1.0);
    CHECK(trap_work(m, p, 1e-3).w == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("app-c routines demand lambda_i = 0") {
    TrapModel m{1.0, SpectralDensity::drude(1.0, 1.0), 0.3, 1.0, 0.5, Regime::Underdamped};
    CHECK_THROWS_AS(discretize_work(m, 1e-2), std::invalid_argument);
    CHECK_THROWS_AS(imp3_delta_optimal(m, 1000), std::invalid_argument);
}
