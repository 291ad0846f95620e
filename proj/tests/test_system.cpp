#include <doctest.h>

#include <cmath>

#include "minwork/system.hpp"

using namespace minwork;
using sys::TwoLevelModel;

TEST_CASE("hamiltonian values") {
    const auto driven = TwoLevelModel::driven(1.0, 0.0, 1.0);
    const Mat2 h0 = sys::hamiltonian(driven, 0.0);
    CHECK(std::real(h0.m00) == doctest::Approx(0.5));
    CHECK(std::real(h0.m11) == doctest::Approx(-0.5));
    CHECK(std::abs(h0.m01) == 0.0);
    CHECK(std::abs(trace(sys::hamiltonian(driven, 0.7))) < 1e-15);

    const auto ev = hermitian_eigenvalues(sys::hamiltonian(driven, 1.0));
    CHECK(ev[1] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(ev[0] == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-14));

    const auto tunable = TwoLevelModel::tunable(1.0, 1.0, 2.0);
    const Mat2 ht = sys::hamiltonian(tunable, 2.0);
    CHECK(std::real(ht.m00) == doctest::Approx(1.0));
    CHECK(std::real(ht.m11) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(TwoLevelModel::driven(0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("hamiltonian is linear in lambda") {
    for (auto m : {TwoLevelModel::driven(1.0, 0.0, 1.0), TwoLevelModel::tunable(1.3, 1.0, 2.0)}) {
        const Mat2 d = sys::hamiltonian_derivative(m);
        for (double l : {-0.4, 0.3, 1.7}) {
            const Mat2 fd = (1.0 / 0.2) * (sys::hamiltonian(m, l + 0.1) - sys::hamiltonian(m, l - 0.1));
            CHECK(max_abs(fd - d) < 1e-12);
        }
    }
}

TEST_CASE("eigenframe") {
    const auto driven = TwoLevelModel::driven(1.0, 0.0, 1.0);
    auto f = sys::eigenframe(driven, 1.0);
    CHECK(f.omega == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(f.theta == doctest::Approx(M_PI / 4.0).epsilon(1e-14));
    CHECK(f.sign == 1.0);

    f = sys::eigenframe(driven, 0.0);
    CHECK(f.omega == doctest::Approx(1.0));
    CHECK(f.theta == doctest::Approx(0.0));

    const auto tunable = TwoLevelModel::tunable(1.0, 1.0, 2.0);
    f = sys::eigenframe(tunable, 1.5);
    CHECK(f.omega == doctest::Approx(1.5));
    CHECK(f.theta == doctest::Approx(0.0));
    CHECK(f.sign == 1.0);
    f = sys::eigenframe(tunable, -0.5);
    CHECK(f.omega == doctest::Approx(0.5));
    CHECK(f.theta == doctest::Approx(M_PI));
    CHECK(f.sign == -1.0);

    CHECK_THROWS_AS(sys::eigenframe(tunable, 0.0), sys::DegenerateGap);
}

TEST_CASE("eigenframe rotation diagonalises H") {
    const auto driven = TwoLevelModel::driven(1.0, 0.0, 1.0);
    const auto tunable = TwoLevelModel::tunable(0.8, 1.0, 2.0);
    for (double l : {-1.2, -0.3, 0.4, 1.9}) {
        for (const auto& m : {driven, tunable}) {
            if (m.kind == TwoLevelModel::Kind::Tunable && l == 0.0) continue;
            const auto f = sys::eigenframe(m, l);
            const Mat2 u = sys::frame_rotation(f.theta);
            const Mat2 d = mul(mul(dagger(u), sys::hamiltonian(m, l)), u);
            CHECK(std::abs(d.m01) < 1e-12);
            CHECK(std::abs(d.m10) < 1e-12);
            CHECK(std::real(d.m00) == doctest::Approx(0.5 * f.omega).epsilon(1e-12));
            CHECK(std::real(d.m11) == doctest::Approx(-0.5 * f.omega).epsilon(1e-12));
        }
    }
}

TEST_CASE("gibbs state limits and Boltzmann weights") {
    const auto driven = TwoLevelModel::driven(1.0, 0.0, 1.0);

    const Mat2 cold = sys::gibbs_state(driven, 0.0, 1e3);
    CHECK(std::real(cold.m00) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::real(cold.m11) == doctest::Approx(1.0).epsilon(1e-12));

    const Mat2 hot = sys::gibbs_state(driven, 0.7, 1e-9);
    CHECK(std::real(hot.m00) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::real(hot.m11) == doctest::Approx(0.5).epsilon(1e-8));

    const Mat2 g = sys::gibbs_state(driven, 0.0, 1.0);
    const double z = std::exp(-0.5) + std::exp(0.5);
    CHECK(std::real(g.m00) == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-12));
    CHECK(std::real(g.m11) == doctest::Approx(std::exp(0.5) / z).epsilon(1e-12));
    CHECK(std::abs(trace(g) - 1.0) < 1e-14);
}
