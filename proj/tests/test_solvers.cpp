#include <doctest.h>

#include <cmath>
#include <random>

#include "ifpc/solvers.hpp"
#include "ifpc/state_space.hpp"
#include "test_helpers.hpp"

using namespace ifpc;
using namespace ifpc::testing;

TEST_CASE("lyapunov scalar and diagonal closed forms") {
    Matrix p = solve_lyapunov(mat({{-1.0}}), mat({{1.0}}));
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    Matrix a = mat({{-1.0, 0.0}, {0.0, -2.0}});
    Matrix q = Matrix::Identity(2, 2);
    Matrix p2 = solve_lyapunov(a, q);
    CHECK(p2(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p2(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p2(0, 1) == doctest::Approx(0.0));

    Matrix pz = solve_lyapunov(a, Matrix::Zero(2, 2));
    CHECK(pz.norm() == doctest::Approx(0.0));
}

TEST_CASE("lyapunov rejects non-Hurwitz A") {
    CHECK_THROWS_AS(solve_lyapunov(mat({{1.0}}), mat({{1.0}})), SolverError);
    CHECK_THROWS_AS(solve_lyapunov(mat({{0.0}}), mat({{1.0}})), SolverError);
}

TEST_CASE("lyapunov residual property on random instances") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto sys = random_stable(rng, 2 + trial % 7, 1, 1);
        std::normal_distribution<double> dist(0.0, 1.0);
        const Index n = sys.n();
        Matrix w(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) w(i, j) = dist(rng);
        Matrix q = w + w.transpose();
        Matrix p = solve_lyapunov(sys.A, q);
        CHECK((p - p.transpose()).norm() <= 1e-12 * std::max(1.0, p.norm()));
        const double res = (sys.A * p + p * sys.A.transpose() + q).norm();
        CHECK(res <= 1e-8 * (sys.A.norm() * p.norm() + q.norm()));
    }
}

TEST_CASE("care scalar closed forms") {
    // A=1,B=1,Q=1,R=1: P^2 - 2P - 1 = 0, stabilizing root 1 + sqrt(2).
    Matrix p = solve_care(mat({{1.0}}), mat({{1.0}}), mat({{1.0}}),
                          mat({{1.0}}));
    CHECK(p(0, 0) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-10));

    // A=0: P^2 = 1, stabilizing P = 1, closed-loop pole -1.
    Matrix p2 = solve_care(mat({{0.0}}), mat({{1.0}}), mat({{1.0}}),
                           mat({{1.0}}));
    CHECK(p2(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    // Q = 0 with Hurwitz A: P = 0.
    Matrix p3 = solve_care(mat({{-3.0}}), mat({{1.0}}), mat({{0.0}}),
                           mat({{1.0}}));
    CHECK(p3(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("care rejects problems without a stabilizing solution") {
    // Undamped oscillator with no actuation authority and no state cost:
    // Hamiltonian eigenvalues sit on the imaginary axis.
    Matrix a = mat({{0.0, 1.0}, {-1.0, 0.0}});
    Matrix b = Matrix::Zero(2, 1);
    Matrix q = Matrix::Zero(2, 2);
    Matrix r = mat({{1.0}});
    CHECK_THROWS_AS(solve_care(a, b, q, r), SolverError);
    CHECK_THROWS_AS(solve_care(a, mat({{1.0}, {0.0}}), q, mat({{0.0}})),
                    SolverError);
}

TEST_CASE("care residual and closed-loop stability on random instances") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> dist(0.0, 1.0);
    int solved = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 2 + static_cast<Index>(trial % 7);  // n <= 8
        const Index m = 1 + static_cast<Index>(trial % 3);
        // Stable A guarantees stabilizability regardless of B.
        auto sys = random_stable(rng, n, m, 1);
        Matrix w(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) w(i, j) = dist(rng);
        Matrix q = w.transpose() * w;  // PSD
        Matrix r = Matrix::Identity(m, m);

        Matrix p = solve_care(sys.A, sys.B, q, r);
        ++solved;
        CHECK((p - p.transpose()).norm() <= 1e-10 * std::max(1.0, p.norm()));
        const Matrix res = sys.A.transpose() * p + p * sys.A -
                           p * sys.B * sys.B.transpose() * p + q;
        const double scale = (sys.A.transpose() * p).norm() +
                             (p * sys.A).norm() +
                             (p * sys.B * sys.B.transpose() * p).norm() +
                             q.norm();
        CHECK(res.norm() <= 1e-8 * std::max(scale, 1.0));
        const Matrix a_cl = sys.A - sys.B * sys.B.transpose() * p;
        CHECK(spectral_abscissa(a_cl) < 0.0);
    }
    CHECK(solved == 100);
}

TEST_CASE("ric_schur handles the standard care Hamiltonian") {
    Matrix h(2, 2);
    h << 1.0, -1.0, -1.0, -1.0;
    auto x = ric_schur(h);
    REQUIRE(x.has_value());
    CHECK((*x)(0, 0) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-8));

    // Purely imaginary Hamiltonian spectrum: no stable n-dim subspace.
    Matrix h2 = mat({{0.0, 1.0}, {-1.0, 0.0}});
    CHECK_FALSE(ric_schur(h2).has_value());
}
