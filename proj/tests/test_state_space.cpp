#include <doctest.h>

#include "ifpc/frequency.hpp"
#include "ifpc/state_space.hpp"
#include "test_helpers.hpp"

using namespace ifpc;
using namespace ifpc::testing;

TEST_CASE("state-space validation rejects malformed systems") {
    Matrix a = mat({{-1.0, 0.0}, {0.0, -2.0}});
    Matrix b = mat({{1.0}, {1.0}});
    Matrix c = mat({{1.0, 0.0}});
    Matrix d = mat({{0.0}});

    CHECK_NOTHROW(StateSpace(a, b, c, d));
    CHECK_THROWS_AS(StateSpace(mat({{-1.0, 0.0}}), b, c, d),
                    std::invalid_argument);
    CHECK_THROWS_AS(StateSpace(a, mat({{1.0}}), c, d), std::invalid_argument);
    CHECK_THROWS_AS(StateSpace(a, b, mat({{1.0}}), d), std::invalid_argument);
    CHECK_THROWS_AS(StateSpace(a, b, c, mat({{0.0, 0.0}})),
                    std::invalid_argument);

    Matrix bad = a;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(StateSpace(bad, b, c, d), std::invalid_argument);

    CHECK_THROWS_AS(StateSpace(a, b, c, d, {"u1", "u2"}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(StateSpace(a, b, c, d, {}, {"y", "y"}),
                    std::invalid_argument);
    // ... wrong arity even when unique
    Matrix c2 = mat({{1.0, 0.0}, {0.0, 1.0}});
    Matrix d2 = mat({{0.0}, {0.0}});
    CHECK_NOTHROW(StateSpace(a, b, c2, d2, {"u"}, {"y1", "y2"}));
}

TEST_CASE("series composes static gains and dynamic blocks") {
    auto two = static_system(mat({{2.0}}));
    auto three = static_system(mat({{3.0}}));
    auto six = series(two, three);
    CHECK(six.n() == 0);
    CHECK(six.D(0, 0) == doctest::Approx(6.0));

    // 1/(s+1) into 1/(s+2): DC gain 1 * 1/2 = 0.5.
    auto g1 = first_order(1.0, 1.0);
    auto g2 = first_order(1.0, 2.0);
    auto cascade = series(g1, g2);
    CHECK(cascade.n() == 2);
    CHECK(dc_gain(cascade)(0, 0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(series(g1, static_system(mat({{1.0, 0.0}}))),
                    std::invalid_argument);
}

TEST_CASE("series frequency response equals pointwise product") {
    std::mt19937_64 rng(7);
    auto grid = make_grid(0.01, 100.0, 10);
    for (int trial = 0; trial < 5; ++trial) {
        auto g1 = random_stable(rng, 3, 2, 2, true);
        auto g2 = random_stable(rng, 4, 2, 3, true);
        auto cascade = series(g1, g2);
        auto r1 = freq_response(g1, grid);
        auto r2 = freq_response(g2, grid);
        auto rc = freq_response(cascade, grid);
        for (size_t i = 0; i < rc.size(); ++i) {
            const MatrixC expect = r2[i] * r1[i];
            const double scale = std::max(1.0, expect.norm());
            CHECK((rc[i] - expect).norm() / scale < 1e-8);
        }
    }
}

TEST_CASE("feedback matches closed-form results") {
    // Static unity loop: 1/(1+1) = 0.5.
    auto one = static_system(mat({{1.0}}));
    auto loop = feedback(one, one, -1);
    CHECK(loop.D(0, 0) == doctest::Approx(0.5));

    // G = 1/(s+1), K = 1: closed loop 1/(s+2).
    auto g = first_order(1.0, 1.0);
    auto cl = feedback(g, static_system(mat({{1.0}})), -1);
    auto ps = poles(cl);
    REQUIRE(ps.size() == 1);
    CHECK(ps(0).real() == doctest::Approx(-2.0));
    CHECK(ps(0).imag() == doctest::Approx(0.0));
    CHECK(dc_gain(cl)(0, 0) == doctest::Approx(0.5));

    // Algebraic loop: D_G * D_K = 1 with positive feedback.
    auto dg = static_system(mat({{1.0}}));
    auto dk = static_system(mat({{-1.0}}));
    CHECK_THROWS_AS(feedback(dg, dk, -1), IllPosedError);
}

TEST_CASE("feedback satisfies the loop equation on a grid") {
    std::mt19937_64 rng(21);
    auto grid = make_grid(0.01, 100.0, 10);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = random_stable(rng, 4, 2, 2, true);
        auto k = random_stable(rng, 3, 2, 2, true);
        StateSpace cl;
        try {
            cl = feedback(g, k, -1);
        } catch (const IllPosedError&) {
            continue;  // randomly singular loop: skip
        }
        auto rg = freq_response(g, grid);
        auto rk = freq_response(k, grid);
        auto rc = freq_response(cl, grid);
        for (size_t i = 0; i < rc.size(); ++i) {
            const MatrixC expect =
                rg[i] * (MatrixC::Identity(2, 2) + rk[i] * rg[i]).inverse();
            const double scale = std::max(1.0, expect.norm());
            CHECK((rc[i] - expect).norm() / scale < 1e-8);
        }
    }
}

TEST_CASE("select_channels restricts channels and keeps the state") {
    std::mt19937_64 rng(3);
    auto g = random_stable(rng, 5, 3, 3, true);
    auto all = select_channels(g, {0, 1, 2}, {0, 1, 2});
    CHECK(all.A.isApprox(g.A));
    CHECK(all.B.isApprox(g.B));
    CHECK(all.C.isApprox(g.C));
    CHECK(all.D.isApprox(g.D));

    auto diag = static_system(mat({{2.0, 0.0}, {0.0, 1.0}}));
    auto second = select_channels(diag, {1}, {1});
    CHECK(second.D(0, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(select_channels(g, {0, 3}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(select_channels(g, {0, 0}, {0}), std::invalid_argument);

    // Labels ride along.
    StateSpace labeled(g.A, g.B, g.C, g.D, {"u0", "u1", "u2"},
                       {"y0", "y1", "y2"});
    auto sel = select_channels(labeled, {2, 0}, {1});
    REQUIRE(sel.input_labels.size() == 2);
    CHECK(sel.input_labels[0] == "u2");
    CHECK(sel.input_labels[1] == "u0");
    CHECK(sel.output_labels[0] == "y1");
}

TEST_CASE("complementary channel selection rebuilds the original response") {
    std::mt19937_64 rng(11);
    auto g = random_stable(rng, 4, 4, 5, true);
    auto grid = make_grid(0.1, 10.0, 5);

    const std::vector<Index> in_a{0, 2}, in_b{1, 3};
    const std::vector<Index> out_a{0, 1, 4}, out_b{2, 3};
    auto gaa = select_channels(g, in_a, out_a);
    auto gab = select_channels(g, in_b, out_a);
    auto gba = select_channels(g, in_a, out_b);
    auto gbb = select_channels(g, in_b, out_b);

    auto rfull = freq_response(g, grid);
    auto raa = freq_response(gaa, grid);
    auto rab = freq_response(gab, grid);
    auto rba = freq_response(gba, grid);
    auto rbb = freq_response(gbb, grid);
    for (size_t t = 0; t < rfull.size(); ++t) {
        MatrixC rebuilt(5, 4);
        for (size_t i = 0; i < out_a.size(); ++i) {
            for (size_t j = 0; j < in_a.size(); ++j)
                rebuilt(out_a[i], in_a[j]) = raa[t](i, j);
            for (size_t j = 0; j < in_b.size(); ++j)
                rebuilt(out_a[i], in_b[j]) = rab[t](i, j);
        }
        for (size_t i = 0; i < out_b.size(); ++i) {
            for (size_t j = 0; j < in_a.size(); ++j)
                rebuilt(out_b[i], in_a[j]) = rba[t](i, j);
            for (size_t j = 0; j < in_b.size(); ++j)
                rebuilt(out_b[i], in_b[j]) = rbb[t](i, j);
        }
        CHECK((rebuilt - rfull[t]).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("interconnect reproduces series and feedback") {
    std::mt19937_64 rng(5);
    auto grid = make_grid(0.01, 100.0, 8);
    auto g1 = random_stable(rng, 3, 2, 2, true);
    auto g2 = random_stable(rng, 2, 2, 2, true);

    // Series through the wiring engine: u_g2 = y_g1, ext in -> g1, out g2.
    {
        Matrix M = Matrix::Zero(4, 4);
        M.block(2, 0, 2, 2).setIdentity();
        Matrix N = Matrix::Zero(4, 2);
        N.topRows(2).setIdentity();
        Matrix P = Matrix::Zero(2, 4);
        P.rightCols(2).setIdentity();
        Matrix Q = Matrix::Zero(2, 2);
        auto via_engine = interconnect({g1, g2}, M, N, P, Q);
        auto direct = series(g1, g2);
        CHECK(max_response_error(via_engine, direct, grid) < 1e-9);
    }

    // Negative feedback through the wiring engine.
    {
        Matrix M = Matrix::Zero(4, 4);
        M.block(0, 2, 2, 2) = -Matrix::Identity(2, 2);  // u_g <- -y_k
        M.block(2, 0, 2, 2).setIdentity();              // u_k <- y_g
        Matrix N = Matrix::Zero(4, 2);
        N.topRows(2).setIdentity();
        Matrix P = Matrix::Zero(2, 4);
        P.leftCols(2).setIdentity();
        Matrix Q = Matrix::Zero(2, 2);
        auto via_engine = interconnect({g1, g2}, M, N, P, Q);
        auto direct = feedback(g1, g2, -1);
        CHECK(max_response_error(via_engine, direct, grid) < 1e-9);
    }

    // Ill-posed wiring: unit feedthrough fed straight back to itself.
    {
        auto unit = static_system(mat({{1.0}}));
        Matrix M = mat({{1.0}});
        Matrix N = mat({{1.0}});
        Matrix P = mat({{1.0}});
        Matrix Q = mat({{0.0}});
        CHECK_THROWS_AS(interconnect({unit}, M, N, P, Q), IllPosedError);
    }
}

TEST_CASE("add/subtract/append behave as block algebra") {
    auto g1 = first_order(2.0, 1.0);
    auto g2 = first_order(1.0, 4.0);
    CHECK(dc_gain(add(g1, g2))(0, 0) == doctest::Approx(2.0 + 0.25));
    CHECK(dc_gain(subtract(g1, g2))(0, 0) == doctest::Approx(2.0 - 0.25));

    auto both = append(g1, g2);
    CHECK(both.n() == 2);
    CHECK(both.m() == 2);
    CHECK(both.p() == 2);
    Matrix dc = dc_gain(both);
    CHECK(dc(0, 0) == doctest::Approx(2.0));
    CHECK(dc(1, 1) == doctest::Approx(0.25));
    CHECK(dc(0, 1) == doctest::Approx(0.0));
    CHECK(dc(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("extract_submodel keeps only the chosen states") {
    std::mt19937_64 rng(13);
    auto g = random_stable(rng, 6, 3, 3, false);
    auto sub = extract_submodel(g, {1, 4}, {0, 2}, {1});
    CHECK(sub.n() == 2);
    CHECK(sub.m() == 2);
    CHECK(sub.p() == 1);
    CHECK(sub.A(0, 0) == g.A(1, 1));
    CHECK(sub.A(0, 1) == g.A(1, 4));
    CHECK(sub.A(1, 0) == g.A(4, 1));
    CHECK(sub.B(0, 1) == g.B(1, 2));
    CHECK(sub.C(0, 1) == g.C(1, 4));
}

TEST_CASE("stability test uses a strict margin") {
    CHECK(is_stable(first_order(1.0, 1.0)));

    Matrix a = mat({{0.0, 1.0}, {-1.0, 0.0}});
    StateSpace osc(a, Matrix::Zero(2, 1), Matrix::Zero(1, 2),
                   Matrix::Zero(1, 1));
    CHECK_FALSE(is_stable(osc));

    Matrix a3 = Matrix::Zero(3, 3);
    a3.diagonal() << -1.0, -2.0, -0.001;
    StateSpace slow(a3, Matrix::Zero(3, 1), Matrix::Zero(1, 3),
                    Matrix::Zero(1, 1));
    CHECK(is_stable(slow, 1e-9));
    CHECK_FALSE(is_stable(slow, 0.01));
}
