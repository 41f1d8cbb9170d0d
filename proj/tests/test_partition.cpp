#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ifpc/fitness.hpp"
#include "ifpc/frequency.hpp"
#include "ifpc/norms.hpp"
#include "ifpc/partition.hpp"
#include "ifpc/simulate.hpp"
#include "test_helpers.hpp"

using namespace ifpc;
using namespace ifpc::testing;

namespace {

/// Synthetic airframe/engine model whose centralized law is built to be
/// structurally decoupled: the engine-cross action lies in the null
/// direction of the engine output and the engine feedback in the null
/// direction of the interface output, so an ideal interface tracker can
/// reproduce the centralized loop exactly in the high-gain limit.
struct DecoupledModel {
    PartitionedPlant plant;
    StateSpace k;          // centralized static law [e_a,e_e,y_a,y_e] -> U
    StateSpace tc;         // centralized tracking loop
    StateSpace engine_ba;  // engine block, U_e -> [y_e; y_ea]
    BlockReduction ka;     // flight-controller block (full order kept)
    BlockReduction kee;    // engine-feedback block
};

DecoupledModel decoupled_model() {
    DecoupledModel m;
    const Matrix A = mat({{-1, 0, 0.5}, {0, -2, 0}, {0, 0, -3}});
    const Matrix B = mat({{1, 0, 0}, {0, 1, 0.3}, {0, 0.2, 1}});
    StateSpace gprime{A, B, Matrix::Identity(3, 3), Matrix::Zero(3, 3),
                      {"U_a", "U_e1", "U_e2"},
                      {"ya", "ye", "yea"}};
    IoAssignment io;
    io.airframe_inputs = {0};
    io.engine_inputs = {1, 2};
    io.airframe_outputs = {0};
    io.engine_outputs = {1};
    io.interface_outputs = {2};
    m.plant = assign_io(gprime, io);

    // y_e-null actuator direction [-0.3; 1], y_ea-null direction [1; -0.2].
    m.k = static_system(
        mat({{4, 0, 0, 0}, {-0.6, 6, 0, 0}, {2, -1.2, 0, 0}}));
    m.tc = assemble_tc(select_channels(gprime, {0, 1, 2}, {0, 1}), m.k);
    m.engine_ba = extract_submodel(gprime, {1, 2}, {1, 2}, {1, 2});
    m.ka = build_airframe_sub(m.k, m.engine_ba, m.plant.dims(), 2);
    m.kee = extract_kee(m.k, {1}, {3}, {1, 2}, 1);
    return m;
}

/// Interface tracker along the y_e-null direction: [-0.3; 1]*(kp + gi/s).
StateSpace pi_tracker(double kp, double gi) {
    return StateSpace{mat({{0}}), mat({{1}}),
                      mat({{-0.3 * gi}, {gi}}),
                      mat({{-0.3 * kp}, {kp}})};
}

double worst_gap(const StateSpace& g1, const StateSpace& g2,
                 const FrequencyGrid& grid) {
    const auto r1 = freq_response(g1, grid);
    const auto r2 = freq_response(g2, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i)
        worst = std::max(worst, sigma_max_of(r1[i] - r2[i]));
    return worst;
}

} // namespace

TEST_CASE("channel assignment validates and partitions the plant") {
    std::mt19937_64 rng(24601);
    const StateSpace base = random_stable(rng, 4, 3, 4, true);
    IoAssignment io;
    io.airframe_inputs = {2};
    io.engine_inputs = {0, 1};
    io.airframe_outputs = {1, 3};
    io.engine_outputs = {0};
    io.interface_outputs = {2};

    const PartitionedPlant pp = assign_io(base, io);
    const PartitionDims d = pp.dims();
    CHECK(d.n_ua == 1);
    CHECK(d.n_ue == 2);
    CHECK(d.n_ya == 2);
    CHECK(d.n_ye == 1);
    CHECK(d.n_yea == 1);

    // The six blocks reassemble the base response entry for entry.
    const FrequencyGrid grid = make_grid(0.05, 50.0, 10);
    const auto rbase = freq_response(base, grid);
    const auto raa = freq_response(pp.g_aa(), grid);
    const auto rae = freq_response(pp.g_ae(), grid);
    const auto rea = freq_response(pp.g_ea(), grid);
    const auto ree = freq_response(pp.g_ee(), grid);
    const auto reaa = freq_response(pp.g_ea_a(), grid);
    const auto reae = freq_response(pp.g_ea_e(), grid);
    for (std::size_t w = 0; w < rbase.size(); ++w) {
        for (std::size_t i = 0; i < io.airframe_outputs.size(); ++i) {
            for (std::size_t j = 0; j < io.airframe_inputs.size(); ++j)
                CHECK(std::abs(raa[w](i, j) -
                               rbase[w](io.airframe_outputs[i],
                                        io.airframe_inputs[j])) < 1e-13);
            for (std::size_t j = 0; j < io.engine_inputs.size(); ++j)
                CHECK(std::abs(rae[w](i, j) -
                               rbase[w](io.airframe_outputs[i],
                                        io.engine_inputs[j])) < 1e-13);
        }
        for (std::size_t i = 0; i < io.engine_outputs.size(); ++i) {
            for (std::size_t j = 0; j < io.airframe_inputs.size(); ++j)
                CHECK(std::abs(rea[w](i, j) -
                               rbase[w](io.engine_outputs[i],
                                        io.airframe_inputs[j])) < 1e-13);
            for (std::size_t j = 0; j < io.engine_inputs.size(); ++j)
                CHECK(std::abs(ree[w](i, j) -
                               rbase[w](io.engine_outputs[i],
                                        io.engine_inputs[j])) < 1e-13);
        }
        for (std::size_t i = 0; i < io.interface_outputs.size(); ++i) {
            for (std::size_t j = 0; j < io.airframe_inputs.size(); ++j)
                CHECK(std::abs(reaa[w](i, j) -
                               rbase[w](io.interface_outputs[i],
                                        io.airframe_inputs[j])) < 1e-13);
            for (std::size_t j = 0; j < io.engine_inputs.size(); ++j)
                CHECK(std::abs(reae[w](i, j) -
                               rbase[w](io.interface_outputs[i],
                                        io.engine_inputs[j])) < 1e-13);
        }
    }

    SUBCASE("an all-airframe assignment is a valid degenerate partition") {
        IoAssignment all;
        all.airframe_inputs = {0, 1, 2};
        all.airframe_outputs = {0, 1, 2, 3};
        const PartitionedPlant deg = assign_io(base, all);
        CHECK(deg.dims().n_ue == 0);
        CHECK(deg.g_ee().p() == 0);
        CHECK(deg.g_aa().m() == 3);
    }
    SUBCASE("duplicated and missing channels are rejected") {
        IoAssignment bad = io;
        bad.engine_inputs = {0, 2};  // input 2 assigned twice
        CHECK_THROWS_AS(assign_io(base, bad), std::invalid_argument);
        bad = io;
        bad.engine_outputs = {};  // output 0 unassigned
        CHECK_THROWS_AS(assign_io(base, bad), std::invalid_argument);
        bad = io;
        bad.interface_outputs = {7};  // out of range
        CHECK_THROWS_AS(assign_io(base, bad), std::invalid_argument);
    }
}

TEST_CASE("labeled preset assignment resolves scrambled channel order") {
    const Matrix d = Matrix::Zero(6, 4);
    const StateSpace g =
        static_system(d, {"W_f", "delta_tv", "A_8", "A_78"},
                      {"F_x", "V", "N_2P", "q_v", "R", "T_M"});
    const IoAssignment io = preset_assignment(g);
    CHECK(io.airframe_inputs == std::vector<Index>{1});
    CHECK(io.engine_inputs == std::vector<Index>{0, 3, 2});
    CHECK(io.airframe_outputs == std::vector<Index>{1, 3});
    CHECK(io.engine_outputs == std::vector<Index>{2, 4});
    CHECK(io.interface_outputs == std::vector<Index>{0, 5});
    CHECK_NOTHROW(assign_io(g, io));

    const StateSpace missing =
        static_system(Matrix::Zero(6, 3), {"W_f", "delta_tv", "A_78"},
                      {"F_x", "V", "N_2P", "q_v", "R", "T_M"});
    CHECK_THROWS_AS(preset_assignment(missing), std::invalid_argument);
}

TEST_CASE("interface screening ranks candidates by step dominance") {
    SUBCASE("static gains select only the dominant candidate") {
        Matrix d(3, 1);
        d << 1.0, 0.2, 0.1;
        const StateSpace t = static_system(d);
        const InterfaceSelection sel =
            select_interface(t, {0, 1, 2}, {0}, 0.5, 2.0);
        CHECK(sel.selected == std::vector<Index>{0});
        CHECK(sel.peaks.rows() == 3);
        CHECK(sel.peaks.cols() == 1);
        CHECK(sel.peaks(0, 0) == doctest::Approx(1.0));
        CHECK(sel.peaks(1, 0) == doctest::Approx(0.2));
        CHECK(sel.peaks(2, 0) == doctest::Approx(0.1));

        // A looser ratio keeps the runner-up as well.
        const InterfaceSelection loose =
            select_interface(t, {0, 1, 2}, {0}, 0.2, 2.0);
        CHECK(loose.selected == std::vector<Index>{0, 1});
    }
    SUBCASE("transient peaks count, not just the settled value") {
        // Candidate 0: unit lag settling to 1. Candidate 1: washout with
        // peak 0.3 at t = 0 and zero settled value.
        const StateSpace lag = first_order(1.0, 1.0);
        const StateSpace washout{mat({{-1}}), mat({{1}}), mat({{-0.3}}),
                                 mat({{0.3}})};
        const StateSpace t = append(lag, washout);
        // Both candidates driven by the same (first) input.
        const StateSpace fanned =
            series(static_system(mat({{1}, {1}})), t);
        const InterfaceSelection sel =
            select_interface(fanned, {0, 1}, {0}, 0.5, 10.0);
        CHECK(sel.selected == std::vector<Index>{0});
        CHECK(sel.peaks(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(sel.peaks(1, 0) == doctest::Approx(0.3).epsilon(1e-6));
        const InterfaceSelection both =
            select_interface(fanned, {0, 1}, {0}, 0.25, 10.0);
        CHECK(both.selected == std::vector<Index>{0, 1});
    }
    SUBCASE("argument validation") {
        const StateSpace t = static_system(Matrix::Identity(2, 2));
        CHECK_THROWS_AS(select_interface(t, {}, {0}), std::invalid_argument);
        CHECK_THROWS_AS(select_interface(t, {0}, {}), std::invalid_argument);
        CHECK_THROWS_AS(select_interface(t, {0}, {0}, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(select_interface(t, {0}, {0}, 1.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(select_interface(t, {2}, {0}), std::invalid_argument);
        CHECK_THROWS_AS(select_interface(t, {0}, {2}), std::invalid_argument);
    }
}

TEST_CASE("flight-controller block embeds the engine model") {
    std::mt19937_64 rng(700);
    PartitionDims d;
    d.n_ua = 1;
    d.n_ue = 3;
    d.n_ya = 2;
    d.n_ye = 2;
    d.n_yea = 1;
    const StateSpace k = random_stable(rng, 6, 8, 4, true);
    const StateSpace eng = random_stable(rng, 2, 3, 3, false);

    const BlockReduction full = build_airframe_sub(k, eng, d, 8);
    CHECK(full.full.n() == 8);  // controller states plus engine states
    CHECK(full.full.m() == 4);  // [airframe errors; airframe outputs]
    CHECK(full.full.p() == 2);  // [airframe actuators; interface command]
    CHECK_FALSE(full.reduction_applied);
    CHECK(worst_gap(full.full, full.reduced, make_grid(0.01, 100.0, 10)) <
          1e-12);

    // Hand-solved frequency-domain elimination of the embedded engine
    // loop (engine command zero, so the engine error input sees -y_e).
    const FrequencyGrid grid = make_grid(0.1, 30.0, 6);
    for (double w : grid.points) {
        const MatrixC kf = freq_response_at(k, w);
        const MatrixC ef = freq_response_at(eng, w);
        const MatrixC kua = kf.topRows(1);
        const MatrixC kue = kf.bottomRows(3);
        MatrixC wmat(3, 4), dk(3, 2), ua_dir(1, 4), dk_a(1, 2);
        wmat << kue.middleCols(0, 2), kue.middleCols(4, 2);
        dk = kue.middleCols(6, 2) - kue.middleCols(2, 2);
        ua_dir << kua.middleCols(0, 2), kua.middleCols(4, 2);
        dk_a = kua.middleCols(6, 2) - kua.middleCols(2, 2);
        const MatrixC eye = ef.topRows(2);
        const MatrixC eyea = ef.bottomRows(1);
        const MatrixC ye =
            (MatrixC::Identity(2, 2) - eye * dk).lu().solve(eye * wmat);
        const MatrixC ue = wmat + dk * ye;
        MatrixC expected(2, 4);
        expected.row(0) = ua_dir + dk_a * ye;
        expected.row(1) = eyea * ue;
        const MatrixC actual = freq_response_at(full.full, w);
        CHECK((actual - expected).cwiseAbs().maxCoeff() < 1e-8);
    }

    SUBCASE("truncation keeps the block stable at the target order") {
        const BlockReduction red = build_airframe_sub(k, eng, d, 4);
        CHECK(red.stable);
        CHECK(red.reduction_applied);
        CHECK(red.reduced.n() <= 4);
        CHECK(is_stable(red.reduced));
        CHECK(red.hankel_svs.size() == 8);
    }
    SUBCASE("dimension mismatches are rejected") {
        CHECK_THROWS_AS(build_airframe_sub(random_stable(rng, 2, 7, 4), eng,
                                           d, 4),
                        std::invalid_argument);
        CHECK_THROWS_AS(build_airframe_sub(k, random_stable(rng, 2, 2, 3), d,
                                           4),
                        std::invalid_argument);
        CHECK_THROWS_AS(build_airframe_sub(k, random_stable(rng, 2, 3, 2), d,
                                           4),
                        std::invalid_argument);
    }
}

TEST_CASE("flight-controller block refuses reduction when unstable") {
    // Static law feeding the engine output straight back with gain 2
    // through an engine gain of 3: the embedded loop pole sits at +5.
    PartitionDims d;
    d.n_ua = 1;
    d.n_ue = 1;
    d.n_ya = 1;
    d.n_ye = 1;
    d.n_yea = 1;
    const StateSpace k =
        static_system(mat({{0, 0, 0, 0}, {0, 0, 0, 2}}));
    const StateSpace eng{mat({{-1}}), mat({{1}}), mat({{3}, {1}}),
                         Matrix::Zero(2, 1)};
    const BlockReduction out = build_airframe_sub(k, eng, d, 1);
    CHECK_FALSE(out.stable);
    CHECK_FALSE(out.reduction_applied);
    CHECK(out.reduced.n() == out.full.n());
    CHECK(spectral_abscissa(out.full.A) == doctest::Approx(5.0));
}

TEST_CASE("lead bank matches its frequency landmarks") {
    const double a = 10.0, b = 30.0;
    const StateSpace lead = build_lead(a, b, 2);
    CHECK(lead.n() == 2);  // one state per channel
    CHECK(is_stable(lead));

    // Unit DC gain, high-frequency gain b/a, and geometric-mean gain
    // sqrt(b/a) with peak phase asin((b-a)/(b+a)).
    const Matrix dc = dc_gain(lead);
    CHECK((dc - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixC hf = freq_response_at(lead, 1e7);
    CHECK(std::abs(hf(0, 0)) == doctest::Approx(b / a).epsilon(1e-6));
    const MatrixC mid = freq_response_at(lead, std::sqrt(a * b));
    CHECK(std::abs(mid(1, 1)) ==
          doctest::Approx(std::sqrt(b / a)).epsilon(1e-12));
    CHECK(std::arg(mid(0, 0)) ==
          doctest::Approx(std::asin((b - a) / (b + a))).epsilon(1e-12));
    CHECK(std::abs(mid(0, 1)) == 0.0);  // diagonal bank

    // Gain rises monotonically through the transition band.
    const FrequencyGrid grid = make_grid(1.0, 300.0, 10);
    double prev = 0.0;
    for (double w : grid.points) {
        const double gain = std::abs(freq_response_at(lead, w)(0, 0));
        CHECK(gain >= prev);
        prev = gain;
    }
    CHECK_THROWS_AS(build_lead(10.0, 10.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_lead(30.0, 10.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_lead(0.0, 10.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_lead(10.0, 30.0, 0), std::invalid_argument);
}

TEST_CASE("engine-feedback block extraction selects and truncates") {
    std::mt19937_64 rng(4242);
    const StateSpace k = random_stable(rng, 5, 8, 4, true);
    const std::vector<Index> err_in{2, 3}, meas_in{6, 7}, outs{1, 2, 3};

    const BlockReduction full = extract_kee(k, err_in, meas_in, outs, 5);
    CHECK(full.full.n() == 5);
    CHECK(full.full.m() == 4);
    CHECK(full.full.p() == 3);
    CHECK(full.stable);
    CHECK_FALSE(full.reduction_applied);

    // The block is the plain channel selection of the controller.
    const FrequencyGrid grid = make_grid(0.05, 50.0, 8);
    const auto rk = freq_response(k, grid);
    const auto rb = freq_response(full.full, grid);
    const std::vector<Index> in_all{2, 3, 6, 7};
    for (std::size_t w = 0; w < rk.size(); ++w)
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 4; ++j)
                CHECK(std::abs(rb[w](i, j) - rk[w](outs[i], in_all[j])) <
                      1e-13);

    const BlockReduction red = extract_kee(k, err_in, meas_in, outs, 2);
    CHECK(red.reduction_applied);
    CHECK(red.reduced.n() <= 2);
    CHECK(is_stable(red.reduced));
    CHECK(red.hankel_svs.size() == 5);

    SUBCASE("an unstable controller refuses reduction") {
        StateSpace un = k;
        un.A += (std::abs(spectral_abscissa(k.A)) + 0.5) *
                Matrix::Identity(5, 5);
        const BlockReduction out = extract_kee(un, err_in, meas_in, outs, 2);
        CHECK_FALSE(out.stable);
        CHECK_FALSE(out.reduction_applied);
        CHECK(out.reduced.n() == 5);
    }
    SUBCASE("index validation") {
        CHECK_THROWS_AS(extract_kee(k, {2, 3}, {3, 7}, outs, 2),
                        std::invalid_argument);  // input listed twice
        CHECK_THROWS_AS(extract_kee(k, {2, 3}, {6}, outs, 2),
                        std::invalid_argument);  // unpaired error channel
        CHECK_THROWS_AS(extract_kee(k, {2, 8}, {6, 7}, outs, 2),
                        std::invalid_argument);
        CHECK_THROWS_AS(extract_kee(k, err_in, meas_in, {4}, 2),
                        std::invalid_argument);
    }
}

TEST_CASE("controller bundle validates block dimensions") {
    const DecoupledModel m = decoupled_model();
    DecentralizedController ctrl;
    ctrl.ka_bar = m.ka.reduced;
    ctrl.k_lead = identity_system(1);
    ctrl.k_t = pi_tracker(20.0, 200.0);
    ctrl.k_ee = m.kee.reduced;
    ctrl.kt_feedback = KtFeedback::kErrorOnly;
    CHECK_NOTHROW(ctrl.check_dimensions(m.plant));

    ctrl.update_stability();
    CHECK(ctrl.ka_bar_stable);
    CHECK(ctrl.k_lead_stable);
    CHECK_FALSE(ctrl.k_t_stable);  // integrator pole on the axis
    CHECK(ctrl.k_ee_stable);

    DecentralizedController bad = ctrl;
    bad.k_lead = identity_system(2);
    CHECK_THROWS_AS(bad.check_dimensions(m.plant), std::invalid_argument);
    bad = ctrl;
    bad.kt_feedback = KtFeedback::kErrorAndMeasurement;  // k_t now too narrow
    CHECK_THROWS_AS(bad.check_dimensions(m.plant), std::invalid_argument);
    bad = ctrl;
    bad.ka_bar = static_system(Matrix::Zero(2, 3));
    CHECK_THROWS_AS(bad.check_dimensions(m.plant), std::invalid_argument);
    bad = ctrl;
    bad.k_ee = static_system(Matrix::Zero(1, 2));
    CHECK_THROWS_AS(bad.check_dimensions(m.plant), std::invalid_argument);
}

TEST_CASE("decentralized loop algebra matches hand-solved static wiring") {
    // Scrambled output order on purpose: rows [y_e, y_ea, y_a].
    const StateSpace base =
        static_system(mat({{0, 1}, {0, 1}, {1, 0}}), {"U_a", "U_e"},
                      {"ye", "yea", "ya"});
    IoAssignment io;
    io.airframe_inputs = {0};
    io.engine_inputs = {1};
    io.airframe_outputs = {2};
    io.engine_outputs = {0};
    io.interface_outputs = {1};
    const PartitionedPlant pp = assign_io(base, io);

    DecentralizedController ctrl;
    ctrl.ka_bar = static_system(mat({{1, 0}, {1, 0}}));
    ctrl.k_lead = static_system(mat({{1}}));
    ctrl.k_ee = static_system(mat({{1, 0}}));

    // Solving the loop by hand: y_a = r_a/2 always; the engine actuator
    // carries both the tracking and the feedback contribution.
    SUBCASE("error-only tracking feedback") {
        ctrl.kt_feedback = KtFeedback::kErrorOnly;
        ctrl.k_t = static_system(mat({{2}}));
        const StateSpace td = assemble_td(pp, ctrl);
        CHECK(td.n() == 0);
        const Matrix expected = mat({{0.5, 0.0}, {0.25, 0.25}});
        CHECK((td.D - expected).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(td.input_labels.size() == 2);
        CHECK(td.input_labels[0] == "r_ya");
        CHECK(td.input_labels[1] == "r_ye");
        CHECK(td.output_labels[0] == "ya");
        CHECK(td.output_labels[1] == "ye");
    }
    SUBCASE("error-plus-measurement tracking feedback") {
        ctrl.kt_feedback = KtFeedback::kErrorAndMeasurement;
        ctrl.k_t = static_system(mat({{2, 0.5}}));
        const StateSpace td = assemble_td(pp, ctrl);
        const Matrix expected =
            mat({{0.5, 0.0}, {2.0 / 7.0, 2.0 / 7.0}});
        CHECK((td.D - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("inconsistent blocks are rejected") {
        ctrl.kt_feedback = KtFeedback::kErrorOnly;
        ctrl.k_t = static_system(mat({{2, 0.5}}));
        CHECK_THROWS_AS(assemble_td(pp, ctrl), std::invalid_argument);
    }
}

TEST_CASE("decentralized loop converges to the centralized loop with "
          "ideal pieces") {
    const DecoupledModel m = decoupled_model();
    REQUIRE(is_stable(m.tc));
    REQUIRE(m.ka.stable);
    CHECK(m.ka.full.n() == 2);   // static law plus two engine states
    CHECK(m.kee.full.n() == 0);  // static law partitions to a static block

    // Unit-gain lead placeholder, exact engine-feedback block, and an
    // interface tracker whose loop gain scales up 4x per step: the gap
    // to the centralized loop must shrink with the gain and vanish at DC.
    const FrequencyGrid low = make_grid(0.01, 1.0, 20);
    double prev = -1.0;
    for (double scale : {1.0, 4.0, 16.0}) {
        DecentralizedController ctrl;
        ctrl.ka_bar = m.ka.reduced;
        ctrl.k_lead = identity_system(1);
        ctrl.k_t = pi_tracker(20.0 * scale, 200.0 * scale);
        ctrl.k_ee = m.kee.reduced;
        ctrl.kt_feedback = KtFeedback::kErrorOnly;
        const StateSpace td = assemble_td(m.plant, ctrl);
        REQUIRE(is_stable(td));
        CHECK(td.n() == m.plant.base.n() + ctrl.ka_bar.n() +
                            ctrl.k_lead.n() + ctrl.k_t.n() + ctrl.k_ee.n());
        const double err = worst_gap(td, m.tc, low);
        CHECK(err < 4e-4 / scale * 1.6);  // observed 2.5e-4, 6.1e-5, 1.5e-5
        CHECK((dc_gain(td) - dc_gain(m.tc)).cwiseAbs().maxCoeff() < 1e-12);
        if (prev > 0.0) CHECK(err < 0.35 * prev);
        prev = err;
    }
}

TEST_CASE("loop-matching check accepts close loops and rejects gross "
          "mismatch") {
    SUBCASE("identical loops pass with a vanishing norm") {
        const StateSpace t = first_order(1.0, 1.0);
        const StabilityCheck sc = check_stability_condition(t, t);
        CHECK(sc.passes);
        CHECK(sc.td_stable);
        CHECK(sc.tc_stable);
        CHECK(sc.error_norm < 1e-6);
    }
    SUBCASE("a scaled loop reports the gain difference") {
        const StabilityCheck sc = check_stability_condition(
            first_order(1.0, 1.0), first_order(0.7, 1.0));
        CHECK(sc.error_norm == doctest::Approx(0.3).epsilon(1e-4));
        CHECK(sc.passes);
    }
    SUBCASE("a static mismatch of 1.5 fails the condition") {
        const StabilityCheck sc = check_stability_condition(
            static_system(mat({{1.5}})), static_system(mat({{0.0}})));
        CHECK_FALSE(sc.passes);
        CHECK(sc.error_norm == doctest::Approx(1.5).epsilon(1e-9));
        CHECK(sc.td_stable);
        CHECK(sc.tc_stable);
    }
    SUBCASE("an unstable loop fails immediately with an infinite norm") {
        const StateSpace unstable{mat({{1.0}}), mat({{1.0}}), mat({{1.0}}),
                                  mat({{0.0}})};
        const StabilityCheck sc =
            check_stability_condition(unstable, first_order(1.0, 1.0));
        CHECK_FALSE(sc.passes);
        CHECK_FALSE(sc.td_stable);
        CHECK(sc.tc_stable);
        CHECK(std::isinf(sc.error_norm));
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(
            check_stability_condition(static_system(Matrix::Zero(2, 2)),
                                      static_system(Matrix::Zero(1, 1))),
            std::invalid_argument);
    }
    SUBCASE("the synthetic decentralized stack passes with margin") {
        const DecoupledModel m = decoupled_model();
        DecentralizedController ctrl;
        ctrl.ka_bar = m.ka.reduced;
        ctrl.k_lead = build_lead(10.0, 30.0, 1);
        ctrl.k_t = pi_tracker(20.0, 200.0);
        ctrl.k_ee = m.kee.reduced;
        ctrl.kt_feedback = KtFeedback::kErrorOnly;
        const StabilityCheck sc =
            check_stability_condition(assemble_td(m.plant, ctrl), m.tc);
        CHECK(sc.passes);
        CHECK(sc.error_norm > 1e-4);  // a real, nonzero gap
        CHECK(sc.error_norm < 0.01);  // observed 0.0045
    }
}

namespace {

KtDesignContext design_context(const DecoupledModel& m) {
    KtDesignContext ctx;
    // Design plant outputs lead with the interface channel.
    ctx.engine_plant =
        extract_submodel(m.plant.base, {1, 2}, {1, 2}, {2, 1});
    ctx.plant = m.plant;
    ctx.ka_bar = m.ka.reduced;
    ctx.k_lead = build_lead(10.0, 30.0, 1);
    ctx.k_ee = m.kee.reduced;
    ctx.feedback = KtFeedback::kErrorAndMeasurement;
    ctx.reduce_to = 4;
    return ctx;
}

PerformanceSpec kt_spec() {
    PerformanceSpec spec;
    spec.bandwidth_bands = {Band{5.0, 100.0}};
    spec.rise_time_bound = 0.5;
    spec.overshoot_bound = 0.3;
    spec.gamma_bound = 10.0;
    return spec;
}

Genome kt_genome(const std::vector<double>& genes) {
    Genome g;
    g.genes = genes;
    for (double v : genes) g.bounds.push_back(GeneBounds{v - 4.0, v + 4.0});
    return g;
}

} // namespace

TEST_CASE("tracking-controller objective scores a sound genome") {
    const DecoupledModel m = decoupled_model();
    const KtDesignContext ctx = design_context(m);
    const PerformanceSpec spec = kt_spec();
    const FrequencyGrid grid = make_grid(0.01, 100.0, 20);

    const double lz = std::log10(20.0), lg3 = std::log10(0.5),
                 lz3 = std::log10(50.0);
    const Genome good = kt_genome({0.0, lz, -3.0, lg3, lz3, 2.0,
                                   0.0, lz, -3.0, lg3, lz3, 2.0, -2.0});
    const KtEval ev = evaluate_kt(good, ctx, m.tc, spec, grid);
    REQUIRE(ev.synthesized);
    CHECK(ev.weight_constraint_ok);
    CHECK(ev.gamma > 0.0);
    CHECK(ev.gamma < spec.gamma_bound);
    // Deployed block: interface error plus measurement in, both engine
    // actuators out, at most the configured order.
    CHECK(ev.k_t.m() == 2);
    CHECK(ev.k_t.p() == 2);
    CHECK(ev.k_t.n() <= 4);
    CHECK(is_stable(ev.k_t));
    CHECK(is_stable(ev.td));
    CHECK(ev.td.m() == 2);
    CHECK(ev.td.p() == 2);
    // All tracking targets met: the score is pure loop mismatch.
    CHECK(ev.interface_metrics.bandwidth_defined);
    CHECK(ev.interface_metrics.bandwidth > 5.0);
    CHECK(ev.interface_metrics.rise_time < 0.5);
    CHECK(ev.interface_metrics.overshoot < 0.3);
    CHECK(ev.psi2_total ==
          doctest::Approx(spec.k_psi * ev.loop_mismatch).epsilon(1e-12));
    CHECK(ev.psi2_total < 0.1);

    // The reduced deployment is close to the unreduced one.
    CHECK(worst_gap(ev.k_t, ev.k_t_full, grid) < 0.05);

    // Deterministic: same genome, same score.
    const KtEval again = evaluate_kt(good, ctx, m.tc, spec, grid);
    CHECK(again.psi2_total == ev.psi2_total);
    CHECK(fitness_kt(good, ctx, m.tc, spec, grid) == ev.psi2_total);
}

TEST_CASE("tracking-controller objective prices failures into the score") {
    const DecoupledModel m = decoupled_model();
    const KtDesignContext ctx = design_context(m);
    const PerformanceSpec spec = kt_spec();
    const FrequencyGrid grid = make_grid(0.01, 100.0, 20);

    SUBCASE("incompatible weight pairs carry the constraint penalty") {
        const double lk = std::log10(2.5);
        const Genome clash = kt_genome({lk, 0.0, 0.0, lk, 0.0, 0.0,
                                        lk, 0.0, 0.0, lk, 0.0, 0.0, -2.0});
        const KtEval ev = evaluate_kt(clash, ctx, m.tc, spec, grid);
        CHECK_FALSE(ev.weight_constraint_ok);
        if (ev.synthesized) {
            CHECK(ev.psi2_total >= kWeightConstraintPenalty);
            CHECK(ev.psi2_total < kSynthesisFailurePenalty);
        } else {
            CHECK(ev.psi2_total == kSynthesisFailurePenalty);
        }
    }
    SUBCASE("contract violations throw instead of scoring") {
        const Genome wrong = kt_genome({0.0, 1.0, -3.0});
        CHECK_THROWS_AS(evaluate_kt(wrong, ctx, m.tc, spec, grid),
                        std::invalid_argument);
        PerformanceSpec two_bands = spec;
        two_bands.bandwidth_bands.push_back(Band{1.0, 2.0});
        const Genome good = kt_genome(std::vector<double>(13, 0.0));
        CHECK_THROWS_AS(evaluate_kt(good, ctx, m.tc, two_bands, grid),
                        std::invalid_argument);
    }
}

TEST_CASE("tracking-controller search returns a deployable design") {
    const DecoupledModel m = decoupled_model();
    const KtDesignContext ctx = design_context(m);
    const PerformanceSpec spec = kt_spec();
    const FrequencyGrid grid = make_grid(0.01, 100.0, 20);

    std::vector<GeneBounds> bounds;
    for (int ch = 0; ch < 2; ++ch) {
        bounds.push_back(GeneBounds{-1.0, 1.0});   // tracking-weight gain
        bounds.push_back(GeneBounds{0.5, 2.0});    // tracking-weight corner
        bounds.push_back(GeneBounds{-4.0, -2.0});  // corner drop
        bounds.push_back(GeneBounds{-1.0, 0.5});   // roll-off gain
        bounds.push_back(GeneBounds{1.0, 2.5});    // roll-off corner
        bounds.push_back(GeneBounds{1.0, 3.0});    // corner rise
    }
    bounds.push_back(GeneBounds{-3.0, -1.0});  // effort gain

    GaConfig ga;
    ga.population_size = 8;
    ga.max_generations = 4;
    ga.seed = 3;
    const KtDesignResult res = design_kt(ctx, spec, ga, bounds, m.tc, grid);
    CHECK(res.fitness < kWeightConstraintPenalty);
    CHECK(res.gamma > 0.0);
    CHECK(res.k_t.n() <= ctx.reduce_to);
    CHECK(res.k_t.m() == 2);
    CHECK(res.k_t.p() == 2);
    CHECK(res.stable_full);
    CHECK(res.stable_reduced);
    CHECK(res.ga.generations_run <= 4);
    for (std::size_t i = 1; i < res.ga.history.size(); ++i)
        CHECK(res.ga.history[i] <= res.ga.history[i - 1]);

    // The winning deployment must hold up in the assembled loop.
    DecentralizedController ctrl;
    ctrl.ka_bar = ctx.ka_bar;
    ctrl.k_lead = ctx.k_lead;
    ctrl.k_t = res.k_t;
    ctrl.k_ee = ctx.k_ee;
    ctrl.kt_feedback = ctx.feedback;
    const StabilityCheck sc =
        check_stability_condition(assemble_td(m.plant, ctrl), m.tc);
    CHECK(sc.passes);

    SUBCASE("mismatched gene bounds are rejected") {
        CHECK_THROWS_AS(design_kt(ctx, spec, ga,
                                  std::vector<GeneBounds>(5,
                                                          GeneBounds{0, 1}),
                                  m.tc, grid),
                        std::invalid_argument);
    }
}
