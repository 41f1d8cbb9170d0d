#include "ifpc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ifpc/fitness.hpp"
#include "ifpc/norms.hpp"
#include "ifpc/simulate.hpp"

namespace ifpc {

namespace {

/// Every index in the listed sets must land in [0, count) and the sets
/// together must cover each channel exactly once.
void check_cover(std::initializer_list<const std::vector<Index>*> sets,
                 Index count, const char* what) {
    std::vector<int> seen(static_cast<std::size_t>(count), 0);
    Index total = 0;
    for (const auto* s : sets) {
        for (Index i : *s) {
            if (i < 0 || i >= count)
                throw std::invalid_argument(std::string("assign_io: ") + what +
                                            " index out of range");
            if (seen[static_cast<std::size_t>(i)]++)
                throw std::invalid_argument(std::string("assign_io: ") + what +
                                            " index assigned twice");
            ++total;
        }
    }
    if (total != count)
        throw std::invalid_argument(std::string("assign_io: every ") + what +
                                    " channel must be assigned");
}

std::vector<Index> all_indices(Index count) {
    std::vector<Index> idx(static_cast<std::size_t>(count));
    std::iota(idx.begin(), idx.end(), Index{0});
    return idx;
}

Index find_label(const std::vector<std::string>& labels,
                 const std::string& name, const char* kind) {
    const auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end())
        throw std::invalid_argument("preset_assignment: required " +
                                    std::string(kind) + " label \"" + name +
                                    "\" not found");
    return static_cast<Index>(it - labels.begin());
}

/// Shared tail of the block builders: record stability, refuse the
/// reduction of an unstable block, and keep the full block verbatim when
/// no state needs to go.
BlockReduction reduce_block(StateSpace full, Index reduce_to) {
    if (reduce_to < 1)
        throw std::invalid_argument("reduce_block: target order must be >= 1");
    BlockReduction out;
    out.full = std::move(full);
    out.stable = is_stable(out.full);
    if (!out.stable || out.full.n() == 0) {
        out.reduced = out.full;
        return out;
    }
    if (reduce_to >= out.full.n()) {
        // Nothing to truncate; still report the Hankel spectrum.
        out.reduced = out.full;
        out.hankel_svs = balanced_truncate(out.full, out.full.n()).hankel_svs;
        return out;
    }
    ReductionResult r = balanced_truncate(out.full, reduce_to);
    out.reduced = std::move(r.system);
    out.hankel_svs = std::move(r.hankel_svs);
    out.reduction_applied = true;
    return out;
}

} // namespace

PartitionDims PartitionedPlant::dims() const {
    PartitionDims d;
    d.n_ua = static_cast<Index>(io.airframe_inputs.size());
    d.n_ue = static_cast<Index>(io.engine_inputs.size());
    d.n_ya = static_cast<Index>(io.airframe_outputs.size());
    d.n_ye = static_cast<Index>(io.engine_outputs.size());
    d.n_yea = static_cast<Index>(io.interface_outputs.size());
    return d;
}

StateSpace PartitionedPlant::g_aa() const {
    return select_channels(base, io.airframe_inputs, io.airframe_outputs);
}
StateSpace PartitionedPlant::g_ae() const {
    return select_channels(base, io.engine_inputs, io.airframe_outputs);
}
StateSpace PartitionedPlant::g_ea() const {
    return select_channels(base, io.airframe_inputs, io.engine_outputs);
}
StateSpace PartitionedPlant::g_ee() const {
    return select_channels(base, io.engine_inputs, io.engine_outputs);
}
StateSpace PartitionedPlant::g_ea_a() const {
    return select_channels(base, io.airframe_inputs, io.interface_outputs);
}
StateSpace PartitionedPlant::g_ea_e() const {
    return select_channels(base, io.engine_inputs, io.interface_outputs);
}

PartitionedPlant assign_io(const StateSpace& g_ext, const IoAssignment& io) {
    g_ext.validate();
    check_cover({&io.airframe_inputs, &io.engine_inputs}, g_ext.m(), "input");
    check_cover({&io.airframe_outputs, &io.engine_outputs,
                 &io.interface_outputs},
                g_ext.p(), "output");
    return PartitionedPlant{g_ext, io};
}

IoAssignment preset_assignment(const StateSpace& g_ext) {
    IoAssignment io;
    io.airframe_inputs = {find_label(g_ext.input_labels, "delta_tv", "input")};
    io.engine_inputs = {find_label(g_ext.input_labels, "W_f", "input"),
                        find_label(g_ext.input_labels, "A_78", "input"),
                        find_label(g_ext.input_labels, "A_8", "input")};
    io.airframe_outputs = {find_label(g_ext.output_labels, "V", "output"),
                           find_label(g_ext.output_labels, "q_v", "output")};
    io.engine_outputs = {find_label(g_ext.output_labels, "N_2P", "output"),
                         find_label(g_ext.output_labels, "R", "output")};
    std::vector<bool> used(g_ext.output_labels.size(), false);
    for (Index i : io.airframe_outputs) used[static_cast<std::size_t>(i)] = true;
    for (Index i : io.engine_outputs) used[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < g_ext.p(); ++i)
        if (!used[static_cast<std::size_t>(i)]) io.interface_outputs.push_back(i);
    return io;
}

InterfaceSelection select_interface(const StateSpace& t_ext,
                                    const std::vector<Index>& candidates,
                                    const std::vector<Index>& commands,
                                    double dominance_ratio, double horizon) {
    t_ext.validate();
    if (candidates.empty())
        throw std::invalid_argument(
            "select_interface: candidate list must not be empty");
    if (commands.empty())
        throw std::invalid_argument(
            "select_interface: command list must not be empty");
    if (!(dominance_ratio > 0.0 && dominance_ratio <= 1.0))
        throw std::invalid_argument(
            "select_interface: dominance ratio must lie in (0, 1]");
    for (Index c : candidates)
        if (c < 0 || c >= t_ext.p())
            throw std::invalid_argument(
                "select_interface: candidate output index out of range");
    for (Index j : commands)
        if (j < 0 || j >= t_ext.m())
            throw std::invalid_argument(
                "select_interface: command input index out of range");

    const Index nc = static_cast<Index>(candidates.size());
    const Index nj = static_cast<Index>(commands.size());
    Matrix peaks = Matrix::Zero(nc, nj);
    for (Index j = 0; j < nj; ++j) {
        const StepResponse resp = simulate_step_exact(
            t_ext, commands[static_cast<std::size_t>(j)], horizon);
        for (Index c = 0; c < nc; ++c) {
            const Index col = candidates[static_cast<std::size_t>(c)];
            peaks(c, j) = resp.y.col(col).cwiseAbs().maxCoeff();
        }
    }

    InterfaceSelection sel;
    sel.peaks = peaks;
    for (Index c = 0; c < nc; ++c) {
        bool dominant = false;
        for (Index j = 0; j < nj && !dominant; ++j) {
            const double top = peaks.col(j).maxCoeff();
            if (top > 0.0 && peaks(c, j) >= dominance_ratio * top)
                dominant = true;
        }
        if (dominant) sel.selected.push_back(candidates[static_cast<std::size_t>(c)]);
    }
    return sel;
}

BlockReduction build_airframe_sub(const StateSpace& k,
                                  const StateSpace& engine_loop,
                                  const PartitionDims& dims, Index reduce_to) {
    k.validate();
    engine_loop.validate();
    const Index n_ya = dims.n_ya, n_ye = dims.n_ye, n_yea = dims.n_yea;
    const Index n_ua = dims.n_ua, n_ue = dims.n_ue;
    if (k.m() != 2 * (n_ya + n_ye))
        throw std::invalid_argument(
            "build_airframe_sub: controller must take [errors; measurements] "
            "over the airframe and engine outputs");
    if (k.p() != n_ua + n_ue)
        throw std::invalid_argument(
            "build_airframe_sub: controller outputs must cover both actuator "
            "groups");
    if (engine_loop.m() != n_ue || engine_loop.p() != n_ye + n_yea)
        throw std::invalid_argument(
            "build_airframe_sub: engine model must map engine actuators to "
            "[engine outputs; interface outputs]");

    // Stacked block outputs: [U_a; U_e; y_e; y_ea]; stacked block inputs:
    // [e_a; e_e; y_a; y_e_meas; U_e_cmd]. With the engine command held at
    // zero the controller's engine error input sees -y_e.
    const Index ny = n_ua + n_ue + n_ye + n_yea;
    const Index nu = 2 * (n_ya + n_ye) + n_ue;
    const Index oy_ue = n_ua;
    const Index oy_ye = n_ua + n_ue;
    const Index oy_yea = oy_ye + n_ye;
    const Index ou_ee = n_ya;
    const Index ou_ya = n_ya + n_ye;
    const Index ou_ye = ou_ya + n_ya;
    const Index ou_eng = ou_ye + n_ye;

    Matrix M = Matrix::Zero(nu, ny);
    Matrix N = Matrix::Zero(nu, 2 * n_ya);
    Matrix P = Matrix::Zero(n_ua + n_yea, ny);
    Matrix Q = Matrix::Zero(n_ua + n_yea, 2 * n_ya);
    N.block(0, 0, n_ya, n_ya) = Matrix::Identity(n_ya, n_ya);  // e_a = ext
    M.block(ou_ee, oy_ye, n_ye, n_ye) = -Matrix::Identity(n_ye, n_ye);
    N.block(ou_ya, n_ya, n_ya, n_ya) = Matrix::Identity(n_ya, n_ya);  // y_a
    M.block(ou_ye, oy_ye, n_ye, n_ye) = Matrix::Identity(n_ye, n_ye);
    M.block(ou_eng, oy_ue, n_ue, n_ue) = Matrix::Identity(n_ue, n_ue);
    P.block(0, 0, n_ua, n_ua) = Matrix::Identity(n_ua, n_ua);
    P.block(n_ua, oy_yea, n_yea, n_yea) = Matrix::Identity(n_yea, n_yea);

    return reduce_block(interconnect({k, engine_loop}, M, N, P, Q), reduce_to);
}

StateSpace build_lead(double a, double b, Index channels) {
    if (!(std::isfinite(a) && std::isfinite(b)) || a <= 0.0 || a >= b)
        throw std::invalid_argument(
            "build_lead: corners must satisfy 0 < a < b");
    if (channels < 1)
        throw std::invalid_argument("build_lead: need at least one channel");
    const Index n = channels;
    // Per channel ((s+a)/a)*(b/(s+b)) = b/a + (b/a)(a-b)/(s+b).
    StateSpace lead{(-b) * Matrix::Identity(n, n), Matrix::Identity(n, n),
                    (b / a) * (a - b) * Matrix::Identity(n, n),
                    (b / a) * Matrix::Identity(n, n)};
    return lead;
}

BlockReduction extract_kee(const StateSpace& k,
                           const std::vector<Index>& engine_error_inputs,
                           const std::vector<Index>& engine_meas_inputs,
                           const std::vector<Index>& engine_outputs,
                           Index reduce_to) {
    k.validate();
    if (engine_error_inputs.size() != engine_meas_inputs.size())
        throw std::invalid_argument(
            "extract_kee: need one measurement channel per error channel");
    std::vector<Index> in_idx = engine_error_inputs;
    in_idx.insert(in_idx.end(), engine_meas_inputs.begin(),
                  engine_meas_inputs.end());
    std::vector<int> seen(static_cast<std::size_t>(k.m()), 0);
    for (Index i : in_idx) {
        if (i < 0 || i >= k.m())
            throw std::invalid_argument(
                "extract_kee: controller input index out of range");
        if (seen[static_cast<std::size_t>(i)]++)
            throw std::invalid_argument(
                "extract_kee: controller input listed twice");
    }
    for (Index i : engine_outputs)
        if (i < 0 || i >= k.p())
            throw std::invalid_argument(
                "extract_kee: controller output index out of range");
    return reduce_block(select_channels(k, in_idx, engine_outputs), reduce_to);
}

void DecentralizedController::check_dimensions(
    const PartitionedPlant& plant) const {
    const PartitionDims d = plant.dims();
    if (ka_bar.m() != 2 * d.n_ya || ka_bar.p() != d.n_ua + d.n_yea)
        throw std::invalid_argument(
            "decentralized controller: flight block must map "
            "[airframe errors; airframe outputs] to [airframe actuators; "
            "interface commands]");
    if (k_lead.m() != d.n_yea || k_lead.p() != d.n_yea)
        throw std::invalid_argument(
            "decentralized controller: lead bank must be square on the "
            "interface channels");
    const Index kt_in = kt_feedback == KtFeedback::kErrorAndMeasurement
                            ? 2 * d.n_yea
                            : d.n_yea;
    if (k_t.m() != kt_in || k_t.p() != d.n_ue)
        throw std::invalid_argument(
            "decentralized controller: tracking block input/output counts "
            "do not match the interface and engine actuator channels");
    if (k_ee.m() != 2 * d.n_ye || k_ee.p() != d.n_ue)
        throw std::invalid_argument(
            "decentralized controller: engine block must map "
            "[engine errors; engine outputs] to engine actuators");
}

void DecentralizedController::update_stability() {
    ka_bar_stable = is_stable(ka_bar);
    k_lead_stable = is_stable(k_lead);
    k_t_stable = is_stable(k_t);
    k_ee_stable = is_stable(k_ee);
}

namespace {

/// Flip the sign of a system's response in place (y -> -y).
StateSpace negate_output(StateSpace g) {
    g.C = -g.C;
    g.D = -g.D;
    return g;
}

/// Shared wiring of the decentralized loop. With perturb = false the
/// external input is the reference (errors see +r) and the result maps
/// r -> y. With perturb = true the external input is an offset added to
/// every measured copy of the controlled outputs (errors see -d, direct
/// measurements see +d, the interface measurement stays clean), which
/// maps d -> -T_o; the caller negates it.
StateSpace decentralized_loop(const PartitionedPlant& plant,
                              const DecentralizedController& ctrl,
                              bool perturb) {
    plant.base.validate();
    ctrl.check_dimensions(plant);
    const PartitionDims d = plant.dims();
    const StateSpace& g = plant.base;
    const IoAssignment& io = plant.io;
    const bool meas = ctrl.kt_feedback == KtFeedback::kErrorAndMeasurement;
    const Index kt_in = meas ? 2 * d.n_yea : d.n_yea;

    // Stacked block outputs: [plant y; flight block U_a + raw command;
    // shaped command; tracking U_e; engine-feedback U_e].
    const Index oy_g = 0;
    const Index oy_ka = g.p();
    const Index oy_lead = oy_ka + d.n_ua + d.n_yea;
    const Index oy_kt = oy_lead + d.n_yea;
    const Index oy_kee = oy_kt + d.n_ue;
    const Index ny = oy_kee + d.n_ue;
    // Stacked block inputs: [plant u; flight block [e_a; y_a]; lead input;
    // tracking input; engine-feedback [e_e; y_e]].
    const Index ou_g = 0;
    const Index ou_ka = g.m();
    const Index ou_lead = ou_ka + 2 * d.n_ya;
    const Index ou_kt = ou_lead + d.n_yea;
    const Index ou_kee = ou_kt + kt_in;
    const Index nu = ou_kee + 2 * d.n_ye;
    const Index nr = d.n_ya + d.n_ye;

    Matrix M = Matrix::Zero(nu, ny);
    Matrix N = Matrix::Zero(nu, nr);
    Matrix P = Matrix::Zero(nr, ny);
    Matrix Q = Matrix::Zero(nr, nr);

    for (Index i = 0; i < d.n_ua; ++i)  // plant airframe actuators
        M(ou_g + io.airframe_inputs[static_cast<std::size_t>(i)], oy_ka + i) =
            1.0;
    for (Index i = 0; i < d.n_ue; ++i) {  // plant engine actuators: summed
        const Index row = ou_g + io.engine_inputs[static_cast<std::size_t>(i)];
        M(row, oy_kt + i) = 1.0;
        M(row, oy_kee + i) = 1.0;
    }
    for (Index i = 0; i < d.n_ya; ++i) {  // flight block errors + outputs
        const Index ya = oy_g + io.airframe_outputs[static_cast<std::size_t>(i)];
        N(ou_ka + i, i) = perturb ? -1.0 : 1.0;
        if (perturb) N(ou_ka + d.n_ya + i, i) = 1.0;
        M(ou_ka + i, ya) = -1.0;
        M(ou_ka + d.n_ya + i, ya) = 1.0;
    }
    for (Index i = 0; i < d.n_yea; ++i) {  // lead bank on the raw command
        M(ou_lead + i, oy_ka + d.n_ua + i) = 1.0;
    }
    for (Index i = 0; i < d.n_yea; ++i) {  // interface tracking error
        const Index yea =
            oy_g + io.interface_outputs[static_cast<std::size_t>(i)];
        M(ou_kt + i, oy_lead + i) = 1.0;
        M(ou_kt + i, yea) = -1.0;
        if (meas) M(ou_kt + d.n_yea + i, yea) = 1.0;
    }
    for (Index i = 0; i < d.n_ye; ++i) {  // engine-feedback errors + outputs
        const Index ye = oy_g + io.engine_outputs[static_cast<std::size_t>(i)];
        N(ou_kee + i, d.n_ya + i) = perturb ? -1.0 : 1.0;
        if (perturb) N(ou_kee + d.n_ye + i, d.n_ya + i) = 1.0;
        M(ou_kee + i, ye) = -1.0;
        M(ou_kee + d.n_ye + i, ye) = 1.0;
    }
    for (Index i = 0; i < d.n_ya; ++i)
        P(i, oy_g + io.airframe_outputs[static_cast<std::size_t>(i)]) = 1.0;
    for (Index i = 0; i < d.n_ye; ++i)
        P(d.n_ya + i,
          oy_g + io.engine_outputs[static_cast<std::size_t>(i)]) = 1.0;

    StateSpace td = interconnect({g, ctrl.ka_bar, ctrl.k_lead, ctrl.k_t,
                                  ctrl.k_ee},
                                 M, N, P, Q);
    if (!perturb && !g.output_labels.empty()) {
        td.output_labels.clear();
        for (Index i : io.airframe_outputs)
            td.output_labels.push_back(
                g.output_labels[static_cast<std::size_t>(i)]);
        for (Index i : io.engine_outputs)
            td.output_labels.push_back(
                g.output_labels[static_cast<std::size_t>(i)]);
        td.input_labels.clear();
        for (const auto& name : td.output_labels)
            td.input_labels.push_back("r_" + name);
    }
    return td;
}

/// Shared wiring of the centralized tracking loop; perturb as in
/// decentralized_loop, except every output of the plant is measured.
StateSpace centralized_loop(const StateSpace& g, const StateSpace& k,
                            bool perturb) {
    g.validate();
    k.validate();
    const Index m = g.m();
    const Index p = g.p();
    if (k.m() != 2 * p)
        throw std::invalid_argument(
            "assemble_tc: controller must take [errors; measurements], "
            "i.e. have twice the plant output count as inputs");
    if (k.p() != m)
        throw std::invalid_argument(
            "assemble_tc: controller output count must match plant inputs");

    // Stacked block outputs: [y_G (p); u_K (m)]; stacked block inputs:
    // [u_G (m); e_K (p); ym_K (p)]. Wiring: u_G = u_K, e_K = r - y_G,
    // ym_K = y_G; external output is y_G.
    Matrix M = Matrix::Zero(m + 2 * p, p + m);
    Matrix N = Matrix::Zero(m + 2 * p, p);
    Matrix P = Matrix::Zero(p, p + m);
    Matrix Q = Matrix::Zero(p, p);
    M.block(0, p, m, m) = Matrix::Identity(m, m);          // u_G = u_K
    M.block(m, 0, p, p) = -Matrix::Identity(p, p);         // e_K = -y_G ...
    N.block(m, 0, p, p) =
        (perturb ? -1.0 : 1.0) * Matrix::Identity(p, p);   // ... -d or +r
    M.block(m + p, 0, p, p) = Matrix::Identity(p, p);      // ym_K = y_G ...
    if (perturb)
        N.block(m + p, 0, p, p) = Matrix::Identity(p, p);  // ... + d
    P.block(0, 0, p, p) = Matrix::Identity(p, p);

    StateSpace t = interconnect({g, k}, M, N, P, Q);
    if (!perturb && !g.output_labels.empty()) {
        t.output_labels = g.output_labels;
        t.input_labels.clear();
        for (const auto& name : g.output_labels)
            t.input_labels.push_back("r_" + name);
    }
    return t;
}

} // namespace

StateSpace assemble_td(const PartitionedPlant& plant,
                       const DecentralizedController& ctrl) {
    return decentralized_loop(plant, ctrl, false);
}

StateSpace output_complementary_td(const PartitionedPlant& plant,
                                   const DecentralizedController& ctrl) {
    return negate_output(decentralized_loop(plant, ctrl, true));
}

StateSpace assemble_tc(const StateSpace& g, const StateSpace& k) {
    return centralized_loop(g, k, false);
}

StateSpace output_complementary_tc(const StateSpace& g, const StateSpace& k) {
    return negate_output(centralized_loop(g, k, true));
}

StabilityCheck check_stability_condition(const StateSpace& td,
                                         const StateSpace& tc) {
    td.validate();
    tc.validate();
    if (td.m() != tc.m() || td.p() != tc.p())
        throw std::invalid_argument(
            "check_stability_condition: loop dimensions differ");
    StabilityCheck out;
    out.td_stable = is_stable(td);
    out.tc_stable = is_stable(tc);
    if (!out.td_stable || !out.tc_stable) {
        out.error_norm = std::numeric_limits<double>::infinity();
        out.passes = false;
        return out;
    }
    out.error_norm = hinf_norm(subtract(td, tc)).value;
    out.passes = out.error_norm < 1.0;
    return out;
}

KtDesignResult design_kt(const KtDesignContext& ctx,
                         const PerformanceSpec& spec, const GaConfig& ga,
                         const std::vector<GeneBounds>& bounds,
                         const StateSpace& t_c, const FrequencyGrid& grid) {
    ga.validate();
    if (bounds.size() != weight_genome_size(ctx.engine_plant.p()))
        throw std::invalid_argument(
            "design_kt: gene bounds must match the weight encoding of the "
            "engine design loop");

    const FitnessFn objective = [&](const Genome& genome) {
        return fitness_kt(genome, ctx, t_c, spec, grid);
    };
    GaResult res = run_ga(objective, bounds, ga);
    if (res.best_fitness >= kSynthesisFailurePenalty)
        throw SynthesisError(
            "design_kt: no genome in the search produced a controller "
            "(best fitness " +
            std::to_string(res.best_fitness) + " after " +
            std::to_string(res.generations_run) + " generations)");

    const KtEval best = evaluate_kt(res.best_genome, ctx, t_c, spec, grid);
    KtDesignResult out;
    out.k_t = best.k_t;
    out.k_t_full = best.k_t_full;
    out.fitness = res.best_fitness;
    out.gamma = best.gamma;
    out.stable_full = is_stable(best.k_t_full);
    out.stable_reduced = is_stable(best.k_t);
    out.ga = std::move(res);
    return out;
}

} // namespace ifpc
