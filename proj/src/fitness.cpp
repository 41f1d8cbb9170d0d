#include "ifpc/fitness.hpp"

#include <cmath>
#include <stdexcept>

#include "ifpc/partition.hpp"

namespace ifpc {

namespace {

/// Distance to the nearest edge when outside the band, zero inside.
double band_violation(double value, const Band& b) {
    if (value < b.lo) return b.lo - value;
    if (value > b.hi) return value - b.hi;
    return 0.0;
}

double upper_violation(double value, double bound) {
    return value > bound ? value - bound : 0.0;
}

/// Ratio genes very close to zero would collapse the filter's corner and
/// pole; keep them a hair apart so every in-bounds genome decodes.
double nudged_ratio(double log_ratio) {
    constexpr double kMin = 1e-6;
    if (std::abs(log_ratio) >= kMin) return log_ratio;
    return log_ratio >= 0.0 ? kMin : -kMin;
}

FirstOrderWeight decode_filter(const double* genes) {
    const double k = std::pow(10.0, genes[0]);
    const double z = std::pow(10.0, genes[1]);
    const double p = z * std::pow(10.0, nudged_ratio(genes[2]));
    return FirstOrderWeight{k, z, p};
}

} // namespace

std::size_t weight_genome_size(Index channels) {
    if (channels < 1)
        throw std::invalid_argument(
            "weight_genome_size: need at least one channel");
    return 6 * static_cast<std::size_t>(channels) + 1;
}

WeightSet decode_weights(const Genome& genome, Index channels) {
    if (genome.genes.size() != weight_genome_size(channels))
        throw std::invalid_argument(
            "decode_weights: gene count does not match the channel count");
    WeightSet w;
    for (Index i = 0; i < channels; ++i) {
        const double* base = genome.genes.data() + 6 * i;
        w.w1.push_back(decode_filter(base));
        w.w3.push_back(decode_filter(base + 3));
    }
    w.w2 = std::pow(10.0, genome.genes.back());
    w.validate();
    return w;
}

CentralizedEval evaluate_centralized(const Genome& genome, const StateSpace& g,
                                     const PerformanceSpec& spec,
                                     const FrequencyGrid& grid) {
    spec.validate();
    const Index nc = g.p();
    if (spec.bandwidth_bands.size() != static_cast<std::size_t>(nc))
        throw std::invalid_argument(
            "evaluate_centralized: one bandwidth band per plant output "
            "required");

    CentralizedEval ev;
    const WeightSet w = decode_weights(genome, nc);
    ev.weight_constraint_ok = check_weight_constraint(w, grid).ok;

    const StateSpace paug = build_augmented(g, w);
    try {
        ev.synthesis = hinfsyn(paug, 2 * nc, g.m());
    } catch (const SynthesisError&) {
        ev.psi1 = kSynthesisFailurePenalty;
        return ev;
    } catch (const SolverError&) {
        ev.psi1 = kSynthesisFailurePenalty;
        return ev;
    }
    ev.synthesized = true;
    try {
        ev.tracking_loop = assemble_tc(g, ev.synthesis->controller);
        ev.metrics = eval_metrics(ev.tracking_loop, spec, grid);
    } catch (const IllPosedError&) {
        ev.psi1 = kDivergedResponsePenalty;
        return ev;
    } catch (const SolverError&) {
        ev.psi1 = kDivergedResponsePenalty;
        return ev;
    }
    ev.metrics.gamma = ev.synthesis->gamma_achieved;
    if (ev.metrics.diverged) {
        ev.psi1 = kDivergedResponsePenalty;
        return ev;
    }

    // Weighted violation terms against (optionally tightened) targets.
    const double infl = 1.0 + spec.target_inflation;
    double psi = 0.0;
    std::size_t term = 0;
    double worst_rise = 0.0;
    double worst_overshoot = 0.0;
    for (Index i = 0; i < nc; ++i) {
        const auto& ch = ev.metrics.channels[static_cast<std::size_t>(i)];
        const Band& b = spec.bandwidth_bands[static_cast<std::size_t>(i)];
        Band eff{b.lo * infl, b.hi / infl};
        if (eff.lo > eff.hi) eff.lo = eff.hi = 0.5 * (b.lo + b.hi);
        // An untrackable channel behaves like zero bandwidth.
        const double phi = ch.bandwidth_defined ? ch.bandwidth : 0.0;
        psi += spec.k1_weight(term++) * band_violation(phi, eff);
        worst_rise = std::max(
            worst_rise, ch.rise_defined ? ch.rise_time : spec.sim_horizon);
        worst_overshoot = std::max(worst_overshoot, ch.overshoot);
    }
    psi += spec.k1_weight(term++) *
           upper_violation(worst_rise, spec.rise_time_bound / infl);
    psi += spec.k1_weight(term++) *
           upper_violation(worst_overshoot, spec.overshoot_bound / infl);
    psi += spec.k1_weight(term++) *
           upper_violation(ev.synthesis->gamma_achieved,
                           spec.gamma_bound / infl);
    if (!ev.weight_constraint_ok) psi += kWeightConstraintPenalty;
    ev.psi1 = psi;
    return ev;
}

double fitness_centralized(const Genome& genome, const StateSpace& g,
                           const PerformanceSpec& spec,
                           const FrequencyGrid& grid) {
    return evaluate_centralized(genome, g, spec, grid).psi1;
}

namespace {

/// Unity-feedback tracking loop of the deployed interface controller
/// around the engine design plant: the controller drives all engine
/// actuators from the tracking error of the interface outputs (plus, in
/// the measurement variant, the interface outputs themselves); external
/// map is interface command -> interface output.
StateSpace interface_tracking_loop(const StateSpace& ep, const StateSpace& kt,
                                   Index n_yea, bool with_measurement) {
    const Index n_ue = ep.m();
    const Index kt_in = kt.m();
    const Index ny = ep.p() + n_ue;   // stacked outputs [ep y; kt u_e]
    const Index nu = n_ue + kt_in;    // stacked inputs [ep u; kt in]
    Matrix M = Matrix::Zero(nu, ny);
    Matrix N = Matrix::Zero(nu, n_yea);
    Matrix P = Matrix::Zero(n_yea, ny);
    Matrix Q = Matrix::Zero(n_yea, n_yea);
    M.block(0, ep.p(), n_ue, n_ue) = Matrix::Identity(n_ue, n_ue);
    for (Index i = 0; i < n_yea; ++i) {
        N(n_ue + i, i) = 1.0;
        M(n_ue + i, i) = -1.0;  // error = command - interface output
        if (with_measurement) M(n_ue + n_yea + i, i) = 1.0;
        P(i, i) = 1.0;
    }
    return interconnect({ep, kt}, M, N, P, Q);
}

} // namespace

KtEval evaluate_kt(const Genome& genome, const KtDesignContext& ctx,
                   const StateSpace& t_c, const PerformanceSpec& spec,
                   const FrequencyGrid& grid) {
    spec.validate();
    const StateSpace& ep = ctx.engine_plant;
    const PartitionDims d = ctx.plant.dims();
    if (ep.p() != ep.m())
        throw std::invalid_argument(
            "evaluate_kt: engine design plant must be square");
    if (ep.p() != d.n_yea + d.n_ye)
        throw std::invalid_argument(
            "evaluate_kt: engine design plant outputs must stack the "
            "interface outputs over the engine outputs");
    if (spec.bandwidth_bands.size() != static_cast<std::size_t>(d.n_yea))
        throw std::invalid_argument(
            "evaluate_kt: one bandwidth band per interface channel required");

    KtEval ev;
    const WeightSet w = decode_weights(genome, ep.p());
    ev.weight_constraint_ok = check_weight_constraint(w, grid).ok;

    const StateSpace paug = build_augmented(ep, w);
    SynthesisResult syn;
    try {
        syn = hinfsyn(paug, 2 * ep.p(), ep.m());
    } catch (const SynthesisError&) {
        return ev;
    } catch (const SolverError&) {
        return ev;
    }
    ev.synthesized = true;
    ev.gamma = syn.gamma_achieved;

    // Strip the auxiliary engine channels: keep the interface tracking
    // errors (controller inputs lead with the errors, ordered like the
    // design plant outputs) and, in the measurement variant, the
    // interface measurements.
    const bool meas = ctx.feedback == KtFeedback::kErrorAndMeasurement;
    std::vector<Index> keep;
    for (Index i = 0; i < d.n_yea; ++i) keep.push_back(i);
    if (meas)
        for (Index i = 0; i < d.n_yea; ++i) keep.push_back(ep.p() + i);
    std::vector<Index> outs;
    for (Index i = 0; i < ep.m(); ++i) outs.push_back(i);
    ev.k_t_full = select_channels(syn.controller, keep, outs);

    ev.k_t = ev.k_t_full;
    if (is_stable(ev.k_t_full) && ctx.reduce_to < ev.k_t_full.n()) {
        try {
            ev.k_t = balanced_truncate(ev.k_t_full, ctx.reduce_to).system;
        } catch (const SolverError&) {
            ev.k_t = ev.k_t_full;
        }
    }
    if (!is_stable(ev.k_t_full) || !is_stable(ev.k_t)) {
        ev.psi2_total = kDivergedResponsePenalty;
        return ev;
    }

    DecentralizedController ctrl;
    ctrl.ka_bar = ctx.ka_bar;
    ctrl.k_lead = ctx.k_lead;
    ctrl.k_t = ev.k_t;
    ctrl.k_ee = ctx.k_ee;
    ctrl.kt_feedback = ctx.feedback;
    TrackingMetrics tm;
    try {
        ev.td = assemble_td(ctx.plant, ctrl);
        if (!is_stable(ev.td)) {
            ev.psi2_total = kDivergedResponsePenalty;
            return ev;
        }
        const StateSpace track =
            interface_tracking_loop(ep, ev.k_t, d.n_yea, meas);
        tm = eval_metrics(track, spec, grid);
        ev.loop_mismatch = psi2(ev.td, t_c, grid);
    } catch (const IllPosedError&) {
        ev.psi2_total = kDivergedResponsePenalty;
        return ev;
    } catch (const SolverError&) {
        ev.psi2_total = kDivergedResponsePenalty;
        return ev;
    }
    if (tm.diverged) {
        ev.psi2_total = kDivergedResponsePenalty;
        return ev;
    }
    ev.interface_metrics = tm.channels.front();

    const double infl = 1.0 + spec.target_inflation;
    double band_v = 0.0;
    double worst_rise = 0.0;
    double worst_overshoot = 0.0;
    for (Index i = 0; i < d.n_yea; ++i) {
        const auto& ch = tm.channels[static_cast<std::size_t>(i)];
        const Band& b = spec.bandwidth_bands[static_cast<std::size_t>(i)];
        Band eff{b.lo * infl, b.hi / infl};
        if (eff.lo > eff.hi) eff.lo = eff.hi = 0.5 * (b.lo + b.hi);
        const double phi = ch.bandwidth_defined ? ch.bandwidth : 0.0;
        band_v = std::max(band_v, band_violation(phi, eff));
        worst_rise = std::max(
            worst_rise, ch.rise_defined ? ch.rise_time : spec.sim_horizon);
        worst_overshoot = std::max(worst_overshoot, ch.overshoot);
    }
    double f = spec.k_psi * ev.loop_mismatch;
    f += spec.k2_weight(0) * band_v;
    f += spec.k2_weight(1) *
         upper_violation(worst_rise, spec.rise_time_bound / infl);
    f += spec.k2_weight(2) *
         upper_violation(worst_overshoot, spec.overshoot_bound / infl);
    if (!ev.weight_constraint_ok) f += kWeightConstraintPenalty;
    ev.psi2_total = f;
    return ev;
}

double fitness_kt(const Genome& genome, const KtDesignContext& ctx,
                  const StateSpace& t_c, const PerformanceSpec& spec,
                  const FrequencyGrid& grid) {
    return evaluate_kt(genome, ctx, t_c, spec, grid).psi2_total;
}

} // namespace ifpc
