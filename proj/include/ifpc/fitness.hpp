#pragma once

#include <optional>

#include "ifpc/ga.hpp"
#include "ifpc/hinfsyn.hpp"
#include "ifpc/metrics.hpp"
#include "ifpc/partition.hpp"
#include "ifpc/weights.hpp"

namespace ifpc {

/// Penalty returned when the controller synthesis itself fails; ranks
/// every infeasible genome below any genome that produced a controller.
inline constexpr double kSynthesisFailurePenalty = 1e6;
/// Penalty when the synthesized loop's step response leaves the finite
/// range (numerically unstable realization).
inline constexpr double kDivergedResponsePenalty = 1e5;
/// Added (not returned) when the weight pair violates the low-frequency
/// compatibility requirement; the evaluation still proceeds.
inline constexpr double kWeightConstraintPenalty = 1e4;

/// Number of genes in the weight encoding for a plant with `channels`
/// controlled outputs: per channel, (log10 gain, log10 corner,
/// log10 pole/corner ratio) for each of the two channel filter banks,
/// plus one shared log10 effort gain.
std::size_t weight_genome_size(Index channels);

/// Decode a genome into a weight set. Total on in-bounds genomes: a
/// degenerate pole/corner ratio (gene ~ 0) is nudged so the filter stays
/// biproper with distinct corner and pole. Throws std::invalid_argument
/// when the gene count does not match weight_genome_size(channels).
WeightSet decode_weights(const Genome& genome, Index channels);

/// Full result of evaluating one genome on the centralized tuning
/// objective, for callers that need more than the scalar fitness
/// (final design extraction, reporting, tests).
struct CentralizedEval {
    double psi1 = kSynthesisFailurePenalty;
    bool synthesized = false;
    bool weight_constraint_ok = true;
    std::optional<SynthesisResult> synthesis;
    StateSpace tracking_loop;  ///< command -> output map (when synthesized)
    TrackingMetrics metrics;   ///< loop metrics (when synthesized)
};

/// Evaluate the centralized tuning objective:
/// decode -> weight-compatibility check -> augmented plant -> synthesis
/// -> tracking-loop metrics -> weighted sum of band/bound violations.
/// Synthesis failure prices the genome at kSynthesisFailurePenalty; a
/// diverged response at kDivergedResponsePenalty; a violated weight
/// compatibility constraint adds kWeightConstraintPenalty on top of the
/// violation terms. The spec's bandwidth band list must match the plant
/// output count.
CentralizedEval evaluate_centralized(const Genome& genome, const StateSpace& g,
                                     const PerformanceSpec& spec,
                                     const FrequencyGrid& grid);

/// Scalar objective for the genetic search; equals
/// evaluate_centralized(...).psi1. Never throws for in-contract inputs:
/// all evaluation failures are priced into the returned value.
double fitness_centralized(const Genome& genome, const StateSpace& g,
                           const PerformanceSpec& spec,
                           const FrequencyGrid& grid);

/// Full result of evaluating one genome on the interface-tracking
/// objective.
struct KtEval {
    double psi2_total = kSynthesisFailurePenalty;  ///< the scalar objective
    double loop_mismatch = 0.0;  ///< mean squared peak-gain error vs. T_c
    bool synthesized = false;
    bool weight_constraint_ok = true;
    double gamma = 0.0;
    StateSpace k_t;        ///< deployed candidate (stripped, reduced)
    StateSpace k_t_full;   ///< stripped but unreduced
    StateSpace td;         ///< decentralized loop under the candidate
    ChannelMetrics interface_metrics;  ///< of the interface tracking loop
};

/// Evaluate the interface-tracking objective: decode the genome into a
/// weight set for the square engine design loop, synthesize, strip the
/// auxiliary engine measurement channels, reduce to the deployed order,
/// assemble the decentralized loop around it, and score
///     k_psi * (loop mismatch vs. t_c) + weighted interface tracking
///     violations (bandwidth band, rise time, overshoot).
/// Synthesis failure prices the genome at kSynthesisFailurePenalty; an
/// unstable or diverging assembled loop at kDivergedResponsePenalty; a
/// violated weight compatibility constraint adds
/// kWeightConstraintPenalty.
KtEval evaluate_kt(const Genome& genome, const KtDesignContext& ctx,
                   const StateSpace& t_c, const PerformanceSpec& spec,
                   const FrequencyGrid& grid);

/// Scalar objective for the interface-tracking search; equals
/// evaluate_kt(...).psi2_total. Never throws for in-contract inputs.
double fitness_kt(const Genome& genome, const KtDesignContext& ctx,
                  const StateSpace& t_c, const PerformanceSpec& spec,
                  const FrequencyGrid& grid);

} // namespace ifpc
