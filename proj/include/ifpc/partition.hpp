#pragma once

#include <vector>

#include "ifpc/frequency.hpp"
#include "ifpc/ga.hpp"
#include "ifpc/metrics.hpp"
#include "ifpc/reduction.hpp"
#include "ifpc/state_space.hpp"

namespace ifpc {

/// Channel assignment of an extended plant: every input is either an
/// airframe or an engine actuator; every output is an airframe output,
/// an engine output, or an interface output (an engine-produced quantity
/// that acts on the airframe).
struct IoAssignment {
    std::vector<Index> airframe_inputs;    ///< U_a positions in the plant
    std::vector<Index> engine_inputs;      ///< U_e positions
    std::vector<Index> airframe_outputs;   ///< y_a positions
    std::vector<Index> engine_outputs;     ///< y_e positions
    std::vector<Index> interface_outputs;  ///< y_ea positions
};

/// Convenience channel counts of a partition.
struct PartitionDims {
    Index n_ua = 0;   ///< airframe actuators
    Index n_ue = 0;   ///< engine actuators
    Index n_ya = 0;   ///< airframe outputs
    Index n_ye = 0;   ///< engine outputs
    Index n_yea = 0;  ///< interface outputs
};

/// An extended plant together with a validated channel assignment. The
/// six transfer blocks (airframe/engine outputs and interface outputs
/// against airframe/engine actuators) are recoverable with the block
/// accessors and reassemble the base response exactly.
struct PartitionedPlant {
    StateSpace base;
    IoAssignment io;

    PartitionDims dims() const;

    StateSpace g_aa() const;    ///< y_a  <- U_a
    StateSpace g_ae() const;    ///< y_a  <- U_e
    StateSpace g_ea() const;    ///< y_e  <- U_a
    StateSpace g_ee() const;    ///< y_e  <- U_e
    StateSpace g_ea_a() const;  ///< y_ea <- U_a
    StateSpace g_ea_e() const;  ///< y_ea <- U_e
};

/// Validate an assignment against a plant and bundle them. Every input
/// index must appear exactly once across the two input sets and every
/// output index exactly once across the three output sets; anything else
/// throws std::invalid_argument.
PartitionedPlant assign_io(const StateSpace& g_ext, const IoAssignment& io);

/// The shipped default assignment for the demo airframe/engine model,
/// matched by channel label: airframe actuator "delta_tv"; engine
/// actuators "W_f", "A_78", "A_8"; airframe outputs "V", "q_v"; engine
/// outputs "N_2P", "R"; every remaining output is an interface output.
/// Throws std::invalid_argument when a required label is missing.
IoAssignment preset_assignment(const StateSpace& g_ext);

/// Outcome of the interface-variable screening.
struct InterfaceSelection {
    std::vector<Index> selected;  ///< subset of the candidate list
    Matrix peaks;                 ///< candidate x command peak |response|
};

/// Screen candidate interface outputs by closed-loop step dominance.
///
/// t_ext maps commands to outputs and exposes the candidates as extra
/// (non-fed-back) outputs, pre-scaled so magnitudes compare directly.
/// For each command channel a unit step is simulated; a candidate is
/// selected iff for at least one command its peak absolute response
/// reaches dominance_ratio times the largest candidate peak for that
/// command. Throws std::invalid_argument for an empty candidate list,
/// out-of-range indices, or a ratio outside (0, 1].
InterfaceSelection select_interface(const StateSpace& t_ext,
                                    const std::vector<Index>& candidates,
                                    const std::vector<Index>& commands,
                                    double dominance_ratio = 0.5,
                                    double horizon = 20.0);

/// A derived controller block kept in full and reduced form. When the
/// full block is unstable the reduction is refused and `reduced` aliases
/// the full block (balanced truncation needs a stable system).
struct BlockReduction {
    StateSpace full;
    StateSpace reduced;
    bool stable = false;             ///< full block Hurwitz
    bool reduction_applied = false;  ///< reduced differs from full
    std::vector<double> hankel_svs;  ///< of the full block (when stable)
};

/// Build the composite flight controller: the centralized controller K
/// (inputs [e_a; e_e; y_a; y_e], outputs [U_a; U_e]) wired to an engine
/// subsystem model (U_e -> [y_e; y_ea]) with the engine command held at
/// zero, so K's engine error input sees -y_e. The connection maps
/// [e_a; y_a] -> [U_a; y_ea_cmd] and has order(K) + order(engine) states;
/// it is then balanced-truncated to reduce_to states (refused, with the
/// full block returned, when the connection is unstable).
BlockReduction build_airframe_sub(const StateSpace& k,
                                  const StateSpace& engine_loop,
                                  const PartitionDims& dims, Index reduce_to);

/// Diagonal lead-lag bank, one channel each of ((s+a)/a) * (b/(s+b)):
/// unit DC gain, high-frequency gain b/a, one state per channel, stable.
/// Requires 0 < a < b.
StateSpace build_lead(double a, double b, Index channels);

/// Extract the engine-feedback block of the centralized controller (the
/// map from [engine errors; engine measurements] to engine actuators)
/// and balanced-truncate it to reduce_to states. The selection keeps the
/// full state dimension, so the block inherits K's stability; reduction
/// is refused for an unstable K.
BlockReduction extract_kee(const StateSpace& k,
                           const std::vector<Index>& engine_error_inputs,
                           const std::vector<Index>& engine_meas_inputs,
                           const std::vector<Index>& engine_outputs,
                           Index reduce_to);

/// What the deployed interface-tracking controller feeds back.
enum class KtFeedback {
    kErrorAndMeasurement,  ///< [interface error; interface measurement]
    kErrorOnly,            ///< interface error alone
};

/// The four decentralized controller pieces plus their reported
/// stability. k_t consumes the interface tracking error (and, in the
/// default variant, the interface measurement); k_ee consumes
/// [e_e; y_e]; ka_bar consumes [e_a; y_a] and emits [U_a; raw interface
/// command]; k_lead filters the raw interface command.
struct DecentralizedController {
    StateSpace ka_bar;
    StateSpace k_lead;
    StateSpace k_t;
    StateSpace k_ee;
    KtFeedback kt_feedback = KtFeedback::kErrorAndMeasurement;
    bool ka_bar_stable = false;
    bool k_lead_stable = false;
    bool k_t_stable = false;
    bool k_ee_stable = false;

    /// Throws std::invalid_argument when any block's channel counts are
    /// inconsistent with the partition.
    void check_dimensions(const PartitionedPlant& plant) const;
    /// Fill the reported stability flags from the stored blocks.
    void update_stability();
};

/// Closed-loop command-tracking map r -> y for plant G under a
/// two-degree-of-freedom controller K whose inputs are the tracking
/// errors stacked over the raw measurements:
///     u = K [r - y; y],     y = G u.
/// Writing K = [K_e  K_y] by input blocks, the result realizes
///     T = (I + G (K_e - K_y))^-1 G K_e
/// with states [x_G; x_K]. Throws std::invalid_argument on dimension
/// mismatch (K must have 2 p inputs and m outputs for a p-output,
/// m-input plant) and IllPosedError when the loop is algebraically
/// singular.
StateSpace assemble_tc(const StateSpace& g, const StateSpace& k);

/// Assemble the decentralized closed loop: the flight controller block
/// emits airframe actuation and a raw interface command; the lead bank
/// shapes the command; the interface tracking error (shaped command
/// minus measured interface output) drives k_t; k_ee closes the engine
/// loop on [engine error; engine measurement]; both engine contributions
/// sum into the engine actuators. Maps [r_a; r_e] -> [y_a; y_e] with the
/// same channel ordering as the centralized tracking map, so the two are
/// directly comparable. Throws IllPosedError on an algebraically
/// singular loop and std::invalid_argument on inconsistent dimensions.
StateSpace assemble_td(const PartitionedPlant& plant,
                       const DecentralizedController& ctrl);

/// Output complementary sensitivity of the centralized tracking loop:
/// the response a multiplicative perturbation at the plant outputs sees
/// (up to sign). With u = K [e; y] the effective output feedback is
/// C = K_e - K_y and the result realizes T_o = (I + G C)^-1 G C, built
/// by injecting an offset into the measured outputs (both the error and
/// the measurement path see it) and negating the response. Same
/// dimension rules and exceptions as assemble_tc.
StateSpace output_complementary_tc(const StateSpace& g, const StateSpace& k);

/// Output complementary sensitivity of the decentralized loop at the
/// controlled outputs [y_a; y_e]: the offset enters every measured copy
/// of the controlled outputs (tracking errors and direct measurements)
/// while the interface measurement stays clean, and the negated response
/// back to the controlled outputs is returned. Same dimension rules and
/// exceptions as assemble_td.
StateSpace output_complementary_td(const PartitionedPlant& plant,
                                   const DecentralizedController& ctrl);

/// Outcome of the loop-matching stability test.
struct StabilityCheck {
    double error_norm = 0.0;  ///< peak gain of T_d - T_c (inf if unstable)
    bool passes = false;      ///< error_norm < 1 with both loops stable
    bool td_stable = false;
    bool tc_stable = false;
};

/// Sufficient stability/performance condition for the decentralized
/// loop: the peak gain of (T_d - T_c) must be below one. Either loop
/// unstable fails immediately with an infinite reported norm. Throws
/// std::invalid_argument on dimension mismatch.
StabilityCheck check_stability_condition(const StateSpace& td,
                                         const StateSpace& tc);

/// Everything the interface-tracking design loop needs besides the
/// genome: the design plant (engine actuators -> [interface outputs;
/// engine outputs]), the partitioned plant, and the already-fixed
/// controller pieces the candidate must cooperate with.
struct KtDesignContext {
    StateSpace engine_plant;  ///< U_e -> [y_ea; y_e], square, stable
    PartitionedPlant plant;
    StateSpace ka_bar;   ///< reduced flight controller block
    StateSpace k_lead;
    StateSpace k_ee;     ///< reduced engine-feedback block
    KtFeedback feedback = KtFeedback::kErrorAndMeasurement;
    Index reduce_to = 4;  ///< deployed tracking-controller order
};

/// Result of the interface-tracking controller search.
struct KtDesignResult {
    StateSpace k_t;       ///< deployed: stripped to interface channels, reduced
    StateSpace k_t_full;  ///< stripped but unreduced
    GaResult ga;
    double fitness = 0.0;
    double gamma = 0.0;   ///< attained synthesis level at the winner
    bool stable_full = false;
    bool stable_reduced = false;
};

/// GA-driven mixed-sensitivity design of the interface tracking
/// controller on the square engine design loop; the winning genome's
/// controller is stripped of the auxiliary engine measurement channels
/// and balanced-truncated to ctx.reduce_to states. Throws SynthesisError
/// when no genome in the search produced a controller.
KtDesignResult design_kt(const KtDesignContext& ctx,
                         const PerformanceSpec& spec, const GaConfig& ga,
                         const std::vector<GeneBounds>& bounds,
                         const StateSpace& t_c, const FrequencyGrid& grid);

} // namespace ifpc
