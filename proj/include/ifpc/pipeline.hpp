#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ifpc/analysis.hpp"
#include "ifpc/fitness.hpp"
#include "ifpc/ga.hpp"
#include "ifpc/metrics.hpp"
#include "ifpc/partition.hpp"
#include "ifpc/plant_io.hpp"

namespace ifpc {

/// A pipeline stage failed; the message names the stage.
struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything one end-to-end design run needs besides the plant: grid,
/// channel roles, the two search setups (tracking design and interface
/// tracking design), partitioning knobs, and the output directory.
struct PipelineConfig {
    // Evaluation grid.
    double omega_lo = 1e-2;
    double omega_hi = 1e2;
    double points_per_decade = 20.0;

    // Channel roles, by plant output label; engine states by state label
    // (state labels live in the plant document).
    std::vector<std::string> controlled_outputs;
    std::vector<std::string> interface_candidates;
    std::vector<std::string> engine_states;

    // Centralized tracking design.
    PerformanceSpec tracking_spec;
    GaConfig tracking_ga;
    std::vector<GeneBounds> tracking_bounds;

    // Interface tracking design.
    PerformanceSpec interface_spec;
    GaConfig interface_ga;
    std::vector<GeneBounds> interface_bounds;

    // Partitioning.
    double dominance_ratio = 0.5;
    double lead_a = 2.0;
    double lead_b = 20.0;
    Index flight_block_order = 6;      ///< deployed flight-block order
    Index engine_feedback_order = 4;   ///< deployed engine-feedback order
    Index interface_tracking_order = 4;
    KtFeedback kt_feedback = KtFeedback::kErrorAndMeasurement;

    std::string out_dir = "ifpc_out";

    /// Structural checks that need no plant: well-ordered bounds and
    /// bands, positive grid and lead parameters, sane orders.
    void validate() const;
    /// Full check against a plant: every referenced label must exist and
    /// the genome bounds must match the channel counts.
    void validate(const StateSpace& plant) const;
};

/// Defaults tuned for the bundled demo model: every knob populated so
/// a demo run needs no config file.
PipelineConfig default_config();

/// Load a config document; missing keys keep their default_config()
/// values. Throws std::runtime_error on unreadable or unparseable files
/// and std::invalid_argument on malformed values.
PipelineConfig load_config(const std::string& path);

/// Write a config document (the exact inverse of load_config).
void write_config(const PipelineConfig& cfg, const std::string& path);

/// The pipeline's named stages, in execution order.
const std::vector<std::string>& pipeline_stage_names();

/// One executed (or resumed) stage.
struct StageStatus {
    std::string name;
    bool resumed = false;  ///< loaded from an existing stage file
};

/// Outcome of a full pipeline run.
struct PipelineResult {
    ReportManifest manifest;
    std::map<std::string, double> metrics;  ///< what metrics.json carries
    std::vector<StageStatus> stages;
    StabilityCheck check_full;     ///< loop-match test, unreduced blocks
    StabilityCheck check_reduced;  ///< loop-match test, deployed blocks
};

/// Run the design pipeline end to end:
///   synth     - search tracking weights, synthesize the centralized
///               controller on the controlled outputs
///   partition - screen interface candidates on the closed loop, split
///               the controller into the flight block, lead bank, and
///               engine feedback block
///   kt        - search interface-tracking weights against the
///               centralized loop
///   analyze   - loop-match stability condition (full and deployed
///               block orders), gap curves, perturbation margins
///   simulate  - side-by-side command steps, centralized vs. both
///               decentralized assemblies
///   report    - render every artifact plus metrics.json and a
///               manifest.json covering all files in out_dir
///
/// Each stage persists its outputs to <out_dir>/stage_<name>.json as it
/// completes. With resume=true, stages whose file already exists are
/// loaded instead of recomputed, and the final manifest is identical to
/// a fresh run's. A failing stage still writes a manifest for the files
/// produced so far, then throws PipelineError naming the stage.
PipelineResult run_pipeline(const LoadedPlant& plant,
                            const PipelineConfig& cfg, bool resume = false);

} // namespace ifpc
