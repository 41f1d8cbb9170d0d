#pragma once

#include <map>
#include <string>
#include <vector>

#include "ifpc/frequency.hpp"
#include "ifpc/partition.hpp"
#include "ifpc/state_space.hpp"

namespace ifpc {

/// Singular values of a system difference over a grid, with the largest
/// value and the frequency at which it occurs.
struct ErrorCurve {
    SigmaCurve curve;        ///< all singular values per point, descending
    double peak = 0.0;       ///< max over the grid of the largest value
    double peak_omega = 0.0; ///< grid frequency attaining the peak
};

/// Gap between two loops: singular values of (T_d - T_c)(jw) over the
/// grid. Both systems must have the same channel counts; throws
/// std::invalid_argument otherwise.
ErrorCurve error_curve(const StateSpace& td, const StateSpace& tc,
                       const FrequencyGrid& grid);

/// Upper bound on the structured singular value of a single complex
/// matrix with respect to a block-diagonal complex uncertainty whose
/// block sizes are given by `blocks` (a partition of the matrix
/// dimension; scalar blocks model independent gain/phase perturbations
/// per channel). The bound is inf over positive block-diagonal scalings
/// D of sigma_max(D M D^-1), located by iterative row/column rebalancing
/// with the scalings clamped to [1e-6, 1e6] and at most 100 sweeps. The
/// result never exceeds sigma_max(M) (D = I is admissible) and is exact
/// for a 1x1 matrix. Throws std::invalid_argument for a non-square or
/// non-finite matrix or a block list that does not partition it.
double mu_upper(const MatrixC& m, const std::vector<Index>& blocks);

/// Classical margin numbers implied by a peak structured-singular-value
/// level. All derive from the guaranteed simultaneous perturbation
/// radius sm = 1/mu_max:
///   gain in [1/(1+sm), 1/(1-sm)]  ->  gm_low_db / gm_high_db,
///   phase within +-2 asin(sm/2)   ->  pm_deg.
/// sm >= 1 means no upward gain limit (gm_high_db = +inf, flagged);
/// sm > 2 means no phase limit (pm_deg = 180, flagged).
struct Margins {
    double sm = 0.0;          ///< perturbation radius 1/mu_max
    double gm_low_db = 0.0;   ///< simultaneous downward gain margin (< 0)
    double gm_high_db = 0.0;  ///< simultaneous upward gain margin (> 0)
    double pm_deg = 0.0;      ///< simultaneous phase margin, degrees
    bool gm_high_infinite = false;
    bool pm_unbounded = false;
};

/// Convert a peak mu level into margin numbers. Throws
/// std::invalid_argument unless mu_max is finite and positive.
Margins margins(double mu_max);

/// Robustness summary of one closed loop: the mu upper bound swept over
/// a frequency grid plus the margin numbers at its peak.
struct MarginReport {
    double mu_max = 0.0;        ///< peak of the mu curve over the grid
    double mu_peak_omega = 0.0; ///< frequency attaining the peak
    double sm = 0.0;
    double gm_low_db = 0.0;
    double gm_high_db = 0.0;
    double pm_deg = 0.0;
    bool gm_high_infinite = false;
    bool pm_unbounded = false;
    bool infinite_margins = false; ///< mu was zero at every grid point
    SigmaCurve mu_curve;           ///< one mu value per grid point
};

/// Sweep the mu upper bound of a square loop transfer (conventionally
/// the output complementary sensitivity, which is what a multiplicative
/// gain/phase perturbation at the controlled outputs sees) over a grid
/// and convert the peak into margins. A loop that is identically zero
/// on the grid has unbounded margins and is flagged. Throws
/// std::invalid_argument when the loop is not square or the block list
/// does not partition its dimension.
MarginReport robustness_sweep(const StateSpace& loop,
                              const FrequencyGrid& grid,
                              const std::vector<Index>& blocks);

/// A system with a display name, as fed to the comparison table.
struct LabeledSystem {
    std::string name;
    StateSpace system;
};

/// Aligned step responses of several systems driven on the same command
/// channel, plus the largest pairwise output deviation.
struct StepComparison {
    std::vector<double> t;
    std::vector<std::string> system_names;
    std::vector<std::string> output_names;   ///< labels or y1..yp
    std::vector<Matrix> responses;           ///< per system: samples x p
    std::vector<double> max_deviation;       ///< per output, over pairs/time
    bool any_diverged = false;
};

/// Simulate a unit step on one command channel for every listed system
/// (exact discretization, shared sample grid) and tabulate the responses
/// side by side. All systems must have identical channel counts and
/// identical channel labels; names must be unique and non-empty. Throws
/// std::invalid_argument otherwise.
StepComparison compare_step(const std::vector<LabeledSystem>& systems,
                            Index command_channel, double horizon = 20.0,
                            double dt = 1e-3);

/// A named curve destined for a CSV file (<name>.csv).
struct CurveArtifact {
    std::string name;
    SigmaCurve curve;
};

/// A named step-comparison table destined for a CSV file (<name>.csv).
struct TableArtifact {
    std::string name;
    StepComparison table;
};

/// Everything one report run writes: curves, tables, and scalar metrics
/// (the metrics map becomes metrics.json when non-empty).
struct ReportArtifacts {
    std::vector<CurveArtifact> curves;
    std::vector<TableArtifact> tables;
    std::map<std::string, double> metrics;
};

/// Lowercase hex SHA-256 digest of a byte string (the digest used for
/// manifest entries).
std::string sha256_hex(const std::string& content);

/// One written file: its path relative to the output directory and the
/// lowercase hex SHA-256 of its exact byte content.
struct ManifestEntry {
    std::string path;
    std::string sha256;
};

/// The full list of files a report run produced, sorted by path.
struct ReportManifest {
    std::vector<ManifestEntry> files;
};

/// Write the artifact set into out_dir (created if missing) and a
/// manifest.json listing every written file with its content digest.
/// The output is a pure function of the artifact values: numbers are
/// formatted with 17 significant digits, rows and keys are emitted in a
/// fixed order, and no timestamps or environment data are included, so
/// identical inputs produce byte-identical files. Artifact names must
/// be unique, non-empty, use only [A-Za-z0-9_.-], not start with a dot,
/// and avoid the reserved names "metrics" and "manifest"; all values
/// must be finite. Throws std::invalid_argument on a bad artifact set
/// and std::runtime_error when a file cannot be written.
ReportManifest emit_report(const ReportArtifacts& artifacts,
                           const std::string& out_dir);

} // namespace ifpc
