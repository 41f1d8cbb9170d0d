#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "ifpc/frequency.hpp"
#include "ifpc/state_space.hpp"

namespace ifpc {

/// Acceptable interval for a loop bandwidth, rad/s.
struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

/// Closed-loop performance targets plus the penalty weighting used by the
/// optimization objectives.
struct PerformanceSpec {
    std::vector<Band> bandwidth_bands;  ///< one per command channel
    double rise_time_bound = 1.0;       ///< s, upper bound (90% criterion)
    double overshoot_bound = 0.2;       ///< fraction of final value, upper bound
    double gamma_bound = 1.0;           ///< attained-level upper bound
    /// Weights for the tracking objective terms in order: one per
    /// bandwidth band, then rise time, overshoot, attained level.
    /// Empty means all ones.
    std::vector<double> k1;
    double k_psi = 1.0;      ///< weight on the loop-match term
    /// Weights for the interface-tracking terms in order: bandwidth,
    /// rise time, overshoot. Empty means all ones.
    std::vector<double> k2;
    /// Fraction by which targets are tightened during search (a small
    /// positive value makes the optimizer overshoot the true bounds so
    /// the final design clears them with margin).
    double target_inflation = 0.0;
    double sim_horizon = 20.0;  ///< step-response horizon for metrics, s
    double sim_dt = 1e-3;       ///< step-response sample period, s

    void validate() const;
    double k1_weight(std::size_t i) const;
    double k2_weight(std::size_t i) const;
};

/// Step/frequency metrics of one diagonal channel of a tracking loop.
struct ChannelMetrics {
    double bandwidth = 0.0;        ///< rad/s (see bandwidth_defined)
    bool bandwidth_defined = false;
    double rise_time = 0.0;        ///< s, first 90%-of-final crossing
    bool rise_defined = false;
    double overshoot = 0.0;        ///< (peak - final)/final, >= 0
    double dc = 0.0;               ///< channel DC gain
};

/// Metrics for every command channel of a square tracking map.
struct TrackingMetrics {
    std::vector<ChannelMetrics> channels;
    bool diverged = false;  ///< any step simulation left the finite range
    /// Attained synthesis level; filled by the caller, not measured here.
    double gamma = std::numeric_limits<double>::quiet_NaN();
};

/// Evaluate per-channel bandwidth, rise time and overshoot of a square
/// command-tracking map T (commands in, controlled outputs out).
///
/// Bandwidth is the first frequency at which the diagonal channel's
/// magnitude falls below 1/sqrt(2) of its DC value, log-interpolated
/// between grid points; a channel with (near-)zero DC gain has no
/// bandwidth and is flagged instead. Rise time is the first crossing of
/// 90% of the final value (linearly interpolated between samples);
/// overshoot is (peak - final)/final, clamped at zero. The step response
/// uses exact discretization with the horizon and sample period from the
/// spec. Throws std::invalid_argument when T is not square.
TrackingMetrics eval_metrics(const StateSpace& t, const PerformanceSpec& spec,
                             const FrequencyGrid& grid);

/// Mean over the grid of the squared peak singular value of the response
/// difference:  (1/m) * sum_k  sigma_max(Td(jw_k) - Tc(jw_k))^2.
/// Zero iff the responses agree at every grid point; scales
/// quadratically with the difference. Throws std::invalid_argument on
/// dimension mismatch.
double psi2(const StateSpace& td, const StateSpace& tc,
            const FrequencyGrid& grid);

} // namespace ifpc
