#pragma once

#include <vector>

#include "ifpc/frequency.hpp"
#include "ifpc/state_space.hpp"

namespace ifpc {

/// One first-order shaping filter k (s + z) / (s + p) with k, z, p > 0
/// and z != p. High-gain-at-DC shaping uses z > p; high-gain-at-infinity
/// shaping uses z < p; the filter is always stable.
struct FirstOrderWeight {
    double k = 1.0;
    double z = 1.0;
    double p = 1.0;

    /// Magnitude |k (jw + z)/(jw + p)| at frequency omega.
    double magnitude(double omega) const;
};

/// Loop-shaping weight family for the sensitivity / control-effort /
/// complementary-sensitivity design: first-order filters on each
/// controlled output for the sensitivity (w1) and complementary
/// sensitivity (w3) channels, and one positive scalar effort weight (w2)
/// applied to every actuator channel.
struct WeightSet {
    std::vector<FirstOrderWeight> w1;
    double w2 = 1.0;
    std::vector<FirstOrderWeight> w3;

    /// Throws std::invalid_argument when any parameter is non-positive,
    /// non-finite, or a filter has z == p, when w1/w3 sizes differ, or
    /// when both are empty.
    void validate() const;

    Index channels() const { return static_cast<Index>(w1.size()); }
};

struct RealizedWeights {
    StateSpace w1;  ///< diagonal, one state per channel
    StateSpace w2;  ///< 1 x 1 static gain
    StateSpace w3;  ///< diagonal, one state per channel
};

/// Diagonal state-space realizations of the weight set. Each first-order
/// channel k (s+z)/(s+p) realizes as (A=-p, B=z-p, C=k, D=k); the scalar
/// effort weight realizes as a 1 x 1 static system (callers broadcast it
/// over actuator channels).
RealizedWeights realize_weights(const WeightSet& w);

/// Augmented synthesis plant for the mixed-sensitivity problem around
/// plant G (m inputs u, p outputs y) with one w1/w3 filter per output:
///
///     inputs  [r; u],  r the p reference channels
///     outputs [w1*(r - y); w2*u; w3*y; r - y; y]
///
/// The first p+m+p rows are the weighted performance block, the last
/// p+p rows the controller measurements [e; y]. State dimension is
/// n(G) + p + p. Throws std::invalid_argument when the weight count
/// does not match G's output count.
StateSpace build_augmented(const StateSpace& g, const WeightSet& w);

struct WeightConstraintResult {
    bool ok = false;                ///< inequality holds at every grid point
    std::vector<double> slack;      ///< per-frequency margin (negative = violated)
};

/// Checks the mixed-sensitivity compatibility inequality
///     max_sv(W1^-1(jw)) + max_sv(W3^-1(jw)) >= 1
/// at every grid frequency. Both weight banks are diagonal, so the
/// largest singular value of the inverse is 1/min-channel-magnitude.
WeightConstraintResult check_weight_constraint(const WeightSet& w,
                                               const FrequencyGrid& grid);

} // namespace ifpc
