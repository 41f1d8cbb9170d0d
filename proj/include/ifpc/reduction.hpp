#pragma once

#include "ifpc/state_space.hpp"

namespace ifpc {

/// Balanced-truncation output: the reduced system and the full list of
/// Hankel singular values of the original system (descending).
struct ReductionResult {
    StateSpace system;
    std::vector<double> hankel_svs;
};

/// Balanced truncation of a stable system to (at most) target_order
/// states. Gramians come from Lyapunov solves; the balancing transform
/// from an eigenvalue square-root factorization plus an SVD. States whose
/// Hankel singular value falls below 1e-12 times the largest are always
/// discarded, so the result can have fewer than target_order states for
/// numerically rank-deficient systems. The truncation obeys the twice-
/// the-tail bound ||G - G_r||_inf <= 2 * sum_{i>k} sigma_i.
/// Throws SolverError when G is unstable, std::invalid_argument for a
/// target order outside [1, n].
ReductionResult balanced_truncate(const StateSpace& g, Index target_order);

} // namespace ifpc
