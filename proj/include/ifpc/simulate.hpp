#pragma once

#include "ifpc/state_space.hpp"

namespace ifpc {

/// Sampled step response: time stamps and one output row per sample
/// (y has one column per system output).
struct StepResponse {
    std::vector<double> t;
    Matrix y;                ///< samples x p
    bool diverged = false;   ///< state left the finite range before horizon
};

/// Classic fixed-step fourth-order Runge-Kutta integration of a unit step
/// on one input channel (zeros on the others), sampled every dt.
/// dt <= 0 selects the default min(1e-3, 0.05/|lambda|_max), which keeps
/// the fastest mode well resolved. Divergence is reported via the flag,
/// never thrown.
StepResponse simulate_step(const StateSpace& g, Index input_channel,
                           double horizon = 20.0, double dt = 0.0);

/// Step response by exact zero-order-hold discretization (matrix
/// exponential), sampled every dt (default 1e-3 s). Produces the exact
/// linear-system solution at the sample instants regardless of how stiff
/// the system is, and can stop early once the output has settled to
/// settle_tol (relative to its final value) for dwell seconds. Used by
/// the performance-metric evaluation in optimization loops and by the
/// side-by-side comparison tables, which need aligned sample grids.
StepResponse simulate_step_exact(const StateSpace& g, Index input_channel,
                                 double horizon = 20.0, double dt = 1e-3,
                                 bool early_exit = false,
                                 double settle_tol = 1e-4,
                                 double dwell = 2.0);

} // namespace ifpc
