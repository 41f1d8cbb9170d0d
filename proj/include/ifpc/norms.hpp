#pragma once

#include "ifpc/state_space.hpp"

namespace ifpc {

/// H-infinity norm value plus the frequency (rad/s) where the peak
/// response was located. peak_omega = 0 for static or DC-peaked systems.
struct HinfResult {
    double value = 0.0;
    double peak_omega = 0.0;
};

/// H-infinity norm of a stable system by bisection on the imaginary-axis
/// eigenvalues of the level-set Hamiltonian, with direct response
/// evaluations at candidate peak frequencies tightening the lower bound.
/// Converges to the given relative tolerance. Throws SolverError for
/// unstable systems (the norm is undefined/unbounded).
HinfResult hinf_norm(const StateSpace& g, double rel_tol = 1e-4);

} // namespace ifpc
