#pragma once

#include <optional>

#include "ifpc/state_space.hpp"

namespace ifpc {

/// Result of an output-feedback attenuation synthesis.
struct SynthesisResult {
    StateSpace controller;        ///< maps the measurement block to the actuators
    double gamma_achieved = 0.0;  ///< smallest certified attenuation level
    double verified_norm = 0.0;   ///< independently computed closed-loop norm
    bool d12_regularized = false; ///< actuator feedthrough needed an eps block
    bool d21_regularized = false; ///< measurement feedthrough needed an eps block
    bool controller_stable = false;  ///< diagnostic only; not a requirement
    bool monotonic_ok = true;     ///< feasibility persisted at probes above gamma
    int iterations = 0;           ///< bisection probe count
};

/// Lower linear-fractional closure: k's outputs drive the last k.p()
/// inputs of p, and the last k.m() outputs of p drive k. The remaining
/// (leading) channels stay external, so the result maps w -> z.
/// Throws IllPosedError when the measurement loop is algebraic-singular.
StateSpace lower_lft(const StateSpace& p, const StateSpace& k);

/// Central output-feedback controller at a fixed attenuation level gamma,
/// or nullopt when the level is certifiably infeasible (spectral-factor or
/// Riccati conditions fail, or the resulting loop is unstable / exceeds
/// gamma on a coarse frequency sweep). The plant's last n_meas outputs are
/// the measurements and last n_ctrl inputs the actuators; the returned
/// controller is already wrapped for the measurement feedthrough term.
std::optional<StateSpace> hinfsyn_at(const StateSpace& p, Index n_meas,
                                     Index n_ctrl, double gamma);

/// Two-Riccati attenuation synthesis with bisection on gamma.
///
/// Brackets gamma between the direct-feedthrough lower bound and 1e4,
/// bisects to the given relative tolerance, and returns the controller at
/// the smallest feasible level. The accepted closed loop is re-verified
/// with an independent norm computation; the certified level is inflated
/// (up to a few retries) if verification demands it. Throws SynthesisError
/// when the problem is infeasible at the upper bracket, not stabilizable /
/// detectable, or verification cannot be satisfied.
SynthesisResult hinfsyn(const StateSpace& p, Index n_meas, Index n_ctrl,
                        double tol = 1e-3);

} // namespace ifpc
