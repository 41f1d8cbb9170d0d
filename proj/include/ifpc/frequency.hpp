#pragma once

#include "ifpc/state_space.hpp"

namespace ifpc {

/// Logarithmically spaced evaluation grid, ascending, in rad/s.
struct FrequencyGrid {
    std::vector<double> points;
    double points_per_decade = 0.0;
    double omega_lo = 0.0;
    double omega_hi = 0.0;

    Index size() const { return static_cast<Index>(points.size()); }
};

/// Per-frequency singular values of a response, descending at each point.
struct SigmaCurve {
    FrequencyGrid grid;
    std::vector<std::vector<double>> values;  ///< one descending list per point
};

/// Build a log-spaced grid over [omega_lo, omega_hi] with the given points
/// per decade. Point count is floor(ppd*log10(omega_hi/omega_lo)) + 1
/// (at least 2); both endpoints are included exactly, with uniform ratio
/// between consecutive points.
FrequencyGrid make_grid(double omega_lo, double omega_hi, double ppd);

/// Frequency response G(jw) = C (jwI - A)^-1 B + D at every grid point.
/// Throws SolverError when jw coincides with a pole of G (within a small
/// absolute/relative tolerance), since the response is unbounded there.
std::vector<MatrixC> freq_response(const StateSpace& g,
                                   const FrequencyGrid& grid);

/// Response at a single frequency (rad/s); same pole-on-axis rule.
MatrixC freq_response_at(const StateSpace& g, double omega);

/// Response at s = 0 (DC gain); requires A nonsingular.
Matrix dc_gain(const StateSpace& g);

/// All singular values of the response at each grid point, descending.
SigmaCurve sigma_max(const StateSpace& g, const FrequencyGrid& grid);

/// Largest singular value of a single complex matrix.
double sigma_max_of(const MatrixC& m);

} // namespace ifpc
