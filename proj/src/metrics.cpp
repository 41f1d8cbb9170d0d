#include "ifpc/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "ifpc/simulate.hpp"

namespace ifpc {

namespace {

constexpr double kDcThreshold = 1e-9;

/// First frequency where the magnitude curve falls below `target`,
/// log-log interpolated between grid points. Returns a negative value
/// when the curve never crosses within the grid.
double crossing_frequency(const std::vector<double>& omega,
                          const std::vector<double>& mag, double target) {
    if (mag.empty()) return -1.0;
    if (mag.front() < target) return omega.front();
    for (std::size_t k = 1; k < mag.size(); ++k) {
        if (mag[k] < target) {
            const double lm0 = std::log10(std::max(mag[k - 1], 1e-300));
            const double lm1 = std::log10(std::max(mag[k], 1e-300));
            const double lt = std::log10(std::max(target, 1e-300));
            const double x = (lm0 - lt) / (lm0 - lm1);
            const double lw0 = std::log10(omega[k - 1]);
            const double lw1 = std::log10(omega[k]);
            return std::pow(10.0, lw0 + x * (lw1 - lw0));
        }
    }
    return -1.0;
}

} // namespace

void PerformanceSpec::validate() const {
    for (const auto& b : bandwidth_bands) {
        if (!(b.lo > 0.0) || !(b.lo < b.hi))
            throw std::invalid_argument(
                "performance spec: bandwidth band needs 0 < lo < hi");
    }
    if (!(rise_time_bound > 0.0))
        throw std::invalid_argument("performance spec: rise bound must be > 0");
    if (!(overshoot_bound > 0.0))
        throw std::invalid_argument(
            "performance spec: overshoot bound must be > 0");
    if (!(gamma_bound > 0.0))
        throw std::invalid_argument("performance spec: level bound must be > 0");
    if (!k1.empty() && k1.size() != bandwidth_bands.size() + 3)
        throw std::invalid_argument(
            "performance spec: k1 must be empty or sized bands + 3");
    if (!k2.empty() && k2.size() != 3)
        throw std::invalid_argument(
            "performance spec: k2 must be empty or sized 3");
    if (!(k_psi >= 0.0))
        throw std::invalid_argument("performance spec: k_psi must be >= 0");
    if (!(target_inflation >= 0.0 && target_inflation < 0.5))
        throw std::invalid_argument(
            "performance spec: target_inflation must be in [0, 0.5)");
    if (!(sim_horizon > 0.0) || !(sim_dt > 0.0) || sim_dt >= sim_horizon)
        throw std::invalid_argument(
            "performance spec: need 0 < sim_dt < sim_horizon");
}

double PerformanceSpec::k1_weight(std::size_t i) const {
    if (k1.empty()) return 1.0;
    return k1.at(i);
}

double PerformanceSpec::k2_weight(std::size_t i) const {
    if (k2.empty()) return 1.0;
    return k2.at(i);
}

TrackingMetrics eval_metrics(const StateSpace& t, const PerformanceSpec& spec,
                             const FrequencyGrid& grid) {
    t.validate();
    spec.validate();
    if (t.m() != t.p())
        throw std::invalid_argument(
            "eval_metrics: tracking map must be square (commands in, "
            "controlled outputs out)");
    if (grid.points.empty())
        throw std::invalid_argument("eval_metrics: empty frequency grid");

    const Index nc = t.p();
    TrackingMetrics out;
    out.channels.resize(static_cast<std::size_t>(nc));

    const Matrix dc = dc_gain(t);
    const auto resp = freq_response(t, grid);

    for (Index i = 0; i < nc; ++i) {
        auto& ch = out.channels[static_cast<std::size_t>(i)];
        ch.dc = dc(i, i);
        const double dc_abs = std::abs(ch.dc);

        if (dc_abs > kDcThreshold) {
            std::vector<double> mag(resp.size());
            for (std::size_t k = 0; k < resp.size(); ++k)
                mag[k] = std::abs(resp[k](i, i));
            const double bw =
                crossing_frequency(grid.points, mag, dc_abs / std::sqrt(2.0));
            if (bw > 0.0) {
                ch.bandwidth = bw;
                ch.bandwidth_defined = true;
            } else {
                // Never rolls off inside the grid; report the grid edge.
                ch.bandwidth = grid.points.back();
                ch.bandwidth_defined = true;
            }
        }

        const auto step = simulate_step_exact(t, i, spec.sim_horizon,
                                              spec.sim_dt, true);
        if (step.diverged) {
            out.diverged = true;
            continue;
        }
        if (dc_abs <= kDcThreshold) continue;  // no final value to track

        double peak_norm = -std::numeric_limits<double>::infinity();
        for (Index k = 0; k < step.y.rows(); ++k)
            peak_norm = std::max(peak_norm, step.y(k, i) / ch.dc);
        ch.overshoot = std::max(0.0, peak_norm - 1.0);

        for (Index k = 0; k < step.y.rows(); ++k) {
            const double yn = step.y(k, i) / ch.dc;
            if (yn >= 0.9) {
                if (k == 0) {
                    ch.rise_time = step.t[0];
                } else {
                    const double prev = step.y(k - 1, i) / ch.dc;
                    const double frac = (0.9 - prev) / (yn - prev);
                    ch.rise_time =
                        step.t[static_cast<std::size_t>(k - 1)] +
                        frac * (step.t[static_cast<std::size_t>(k)] -
                                step.t[static_cast<std::size_t>(k - 1)]);
                }
                ch.rise_defined = true;
                break;
            }
        }
    }
    return out;
}

double psi2(const StateSpace& td, const StateSpace& tc,
            const FrequencyGrid& grid) {
    if (td.m() != tc.m() || td.p() != tc.p())
        throw std::invalid_argument(
            "psi2: responses must share input/output dimensions");
    if (grid.points.empty())
        throw std::invalid_argument("psi2: empty frequency grid");
    const auto rd = freq_response(td, grid);
    const auto rc = freq_response(tc, grid);
    double sum = 0.0;
    for (std::size_t k = 0; k < rd.size(); ++k) {
        const double s = sigma_max_of(rd[k] - rc[k]);
        sum += s * s;
    }
    return sum / static_cast<double>(rd.size());
}

} // namespace ifpc
