#include "ifpc/simulate.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace ifpc {

namespace {

double default_dt(const StateSpace& g) {
    if (g.n() == 0) return 1e-3;
    Eigen::EigenSolver<Matrix> es(g.A, /*computeEigenvectors=*/false);
    double lam_max = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        lam_max = std::max(lam_max, std::abs(es.eigenvalues()(i)));
    }
    if (lam_max <= 0.0) return 1e-3;
    return std::min(1e-3, 0.05 / lam_max);
}

void check_sim_args(const StateSpace& g, Index input_channel, double horizon,
                    double dt) {
    g.validate();
    if (input_channel < 0 || input_channel >= g.m()) {
        throw std::invalid_argument("simulate_step: input channel out of "
                                    "range");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("simulate_step: dt must be positive");
    }
    if (!(horizon >= dt)) {
        throw std::invalid_argument(
            "simulate_step: horizon must be at least one step");
    }
}

} // namespace

StepResponse simulate_step(const StateSpace& g, Index input_channel,
                           double horizon, double dt) {
    if (dt <= 0.0) dt = default_dt(g);
    check_sim_args(g, input_channel, horizon, dt);

    const Index n = g.n();
    const Index p = g.p();
    const Index steps = static_cast<Index>(std::ceil(horizon / dt - 1e-9));
    const Vector b = g.B.col(input_channel);
    const Vector d = g.D.col(input_channel);

    StepResponse out;
    out.t.reserve(static_cast<size_t>(steps) + 1);
    out.y.resize(steps + 1, p);

    Vector x = Vector::Zero(n);
    for (Index k = 0; k <= steps; ++k) {
        out.t.push_back(static_cast<double>(k) * dt);
        out.y.row(k) = (g.C * x + d).transpose();
        if (!out.y.row(k).allFinite()) {
            out.diverged = true;
            out.y.conservativeResize(k + 1, p);
            break;
        }
        if (k == steps) break;
        const Vector k1 = g.A * x + b;
        const Vector k2 = g.A * (x + 0.5 * dt * k1) + b;
        const Vector k3 = g.A * (x + 0.5 * dt * k2) + b;
        const Vector k4 = g.A * (x + dt * k3) + b;
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

StepResponse simulate_step_exact(const StateSpace& g, Index input_channel,
                                 double horizon, double dt, bool early_exit,
                                 double settle_tol, double dwell) {
    check_sim_args(g, input_channel, horizon, dt);

    const Index n = g.n();
    const Index p = g.p();
    const Index steps = static_cast<Index>(std::ceil(horizon / dt - 1e-9));
    const Vector b = g.B.col(input_channel);
    const Vector d = g.D.col(input_channel);

    // Exact zero-order-hold step: x+ = Phi x + Gamma, with
    // Phi = exp(A dt) and Gamma = A^-1 (Phi - I) b. A singular A (rare
    // here: stable systems only) falls back to an augmented exponential.
    Matrix phi;
    Vector gamma;
    if (n > 0) {
        Eigen::FullPivLU<Matrix> lu(g.A);
        if (lu.isInvertible()) {
            phi = (g.A * dt).exp();
            gamma = lu.solve((phi - Matrix::Identity(n, n)) * b);
        } else {
            Matrix aug = Matrix::Zero(n + 1, n + 1);
            aug.topLeftCorner(n, n) = g.A * dt;
            aug.topRightCorner(n, 1) = b * dt;
            const Matrix e = aug.exp();
            phi = e.topLeftCorner(n, n);
            gamma = e.topRightCorner(n, 1);
        }
    }

    // Final value for the settling test (exact when A is invertible).
    Vector y_final = d;
    bool have_final = false;
    if (n > 0) {
        Eigen::FullPivLU<Matrix> lu(g.A);
        if (lu.isInvertible()) {
            y_final = d - g.C * lu.solve(b);
            have_final = true;
        }
    } else {
        have_final = true;
    }

    StepResponse out;
    out.t.reserve(static_cast<size_t>(steps) + 1);
    std::vector<Vector> rows;
    rows.reserve(static_cast<size_t>(steps) + 1);

    const double settle_scale = std::max(y_final.cwiseAbs().maxCoeff(), 1e-9);
    const Index dwell_steps =
        std::max<Index>(1, static_cast<Index>(std::llround(dwell / dt)));
    Index settled_run = 0;

    Vector x = Vector::Zero(n);
    for (Index k = 0; k <= steps; ++k) {
        Vector y = (n > 0) ? Vector(g.C * x + d) : d;
        out.t.push_back(static_cast<double>(k) * dt);
        rows.push_back(y);
        if (!y.allFinite()) {
            out.diverged = true;
            break;
        }
        if (early_exit && have_final) {
            const double dev = (y - y_final).cwiseAbs().maxCoeff();
            settled_run = (dev <= settle_tol * settle_scale) ? settled_run + 1
                                                             : 0;
            if (settled_run >= dwell_steps) break;
        }
        if (k == steps) break;
        if (n > 0) x = phi * x + gamma;
    }

    out.y.resize(static_cast<Index>(rows.size()), p);
    for (size_t i = 0; i < rows.size(); ++i) {
        out.y.row(static_cast<Index>(i)) = rows[i].transpose();
    }
    return out;
}

} // namespace ifpc
