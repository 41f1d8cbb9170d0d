#include "ifpc/reduction.hpp"

#include <cmath>

#include "ifpc/solvers.hpp"

namespace ifpc {

ReductionResult balanced_truncate(const StateSpace& g, Index target_order) {
    g.validate();
    const Index n = g.n();
    if (n == 0) {
        return {g, {}};
    }
    if (target_order < 1 || target_order > n) {
        throw std::invalid_argument(
            "balanced_truncate: target order must lie in [1, n]");
    }
    if (!is_stable(g)) {
        throw SolverError("balanced_truncate: system must be stable");
    }

    const Matrix wc = solve_lyapunov(g.A, g.B * g.B.transpose());
    const Matrix wo =
        solve_lyapunov(g.A.transpose(), g.C.transpose() * g.C);

    // Square-root factors W = L L' via symmetric eigendecomposition with
    // negative round-off eigenvalues clamped to zero.
    auto factor = [](const Matrix& w) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(w);
        Vector lam = es.eigenvalues().cwiseMax(0.0);
        return (es.eigenvectors() * lam.cwiseSqrt().asDiagonal()).eval();
    };
    const Matrix lc = factor(wc);
    const Matrix lo = factor(wo);

    Eigen::JacobiSVD<Matrix> svd(lo.transpose() * lc,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    std::vector<double> hankel(sv.data(), sv.data() + sv.size());

    // Numerical-rank cutoff: never keep states below 1e-12 of the top
    // Hankel singular value.
    const double sigma1 = sv.size() > 0 ? sv(0) : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) >= 1e-12 * sigma1 && sv(i) > 0.0) ++rank;
    }
    const Index k = std::min(target_order, rank);
    if (k == 0) {
        // No controllable-and-observable part: the response is pure
        // feedthrough.
        return {static_system(g.D, g.input_labels, g.output_labels), hankel};
    }

    const Matrix u_k = svd.matrixU().leftCols(k);
    const Matrix v_k = svd.matrixV().leftCols(k);
    const Vector s_inv_sqrt = sv.head(k).cwiseSqrt().cwiseInverse();
    const Matrix t = lc * v_k * s_inv_sqrt.asDiagonal();          // n x k
    const Matrix t_inv = s_inv_sqrt.asDiagonal() * u_k.transpose() *
                         lo.transpose();                           // k x n

    StateSpace reduced(t_inv * g.A * t, t_inv * g.B, g.C * t, g.D,
                       g.input_labels, g.output_labels);
    if (!is_stable(reduced, 0.0)) {
        throw SolverError(
            "balanced_truncate: reduced system lost stability (degenerate "
            "Hankel spectrum at the truncation boundary)");
    }
    return {std::move(reduced), std::move(hankel)};
}

} // namespace ifpc
