#include "ifpc/solvers.hpp"

#include <lapacke.h>

#include <cmath>
#include <sstream>

#include "ifpc/state_space.hpp"

namespace ifpc {

namespace {

lapack_logical select_left_half_plane(const double* re, const double* im) {
    (void)im;
    return *re < 0.0 ? 1 : 0;
}

/// Lyapunov solve without the Hurwitz pre-check; A may be any matrix
/// whose spectrum avoids lambda_i + conj(lambda_j) = 0 (guaranteed when
/// A is Hurwitz). Used internally for Newton refinement too.
Matrix lyapunov_core(const Matrix& a, const Matrix& q) {
    const Index n = a.rows();
    if (n == 0) return Matrix::Zero(0, 0);
    Eigen::ComplexSchur<Matrix> schur(a);
    if (schur.info() != Eigen::Success) {
        throw SolverError("solve_lyapunov: Schur decomposition failed");
    }
    const MatrixC u = schur.matrixU();
    const MatrixC t = schur.matrixT();
    const MatrixC q_t = u.adjoint() * q.cast<Complex>() * u;

    // Solve T Y + Y T^H + Q~ = 0 by back-substitution. T^H is lower
    // triangular, so (Y T^H)_ij sums Y_ik conj(T_jk) over k >= j:
    // columns right to left, rows bottom to top.
    MatrixC y = MatrixC::Zero(n, n);
    for (Index j = n - 1; j >= 0; --j) {
        for (Index i = n - 1; i >= 0; --i) {
            Complex rhs = q_t(i, j);
            for (Index k = i + 1; k < n; ++k) rhs += t(i, k) * y(k, j);
            for (Index k = j + 1; k < n; ++k) rhs += y(i, k) * std::conj(t(j, k));
            const Complex denom = t(i, i) + std::conj(t(j, j));
            if (std::abs(denom) < 1e-300) {
                throw SolverError(
                    "solve_lyapunov: singular Sylvester operator "
                    "(eigenvalue pair summing to zero)");
            }
            y(i, j) = -rhs / denom;
        }
    }
    Matrix p = (u * y * u.adjoint()).real();
    return 0.5 * (p + p.transpose());
}

} // namespace

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("solve_lyapunov: A must be square");
    }
    if (q.rows() != a.rows() || q.cols() != a.cols()) {
        throw std::invalid_argument("solve_lyapunov: Q must match A");
    }
    if (a.rows() == 0) return Matrix::Zero(0, 0);
    if (spectral_abscissa(a) >= 0.0) {
        throw SolverError("solve_lyapunov: A is not Hurwitz");
    }
    Matrix p = lyapunov_core(a, q);

    const double res = (a * p + p * a.transpose() + q).norm();
    const double scale = a.norm() * p.norm() + q.norm();
    if (res > 1e-8 * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << "solve_lyapunov: residual " << res
           << " exceeds tolerance for scale " << scale;
        throw SolverError(os.str());
    }
    return p;
}

std::optional<Matrix> ric_schur(const Matrix& h) {
    const Index n2 = h.rows();
    if (n2 != h.cols() || n2 % 2 != 0) {
        throw std::invalid_argument(
            "ric_schur: H must be square with even dimension");
    }
    const Index n = n2 / 2;
    if (n == 0) return Matrix::Zero(0, 0);

    // Column-major copy for LAPACK; Eigen's default storage is already
    // column-major.
    Matrix h_work = h;
    Matrix vs(n2, n2);
    std::vector<double> wr(static_cast<size_t>(n2)),
        wi(static_cast<size_t>(n2));
    lapack_int sdim = 0;
    const lapack_int info = LAPACKE_dgees(
        LAPACK_COL_MAJOR, 'V', 'S', select_left_half_plane,
        static_cast<lapack_int>(n2), h_work.data(),
        static_cast<lapack_int>(n2), &sdim, wr.data(), wi.data(), vs.data(),
        static_cast<lapack_int>(n2));
    // info == n2+2 flags eigenvalues whose ordering became ambiguous after
    // reordering round-off; the subspace is still usable and the caller
    // verifies the end result, so only hard failures are rejected.
    if (info < 0 || (info > 0 && info != static_cast<lapack_int>(n2) + 2)) {
        return std::nullopt;
    }
    if (sdim != static_cast<lapack_int>(n)) {
        return std::nullopt;  // eigenvalues on the axis or wrong inertia
    }
    const Matrix u1 = vs.block(0, 0, n, n);
    const Matrix u2 = vs.block(n, 0, n, n);
    Eigen::FullPivLU<Matrix> lu(u1);
    if (!lu.isInvertible()) {
        return std::nullopt;
    }
    Matrix x = u2 * lu.inverse();
    return x;
}

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r) {
    const Index n = a.rows();
    if (a.cols() != n) {
        throw std::invalid_argument("solve_care: A must be square");
    }
    if (b.rows() != n) {
        throw std::invalid_argument("solve_care: rows(B) must equal rows(A)");
    }
    const Index m = b.cols();
    if (q.rows() != n || q.cols() != n) {
        throw std::invalid_argument("solve_care: Q must match A");
    }
    if (r.rows() != m || r.cols() != m) {
        throw std::invalid_argument("solve_care: R must be m x m");
    }
    Eigen::FullPivLU<Matrix> r_lu(r);
    if (!r_lu.isInvertible()) {
        throw SolverError("solve_care: R is singular");
    }
    const Matrix g = b * r_lu.solve(b.transpose());  // B R^-1 B'

    Matrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = a;
    h.topRightCorner(n, n) = -g;
    h.bottomLeftCorner(n, n) = -q;
    h.bottomRightCorner(n, n) = -a.transpose();

    auto x0 = ric_schur(h);
    if (!x0) {
        throw SolverError(
            "solve_care: no stabilizing solution (Hamiltonian has "
            "imaginary-axis eigenvalues or defective stable subspace)");
    }
    Matrix p = 0.5 * (*x0 + x0->transpose());

    // One Newton refinement step: with A_c = A - G P, the correction dP
    // solves A_c' dP + dP A_c + residual(P) = 0.
    const auto residual = [&](const Matrix& x) {
        return (a.transpose() * x + x * a - x * g * x + q).eval();
    };
    const Matrix a_c = a - g * p;
    if (spectral_abscissa(a_c) < 0.0) {
        Matrix res = residual(p);
        // lyapunov_core solves M Y + Y M' + Q = 0; take M = A_c'.
        Matrix dp = lyapunov_core(a_c.transpose(), res);
        Matrix p_new = 0.5 * ((p + dp) + (p + dp).transpose());
        if (residual(p_new).norm() < residual(p).norm()) {
            p = p_new;
        }
    }

    const double res_norm = residual(p).norm();
    const double scale = (a.transpose() * p).norm() + (p * a).norm() +
                         (p * g * p).norm() + q.norm();
    if (res_norm > 1e-8 * std::max(scale, 1.0)) {
        std::ostringstream os;
        os << "solve_care: residual " << res_norm
           << " exceeds tolerance for scale " << scale;
        throw SolverError(os.str());
    }
    if (n > 0 && spectral_abscissa(a - g * p) >= 0.0) {
        throw SolverError("solve_care: closed loop A - B R^-1 B' P is not "
                          "Hurwitz");
    }
    return p;
}

} // namespace ifpc
