#pragma once

#include <optional>

#include "ifpc/types.hpp"

namespace ifpc {

/// Solve the continuous Lyapunov equation  A P + P A' + Q = 0  for
/// symmetric P, with A Hurwitz and Q symmetric. Bartels-Stewart on the
/// complex Schur form. Throws SolverError when A is not Hurwitz or the
/// residual exceeds 1e-8 * (|A||P| + |Q|) in Frobenius norms.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Solve the continuous algebraic Riccati equation
///     A'P + P A - P B R^-1 B' P + Q = 0
/// for the stabilizing P (A - B R^-1 B' P Hurwitz). Ordered real Schur
/// decomposition of the 2n x 2n Hamiltonian followed by one Newton
/// refinement step. Throws SolverError when no stabilizing solution
/// exists (Hamiltonian eigenvalues on the imaginary axis) or the
/// residual check fails.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r);

/// Stabilizing solution X of the Riccati equation associated with a
/// general 2n x 2n Hamiltonian-structured matrix H = [H11 H12; H21 H22]:
/// the stable invariant subspace [U1; U2] gives X = U2 U1^-1.
/// Returns nullopt when the subspace does not exist (eigenvalues on the
/// imaginary axis, counted unstable half wrong) or U1 is singular.
/// No symmetry/positivity post-conditions are imposed here; callers
/// decide what to accept.
std::optional<Matrix> ric_schur(const Matrix& h);

} // namespace ifpc
