#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifpc {

using Matrix   = Eigen::MatrixXd;
using Vector   = Eigen::VectorXd;
using MatrixC  = Eigen::MatrixXcd;
using VectorC  = Eigen::VectorXcd;
using Complex  = std::complex<double>;
using Index    = Eigen::Index;

/// Thrown when an interconnection has no well-defined closed-loop realization
/// (algebraic loop: the direct-feedthrough loop matrix is singular).
class IllPosedError : public std::runtime_error {
public:
    explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a matrix-equation solver cannot produce a certified solution
/// (no stabilizing solution, ill-conditioned data, residual too large).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when controller synthesis fails (infeasible gamma range,
/// Riccati failure at every tested level, or verification mismatch).
class SynthesisError : public std::runtime_error {
public:
    explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ifpc
