#pragma once

#include "ifpc/types.hpp"

namespace ifpc {

/// Continuous-time linear time-invariant system
///     xdot = A x + B u
///     y    = C x + D u
/// with optional input/output channel labels. The labels, when present,
/// must be unique within their list and sized to the channel counts.
struct StateSpace {
    Matrix A;  ///< n x n
    Matrix B;  ///< n x m
    Matrix C;  ///< p x n
    Matrix D;  ///< p x m
    std::vector<std::string> input_labels;   ///< empty or size m
    std::vector<std::string> output_labels;  ///< empty or size p

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d,
               std::vector<std::string> in_labels = {},
               std::vector<std::string> out_labels = {});

    Index n() const { return A.rows(); }  ///< state count
    Index m() const { return B.cols(); }  ///< input count
    Index p() const { return C.rows(); }  ///< output count

    /// Throws std::invalid_argument on dimension mismatch, duplicate
    /// labels, or non-finite entries.
    void validate() const;
};

/// Static (memoryless) system y = D u.
StateSpace static_system(const Matrix& d,
                         std::vector<std::string> in_labels = {},
                         std::vector<std::string> out_labels = {});

/// Identity pass-through with the given channel count.
StateSpace identity_system(Index channels);

/// Cascade: u -> g1 -> g2 -> y, i.e. the product G2(s)*G1(s).
/// State count is n1 + n2.
StateSpace series(const StateSpace& g1, const StateSpace& g2);

/// Parallel sum G1(s) + G2(s): shared input, outputs added.
StateSpace add(const StateSpace& g1, const StateSpace& g2);

/// Parallel difference G1(s) - G2(s).
StateSpace subtract(const StateSpace& g1, const StateSpace& g2);

/// Block-diagonal append: inputs and outputs of g2 stacked after g1's.
StateSpace append(const StateSpace& g1, const StateSpace& g2);

/// Closed loop of plant G driven by feedback controller K:
///     y = G(r + sign * K y)
/// sign = -1 is conventional negative feedback, giving (I + G K)^-1 G.
/// Throws IllPosedError when I - sign*D_G*D_K is singular.
StateSpace feedback(const StateSpace& g, const StateSpace& k, int sign = -1);

/// Subsystem with inputs restricted to in_idx and outputs to out_idx
/// (in the given order). The state dimension is unchanged. Labels are
/// carried over when present.
StateSpace select_channels(const StateSpace& g,
                           const std::vector<Index>& in_idx,
                           const std::vector<Index>& out_idx);

/// State-level submodel: keep only the listed states (rows/columns of A),
/// then restrict channels like select_channels. Used to pull a physical
/// subsystem (e.g. the engine block) out of a coupled model.
StateSpace extract_submodel(const StateSpace& g,
                            const std::vector<Index>& state_idx,
                            const std::vector<Index>& in_idx,
                            const std::vector<Index>& out_idx);

/// General interconnection of a list of subsystems.
///
/// The blocks are stacked block-diagonally; let y be the stacked outputs
/// and u the stacked inputs of all blocks. The wiring is
///     u     = M y + N r        (internal routing + external injection)
///     y_ext = P y + Q r        (external outputs)
/// and the result maps r -> y_ext. Throws IllPosedError when the loop
/// I - D M is singular (algebraic loop).
StateSpace interconnect(const std::vector<StateSpace>& blocks,
                        const Matrix& M, const Matrix& N,
                        const Matrix& P, const Matrix& Q);

/// Eigenvalues of A.
VectorC poles(const StateSpace& g);

/// True iff every eigenvalue of A has real part < -margin.
bool is_stable(const StateSpace& g, double margin = 1e-9);

/// Largest real part over the eigenvalues of A (spectral abscissa).
double spectral_abscissa(const Matrix& a);

} // namespace ifpc
