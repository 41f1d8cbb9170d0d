#include "ifpc/state_space.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace ifpc {

namespace {

void check_labels(const std::vector<std::string>& labels, Index count,
                  const char* which) {
    if (labels.empty()) return;
    if (static_cast<Index>(labels.size()) != count) {
        std::ostringstream os;
        os << which << " label count " << labels.size()
           << " does not match channel count " << count;
        throw std::invalid_argument(os.str());
    }
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) {
            throw std::invalid_argument(std::string("duplicate ") + which +
                                        " label: " + l);
        }
    }
}

std::vector<std::string> pick_labels(const std::vector<std::string>& labels,
                                     const std::vector<Index>& idx) {
    if (labels.empty()) return {};
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (Index i : idx) out.push_back(labels[static_cast<size_t>(i)]);
    return out;
}

std::vector<std::string> concat_labels(const std::vector<std::string>& a,
                                       Index na,
                                       const std::vector<std::string>& b,
                                       Index nb) {
    // Only keep labels when both sides carry them; a half-labeled result
    // would break the uniqueness/size invariant.
    if (a.empty() || b.empty()) return {};
    std::vector<std::string> out = a;
    out.insert(out.end(), b.begin(), b.end());
    (void)na;
    (void)nb;
    return out;
}

void check_index_set(const std::vector<Index>& idx, Index bound,
                     const char* which) {
    std::set<Index> seen;
    for (Index i : idx) {
        if (i < 0 || i >= bound) {
            std::ostringstream os;
            os << which << " index " << i << " out of range [0, " << bound
               << ")";
            throw std::invalid_argument(os.str());
        }
        if (!seen.insert(i).second) {
            std::ostringstream os;
            os << "duplicate " << which << " index " << i;
            throw std::invalid_argument(os.str());
        }
    }
}

} // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d,
                       std::vector<std::string> in_labels,
                       std::vector<std::string> out_labels)
    : A(std::move(a)),
      B(std::move(b)),
      C(std::move(c)),
      D(std::move(d)),
      input_labels(std::move(in_labels)),
      output_labels(std::move(out_labels)) {
    validate();
}

void StateSpace::validate() const {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("A must be square");
    }
    const Index nn = A.rows();
    if (B.rows() != nn) {
        throw std::invalid_argument("rows(B) must equal rows(A)");
    }
    if (C.cols() != nn) {
        throw std::invalid_argument("cols(C) must equal rows(A)");
    }
    if (D.rows() != C.rows() || D.cols() != B.cols()) {
        throw std::invalid_argument("D must be p x m");
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
        throw std::invalid_argument("system matrices must be finite");
    }
    check_labels(input_labels, m(), "input");
    check_labels(output_labels, p(), "output");
}

StateSpace static_system(const Matrix& d, std::vector<std::string> in_labels,
                         std::vector<std::string> out_labels) {
    return StateSpace(Matrix::Zero(0, 0), Matrix::Zero(0, d.cols()),
                      Matrix::Zero(d.rows(), 0), d, std::move(in_labels),
                      std::move(out_labels));
}

StateSpace identity_system(Index channels) {
    return static_system(Matrix::Identity(channels, channels));
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
    g1.validate();
    g2.validate();
    if (g1.p() != g2.m()) {
        std::ostringstream os;
        os << "series: output count " << g1.p()
           << " does not match downstream input count " << g2.m();
        throw std::invalid_argument(os.str());
    }
    const Index n1 = g1.n(), n2 = g2.n();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.A;
    a.bottomLeftCorner(n2, n1) = g2.B * g1.C;
    a.bottomRightCorner(n2, n2) = g2.A;
    Matrix b(n1 + n2, g1.m());
    b.topRows(n1) = g1.B;
    b.bottomRows(n2) = g2.B * g1.D;
    Matrix c(g2.p(), n1 + n2);
    c.leftCols(n1) = g2.D * g1.C;
    c.rightCols(n2) = g2.C;
    Matrix d = g2.D * g1.D;
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d),
                      g1.input_labels, g2.output_labels);
}

namespace {

StateSpace combine_parallel(const StateSpace& g1, const StateSpace& g2,
                            double sign2) {
    g1.validate();
    g2.validate();
    if (g1.m() != g2.m() || g1.p() != g2.p()) {
        throw std::invalid_argument(
            "parallel combination requires matching I/O dimensions");
    }
    const Index n1 = g1.n(), n2 = g2.n();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.A;
    a.bottomRightCorner(n2, n2) = g2.A;
    Matrix b(n1 + n2, g1.m());
    b.topRows(n1) = g1.B;
    b.bottomRows(n2) = g2.B;
    Matrix c(g1.p(), n1 + n2);
    c.leftCols(n1) = g1.C;
    c.rightCols(n2) = sign2 * g2.C;
    Matrix d = g1.D + sign2 * g2.D;
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d),
                      g1.input_labels, g1.output_labels);
}

} // namespace

StateSpace add(const StateSpace& g1, const StateSpace& g2) {
    return combine_parallel(g1, g2, 1.0);
}

StateSpace subtract(const StateSpace& g1, const StateSpace& g2) {
    return combine_parallel(g1, g2, -1.0);
}

StateSpace append(const StateSpace& g1, const StateSpace& g2) {
    g1.validate();
    g2.validate();
    const Index n1 = g1.n(), n2 = g2.n();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.A;
    a.bottomRightCorner(n2, n2) = g2.A;
    Matrix b = Matrix::Zero(n1 + n2, g1.m() + g2.m());
    b.topLeftCorner(n1, g1.m()) = g1.B;
    b.bottomRightCorner(n2, g2.m()) = g2.B;
    Matrix c = Matrix::Zero(g1.p() + g2.p(), n1 + n2);
    c.topLeftCorner(g1.p(), n1) = g1.C;
    c.bottomRightCorner(g2.p(), n2) = g2.C;
    Matrix d = Matrix::Zero(g1.p() + g2.p(), g1.m() + g2.m());
    d.topLeftCorner(g1.p(), g1.m()) = g1.D;
    d.bottomRightCorner(g2.p(), g2.m()) = g2.D;
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d),
                      concat_labels(g1.input_labels, g1.m(), g2.input_labels,
                                    g2.m()),
                      concat_labels(g1.output_labels, g1.p(), g2.output_labels,
                                    g2.p()));
}

StateSpace feedback(const StateSpace& g, const StateSpace& k, int sign) {
    g.validate();
    k.validate();
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("feedback sign must be +1 or -1");
    }
    if (g.p() != k.m() || k.p() != g.m()) {
        throw std::invalid_argument("feedback: incompatible G/K dimensions");
    }
    const double s = static_cast<double>(sign);
    const Index ng = g.n(), nk = k.n();

    // Loop matrix for y = C_G x_G + D_G(r + s K y).
    Matrix loop = Matrix::Identity(g.p(), g.p()) - s * g.D * k.D;
    Eigen::FullPivLU<Matrix> lu(loop);
    if (!lu.isInvertible()) {
        throw IllPosedError(
            "feedback: algebraic loop (I - sign*D_G*D_K is singular)");
    }
    Matrix phi = lu.inverse();

    // y    = phi*C_G x_G + s*phi*D_G*C_K x_K + phi*D_G r
    // u    = r + s*C_K x_K + s*D_K y
    Matrix y_xg = phi * g.C;
    Matrix y_xk = s * phi * g.D * k.C;
    Matrix y_r = phi * g.D;
    Matrix u_xg = s * k.D * y_xg;
    Matrix u_xk = s * k.C + s * k.D * y_xk;
    Matrix u_r = Matrix::Identity(g.m(), g.m()) + s * k.D * y_r;

    Matrix a(ng + nk, ng + nk);
    a.topLeftCorner(ng, ng) = g.A + g.B * u_xg;
    a.topRightCorner(ng, nk) = g.B * u_xk;
    a.bottomLeftCorner(nk, ng) = k.B * y_xg;
    a.bottomRightCorner(nk, nk) = k.A + k.B * y_xk;
    Matrix b(ng + nk, g.m());
    b.topRows(ng) = g.B * u_r;
    b.bottomRows(nk) = k.B * y_r;
    Matrix c(g.p(), ng + nk);
    c.leftCols(ng) = y_xg;
    c.rightCols(nk) = y_xk;
    return StateSpace(std::move(a), std::move(b), std::move(c), y_r,
                      g.input_labels, g.output_labels);
}

StateSpace select_channels(const StateSpace& g,
                           const std::vector<Index>& in_idx,
                           const std::vector<Index>& out_idx) {
    g.validate();
    check_index_set(in_idx, g.m(), "input");
    check_index_set(out_idx, g.p(), "output");
    const Index mi = static_cast<Index>(in_idx.size());
    const Index po = static_cast<Index>(out_idx.size());
    Matrix b(g.n(), mi), d(po, mi), c(po, g.n());
    for (Index j = 0; j < mi; ++j) b.col(j) = g.B.col(in_idx[j]);
    for (Index i = 0; i < po; ++i) c.row(i) = g.C.row(out_idx[i]);
    for (Index i = 0; i < po; ++i)
        for (Index j = 0; j < mi; ++j) d(i, j) = g.D(out_idx[i], in_idx[j]);
    return StateSpace(g.A, std::move(b), std::move(c), std::move(d),
                      pick_labels(g.input_labels, in_idx),
                      pick_labels(g.output_labels, out_idx));
}

StateSpace extract_submodel(const StateSpace& g,
                            const std::vector<Index>& state_idx,
                            const std::vector<Index>& in_idx,
                            const std::vector<Index>& out_idx) {
    g.validate();
    check_index_set(state_idx, g.n(), "state");
    check_index_set(in_idx, g.m(), "input");
    check_index_set(out_idx, g.p(), "output");
    const Index ns = static_cast<Index>(state_idx.size());
    const Index mi = static_cast<Index>(in_idx.size());
    const Index po = static_cast<Index>(out_idx.size());
    Matrix a(ns, ns), b(ns, mi), c(po, ns), d(po, mi);
    for (Index i = 0; i < ns; ++i)
        for (Index j = 0; j < ns; ++j) a(i, j) = g.A(state_idx[i], state_idx[j]);
    for (Index i = 0; i < ns; ++i)
        for (Index j = 0; j < mi; ++j) b(i, j) = g.B(state_idx[i], in_idx[j]);
    for (Index i = 0; i < po; ++i)
        for (Index j = 0; j < ns; ++j) c(i, j) = g.C(out_idx[i], state_idx[j]);
    for (Index i = 0; i < po; ++i)
        for (Index j = 0; j < mi; ++j) d(i, j) = g.D(out_idx[i], in_idx[j]);
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d),
                      pick_labels(g.input_labels, in_idx),
                      pick_labels(g.output_labels, out_idx));
}

StateSpace interconnect(const std::vector<StateSpace>& blocks,
                        const Matrix& M, const Matrix& N, const Matrix& P,
                        const Matrix& Q) {
    if (blocks.empty()) {
        throw std::invalid_argument("interconnect: no blocks");
    }
    Index n_tot = 0, m_tot = 0, p_tot = 0;
    for (const auto& b : blocks) {
        b.validate();
        n_tot += b.n();
        m_tot += b.m();
        p_tot += b.p();
    }
    if (M.rows() != m_tot || M.cols() != p_tot) {
        throw std::invalid_argument("interconnect: M must be (sum m) x (sum p)");
    }
    if (N.rows() != m_tot) {
        throw std::invalid_argument("interconnect: N must have (sum m) rows");
    }
    if (P.cols() != p_tot) {
        throw std::invalid_argument("interconnect: P must have (sum p) cols");
    }
    if (Q.rows() != P.rows() || Q.cols() != N.cols()) {
        throw std::invalid_argument("interconnect: Q must be rows(P) x cols(N)");
    }

    // Stack the blocks block-diagonally.
    Matrix a = Matrix::Zero(n_tot, n_tot);
    Matrix b = Matrix::Zero(n_tot, m_tot);
    Matrix c = Matrix::Zero(p_tot, n_tot);
    Matrix d = Matrix::Zero(p_tot, m_tot);
    Index ni = 0, mi = 0, pi = 0;
    for (const auto& blk : blocks) {
        a.block(ni, ni, blk.n(), blk.n()) = blk.A;
        b.block(ni, mi, blk.n(), blk.m()) = blk.B;
        c.block(pi, ni, blk.p(), blk.n()) = blk.C;
        d.block(pi, mi, blk.p(), blk.m()) = blk.D;
        ni += blk.n();
        mi += blk.m();
        pi += blk.p();
    }

    // u = M y + N r,  y = C x + D u  =>  (I - D M) y = C x + D N r.
    Matrix loop = Matrix::Identity(p_tot, p_tot) - d * M;
    Eigen::FullPivLU<Matrix> lu(loop);
    if (!lu.isInvertible()) {
        throw IllPosedError("interconnect: algebraic loop (I - D*M singular)");
    }
    Matrix phi_c = lu.solve(c);          // y = phi_c x + phi_dn r
    Matrix phi_dn = lu.solve(d * N);

    Matrix a_cl = a + b * M * phi_c;
    Matrix b_cl = b * (M * phi_dn + N);
    Matrix c_cl = P * phi_c;
    Matrix d_cl = P * phi_dn + Q;
    return StateSpace(std::move(a_cl), std::move(b_cl), std::move(c_cl),
                      std::move(d_cl));
}

VectorC poles(const StateSpace& g) {
    if (g.n() == 0) return VectorC(0);
    Eigen::EigenSolver<Matrix> es(g.A, /*computeEigenvectors=*/false);
    return es.eigenvalues();
}

double spectral_abscissa(const Matrix& a) {
    if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

bool is_stable(const StateSpace& g, double margin) {
    if (g.n() == 0) return true;
    return spectral_abscissa(g.A) < -margin;
}

} // namespace ifpc
