#include "ifpc/frequency.hpp"

#include <cmath>
#include <sstream>

namespace ifpc {

FrequencyGrid make_grid(double omega_lo, double omega_hi, double ppd) {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo)) {
        throw std::invalid_argument(
            "make_grid: require 0 < omega_lo < omega_hi");
    }
    if (!(ppd >= 1.0)) {
        throw std::invalid_argument("make_grid: require ppd >= 1");
    }
    const double decades = std::log10(omega_hi / omega_lo);
    Index count = static_cast<Index>(std::floor(ppd * decades)) + 1;
    if (count < 2) count = 2;

    FrequencyGrid grid;
    grid.points_per_decade = ppd;
    grid.omega_lo = omega_lo;
    grid.omega_hi = omega_hi;
    grid.points.resize(static_cast<size_t>(count));
    // Uniform log spacing with both endpoints exact. For integer decade
    // spans this lands exactly ppd points per decade.
    const double lga = std::log10(omega_lo);
    const double lgb = std::log10(omega_hi);
    for (Index i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        grid.points[static_cast<size_t>(i)] =
            std::pow(10.0, lga + t * (lgb - lga));
    }
    grid.points.front() = omega_lo;
    grid.points.back() = omega_hi;
    return grid;
}

MatrixC freq_response_at(const StateSpace& g, double omega) {
    g.validate();
    const Index n = g.n();
    if (n == 0) return g.D.cast<Complex>();

    // Refuse evaluation on (numerically) a pole: the response is unbounded.
    Eigen::EigenSolver<Matrix> es(g.A, /*computeEigenvectors=*/false);
    const VectorC lam = es.eigenvalues();
    double scale = 1.0;
    for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(lam(i)));
    const Complex s(0.0, omega);
    for (Index i = 0; i < n; ++i) {
        if (std::abs(s - lam(i)) <= 1e-9 * scale) {
            std::ostringstream os;
            os << "freq_response: s = j" << omega
               << " coincides with a pole of the system";
            throw SolverError(os.str());
        }
    }
    MatrixC m = (-g.A).cast<Complex>();
    m.diagonal().array() += s;
    Eigen::PartialPivLU<MatrixC> lu(m);
    return g.C.cast<Complex>() * lu.solve(g.B.cast<Complex>()) +
           g.D.cast<Complex>();
}

std::vector<MatrixC> freq_response(const StateSpace& g,
                                   const FrequencyGrid& grid) {
    g.validate();
    const Index n = g.n();
    std::vector<MatrixC> out;
    out.reserve(grid.points.size());
    if (n == 0) {
        for (size_t i = 0; i < grid.points.size(); ++i)
            out.push_back(g.D.cast<Complex>());
        return out;
    }
    Eigen::EigenSolver<Matrix> es(g.A, /*computeEigenvectors=*/false);
    const VectorC lam = es.eigenvalues();
    double scale = 1.0;
    for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(lam(i)));

    const MatrixC a_c = g.A.cast<Complex>();
    const MatrixC b_c = g.B.cast<Complex>();
    const MatrixC c_c = g.C.cast<Complex>();
    const MatrixC d_c = g.D.cast<Complex>();
    for (double omega : grid.points) {
        const Complex s(0.0, omega);
        for (Index i = 0; i < n; ++i) {
            if (std::abs(s - lam(i)) <= 1e-9 * scale) {
                std::ostringstream os;
                os << "freq_response: s = j" << omega
                   << " coincides with a pole of the system";
                throw SolverError(os.str());
            }
        }
        MatrixC m = -a_c;
        m.diagonal().array() += s;
        Eigen::PartialPivLU<MatrixC> lu(m);
        out.push_back(c_c * lu.solve(b_c) + d_c);
    }
    return out;
}

Matrix dc_gain(const StateSpace& g) {
    g.validate();
    if (g.n() == 0) return g.D;
    Eigen::FullPivLU<Matrix> lu(g.A);
    if (!lu.isInvertible()) {
        throw SolverError("dc_gain: A is singular (pole at s = 0)");
    }
    return g.D - g.C * lu.solve(g.B);
}

double sigma_max_of(const MatrixC& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixC> svd(m);
    return svd.singularValues()(0);
}

SigmaCurve sigma_max(const StateSpace& g, const FrequencyGrid& grid) {
    SigmaCurve curve;
    curve.grid = grid;
    const auto resp = freq_response(g, grid);
    curve.values.reserve(resp.size());
    for (const auto& r : resp) {
        Eigen::JacobiSVD<MatrixC> svd(r);
        const auto& sv = svd.singularValues();
        std::vector<double> vals(sv.data(), sv.data() + sv.size());
        curve.values.push_back(std::move(vals));
    }
    return curve;
}

} // namespace ifpc
