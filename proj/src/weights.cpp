#include "ifpc/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace ifpc {

namespace {

void validate_filter(const FirstOrderWeight& f, const char* bank, size_t i) {
    const auto bad = [&](const char* what) {
        std::ostringstream os;
        os << "WeightSet: " << bank << "[" << i << "] " << what << " (k=" << f.k
           << ", z=" << f.z << ", p=" << f.p << ")";
        throw std::invalid_argument(os.str());
    };
    if (!std::isfinite(f.k) || !std::isfinite(f.z) || !std::isfinite(f.p)) {
        bad("has a non-finite parameter");
    }
    if (f.k <= 0.0 || f.z <= 0.0 || f.p <= 0.0) {
        bad("requires strictly positive k, z, p");
    }
    if (f.z == f.p) {
        bad("has z == p (the filter degenerates to a static gain)");
    }
}

/// Diagonal bank of first-order filters, one state per channel.
StateSpace realize_bank(const std::vector<FirstOrderWeight>& bank) {
    const Index n = static_cast<Index>(bank.size());
    Matrix a = Matrix::Zero(n, n);
    Matrix b = Matrix::Zero(n, n);
    Matrix c = Matrix::Zero(n, n);
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto& f = bank[static_cast<size_t>(i)];
        a(i, i) = -f.p;
        b(i, i) = f.z - f.p;
        c(i, i) = f.k;
        d(i, i) = f.k;
    }
    return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

std::vector<std::string> output_names(const StateSpace& g) {
    if (!g.output_labels.empty()) return g.output_labels;
    std::vector<std::string> names;
    for (Index i = 0; i < g.p(); ++i) names.push_back("y" + std::to_string(i + 1));
    return names;
}

std::vector<std::string> input_names(const StateSpace& g) {
    if (!g.input_labels.empty()) return g.input_labels;
    std::vector<std::string> names;
    for (Index i = 0; i < g.m(); ++i) names.push_back("u" + std::to_string(i + 1));
    return names;
}

} // namespace

double FirstOrderWeight::magnitude(double omega) const {
    return k * std::sqrt((omega * omega + z * z) / (omega * omega + p * p));
}

void WeightSet::validate() const {
    if (w1.size() != w3.size()) {
        throw std::invalid_argument(
            "WeightSet: w1 and w3 must have one filter per controlled output "
            "each (sizes differ)");
    }
    if (w1.empty()) {
        throw std::invalid_argument("WeightSet: at least one channel required");
    }
    if (!std::isfinite(w2) || w2 <= 0.0) {
        throw std::invalid_argument(
            "WeightSet: w2 must be a strictly positive finite scalar");
    }
    for (size_t i = 0; i < w1.size(); ++i) validate_filter(w1[i], "w1", i);
    for (size_t i = 0; i < w3.size(); ++i) validate_filter(w3[i], "w3", i);
}

RealizedWeights realize_weights(const WeightSet& w) {
    w.validate();
    RealizedWeights out;
    out.w1 = realize_bank(w.w1);
    out.w2 = static_system((Matrix(1, 1) << w.w2).finished());
    out.w3 = realize_bank(w.w3);
    return out;
}

StateSpace build_augmented(const StateSpace& g, const WeightSet& w) {
    g.validate();
    w.validate();
    const Index p = g.p();
    const Index m = g.m();
    const Index n = g.n();
    if (w.channels() != p) {
        std::ostringstream os;
        os << "build_augmented: weight set has " << w.channels()
           << " channels but the plant has " << p << " outputs";
        throw std::invalid_argument(os.str());
    }

    RealizedWeights rw = realize_weights(w);
    const Matrix& a1 = rw.w1.A;
    const Matrix& b1 = rw.w1.B;
    const Matrix& c1w = rw.w1.C;
    const Matrix& d1 = rw.w1.D;
    const Matrix& a3 = rw.w3.A;
    const Matrix& b3 = rw.w3.B;
    const Matrix& c3w = rw.w3.C;
    const Matrix& d3 = rw.w3.D;

    // States [x_G; x_W1; x_W3]; inputs [r; u]; the W1 bank is driven by
    // e = r - C x_G - D u and the W3 bank by y = C x_G + D u.
    const Index nx = n + p + p;
    Matrix A = Matrix::Zero(nx, nx);
    A.topLeftCorner(n, n) = g.A;
    A.block(n, 0, p, n) = -b1 * g.C;
    A.block(n, n, p, p) = a1;
    A.block(n + p, 0, p, n) = b3 * g.C;
    A.block(n + p, n + p, p, p) = a3;

    Matrix B = Matrix::Zero(nx, p + m);
    B.block(0, p, n, m) = g.B;
    B.block(n, 0, p, p) = b1;
    B.block(n, p, p, m) = -b1 * g.D;
    B.block(n + p, p, p, m) = b3 * g.D;

    const Index nz = p + m + p;
    Matrix C = Matrix::Zero(nz + p + p, nx);
    Matrix D = Matrix::Zero(nz + p + p, p + m);
    // Weighted sensitivity rows: W1 e.
    C.block(0, 0, p, n) = -d1 * g.C;
    C.block(0, n, p, p) = c1w;
    D.block(0, 0, p, p) = d1;
    D.block(0, p, p, m) = -d1 * g.D;
    // Weighted effort rows: w2 u.
    D.block(p, p, m, m) = w.w2 * Matrix::Identity(m, m);
    // Weighted complementary rows: W3 y.
    C.block(p + m, 0, p, n) = d3 * g.C;
    C.block(p + m, n + p, p, p) = c3w;
    D.block(p + m, p, p, m) = d3 * g.D;
    // Measurement rows: e = r - y, then y.
    C.block(nz, 0, p, n) = -g.C;
    D.block(nz, 0, p, p) = Matrix::Identity(p, p);
    D.block(nz, p, p, m) = -g.D;
    C.block(nz + p, 0, p, n) = g.C;
    D.block(nz + p, p, p, m) = g.D;

    const auto ynames = output_names(g);
    const auto unames = input_names(g);
    std::vector<std::string> in_labels;
    std::vector<std::string> out_labels;
    for (const auto& s : ynames) in_labels.push_back("r_" + s);
    for (const auto& s : unames) in_labels.push_back(s);
    for (const auto& s : ynames) out_labels.push_back("w1e_" + s);
    for (const auto& s : unames) out_labels.push_back("w2u_" + s);
    for (const auto& s : ynames) out_labels.push_back("w3y_" + s);
    for (const auto& s : ynames) out_labels.push_back("e_" + s);
    for (const auto& s : ynames) out_labels.push_back(s);

    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D),
                      std::move(in_labels), std::move(out_labels));
}

WeightConstraintResult check_weight_constraint(const WeightSet& w,
                                               const FrequencyGrid& grid) {
    w.validate();
    WeightConstraintResult res;
    res.ok = true;
    res.slack.reserve(grid.points.size());
    for (double omega : grid.points) {
        double min_w1 = std::numeric_limits<double>::infinity();
        double min_w3 = std::numeric_limits<double>::infinity();
        for (const auto& f : w.w1) min_w1 = std::min(min_w1, f.magnitude(omega));
        for (const auto& f : w.w3) min_w3 = std::min(min_w3, f.magnitude(omega));
        const double slack = 1.0 / min_w1 + 1.0 / min_w3 - 1.0;
        res.slack.push_back(slack);
        if (slack < 0.0) res.ok = false;
    }
    return res;
}

} // namespace ifpc
