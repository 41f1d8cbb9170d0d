#include "ifpc/plant_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ifpc {

namespace {

using ojson = nlohmann::ordered_json;

void check_finite(const Matrix& m, const char* field) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string("plant document: field \"") +
                                    field + "\" contains a non-finite entry");
}

void check_labels(const std::vector<std::string>& labels, Index count,
                  const char* field) {
    if (static_cast<Index>(labels.size()) != count)
        throw std::invalid_argument(
            std::string("plant document: field \"") + field + "\" must list " +
            std::to_string(count) + " labels, got " +
            std::to_string(labels.size()));
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (label.empty())
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field + "\" contains an empty label");
        if (!seen.insert(label).second)
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field + "\" repeats label \"" + label +
                                        "\"");
    }
}

void check_scaling(const Vector& s, Index count, const char* field) {
    if (s.size() != count)
        throw std::invalid_argument(
            std::string("plant document: field \"") + field + "\" must have " +
            std::to_string(count) + " entries, got " + std::to_string(s.size()));
    for (Index i = 0; i < s.size(); ++i)
        if (!(std::isfinite(s(i)) && s(i) > 0.0))
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field +
                                        "\" entries must be positive and "
                                        "finite");
}

ojson matrix_to_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ojson vector_to_json(const Vector& v) {
    ojson out = ojson::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

const ojson& require(const ojson& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end())
        throw std::invalid_argument(
            std::string("plant document: missing field \"") + key + "\"");
    return *it;
}

Matrix matrix_from_json(const ojson& j, const char* field) {
    if (!j.is_array())
        throw std::invalid_argument(std::string("plant document: field \"") +
                                    field + "\" must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    for (const auto& row : j) {
        if (!row.is_array())
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field + "\" rows must be arrays");
        if (cols < 0)
            cols = static_cast<Index>(row.size());
        else if (static_cast<Index>(row.size()) != cols)
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field + "\" rows have unequal lengths");
    }
    Matrix m(rows, std::max<Index>(cols, 0));
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < m.cols(); ++k) {
            const auto& cell = j[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(k)];
            if (!cell.is_number())
                throw std::invalid_argument(
                    std::string("plant document: field \"") + field +
                    "\" contains a non-numeric entry");
            m(i, k) = cell.get<double>();
        }
    return m;
}

Vector vector_from_json(const ojson& j, const char* field) {
    if (!j.is_array())
        throw std::invalid_argument(std::string("plant document: field \"") +
                                    field + "\" must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) {
        const auto& cell = j[static_cast<std::size_t>(i)];
        if (!cell.is_number())
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field +
                                        "\" contains a non-numeric entry");
        v(i) = cell.get<double>();
    }
    return v;
}

std::vector<std::string> labels_from_json(const ojson& j, const char* field) {
    if (!j.is_array())
        throw std::invalid_argument(std::string("plant document: field \"") +
                                    field + "\" must be an array of strings");
    std::vector<std::string> out;
    for (const auto& cell : j) {
        if (!cell.is_string())
            throw std::invalid_argument(std::string("plant document: field \"") +
                                        field + "\" contains a non-string entry");
        out.push_back(cell.get<std::string>());
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform draw in [-1, 1), deterministic in the evolving stream state.
double signed_unit(std::uint64_t& state) {
    const double u =
        static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

}  // namespace

void PlantDocument::validate() const {
    const Index n = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("plant document: field \"A\" must be "
                                    "square");
    if (b.rows() != n)
        throw std::invalid_argument(
            "plant document: field \"B\" row count must match the state "
            "count");
    if (c.cols() != n)
        throw std::invalid_argument(
            "plant document: field \"C\" column count must match the state "
            "count");
    if (d.rows() != c.rows() || d.cols() != b.cols())
        throw std::invalid_argument(
            "plant document: field \"D\" must be outputs x inputs");
    check_finite(a, "A");
    check_finite(b, "B");
    check_finite(c, "C");
    check_finite(d, "D");
    check_labels(state_labels, n, "state_labels");
    check_labels(input_labels, b.cols(), "input_labels");
    check_labels(output_labels, c.rows(), "output_labels");
    check_scaling(input_scaling, b.cols(), "input_scaling");
    check_scaling(output_scaling, c.rows(), "output_scaling");
}

StateSpace PlantDocument::to_state_space() const {
    validate();
    return StateSpace(a, b, c, d, input_labels, output_labels);
}

StateSpace PlantDocument::to_scaled_state_space() const {
    validate();
    const auto din = input_scaling.asDiagonal();
    const Vector inv_out = output_scaling.cwiseInverse();
    return StateSpace(a, b * din, inv_out.asDiagonal() * c,
                      inv_out.asDiagonal() * d * din, input_labels,
                      output_labels);
}

LoadedPlant load_plant(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("load_plant: cannot open " + path);
    ojson doc;
    try {
        doc = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw std::runtime_error("load_plant: " + path + ": " + err.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("plant document: top level must be an "
                                    "object");

    PlantDocument plant;
    const auto& name = require(doc, "name");
    const auto& condition = require(doc, "flight_condition");
    if (!name.is_string() || !condition.is_string())
        throw std::invalid_argument(
            "plant document: \"name\" and \"flight_condition\" must be "
            "strings");
    plant.name = name.get<std::string>();
    plant.flight_condition = condition.get<std::string>();
    plant.a = matrix_from_json(require(doc, "A"), "A");
    plant.b = matrix_from_json(require(doc, "B"), "B");
    plant.c = matrix_from_json(require(doc, "C"), "C");
    plant.d = matrix_from_json(require(doc, "D"), "D");
    plant.state_labels = labels_from_json(require(doc, "state_labels"),
                                          "state_labels");
    plant.input_labels = labels_from_json(require(doc, "input_labels"),
                                          "input_labels");
    plant.output_labels = labels_from_json(require(doc, "output_labels"),
                                           "output_labels");
    plant.input_scaling = vector_from_json(require(doc, "input_scaling"),
                                           "input_scaling");
    plant.output_scaling = vector_from_json(require(doc, "output_scaling"),
                                            "output_scaling");
    plant.validate();

    LoadedPlant out;
    out.raw = plant.to_state_space();
    out.scaled = plant.to_scaled_state_space();
    out.document = std::move(plant);
    return out;
}

void write_plant(const PlantDocument& doc, const std::string& path) {
    doc.validate();
    ojson j;
    j["name"] = doc.name;
    j["flight_condition"] = doc.flight_condition;
    j["state_labels"] = doc.state_labels;
    j["input_labels"] = doc.input_labels;
    j["output_labels"] = doc.output_labels;
    j["A"] = matrix_to_json(doc.a);
    j["B"] = matrix_to_json(doc.b);
    j["C"] = matrix_to_json(doc.c);
    j["D"] = matrix_to_json(doc.d);
    j["input_scaling"] = vector_to_json(doc.input_scaling);
    j["output_scaling"] = vector_to_json(doc.output_scaling);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("write_plant: failed to write " + path);
}

PlantDocument generate_demo_plant(std::uint64_t seed) {
    // State, input, and output channel positions.
    enum : Index { kU, kW, kQ, kTh, kH, kN2, kN25, kP6, kT41 };
    enum : Index { kDtv, kWf, kA78, kA8 };
    enum : Index { kV, kQv, kN2p, kR, kFx, kFz, kTm };
    const Index n = 9, m = 4, p = 7;

    PlantDocument doc;
    doc.name = "demo-coupled-airframe-engine";
    doc.flight_condition =
        "synthetic subsonic cruise point, scaled units, seed " +
        std::to_string(seed);
    doc.state_labels = {"u", "w", "q", "theta", "h",
                        "N_2", "N_25", "P_6", "T_41"};
    doc.input_labels = {"delta_tv", "W_f", "A_78", "A_8"};
    doc.output_labels = {"V", "q_v", "N_2P", "R", "F_x", "F_z", "T_M"};

    Matrix a = Matrix::Zero(n, n);
    // Airframe block: damped surge/heave/pitch dynamics with kinematic
    // attitude (theta integrates q) and a leaky height state.
    a(kU, kU) = -0.250; a(kU, kW) = 0.040;  a(kU, kTh) = -0.150;
    a(kW, kU) = -0.300; a(kW, kW) = -0.800; a(kW, kQ) = 0.900;
    a(kQ, kU) = 0.020;  a(kQ, kW) = -0.900; a(kQ, kQ) = -1.400;
    a(kQ, kTh) = -0.800;
    a(kTh, kQ) = 1.0;
    a(kH, kW) = -0.900; a(kH, kTh) = 0.800; a(kH, kH) = -0.150;
    // Engine block: diagonally dominant spool/pressure/temperature chain.
    a(kN2, kN2) = -2.20;  a(kN2, kN25) = 1.10;  a(kN2, kP6) = 0.40;
    a(kN25, kN2) = 0.50;  a(kN25, kN25) = -3.00; a(kN25, kP6) = 0.80;
    a(kP6, kN2) = 0.60;   a(kP6, kN25) = 0.70;  a(kP6, kP6) = -4.50;
    a(kT41, kN2) = 0.90;  a(kT41, kN25) = -0.20; a(kT41, kP6) = 0.50;
    a(kT41, kT41) = -6.00;
    // Cross-coupling, both directions: thrust states push the airframe,
    // flight state feeds the inlet. The seed dithers these entries by a
    // few percent so different seeds give distinct but similar models.
    a(kU, kN2) = 0.150;   a(kU, kP6) = 0.080;
    a(kW, kN2) = -0.050;  a(kW, kT41) = 0.020;
    a(kQ, kN25) = 0.030;  a(kQ, kP6) = 0.040;  a(kQ, kT41) = -0.030;
    a(kN2, kU) = 0.060;   a(kN2, kW) = -0.040;
    a(kN25, kU) = 0.020;
    a(kP6, kU) = 0.050;   a(kP6, kW) = 0.030;
    a(kT41, kW) = -0.050; a(kT41, kQ) = 0.020;
    std::uint64_t stream = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
    const Index coupled_rows[] = {kU, kW, kQ};
    for (Index i : coupled_rows)
        for (Index j = kN2; j <= kT41; ++j)
            if (a(i, j) != 0.0) a(i, j) *= 1.0 + 0.06 * signed_unit(stream);
    for (Index i = kN2; i <= kT41; ++i)
        for (Index j = kU; j <= kH; ++j)
            if (a(i, j) != 0.0) a(i, j) *= 1.0 + 0.06 * signed_unit(stream);

    Matrix b = Matrix::Zero(n, m);
    b(kU, kDtv) = 0.050;
    b(kW, kDtv) = -0.300;
    b(kQ, kDtv) = 2.500;
    b(kQ, kA8) = 1.200;  // nozzle area change carries a real pitch moment
    b(kN2, kWf) = 1.800;
    b(kN2, kA8) = 0.300;
    b(kN25, kWf) = 0.900;
    b(kN25, kA78) = 0.600;
    b(kP6, kA78) = 1.500;
    b(kP6, kA8) = -0.600;  // opening the nozzle dumps pressure
    b(kT41, kWf) = 2.200;
    b(kT41, kA78) = -0.400;
    b(kT41, kA8) = 1.400;

    Matrix c = Matrix::Zero(p, n);
    c(kV, kU) = 1.0;
    c(kV, kW) = 0.1;
    c(kQv, kQ) = 1.0;   // pitch variable: q + 0.1 theta
    c(kQv, kTh) = 0.1;
    c(kN2p, kN2) = 1.0;
    c(kR, kN25) = 0.2;
    c(kR, kP6) = 0.9;
    c(kFx, kU) = -0.10;
    c(kFx, kN2) = 1.40;
    c(kFx, kP6) = 0.90;
    c(kFx, kT41) = 0.30;
    c(kFz, kW) = -0.10;
    c(kFz, kN2) = 0.25;
    c(kFz, kP6) = 0.15;
    c(kTm, kN2) = 0.04;
    c(kTm, kN25) = 0.20;
    c(kTm, kT41) = 0.10;

    doc.a = std::move(a);
    doc.b = std::move(b);
    doc.c = std::move(c);
    doc.d = Matrix::Zero(p, m);
    doc.input_scaling = Vector::Ones(m);
    doc.input_scaling(kDtv) = 2.0;  // thrust-vector command in finer units
    doc.output_scaling = Vector::Ones(p);
    doc.output_scaling(kQv) = 0.1;  // pitch variable is a rate, tighter unit
    return doc;
}

} // namespace ifpc
