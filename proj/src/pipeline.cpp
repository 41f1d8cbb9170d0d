#include "ifpc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ifpc/hinfsyn.hpp"
#include "ifpc/norms.hpp"
#include "ifpc/simulate.hpp"
#include "ifpc/weights.hpp"

namespace ifpc {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------
// JSON helpers for stage persistence. Matrices carry explicit dimensions
// so degenerate shapes (0 x m) survive the round trip; doubles rely on
// the serializer's exact shortest-round-trip rendering.
// ---------------------------------------------------------------------

ojson matrix_json(const Matrix& m) {
    ojson j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    ojson data = ojson::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
    j["data"] = std::move(data);
    return j;
}

Matrix matrix_from(const ojson& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
        throw std::invalid_argument("matrix entry count mismatch");
    Matrix m(rows, cols);
    std::size_t pos = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) m(i, k) = data[pos++].get<double>();
    return m;
}

ojson dvec_json(const std::vector<double>& v) { return ojson(v); }

std::vector<double> dvec_from(const ojson& j) {
    return j.get<std::vector<double>>();
}

ojson ivec_json(const std::vector<Index>& v) { return ojson(v); }

std::vector<Index> ivec_from(const ojson& j) {
    return j.get<std::vector<Index>>();
}

ojson system_json(const StateSpace& s) {
    ojson j;
    j["A"] = matrix_json(s.A);
    j["B"] = matrix_json(s.B);
    j["C"] = matrix_json(s.C);
    j["D"] = matrix_json(s.D);
    j["input_labels"] = s.input_labels;
    j["output_labels"] = s.output_labels;
    return j;
}

StateSpace system_from(const ojson& j) {
    StateSpace s(matrix_from(j.at("A")), matrix_from(j.at("B")),
                 matrix_from(j.at("C")), matrix_from(j.at("D")),
                 j.at("input_labels").get<std::vector<std::string>>(),
                 j.at("output_labels").get<std::vector<std::string>>());
    return s;
}

ojson bounds_json(const std::vector<GeneBounds>& b) {
    ojson arr = ojson::array();
    for (const auto& g : b) arr.push_back(ojson::array({g.lo, g.hi}));
    return arr;
}

std::vector<GeneBounds> bounds_from(const ojson& j) {
    std::vector<GeneBounds> out;
    for (const auto& pair : j)
        out.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    return out;
}

ojson ga_result_json(const GaResult& r) {
    ojson j;
    j["best_genes"] = dvec_json(r.best_genome.genes);
    j["bounds"] = bounds_json(r.best_genome.bounds);
    j["best_fitness"] = r.best_fitness;
    j["history"] = dvec_json(r.history);
    j["generations_run"] = r.generations_run;
    return j;
}

GaResult ga_result_from(const ojson& j) {
    GaResult r;
    r.best_genome.genes = dvec_from(j.at("best_genes"));
    r.best_genome.bounds = bounds_from(j.at("bounds"));
    r.best_fitness = j.at("best_fitness").get<double>();
    r.history = dvec_from(j.at("history"));
    r.generations_run = j.at("generations_run").get<std::size_t>();
    return r;
}

ojson grid_json(const FrequencyGrid& g) {
    ojson j;
    j["points"] = dvec_json(g.points);
    j["points_per_decade"] = g.points_per_decade;
    j["omega_lo"] = g.omega_lo;
    j["omega_hi"] = g.omega_hi;
    return j;
}

FrequencyGrid grid_from(const ojson& j) {
    FrequencyGrid g;
    g.points = dvec_from(j.at("points"));
    g.points_per_decade = j.at("points_per_decade").get<double>();
    g.omega_lo = j.at("omega_lo").get<double>();
    g.omega_hi = j.at("omega_hi").get<double>();
    return g;
}

ojson sigma_json(const SigmaCurve& c) {
    ojson j;
    j["grid"] = grid_json(c.grid);
    ojson vals = ojson::array();
    for (const auto& row : c.values) vals.push_back(dvec_json(row));
    j["values"] = std::move(vals);
    return j;
}

SigmaCurve sigma_from(const ojson& j) {
    SigmaCurve c;
    c.grid = grid_from(j.at("grid"));
    for (const auto& row : j.at("values")) c.values.push_back(dvec_from(row));
    return c;
}

ojson error_curve_json(const ErrorCurve& e) {
    ojson j;
    j["curve"] = sigma_json(e.curve);
    j["peak"] = e.peak;
    j["peak_omega"] = e.peak_omega;
    return j;
}

ErrorCurve error_curve_from(const ojson& j) {
    ErrorCurve e;
    e.curve = sigma_from(j.at("curve"));
    e.peak = j.at("peak").get<double>();
    e.peak_omega = j.at("peak_omega").get<double>();
    return e;
}

ojson margin_json(const MarginReport& m) {
    ojson j;
    j["mu_max"] = m.mu_max;
    j["mu_peak_omega"] = m.mu_peak_omega;
    j["sm"] = m.sm;
    j["gm_low_db"] = m.gm_low_db;
    j["gm_high_db"] = m.gm_high_db;
    j["pm_deg"] = m.pm_deg;
    j["gm_high_infinite"] = m.gm_high_infinite;
    j["pm_unbounded"] = m.pm_unbounded;
    j["infinite_margins"] = m.infinite_margins;
    j["mu_curve"] = sigma_json(m.mu_curve);
    return j;
}

MarginReport margin_from(const ojson& j) {
    MarginReport m;
    m.mu_max = j.at("mu_max").get<double>();
    m.mu_peak_omega = j.at("mu_peak_omega").get<double>();
    m.sm = j.at("sm").get<double>();
    m.gm_low_db = j.at("gm_low_db").get<double>();
    m.gm_high_db = j.at("gm_high_db").get<double>();
    m.pm_deg = j.at("pm_deg").get<double>();
    m.gm_high_infinite = j.at("gm_high_infinite").get<bool>();
    m.pm_unbounded = j.at("pm_unbounded").get<bool>();
    m.infinite_margins = j.at("infinite_margins").get<bool>();
    m.mu_curve = sigma_from(j.at("mu_curve"));
    return m;
}

ojson check_json(const StabilityCheck& c) {
    ojson j;
    j["error_norm"] = c.error_norm;
    j["passes"] = c.passes;
    j["td_stable"] = c.td_stable;
    j["tc_stable"] = c.tc_stable;
    return j;
}

StabilityCheck check_from(const ojson& j) {
    StabilityCheck c;
    c.error_norm = j.at("error_norm").get<double>();
    c.passes = j.at("passes").get<bool>();
    c.td_stable = j.at("td_stable").get<bool>();
    c.tc_stable = j.at("tc_stable").get<bool>();
    return c;
}

ojson reduction_json(const BlockReduction& b) {
    ojson j;
    j["full"] = system_json(b.full);
    j["reduced"] = system_json(b.reduced);
    j["stable"] = b.stable;
    j["reduction_applied"] = b.reduction_applied;
    j["hankel_svs"] = dvec_json(b.hankel_svs);
    return j;
}

BlockReduction reduction_from(const ojson& j) {
    BlockReduction b;
    b.full = system_from(j.at("full"));
    b.reduced = system_from(j.at("reduced"));
    b.stable = j.at("stable").get<bool>();
    b.reduction_applied = j.at("reduction_applied").get<bool>();
    b.hankel_svs = dvec_from(j.at("hankel_svs"));
    return b;
}

ojson assignment_json(const IoAssignment& io) {
    ojson j;
    j["airframe_inputs"] = ivec_json(io.airframe_inputs);
    j["engine_inputs"] = ivec_json(io.engine_inputs);
    j["airframe_outputs"] = ivec_json(io.airframe_outputs);
    j["engine_outputs"] = ivec_json(io.engine_outputs);
    j["interface_outputs"] = ivec_json(io.interface_outputs);
    return j;
}

IoAssignment assignment_from(const ojson& j) {
    IoAssignment io;
    io.airframe_inputs = ivec_from(j.at("airframe_inputs"));
    io.engine_inputs = ivec_from(j.at("engine_inputs"));
    io.airframe_outputs = ivec_from(j.at("airframe_outputs"));
    io.engine_outputs = ivec_from(j.at("engine_outputs"));
    io.interface_outputs = ivec_from(j.at("interface_outputs"));
    return io;
}

ojson comparison_json(const StepComparison& c) {
    ojson j;
    j["t"] = dvec_json(c.t);
    j["system_names"] = c.system_names;
    j["output_names"] = c.output_names;
    ojson resp = ojson::array();
    for (const auto& r : c.responses) resp.push_back(matrix_json(r));
    j["responses"] = std::move(resp);
    j["max_deviation"] = dvec_json(c.max_deviation);
    j["any_diverged"] = c.any_diverged;
    return j;
}

StepComparison comparison_from(const ojson& j) {
    StepComparison c;
    c.t = dvec_from(j.at("t"));
    c.system_names = j.at("system_names").get<std::vector<std::string>>();
    c.output_names = j.at("output_names").get<std::vector<std::string>>();
    for (const auto& r : j.at("responses"))
        c.responses.push_back(matrix_from(r));
    c.max_deviation = dvec_from(j.at("max_deviation"));
    c.any_diverged = j.at("any_diverged").get<bool>();
    return c;
}

// ---------------------------------------------------------------------
// Config serialization.
// ---------------------------------------------------------------------

ojson spec_json(const PerformanceSpec& s) {
    ojson j;
    ojson bands = ojson::array();
    for (const auto& b : s.bandwidth_bands)
        bands.push_back(ojson::array({b.lo, b.hi}));
    j["bandwidth_bands"] = std::move(bands);
    j["rise_time_bound"] = s.rise_time_bound;
    j["overshoot_bound"] = s.overshoot_bound;
    j["gamma_bound"] = s.gamma_bound;
    j["k1"] = dvec_json(s.k1);
    j["k_psi"] = s.k_psi;
    j["k2"] = dvec_json(s.k2);
    j["target_inflation"] = s.target_inflation;
    j["sim_horizon"] = s.sim_horizon;
    j["sim_dt"] = s.sim_dt;
    return j;
}

void spec_merge(PerformanceSpec& s, const ojson& j) {
    if (j.contains("bandwidth_bands")) {
        s.bandwidth_bands.clear();
        for (const auto& b : j.at("bandwidth_bands"))
            s.bandwidth_bands.push_back(
                {b.at(0).get<double>(), b.at(1).get<double>()});
    }
    if (j.contains("rise_time_bound"))
        s.rise_time_bound = j.at("rise_time_bound").get<double>();
    if (j.contains("overshoot_bound"))
        s.overshoot_bound = j.at("overshoot_bound").get<double>();
    if (j.contains("gamma_bound"))
        s.gamma_bound = j.at("gamma_bound").get<double>();
    if (j.contains("k1")) s.k1 = dvec_from(j.at("k1"));
    if (j.contains("k_psi")) s.k_psi = j.at("k_psi").get<double>();
    if (j.contains("k2")) s.k2 = dvec_from(j.at("k2"));
    if (j.contains("target_inflation"))
        s.target_inflation = j.at("target_inflation").get<double>();
    if (j.contains("sim_horizon"))
        s.sim_horizon = j.at("sim_horizon").get<double>();
    if (j.contains("sim_dt")) s.sim_dt = j.at("sim_dt").get<double>();
}

ojson ga_config_json(const GaConfig& g) {
    ojson j;
    j["population_size"] = g.population_size;
    j["max_generations"] = g.max_generations;
    j["crossover_rate"] = g.crossover_rate;
    j["mutation_sigma"] = g.mutation_sigma;
    j["elitism_count"] = g.elitism_count;
    j["stall_tolerance"] = g.stall_tolerance;
    j["stall_generations"] = g.stall_generations;
    j["seed"] = g.seed;
    return j;
}

void ga_config_merge(GaConfig& g, const ojson& j) {
    if (j.contains("population_size"))
        g.population_size = j.at("population_size").get<std::size_t>();
    if (j.contains("max_generations"))
        g.max_generations = j.at("max_generations").get<std::size_t>();
    if (j.contains("crossover_rate"))
        g.crossover_rate = j.at("crossover_rate").get<double>();
    if (j.contains("mutation_sigma"))
        g.mutation_sigma = j.at("mutation_sigma").get<double>();
    if (j.contains("elitism_count"))
        g.elitism_count = j.at("elitism_count").get<std::size_t>();
    if (j.contains("stall_tolerance"))
        g.stall_tolerance = j.at("stall_tolerance").get<double>();
    if (j.contains("stall_generations"))
        g.stall_generations = j.at("stall_generations").get<std::size_t>();
    if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
}

std::string feedback_name(KtFeedback f) {
    return f == KtFeedback::kErrorOnly ? "error_only" : "error_and_measurement";
}

KtFeedback feedback_from_name(const std::string& s) {
    if (s == "error_only") return KtFeedback::kErrorOnly;
    if (s == "error_and_measurement") return KtFeedback::kErrorAndMeasurement;
    throw std::invalid_argument("config: unknown kt_feedback \"" + s + "\"");
}

// ---------------------------------------------------------------------
// File plumbing.
// ---------------------------------------------------------------------

void write_json_file(const ojson& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

ojson parse_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("cannot open " + path.string());
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw std::runtime_error(path.string() + ": " + err.what());
    }
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path stage_path(const PipelineConfig& cfg, const std::string& name) {
    return fs::path(cfg.out_dir) / ("stage_" + name + ".json");
}

// ---------------------------------------------------------------------
// Channel resolution and loop construction.
// ---------------------------------------------------------------------

std::vector<Index> resolve_labels(const std::vector<std::string>& wanted,
                                  const std::vector<std::string>& available,
                                  const char* what) {
    std::vector<Index> idx;
    for (const auto& label : wanted) {
        const auto it = std::find(available.begin(), available.end(), label);
        if (it == available.end())
            throw std::invalid_argument(std::string("config: ") + what +
                                        " label \"" + label +
                                        "\" not found in the plant");
        idx.push_back(static_cast<Index>(it - available.begin()));
    }
    return idx;
}

std::vector<Index> iota_indices(Index count) {
    std::vector<Index> v(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

/// Closed loop r -> all plant outputs under controller K acting on the
/// first n_c plant outputs through both error and measurement channels
/// (K maps [r - y_c; y_c] to all plant inputs).
StateSpace full_output_closed_loop(const StateSpace& g, const StateSpace& k,
                                   Index n_c) {
    const Index m = g.m(), p = g.p();
    Matrix M = Matrix::Zero(m + 2 * n_c, p + m);
    Matrix N = Matrix::Zero(m + 2 * n_c, n_c);
    M.block(0, p, m, m) = Matrix::Identity(m, m);
    for (Index i = 0; i < n_c; ++i) {
        M(m + i, i) = -1.0;
        N(m + i, i) = 1.0;
        M(m + n_c + i, i) = 1.0;
    }
    Matrix P = Matrix::Zero(p, p + m);
    P.block(0, 0, p, p) = Matrix::Identity(p, p);
    Matrix Q = Matrix::Zero(p, n_c);
    StateSpace t = interconnect({g, k}, M, N, P, Q);
    if (!g.output_labels.empty()) {
        for (Index i = 0; i < n_c; ++i)
            t.input_labels.push_back("r_" + g.output_labels[i]);
        t.output_labels = g.output_labels;
    }
    return t;
}

// ---------------------------------------------------------------------
// Stage payloads.
// ---------------------------------------------------------------------

struct SynthData {
    GaResult ga;
    StateSpace controller;     ///< [e; y] -> u on the controlled outputs
    StateSpace tracking_loop;  ///< r -> controlled outputs
    double gamma = 0.0;
    double fitness = 0.0;
    Index augmented_order = 0;
};

ojson synth_json(const SynthData& d) {
    ojson j;
    j["ga"] = ga_result_json(d.ga);
    j["controller"] = system_json(d.controller);
    j["tracking_loop"] = system_json(d.tracking_loop);
    j["gamma"] = d.gamma;
    j["fitness"] = d.fitness;
    j["augmented_order"] = d.augmented_order;
    return j;
}

SynthData synth_from(const ojson& j) {
    SynthData d;
    d.ga = ga_result_from(j.at("ga"));
    d.controller = system_from(j.at("controller"));
    d.tracking_loop = system_from(j.at("tracking_loop"));
    d.gamma = j.at("gamma").get<double>();
    d.fitness = j.at("fitness").get<double>();
    d.augmented_order = j.at("augmented_order").get<Index>();
    return d;
}

struct PartitionData {
    std::vector<Index> selected;  ///< plant output indices
    Matrix peaks;                 ///< candidate x command step peaks
    std::vector<Index> design_outputs;  ///< plant output indices, in order
    StateSpace design_plant;
    IoAssignment io;  ///< on the design plant
    StateSpace k_perm;
    BlockReduction ka_bar;
    BlockReduction k_ee;
    StateSpace k_lead;
    StateSpace engine_model;        ///< U_e -> [y_e; y_ea]
    StateSpace engine_design_plant; ///< U_e -> [y_ea; y_e]
};

ojson partition_json(const PartitionData& d) {
    ojson j;
    j["selected"] = ivec_json(d.selected);
    j["peaks"] = matrix_json(d.peaks);
    j["design_outputs"] = ivec_json(d.design_outputs);
    j["design_plant"] = system_json(d.design_plant);
    j["io"] = assignment_json(d.io);
    j["k_perm"] = system_json(d.k_perm);
    j["ka_bar"] = reduction_json(d.ka_bar);
    j["k_ee"] = reduction_json(d.k_ee);
    j["k_lead"] = system_json(d.k_lead);
    j["engine_model"] = system_json(d.engine_model);
    j["engine_design_plant"] = system_json(d.engine_design_plant);
    return j;
}

PartitionData partition_from(const ojson& j) {
    PartitionData d;
    d.selected = ivec_from(j.at("selected"));
    d.peaks = matrix_from(j.at("peaks"));
    d.design_outputs = ivec_from(j.at("design_outputs"));
    d.design_plant = system_from(j.at("design_plant"));
    d.io = assignment_from(j.at("io"));
    d.k_perm = system_from(j.at("k_perm"));
    d.ka_bar = reduction_from(j.at("ka_bar"));
    d.k_ee = reduction_from(j.at("k_ee"));
    d.k_lead = system_from(j.at("k_lead"));
    d.engine_model = system_from(j.at("engine_model"));
    d.engine_design_plant = system_from(j.at("engine_design_plant"));
    return d;
}

struct KtData {
    GaResult ga;
    StateSpace k_t;       ///< deployed (reduced)
    StateSpace k_t_full;  ///< unreduced
    double fitness = 0.0;
    double gamma = 0.0;
    bool stable_full = false;
    bool stable_reduced = false;
};

ojson kt_json(const KtData& d) {
    ojson j;
    j["ga"] = ga_result_json(d.ga);
    j["k_t"] = system_json(d.k_t);
    j["k_t_full"] = system_json(d.k_t_full);
    j["fitness"] = d.fitness;
    j["gamma"] = d.gamma;
    j["stable_full"] = d.stable_full;
    j["stable_reduced"] = d.stable_reduced;
    return j;
}

KtData kt_from(const ojson& j) {
    KtData d;
    d.ga = ga_result_from(j.at("ga"));
    d.k_t = system_from(j.at("k_t"));
    d.k_t_full = system_from(j.at("k_t_full"));
    d.fitness = j.at("fitness").get<double>();
    d.gamma = j.at("gamma").get<double>();
    d.stable_full = j.at("stable_full").get<bool>();
    d.stable_reduced = j.at("stable_reduced").get<bool>();
    return d;
}

struct AnalyzeData {
    StabilityCheck check_full;
    StabilityCheck check_reduced;
    ErrorCurve gap_full;
    ErrorCurve gap_reduced;
    MarginReport margins_centralized;
    MarginReport margins_decentralized;
    SigmaCurve sigma_centralized;
    SigmaCurve sigma_decentralized;
};

ojson analyze_json(const AnalyzeData& d) {
    ojson j;
    j["check_full"] = check_json(d.check_full);
    j["check_reduced"] = check_json(d.check_reduced);
    j["gap_full"] = error_curve_json(d.gap_full);
    j["gap_reduced"] = error_curve_json(d.gap_reduced);
    j["margins_centralized"] = margin_json(d.margins_centralized);
    j["margins_decentralized"] = margin_json(d.margins_decentralized);
    j["sigma_centralized"] = sigma_json(d.sigma_centralized);
    j["sigma_decentralized"] = sigma_json(d.sigma_decentralized);
    return j;
}

AnalyzeData analyze_from(const ojson& j) {
    AnalyzeData d;
    d.check_full = check_from(j.at("check_full"));
    d.check_reduced = check_from(j.at("check_reduced"));
    d.gap_full = error_curve_from(j.at("gap_full"));
    d.gap_reduced = error_curve_from(j.at("gap_reduced"));
    d.margins_centralized = margin_from(j.at("margins_centralized"));
    d.margins_decentralized = margin_from(j.at("margins_decentralized"));
    d.sigma_centralized = sigma_from(j.at("sigma_centralized"));
    d.sigma_decentralized = sigma_from(j.at("sigma_decentralized"));
    return d;
}

struct SimulateData {
    std::vector<StepComparison> comparisons;  ///< one per command channel
    double match_max_frac = 0.0;
    double off_channel_max_frac = 0.0;
};

ojson simulate_json(const SimulateData& d) {
    ojson j;
    ojson comps = ojson::array();
    for (const auto& c : d.comparisons) comps.push_back(comparison_json(c));
    j["comparisons"] = std::move(comps);
    j["match_max_frac"] = d.match_max_frac;
    j["off_channel_max_frac"] = d.off_channel_max_frac;
    return j;
}

SimulateData simulate_from(const ojson& j) {
    SimulateData d;
    for (const auto& c : j.at("comparisons"))
        d.comparisons.push_back(comparison_from(c));
    d.match_max_frac = j.at("match_max_frac").get<double>();
    d.off_channel_max_frac = j.at("off_channel_max_frac").get<double>();
    return d;
}

// ---------------------------------------------------------------------
// Stage runner.
// ---------------------------------------------------------------------

template <typename T>
T run_stage(const std::string& name, bool resume, const PipelineConfig& cfg,
            std::vector<StageStatus>& stages, const std::function<T()>& compute,
            ojson (*save)(const T&), T (*load)(const ojson&)) {
    const fs::path file = stage_path(cfg, name);
    if (resume && fs::exists(file)) {
        try {
            T data = load(parse_json_file(file));
            stages.push_back({name, true});
            return data;
        } catch (const std::exception& err) {
            throw PipelineError("stage " + name + ": cannot resume from " +
                                file.string() + ": " + err.what());
        }
    }
    T data;
    try {
        data = compute();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& err) {
        throw PipelineError("stage " + name + ": " + err.what());
    }
    try {
        write_json_file(save(data), file);
    } catch (const std::exception& err) {
        throw PipelineError("stage " + name + ": " + err.what());
    }
    stages.push_back({name, false});
    return data;
}

/// Manifest writer shared by the success and failure paths: entries
/// sorted by path, same document shape as the report writer's.
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const fs::path& out_dir) {
    std::vector<ManifestEntry> sorted = entries;
    std::sort(sorted.begin(), sorted.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return a.path < b.path;
              });
    ojson doc;
    doc["files"] = ojson::array();
    for (const auto& e : sorted) {
        ojson row;
        row["path"] = e.path;
        row["sha256"] = e.sha256;
        doc["files"].push_back(std::move(row));
    }
    write_json_file(doc, out_dir / "manifest.json");
}

std::vector<ManifestEntry> stage_file_entries(const PipelineConfig& cfg) {
    std::vector<ManifestEntry> entries;
    for (const auto& name : pipeline_stage_names()) {
        const fs::path file = stage_path(cfg, name);
        if (fs::exists(file))
            entries.push_back(
                {file.filename().string(), sha256_hex(read_file_bytes(file))});
    }
    return entries;
}

}  // namespace

// -----------------------------------------------------------------------
// Config.
// -----------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo))
        throw std::invalid_argument(
            "config: frequency window must satisfy 0 < omega_lo < omega_hi");
    if (!(points_per_decade > 0.0))
        throw std::invalid_argument("config: points_per_decade must be > 0");
    if (controlled_outputs.empty())
        throw std::invalid_argument("config: controlled_outputs is empty");
    if (interface_candidates.empty())
        throw std::invalid_argument("config: interface_candidates is empty");
    if (engine_states.empty())
        throw std::invalid_argument("config: engine_states is empty");
    tracking_spec.validate();
    interface_spec.validate();
    tracking_ga.validate();
    interface_ga.validate();
    for (const auto& b : tracking_bounds)
        if (!(b.lo < b.hi))
            throw std::invalid_argument(
                "config: tracking_bounds must be well ordered");
    for (const auto& b : interface_bounds)
        if (!(b.lo < b.hi))
            throw std::invalid_argument(
                "config: interface_bounds must be well ordered");
    if (!(dominance_ratio > 0.0) || dominance_ratio > 1.0)
        throw std::invalid_argument(
            "config: dominance_ratio must be in (0, 1]");
    if (!(lead_a > 0.0) || !(lead_b > lead_a))
        throw std::invalid_argument(
            "config: lead filter requires 0 < lead_a < lead_b");
    if (flight_block_order < 1 || engine_feedback_order < 1 ||
        interface_tracking_order < 1)
        throw std::invalid_argument(
            "config: reduction orders must be at least 1");
    if (out_dir.empty())
        throw std::invalid_argument("config: out_dir is empty");
    if (tracking_bounds.size() !=
        weight_genome_size(static_cast<Index>(controlled_outputs.size())))
        throw std::invalid_argument(
            "config: tracking_bounds size must match the controlled-output "
            "weight genome");
    if (tracking_spec.bandwidth_bands.size() != controlled_outputs.size())
        throw std::invalid_argument(
            "config: tracking_spec needs one bandwidth band per controlled "
            "output");
}

void PipelineConfig::validate(const StateSpace& plant) const {
    validate();
    resolve_labels(controlled_outputs, plant.output_labels,
                   "controlled output");
    resolve_labels(interface_candidates, plant.output_labels,
                   "interface candidate");
    std::set<std::string> controlled(controlled_outputs.begin(),
                                     controlled_outputs.end());
    for (const auto& c : interface_candidates)
        if (controlled.count(c))
            throw std::invalid_argument(
                "config: interface candidate \"" + c +
                "\" is already a controlled output");
}

PipelineConfig default_config() {
    PipelineConfig cfg;
    cfg.controlled_outputs = {"V", "q_v", "N_2P", "R"};
    cfg.interface_candidates = {"F_x", "F_z", "T_M"};
    cfg.engine_states = {"N_2", "N_25", "P_6", "T_41"};

    cfg.tracking_spec.bandwidth_bands.assign(4, Band{0.2, 10.0});
    cfg.tracking_spec.rise_time_bound = 8.0;
    cfg.tracking_spec.overshoot_bound = 0.3;
    cfg.tracking_spec.gamma_bound = 1.5;
    cfg.tracking_spec.sim_horizon = 12.0;
    cfg.tracking_spec.sim_dt = 5e-3;

    cfg.tracking_ga.population_size = 14;
    cfg.tracking_ga.max_generations = 10;
    cfg.tracking_ga.mutation_sigma = 0.15;
    cfg.tracking_ga.stall_tolerance = 1e-5;
    cfg.tracking_ga.stall_generations = 4;
    cfg.tracking_ga.seed = 11;

    for (int i = 0; i < 4; ++i) {
        cfg.tracking_bounds.push_back({-0.3, 0.6});  // tracking-weight gain
        cfg.tracking_bounds.push_back({-0.5, 0.6});  // tracking-weight corner
        cfg.tracking_bounds.push_back({-2.5, -1.5}); // corner drop
        cfg.tracking_bounds.push_back({-0.8, 0.4});  // roll-off gain
        cfg.tracking_bounds.push_back({0.9, 1.8});   // roll-off corner
        cfg.tracking_bounds.push_back({1.0, 2.5});   // corner rise
    }
    cfg.tracking_bounds.push_back({-1.3, -0.6});     // effort gain

    cfg.interface_spec.bandwidth_bands.assign(1, Band{1.0, 30.0});
    cfg.interface_spec.rise_time_bound = 1.5;
    cfg.interface_spec.overshoot_bound = 0.4;
    cfg.interface_spec.gamma_bound = 3.0;
    cfg.interface_spec.k_psi = 1.0;
    cfg.interface_spec.sim_horizon = 12.0;
    cfg.interface_spec.sim_dt = 5e-3;

    cfg.interface_ga.population_size = 12;
    cfg.interface_ga.max_generations = 8;
    cfg.interface_ga.mutation_sigma = 0.15;
    cfg.interface_ga.stall_tolerance = 1e-5;
    cfg.interface_ga.stall_generations = 4;
    cfg.interface_ga.seed = 12;

    for (int i = 0; i < 3; ++i) {
        cfg.interface_bounds.push_back({-1.0, 1.0});  // tracking-weight gain
        cfg.interface_bounds.push_back({0.0, 1.5});   // tracking-weight corner
        cfg.interface_bounds.push_back({-4.0, -2.0}); // corner drop
        cfg.interface_bounds.push_back({-1.0, 0.5});  // roll-off gain
        cfg.interface_bounds.push_back({1.0, 2.5});   // roll-off corner
        cfg.interface_bounds.push_back({1.0, 3.0});   // corner rise
    }
    cfg.interface_bounds.push_back({-3.0, -1.0});     // effort gain
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    const ojson j = parse_json_file(path);
    if (!j.is_object())
        throw std::invalid_argument("config: top level must be an object");
    PipelineConfig cfg = default_config();
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("omega_lo")) cfg.omega_lo = g.at("omega_lo").get<double>();
        if (g.contains("omega_hi")) cfg.omega_hi = g.at("omega_hi").get<double>();
        if (g.contains("points_per_decade"))
            cfg.points_per_decade = g.at("points_per_decade").get<double>();
    }
    if (j.contains("controlled_outputs"))
        cfg.controlled_outputs =
            j.at("controlled_outputs").get<std::vector<std::string>>();
    if (j.contains("interface_candidates"))
        cfg.interface_candidates =
            j.at("interface_candidates").get<std::vector<std::string>>();
    if (j.contains("engine_states"))
        cfg.engine_states = j.at("engine_states").get<std::vector<std::string>>();
    if (j.contains("tracking")) {
        const auto& t = j.at("tracking");
        if (t.contains("spec")) spec_merge(cfg.tracking_spec, t.at("spec"));
        if (t.contains("ga")) ga_config_merge(cfg.tracking_ga, t.at("ga"));
        if (t.contains("bounds")) cfg.tracking_bounds = bounds_from(t.at("bounds"));
    }
    if (j.contains("interface")) {
        const auto& t = j.at("interface");
        if (t.contains("spec")) spec_merge(cfg.interface_spec, t.at("spec"));
        if (t.contains("ga")) ga_config_merge(cfg.interface_ga, t.at("ga"));
        if (t.contains("bounds"))
            cfg.interface_bounds = bounds_from(t.at("bounds"));
    }
    if (j.contains("partition")) {
        const auto& p = j.at("partition");
        if (p.contains("dominance_ratio"))
            cfg.dominance_ratio = p.at("dominance_ratio").get<double>();
        if (p.contains("lead_a")) cfg.lead_a = p.at("lead_a").get<double>();
        if (p.contains("lead_b")) cfg.lead_b = p.at("lead_b").get<double>();
        if (p.contains("flight_block_order"))
            cfg.flight_block_order = p.at("flight_block_order").get<Index>();
        if (p.contains("engine_feedback_order"))
            cfg.engine_feedback_order =
                p.at("engine_feedback_order").get<Index>();
        if (p.contains("interface_tracking_order"))
            cfg.interface_tracking_order =
                p.at("interface_tracking_order").get<Index>();
        if (p.contains("kt_feedback"))
            cfg.kt_feedback =
                feedback_from_name(p.at("kt_feedback").get<std::string>());
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.validate();
    return cfg;
}

void write_config(const PipelineConfig& cfg, const std::string& path) {
    cfg.validate();
    ojson j;
    j["grid"] = {{"omega_lo", cfg.omega_lo},
                 {"omega_hi", cfg.omega_hi},
                 {"points_per_decade", cfg.points_per_decade}};
    j["controlled_outputs"] = cfg.controlled_outputs;
    j["interface_candidates"] = cfg.interface_candidates;
    j["engine_states"] = cfg.engine_states;
    j["tracking"] = {{"spec", spec_json(cfg.tracking_spec)},
                     {"ga", ga_config_json(cfg.tracking_ga)},
                     {"bounds", bounds_json(cfg.tracking_bounds)}};
    j["interface"] = {{"spec", spec_json(cfg.interface_spec)},
                      {"ga", ga_config_json(cfg.interface_ga)},
                      {"bounds", bounds_json(cfg.interface_bounds)}};
    j["partition"] = {
        {"dominance_ratio", cfg.dominance_ratio},
        {"lead_a", cfg.lead_a},
        {"lead_b", cfg.lead_b},
        {"flight_block_order", cfg.flight_block_order},
        {"engine_feedback_order", cfg.engine_feedback_order},
        {"interface_tracking_order", cfg.interface_tracking_order},
        {"kt_feedback", feedback_name(cfg.kt_feedback)}};
    j["out_dir"] = cfg.out_dir;
    write_json_file(j, path);
}

const std::vector<std::string>& pipeline_stage_names() {
    static const std::vector<std::string> names = {
        "synth", "partition", "kt", "analyze", "simulate", "report"};
    return names;
}

// -----------------------------------------------------------------------
// The pipeline.
// -----------------------------------------------------------------------

PipelineResult run_pipeline(const LoadedPlant& plant,
                            const PipelineConfig& cfg, bool resume) {
    cfg.validate(plant.scaled);
    const StateSpace& scaled = plant.scaled;
    const Index nc = static_cast<Index>(cfg.controlled_outputs.size());
    const std::vector<Index> controlled_idx = resolve_labels(
        cfg.controlled_outputs, scaled.output_labels, "controlled output");
    const std::vector<Index> candidate_idx = resolve_labels(
        cfg.interface_candidates, scaled.output_labels, "interface candidate");
    const std::vector<Index> engine_state_idx = resolve_labels(
        cfg.engine_states, plant.document.state_labels, "engine state");
    const FrequencyGrid grid =
        make_grid(cfg.omega_lo, cfg.omega_hi, cfg.points_per_decade);
    const StateSpace g4 =
        select_channels(scaled, iota_indices(scaled.m()), controlled_idx);

    fs::create_directories(cfg.out_dir);

    PipelineResult result;
    try {
        // ---- synth: centralized tracking design ----
        const SynthData synth = run_stage<SynthData>(
            "synth", resume, cfg, result.stages,
            [&]() {
                SynthData d;
                d.ga = run_ga(
                    [&](const Genome& genome) {
                        return fitness_centralized(genome, g4,
                                                   cfg.tracking_spec, grid);
                    },
                    cfg.tracking_bounds, cfg.tracking_ga);
                const CentralizedEval ev = evaluate_centralized(
                    d.ga.best_genome, g4, cfg.tracking_spec, grid);
                if (!ev.synthesized || !ev.synthesis)
                    throw std::runtime_error(
                        "no genome in the search produced a controller "
                        "(best fitness " +
                        std::to_string(d.ga.best_fitness) + ")");
                d.controller = ev.synthesis->controller;
                d.tracking_loop = ev.tracking_loop;
                d.gamma = ev.synthesis->gamma_achieved;
                d.fitness = d.ga.best_fitness;
                d.augmented_order = d.controller.n();
                return d;
            },
            &synth_json, &synth_from);

        // ---- partition: interface screening and controller split ----
        const PartitionData part = run_stage<PartitionData>(
            "partition", resume, cfg, result.stages,
            [&]() {
                PartitionData d;
                const StateSpace t_ext =
                    full_output_closed_loop(scaled, synth.controller, nc);
                const InterfaceSelection sel =
                    select_interface(t_ext, candidate_idx, iota_indices(nc),
                                     cfg.dominance_ratio);
                d.selected = sel.selected;
                d.peaks = sel.peaks;
                if (d.selected.empty())
                    throw std::runtime_error(
                        "interface screening selected no candidate");

                d.design_outputs = controlled_idx;
                d.design_outputs.insert(d.design_outputs.end(),
                                        d.selected.begin(), d.selected.end());
                d.design_plant = select_channels(
                    scaled, iota_indices(scaled.m()), d.design_outputs);
                d.io = preset_assignment(d.design_plant);
                const PartitionedPlant pp = assign_io(d.design_plant, d.io);
                const PartitionDims dims = pp.dims();

                // Reorder the controller to [e_a; e_e; y_a; y_e] inputs and
                // [U_a; U_e] outputs. Airframe/engine output positions on
                // the design plant index the controlled list directly.
                for (Index i : d.io.airframe_outputs)
                    if (i >= nc)
                        throw std::runtime_error(
                            "airframe outputs must be controlled outputs");
                for (Index i : d.io.engine_outputs)
                    if (i >= nc)
                        throw std::runtime_error(
                            "engine outputs must be controlled outputs");
                std::vector<Index> in_order;
                for (Index i : d.io.airframe_outputs) in_order.push_back(i);
                for (Index i : d.io.engine_outputs) in_order.push_back(i);
                for (Index i : d.io.airframe_outputs)
                    in_order.push_back(nc + i);
                for (Index i : d.io.engine_outputs) in_order.push_back(nc + i);
                std::vector<Index> out_order = d.io.airframe_inputs;
                out_order.insert(out_order.end(), d.io.engine_inputs.begin(),
                                 d.io.engine_inputs.end());
                d.k_perm =
                    select_channels(synth.controller, in_order, out_order);

                // Engine submodels from the full plant restricted to the
                // engine states: for the flight block the outputs are
                // [y_e; y_ea]; for the tracking design, [y_ea; y_e].
                std::vector<Index> engine_out_plant;
                for (Index i : d.io.engine_outputs)
                    engine_out_plant.push_back(
                        d.design_outputs[static_cast<std::size_t>(i)]);
                std::vector<Index> ye_then_yea = engine_out_plant;
                ye_then_yea.insert(ye_then_yea.end(), d.selected.begin(),
                                   d.selected.end());
                std::vector<Index> yea_then_ye = d.selected;
                yea_then_ye.insert(yea_then_ye.end(), engine_out_plant.begin(),
                                   engine_out_plant.end());
                std::vector<Index> engine_in_plant = d.io.engine_inputs;
                d.engine_model = extract_submodel(scaled, engine_state_idx,
                                                  engine_in_plant, ye_then_yea);
                d.engine_design_plant = extract_submodel(
                    scaled, engine_state_idx, engine_in_plant, yea_then_ye);

                d.ka_bar = build_airframe_sub(d.k_perm, d.engine_model, dims,
                                              cfg.flight_block_order);
                std::vector<Index> e_e, y_e_meas;
                for (Index i : d.io.engine_outputs) {
                    e_e.push_back(i);
                    y_e_meas.push_back(nc + i);
                }
                d.k_ee = extract_kee(synth.controller, e_e, y_e_meas,
                                     d.io.engine_inputs,
                                     cfg.engine_feedback_order);
                d.k_lead = build_lead(cfg.lead_a, cfg.lead_b, dims.n_yea);
                return d;
            },
            &partition_json, &partition_from);

        const PartitionedPlant pp = assign_io(part.design_plant, part.io);

        // ---- kt: interface tracking design ----
        const KtData kt = run_stage<KtData>(
            "kt", resume, cfg, result.stages,
            [&]() {
                KtDesignContext ctx;
                ctx.engine_plant = part.engine_design_plant;
                ctx.plant = pp;
                ctx.ka_bar = part.ka_bar.reduced;
                ctx.k_lead = part.k_lead;
                ctx.k_ee = part.k_ee.reduced;
                ctx.feedback = cfg.kt_feedback;
                ctx.reduce_to = cfg.interface_tracking_order;
                const KtDesignResult res =
                    design_kt(ctx, cfg.interface_spec, cfg.interface_ga,
                              cfg.interface_bounds, synth.tracking_loop, grid);
                KtData d;
                d.ga = res.ga;
                d.k_t = res.k_t;
                d.k_t_full = res.k_t_full;
                d.fitness = res.fitness;
                d.gamma = res.gamma;
                d.stable_full = res.stable_full;
                d.stable_reduced = res.stable_reduced;
                return d;
            },
            &kt_json, &kt_from);

        // The two deliverable assemblies: unreduced blocks and deployed
        // (reduced) blocks.
        DecentralizedController ctrl_full{part.ka_bar.full, part.k_lead,
                                          kt.k_t_full, part.k_ee.full,
                                          cfg.kt_feedback};
        ctrl_full.update_stability();
        ctrl_full.check_dimensions(pp);
        DecentralizedController ctrl_reduced{part.ka_bar.reduced, part.k_lead,
                                             kt.k_t, part.k_ee.reduced,
                                             cfg.kt_feedback};
        ctrl_reduced.update_stability();
        ctrl_reduced.check_dimensions(pp);

        // ---- analyze: loop matching, gap curves, margins ----
        const AnalyzeData analyze = run_stage<AnalyzeData>(
            "analyze", resume, cfg, result.stages,
            [&]() {
                AnalyzeData d;
                const StateSpace td_full = assemble_td(pp, ctrl_full);
                const StateSpace td_reduced = assemble_td(pp, ctrl_reduced);
                d.check_full =
                    check_stability_condition(td_full, synth.tracking_loop);
                d.check_reduced =
                    check_stability_condition(td_reduced, synth.tracking_loop);
                d.gap_full = error_curve(td_full, synth.tracking_loop, grid);
                d.gap_reduced =
                    error_curve(td_reduced, synth.tracking_loop, grid);

                const std::vector<Index> blocks(
                    static_cast<std::size_t>(nc), 1);
                d.margins_centralized = robustness_sweep(
                    output_complementary_tc(g4, synth.controller), grid,
                    blocks);
                d.margins_decentralized = robustness_sweep(
                    output_complementary_td(pp, ctrl_reduced), grid, blocks);

                d.sigma_centralized = sigma_max(synth.tracking_loop, grid);
                d.sigma_decentralized = sigma_max(td_reduced, grid);
                return d;
            },
            &analyze_json, &analyze_from);

        // ---- simulate: side-by-side command steps ----
        const SimulateData simulate = run_stage<SimulateData>(
            "simulate", resume, cfg, result.stages,
            [&]() {
                SimulateData d;
                const std::vector<LabeledSystem> systems = {
                    {"centralized", synth.tracking_loop},
                    {"full", assemble_td(pp, ctrl_full)},
                    {"deployed", assemble_td(pp, ctrl_reduced)},
                };
                for (Index cmd = 0; cmd < nc; ++cmd) {
                    StepComparison comp = compare_step(systems, cmd, 20.0, 1e-3);
                    // Largest tracking gap against a unit command.
                    for (double dev : comp.max_deviation)
                        d.match_max_frac = std::max(d.match_max_frac, dev);
                    // Off-channel excursions relative to the commanded
                    // channel's final value.
                    for (std::size_t sys = 0; sys < comp.responses.size();
                         ++sys) {
                        const Matrix& y = comp.responses[sys];
                        const double final_cmd =
                            std::abs(y(y.rows() - 1, cmd));
                        if (final_cmd <= 0.0) continue;
                        for (Index j = 0; j < y.cols(); ++j) {
                            if (j == cmd) continue;
                            const double peak =
                                y.col(j).cwiseAbs().maxCoeff();
                            d.off_channel_max_frac = std::max(
                                d.off_channel_max_frac, peak / final_cmd);
                        }
                    }
                    d.comparisons.push_back(std::move(comp));
                }
                return d;
            },
            &simulate_json, &simulate_from);

        result.check_full = analyze.check_full;
        result.check_reduced = analyze.check_reduced;

        // ---- report: render artifacts, metrics, manifest ----
        try {
            ReportArtifacts artifacts;
            auto history_curve = [](const std::string& name,
                                    const std::vector<double>& history) {
                CurveArtifact c;
                c.name = name;
                for (std::size_t i = 0; i < history.size(); ++i) {
                    c.curve.grid.points.push_back(static_cast<double>(i));
                    c.curve.values.push_back({history[i]});
                }
                if (!history.empty()) {
                    c.curve.grid.omega_lo = 0.0;
                    c.curve.grid.omega_hi =
                        static_cast<double>(history.size() - 1);
                }
                return c;
            };
            artifacts.curves.push_back(
                history_curve("ga_tracking_history", synth.ga.history));
            artifacts.curves.push_back(
                history_curve("ga_interface_history", kt.ga.history));
            artifacts.curves.push_back(
                {"sigma_centralized", analyze.sigma_centralized});
            artifacts.curves.push_back(
                {"sigma_decentralized", analyze.sigma_decentralized});
            artifacts.curves.push_back({"loop_gap_full",
                                        analyze.gap_full.curve});
            artifacts.curves.push_back({"loop_gap_deployed",
                                        analyze.gap_reduced.curve});
            artifacts.curves.push_back(
                {"mu_centralized", analyze.margins_centralized.mu_curve});
            artifacts.curves.push_back(
                {"mu_decentralized", analyze.margins_decentralized.mu_curve});
            for (Index cmd = 0; cmd < nc; ++cmd) {
                artifacts.tables.push_back(
                    {"step_" + cfg.controlled_outputs[
                                   static_cast<std::size_t>(cmd)],
                     simulate.comparisons[static_cast<std::size_t>(cmd)]});
            }

            auto& metrics = artifacts.metrics;
            metrics["gamma_centralized"] = synth.gamma;
            metrics["tracking_fitness"] = synth.fitness;
            metrics["interface_fitness"] = kt.fitness;
            metrics["gamma_interface"] = kt.gamma;
            metrics["augmented_order"] =
                static_cast<double>(synth.augmented_order);
            metrics["flight_block_connection_order"] =
                static_cast<double>(part.ka_bar.full.n());
            metrics["selected_interface_count"] =
                static_cast<double>(part.selected.size());
            metrics["hinf_error_full"] = analyze.check_full.error_norm;
            metrics["hinf_error_reduced"] = analyze.check_reduced.error_norm;
            metrics["loop_match_passes_full"] =
                analyze.check_full.passes ? 1.0 : 0.0;
            metrics["loop_match_passes_reduced"] =
                analyze.check_reduced.passes ? 1.0 : 0.0;
            metrics["mu_max_centralized"] =
                analyze.margins_centralized.mu_max;
            metrics["sm_centralized"] = analyze.margins_centralized.sm;
            metrics["gm_low_db_centralized"] =
                analyze.margins_centralized.gm_low_db;
            metrics["gm_high_db_centralized"] =
                analyze.margins_centralized.gm_high_db;
            metrics["pm_deg_centralized"] =
                analyze.margins_centralized.pm_deg;
            metrics["mu_max_decentralized"] =
                analyze.margins_decentralized.mu_max;
            metrics["sm_decentralized"] = analyze.margins_decentralized.sm;
            metrics["step_match_max_frac"] = simulate.match_max_frac;
            metrics["step_off_channel_max_frac"] =
                simulate.off_channel_max_frac;

            ReportManifest rendered = emit_report(artifacts, cfg.out_dir);
            std::vector<ManifestEntry> entries = rendered.files;
            for (auto& e : stage_file_entries(cfg)) entries.push_back(e);
            write_manifest(entries, cfg.out_dir);
            std::sort(entries.begin(), entries.end(),
                      [](const ManifestEntry& a, const ManifestEntry& b) {
                          return a.path < b.path;
                      });
            result.manifest.files = std::move(entries);
            result.metrics = artifacts.metrics;
            result.stages.push_back({"report", false});
        } catch (const PipelineError&) {
            throw;
        } catch (const std::exception& err) {
            throw PipelineError(std::string("stage report: ") + err.what());
        }
    } catch (const PipelineError&) {
        // Leave behind a manifest for whatever was produced before the
        // failure so partial runs stay inspectable and resumable.
        try {
            write_manifest(stage_file_entries(cfg), fs::path(cfg.out_dir));
        } catch (...) {
            // The partial manifest is best effort; the stage error wins.
        }
        throw;
    }
    return result;
}

} // namespace ifpc
