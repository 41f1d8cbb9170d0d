#include "ifpc/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "ifpc/simulate.hpp"

namespace ifpc {

namespace {

constexpr double kScaleFloor = 1e-6;  ///< smallest/1e-6 largest mu scaling
constexpr int kMaxSweeps = 100;       ///< rebalancing sweep cap

constexpr double kPi = 3.14159265358979323846;

double to_db(double gain) { return 20.0 * std::log10(gain); }

}  // namespace

ErrorCurve error_curve(const StateSpace& td, const StateSpace& tc,
                       const FrequencyGrid& grid) {
    if (td.m() != tc.m() || td.p() != tc.p())
        throw std::invalid_argument(
            "error_curve: the two loops must have identical channel counts");
    ErrorCurve out;
    out.curve = sigma_max(subtract(td, tc), grid);
    out.peak = 0.0;
    out.peak_omega = grid.points.empty() ? 0.0 : grid.points.front();
    for (std::size_t i = 0; i < out.curve.values.size(); ++i) {
        if (out.curve.values[i].empty()) continue;
        if (out.curve.values[i].front() > out.peak) {
            out.peak = out.curve.values[i].front();
            out.peak_omega = grid.points[i];
        }
    }
    return out;
}

double mu_upper(const MatrixC& m, const std::vector<Index>& blocks) {
    const Index p = m.rows();
    if (m.cols() != p)
        throw std::invalid_argument("mu_upper: matrix must be square");
    if (!m.allFinite())
        throw std::invalid_argument("mu_upper: matrix entries must be finite");
    if (blocks.empty())
        throw std::invalid_argument("mu_upper: block list must not be empty");
    Index total = 0;
    for (Index b : blocks) {
        if (b < 1)
            throw std::invalid_argument(
                "mu_upper: every block must have positive size");
        total += b;
    }
    if (total != p)
        throw std::invalid_argument(
            "mu_upper: block sizes must partition the matrix dimension");

    const Index q = static_cast<Index>(blocks.size());
    double best = sigma_max_of(m);  // D = I is always admissible
    if (q == 1) return best;

    // Block offsets into the matrix.
    std::vector<Index> off(static_cast<std::size_t>(q), 0);
    for (Index i = 1; i < q; ++i)
        off[static_cast<std::size_t>(i)] =
            off[static_cast<std::size_t>(i - 1)] +
            blocks[static_cast<std::size_t>(i - 1)];

    // A block-diagonal scaling D = diag(d_i I) commutes with the
    // uncertainty, so sigma_max(D M D^-1) bounds mu for any positive d.
    // Cyclically rebalance the scaled matrix in place: block row i
    // scales with d_i and block column i with 1/d_i, so matching their
    // off-diagonal norms (one block at a time, each update immediately
    // visible to the next) shrinks the peak. A zero row (column) pushes
    // d_i to the cap (floor), wiping out the opposing column (row).
    std::vector<double> d(static_cast<std::size_t>(q), 1.0);
    const double cap = 1.0 / kScaleFloor;
    MatrixC ms = m;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double imbalance = 0.0;
        bool moved = false;
        for (Index i = 0; i < q; ++i) {
            const Index o = off[static_cast<std::size_t>(i)];
            const Index w = blocks[static_cast<std::size_t>(i)];
            const double diag2 = ms.block(o, o, w, w).squaredNorm();
            const double r = std::sqrt(
                std::max(ms.block(o, 0, w, p).squaredNorm() - diag2, 0.0));
            const double c = std::sqrt(
                std::max(ms.block(0, o, p, w).squaredNorm() - diag2, 0.0));
            if (r == 0.0 && c == 0.0) continue;
            double& di = d[static_cast<std::size_t>(i)];
            double nd;
            if (r == 0.0)
                nd = cap;  // dead row: kill the column too
            else if (c == 0.0)
                nd = kScaleFloor;  // dead column: kill the row too
            else {
                nd = std::clamp(di * std::sqrt(c / r), kScaleFloor, cap);
                imbalance = std::max(imbalance, std::abs(std::log(r / c)));
            }
            if (nd == di) continue;
            // Rescale row and column block i; the diagonal block picks
            // up both factors and stays put.
            ms.block(o, 0, w, p) *= nd / di;
            ms.block(0, o, p, w) *= di / nd;
            di = nd;
            moved = true;
        }
        best = std::min(best, sigma_max_of(ms));
        if (!moved || imbalance < 1e-9) break;
    }
    return best;
}

Margins margins(double mu_max) {
    if (!std::isfinite(mu_max) || mu_max <= 0.0)
        throw std::invalid_argument(
            "margins: the peak mu level must be finite and positive");
    Margins out;
    out.sm = 1.0 / mu_max;
    out.gm_low_db = to_db(1.0 / (1.0 + out.sm));
    if (out.sm < 1.0) {
        out.gm_high_db = to_db(1.0 / (1.0 - out.sm));
    } else {
        out.gm_high_db = std::numeric_limits<double>::infinity();
        out.gm_high_infinite = true;
    }
    if (out.sm <= 2.0) {
        out.pm_deg = 2.0 * std::asin(out.sm / 2.0) * 180.0 / kPi;
    } else {
        out.pm_deg = 180.0;
        out.pm_unbounded = true;
    }
    return out;
}

MarginReport robustness_sweep(const StateSpace& loop,
                              const FrequencyGrid& grid,
                              const std::vector<Index>& blocks) {
    loop.validate();
    if (loop.m() != loop.p())
        throw std::invalid_argument("robustness_sweep: loop must be square");

    MarginReport report;
    report.mu_curve.grid = grid;
    report.mu_curve.values.reserve(static_cast<std::size_t>(grid.size()));
    report.mu_peak_omega = grid.points.empty() ? 0.0 : grid.points.front();

    const std::vector<MatrixC> resp = freq_response(loop, grid);
    for (std::size_t i = 0; i < resp.size(); ++i) {
        const double mu = mu_upper(resp[i], blocks);
        report.mu_curve.values.push_back({mu});
        if (mu > report.mu_max) {
            report.mu_max = mu;
            report.mu_peak_omega = grid.points[i];
        }
    }

    if (report.mu_max > 0.0) {
        const Margins m = margins(report.mu_max);
        report.sm = m.sm;
        report.gm_low_db = m.gm_low_db;
        report.gm_high_db = m.gm_high_db;
        report.pm_deg = m.pm_deg;
        report.gm_high_infinite = m.gm_high_infinite;
        report.pm_unbounded = m.pm_unbounded;
    } else {
        report.infinite_margins = true;
        report.sm = std::numeric_limits<double>::infinity();
        report.gm_low_db = -std::numeric_limits<double>::infinity();
        report.gm_high_db = std::numeric_limits<double>::infinity();
        report.gm_high_infinite = true;
        report.pm_deg = 180.0;
        report.pm_unbounded = true;
    }
    return report;
}

StepComparison compare_step(const std::vector<LabeledSystem>& systems,
                            Index command_channel, double horizon,
                            double dt) {
    if (systems.empty())
        throw std::invalid_argument(
            "compare_step: need at least one system to tabulate");
    const StateSpace& ref = systems.front().system;
    if (command_channel < 0 || command_channel >= ref.m())
        throw std::invalid_argument(
            "compare_step: command channel out of range");
    std::set<std::string> names;
    for (const auto& entry : systems) {
        if (entry.name.empty())
            throw std::invalid_argument(
                "compare_step: every system needs a non-empty name");
        if (!names.insert(entry.name).second)
            throw std::invalid_argument("compare_step: duplicate system name \"" +
                                        entry.name + "\"");
        if (entry.system.m() != ref.m() || entry.system.p() != ref.p())
            throw std::invalid_argument(
                "compare_step: systems must share channel counts");
        if (entry.system.input_labels != ref.input_labels ||
            entry.system.output_labels != ref.output_labels)
            throw std::invalid_argument(
                "compare_step: systems must share identical channel labels");
    }

    StepComparison out;
    for (const auto& entry : systems) {
        StepResponse r =
            simulate_step_exact(entry.system, command_channel, horizon, dt);
        if (out.t.empty()) out.t = r.t;
        out.system_names.push_back(entry.name);
        out.responses.push_back(std::move(r.y));
        out.any_diverged = out.any_diverged || r.diverged;
    }
    if (!ref.output_labels.empty()) {
        out.output_names = ref.output_labels;
    } else {
        for (Index j = 0; j < ref.p(); ++j)
            out.output_names.push_back("y" + std::to_string(j + 1));
    }

    out.max_deviation.assign(static_cast<std::size_t>(ref.p()), 0.0);
    for (std::size_t a = 0; a < out.responses.size(); ++a)
        for (std::size_t b = a + 1; b < out.responses.size(); ++b)
            for (Index j = 0; j < ref.p(); ++j) {
                const double dev = (out.responses[a].col(j) -
                                    out.responses[b].col(j))
                                       .cwiseAbs()
                                       .maxCoeff();
                double& worst = out.max_deviation[static_cast<std::size_t>(j)];
                worst = std::max(worst, dev);
            }
    return out;
}

namespace {

/// 17-significant-digit decimal form: round-trips any double exactly.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string sha256_hex(const std::string& content) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(),
                   nullptr) != 1)
        throw std::runtime_error("sha256_hex: digest computation failed");
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

namespace {

/// Column-header token: keep letters, digits, underscores; the rest
/// becomes '_' so the CSV header stays unambiguous.
std::string header_token(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            c = '_';
    return out;
}

void check_artifact_name(const std::string& name,
                         std::set<std::string>& taken) {
    if (name.empty())
        throw std::invalid_argument("emit_report: artifact names must be "
                                    "non-empty");
    if (name.front() == '.')
        throw std::invalid_argument("emit_report: artifact name \"" + name +
                                    "\" must not start with a dot");
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
              c == '-' || c == '.'))
            throw std::invalid_argument(
                "emit_report: artifact name \"" + name +
                "\" may only use letters, digits, '_', '-', '.'");
    if (name == "metrics" || name == "manifest")
        throw std::invalid_argument("emit_report: artifact name \"" + name +
                                    "\" is reserved");
    if (!taken.insert(name).second)
        throw std::invalid_argument("emit_report: duplicate artifact name \"" +
                                    name + "\"");
}

std::string render_curve_csv(const CurveArtifact& artifact) {
    const SigmaCurve& curve = artifact.curve;
    if (curve.values.size() != curve.grid.points.size())
        throw std::invalid_argument("emit_report: curve \"" + artifact.name +
                                    "\" has a value count that differs from "
                                    "its grid");
    std::size_t cols = curve.values.empty() ? 1 : curve.values.front().size();
    if (cols == 0)
        throw std::invalid_argument("emit_report: curve \"" + artifact.name +
                                    "\" has empty value rows");
    std::string csv = "omega_rad_s,value";
    for (std::size_t c = 1; c < cols; ++c)
        csv += ",value" + std::to_string(c + 1);
    csv += '\n';
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        if (curve.values[i].size() != cols)
            throw std::invalid_argument("emit_report: curve \"" +
                                        artifact.name +
                                        "\" has ragged value rows");
        csv += fmt(curve.grid.points[i]);
        for (double v : curve.values[i]) {
            if (!std::isfinite(v))
                throw std::invalid_argument("emit_report: curve \"" +
                                            artifact.name +
                                            "\" contains a non-finite value");
            csv += ',';
            csv += fmt(v);
        }
        csv += '\n';
    }
    return csv;
}

std::string render_table_csv(const TableArtifact& artifact) {
    const StepComparison& table = artifact.table;
    std::string csv = "t_s";
    for (const auto& sys : table.system_names)
        for (const auto& out : table.output_names)
            csv += "," + header_token(sys) + "_" + header_token(out);
    csv += '\n';
    for (std::size_t i = 0; i < table.t.size(); ++i) {
        csv += fmt(table.t[i]);
        for (const Matrix& y : table.responses) {
            if (static_cast<std::size_t>(y.rows()) != table.t.size())
                throw std::invalid_argument(
                    "emit_report: table \"" + artifact.name +
                    "\" has responses misaligned with its time stamps");
            for (Index j = 0; j < y.cols(); ++j) {
                const double v = y(static_cast<Index>(i), j);
                if (!std::isfinite(v))
                    throw std::invalid_argument(
                        "emit_report: table \"" + artifact.name +
                        "\" contains a non-finite sample");
                csv += ',';
                csv += fmt(v);
            }
        }
        csv += '\n';
    }
    return csv;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw std::runtime_error("emit_report: failed to write " +
                                 path.string());
}

}  // namespace

ReportManifest emit_report(const ReportArtifacts& artifacts,
                           const std::string& out_dir) {
    std::set<std::string> taken;
    for (const auto& curve : artifacts.curves)
        check_artifact_name(curve.name, taken);
    for (const auto& table : artifacts.tables)
        check_artifact_name(table.name, taken);
    for (const auto& [key, value] : artifacts.metrics) {
        if (key.empty())
            throw std::invalid_argument(
                "emit_report: metric keys must be non-empty");
        if (!std::isfinite(value))
            throw std::invalid_argument("emit_report: metric \"" + key +
                                        "\" is not finite");
    }

    // Render everything before touching the filesystem so a bad artifact
    // cannot leave a half-written report behind.
    std::vector<std::pair<std::string, std::string>> files;  // name, bytes
    for (const auto& curve : artifacts.curves)
        files.emplace_back(curve.name + ".csv", render_curve_csv(curve));
    for (const auto& table : artifacts.tables)
        files.emplace_back(table.name + ".csv", render_table_csv(table));
    if (!artifacts.metrics.empty()) {
        nlohmann::json doc(artifacts.metrics);
        files.emplace_back("metrics.json", doc.dump(2) + "\n");
    }

    ReportManifest manifest;
    for (const auto& [name, bytes] : files)
        manifest.files.push_back({name, sha256_hex(bytes)});
    std::sort(manifest.files.begin(), manifest.files.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return a.path < b.path;
              });

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("emit_report: cannot create " + out_dir +
                                 ": " + ec.message());
    const std::filesystem::path root(out_dir);
    for (const auto& [name, bytes] : files) write_file(root / name, bytes);

    nlohmann::json doc;
    doc["files"] = nlohmann::json::array();
    for (const auto& entry : manifest.files)
        doc["files"].push_back(
            {{"path", entry.path}, {"sha256", entry.sha256}});
    write_file(root / "manifest.json", doc.dump(2) + "\n");
    return manifest;
}

} // namespace ifpc
