#include "lobhawkes/io.hpp"

#include "lobhawkes/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lobhawkes {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string> default_labels(std::size_t dimension) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < dimension; ++c) out.push_back("c" + std::to_string(c + 1));
    return out;
}

json to_json(const LinLogParams& p) {
    return {{"lin_step", p.lin_step}, {"h_min", p.h_min}, {"log_step", p.log_step},
            {"h_max", p.h_max},       {"n_lin", p.n_lin}, {"n_log", p.n_log}};
}

LinLogParams linlog_params_from_json(const json& doc) {
    LinLogParams p;
    p.lin_step = doc.value("lin_step", p.lin_step);
    p.h_min = doc.value("h_min", p.h_min);
    p.log_step = doc.value("log_step", p.log_step);
    p.h_max = doc.value("h_max", p.h_max);
    p.n_lin = doc.value("n_lin", p.n_lin);
    p.n_log = doc.value("n_log", p.n_log);
    return p;
}

json to_json(const QuadratureParams& p) {
    return {{"lin_step", p.lin_step}, {"x_min", p.x_min}, {"log_step", p.log_step},
            {"x_max", p.x_max},       {"n_lin", p.n_lin}, {"n_log", p.n_log}};
}

QuadratureParams quadrature_params_from_json(const json& doc) {
    QuadratureParams p;
    p.lin_step = doc.value("lin_step", p.lin_step);
    p.x_min = doc.value("x_min", p.x_min);
    p.log_step = doc.value("log_step", p.log_step);
    p.x_max = doc.value("x_max", p.x_max);
    p.n_lin = doc.value("n_lin", p.n_lin);
    p.n_log = doc.value("n_log", p.n_log);
    return p;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    return out;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("'" + path.string() + "': " + e.what());
    }
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

std::string pair_file(const char* stem, std::size_t i, std::size_t j) {
    return std::string(stem) + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + ".csv";
}

std::vector<std::string> checked_labels(const std::vector<std::string>& labels, std::size_t d) {
    if (labels.empty()) return default_labels(d);
    if (labels.size() != d) throw InvalidArgument("expected " + std::to_string(d) + " labels");
    return labels;
}

} // namespace

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

void write_labeled_matrix(const fs::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels) {
    if (static_cast<Eigen::Index>(row_labels.size()) != m.rows() ||
        static_cast<Eigen::Index>(col_labels.size()) != m.cols())
        throw InvalidArgument("label count does not match the matrix shape");
    auto out = open_out(path);
    for (const auto& c : col_labels) out << ',' << c;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << row_labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

Eigen::MatrixXd read_labeled_matrix(const fs::path& path, std::vector<std::string>* row_labels,
                                    std::vector<std::string>* col_labels) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw InvalidArgument("'" + path.string() + "' is empty");
    const auto cols = static_cast<Eigen::Index>(rows[0].size()) - 1;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()) - 1, cols);
    if (col_labels) col_labels->assign(rows[0].begin() + 1, rows[0].end());
    if (row_labels) row_labels->clear();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols + 1)
            throw InvalidArgument("'" + path.string() + "': ragged row " + std::to_string(r + 1));
        if (row_labels) row_labels->push_back(rows[r][0]);
        for (Eigen::Index c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r) - 1, c) = parse_double(rows[r][static_cast<std::size_t>(c) + 1]);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Conditional law family
// ---------------------------------------------------------------------------

void write_conditional_law(const ConditionalLawMatrix& claw, const fs::path& dir,
                           const std::vector<std::string>& labels) {
    const std::size_t d = claw.dimension;
    const auto names = checked_labels(labels, d);
    fs::create_directories(dir);
    json files = json::array();
    json last_measured = json::array();
    for (std::size_t i = 0; i < d; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < d; ++j) {
            const auto idx = claw.index(i, j);
            const std::string name = pair_file("g", i, j);
            auto out = open_out(dir / name);
            out << "bin_left,bin_right,value,stderr,pairs\n";
            long last = -1;
            for (std::size_t k = 0; k < claw.grid.bins(); ++k) {
                out << format_double(claw.grid.left(k)) << ',' << format_double(claw.grid.right(k)) << ','
                    << format_double(claw.values[idx][k]) << ',' << format_double(claw.stderrs[idx][k]) << ','
                    << claw.pairs[idx][k] << '\n';
                if (claw.status[idx][k] == BinStatus::measured) last = static_cast<long>(k);
            }
            files.push_back({{"i", i}, {"j", j}, {"file", name}});
            row.push_back(last);
        }
        last_measured.push_back(row);
    }
    json doc{{"dimension", d},
             {"labels", names},
             {"lambda", std::vector<double>(claw.lambda.data(), claw.lambda.data() + claw.lambda.size())},
             {"counts", claw.counts},
             {"total_time", claw.total_time},
             {"sessions", claw.sessions},
             {"equal_session_weights", claw.equal_session_weights},
             {"grid", to_json(claw.grid.params)},
             {"admissible", claw.admissible},
             {"last_measured_bin", last_measured},
             {"files", files}};
    write_json(dir / "conditional_law.json", doc);
}

ConditionalLawMatrix read_conditional_law(const fs::path& dir) {
    const json doc = read_json(dir / "conditional_law.json");
    ConditionalLawMatrix claw;
    try {
        claw.dimension = doc.at("dimension").get<std::size_t>();
        claw.grid = build_linlog_grid(linlog_params_from_json(doc.at("grid")));
        const auto lambda = doc.at("lambda").get<std::vector<double>>();
        claw.lambda = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
        claw.counts = doc.at("counts").get<std::vector<std::size_t>>();
        claw.total_time = doc.at("total_time").get<double>();
        claw.sessions = doc.at("sessions").get<std::size_t>();
        claw.equal_session_weights = doc.at("equal_session_weights").get<bool>();
        claw.admissible = doc.at("admissible").get<std::vector<std::vector<std::uint64_t>>>();
        const auto last = doc.at("last_measured_bin").get<std::vector<std::vector<long>>>();
        const std::size_t d = claw.dimension;
        const std::size_t bins = claw.grid.bins();
        claw.values.assign(d * d, {});
        claw.stderrs.assign(d * d, {});
        claw.pairs.assign(d * d, {});
        claw.status.assign(d * d, {});
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const auto idx = claw.index(i, j);
                const auto rows = read_csv_rows(dir / pair_file("g", i, j));
                if (rows.size() != bins + 1) throw InvalidArgument("conditional law file has the wrong bin count");
                for (std::size_t k = 0; k < bins; ++k) {
                    const auto& r = rows[k + 1];
                    if (r.size() != 5) throw InvalidArgument("conditional law row needs 5 fields");
                    claw.values[idx].push_back(parse_double(r[2]));
                    claw.stderrs[idx].push_back(parse_double(r[3]));
                    claw.pairs[idx].push_back(std::stoull(r[4]));
                    BinStatus st = BinStatus::measured;
                    if (claw.admissible[j][k] == 0) {
                        st = BinStatus::no_window;
                    } else if (static_cast<long>(k) > last[i][j]) {
                        st = BinStatus::no_data;
                    }
                    claw.status[idx].push_back(st);
                }
            }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("conditional law manifest: ") + e.what());
    }
    return claw;
}

// ---------------------------------------------------------------------------
// Kernel estimate family
// ---------------------------------------------------------------------------

void write_kernel_estimate(const KernelEstimate& est, const fs::path& dir, const std::vector<std::string>& labels) {
    const std::size_t d = est.dimension;
    const auto names = checked_labels(labels, d);
    fs::create_directories(dir);
    json files = json::array();
    json stderrs = json::array();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::string name = pair_file("phi", i, j);
            auto out = open_out(dir / name);
            out << "node,weight,phi_value\n";
            const auto& phi = est.kernel(i, j);
            for (std::size_t m = 0; m < est.quad.size(); ++m)
                out << format_double(est.quad.nodes[m]) << ',' << format_double(est.quad.weights[m]) << ','
                    << format_double(phi[static_cast<Eigen::Index>(m)]) << '\n';
            files.push_back({{"i", i}, {"j", j}, {"file", name}});
            const auto& se = est.stderrs.at(est.index(i, j));
            stderrs.push_back(std::vector<double>(se.data(), se.data() + se.size()));
        }
    write_labeled_matrix(dir / "norms.csv", est.norms, names, names);
    write_labeled_matrix(dir / "rescaled_norms.csv", est.rescaled, names, names);
    {
        auto out = open_out(dir / "baseline.csv");
        out << "component,mu,lambda,ratio_percent\n";
        for (std::size_t i = 0; i < d; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            out << names[i] << ',' << format_double(est.mu[e]) << ',' << format_double(est.lambda[e]) << ','
                << format_double(est.ratios[e]) << '\n';
        }
    }
    std::vector<std::string> negative;
    for (auto i : est.negative_baselines()) negative.push_back(names[i]);
    json doc{{"dimension", d},
             {"labels", names},
             {"quadrature", to_json(est.quad.params)},
             {"diagnostics",
              {{"residual", est.diagnostics.residual},
               {"condition", est.diagnostics.condition},
               {"unknowns", est.diagnostics.unknowns}}},
             {"negative_baselines", negative},
             {"files", files},
             {"stderr", stderrs}};
    write_json(dir / "kernel_estimate.json", doc);
}

KernelEstimate read_kernel_estimate(const fs::path& dir) {
    const json doc = read_json(dir / "kernel_estimate.json");
    KernelEstimate est;
    try {
        est.dimension = doc.at("dimension").get<std::size_t>();
        const std::size_t d = est.dimension;
        std::vector<double> nodes;
        est.phi.resize(d * d);
        est.stderrs.resize(d * d);
        const auto& se = doc.at("stderr");
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const auto rows = read_csv_rows(dir / pair_file("phi", i, j));
                if (rows.size() < 3) throw InvalidArgument("kernel file too short");
                std::vector<double> n;
                Eigen::VectorXd phi(static_cast<Eigen::Index>(rows.size() - 1));
                for (std::size_t m = 1; m < rows.size(); ++m) {
                    if (rows[m].size() != 3) throw InvalidArgument("kernel row needs 3 fields");
                    n.push_back(parse_double(rows[m][0]));
                    phi[static_cast<Eigen::Index>(m - 1)] = parse_double(rows[m][2]);
                }
                if (nodes.empty()) nodes = n;
                if (n != nodes) throw InvalidArgument("kernel files disagree on the nodes");
                est.phi[est.index(i, j)] = phi;
                const auto s = se.at(est.index(i, j)).get<std::vector<double>>();
                est.stderrs[est.index(i, j)] = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
            }
        est.quad = quadrature_from_nodes(nodes);
        est.quad.params = quadrature_params_from_json(doc.at("quadrature"));
        const auto& diag = doc.at("diagnostics");
        est.diagnostics.residual = diag.at("residual").get<double>();
        est.diagnostics.condition = diag.at("condition").get<double>();
        est.diagnostics.unknowns = diag.at("unknowns").get<std::size_t>();
        est.norms = read_labeled_matrix(dir / "norms.csv");
        est.rescaled = read_labeled_matrix(dir / "rescaled_norms.csv");
        const auto rows = read_csv_rows(dir / "baseline.csv");
        if (rows.size() != d + 1) throw InvalidArgument("baseline.csv has the wrong row count");
        est.mu.resize(static_cast<Eigen::Index>(d));
        est.lambda.resize(static_cast<Eigen::Index>(d));
        est.ratios.resize(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            est.mu[e] = parse_double(rows[i + 1].at(1));
            est.lambda[e] = parse_double(rows[i + 1].at(2));
            est.ratios[e] = parse_double(rows[i + 1].at(3));
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("kernel estimate manifest: ") + e.what());
    }
    return est;
}

// ---------------------------------------------------------------------------
// Event files
// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".meta.json"); }

MultivariateEventStream load_event_sessions(const std::vector<fs::path>& files, const BinningScheme& scheme,
                                            const SessionLoadOptions& options, std::vector<std::string>* diagnostics) {
    if (files.empty()) throw InvalidArgument("no event files given");
    MultivariateEventStream stream(static_cast<std::size_t>(scheme.dimension()));
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw InvalidArgument("cannot open event file '" + path.string() + "'");
        ParseDiagnostics diag;
        auto events = parse_events(in, ParseOptions{options.strict}, &diag);
        if (diagnostics)
            for (const auto& m : diag.messages) diagnostics->push_back(path.filename().string() + ": " + m);

        SessionInfo info;
        info.id = path.stem().string();
        bool simulated = false;
        if (fs::exists(sidecar_path(path))) {
            const json meta = read_json(sidecar_path(path));
            if (meta.contains("horizon")) info.duration = meta["horizon"].get<double>();
            simulated = meta.value("simulated", false);
            if (meta.contains("session_id")) info.id = meta["session_id"].get<std::string>();
            if (meta.contains("dimension") && meta["dimension"].get<int>() != scheme.dimension())
                throw InvalidArgument("'" + path.string() + "' holds " + std::to_string(meta["dimension"].get<int>()) +
                                      " components but the binning scheme has " +
                                      std::to_string(scheme.dimension()));
        }
        if (options.duration) info.duration = options.duration;
        if (options.aggregate && !simulated) events = aggregate_simultaneous(events);
        auto one = assign_components(events, scheme, info);
        stream.sessions.push_back(std::move(one.sessions.front()));
    }
    return stream;
}

void write_session_csv(const Session& session, const BinningScheme& scheme, const fs::path& path) {
    if (session.dimension() != static_cast<std::size_t>(scheme.dimension()))
        throw InvalidArgument("scheme dimension " + std::to_string(scheme.dimension()) +
                              " does not match the session dimension " + std::to_string(session.dimension()));
    const auto events = stream_to_events(session, scheme);
    auto out = open_out(path);
    write_events(out, events);
}

} // namespace lobhawkes
