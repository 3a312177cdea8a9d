// lobhawkes: simulate, estimate, report, roundtrip and robustness runs.

#include "lobhawkes/acceptance.hpp"
#include "lobhawkes/error.hpp"
#include "lobhawkes/events.hpp"
#include "lobhawkes/hashing.hpp"
#include "lobhawkes/io.hpp"
#include "lobhawkes/model.hpp"
#include "lobhawkes/report.hpp"
#include "lobhawkes/simulate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lobhawkes;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_acceptance = 1;
constexpr int exit_usage = 2;

struct RunConfig {
    std::string subcommand;
    std::vector<std::string> inputs;
    std::string model;
    std::string scheme;  // preset name or JSON file; empty: from the data
    double horizon = 0.0;
    double burn_in = -1.0;  // negative: default burn-in
    LinLogParams grid;
    QuadratureParams quadrature;
    double window_start = 0.0;
    double window_end = -1.0;  // negative: session end
    double round_us = 10.0;
    double jitter_us = 50.0;
    std::uint64_t seed = 20120101;
    unsigned threads = 1;
    std::string out;
    bool strict = false;
    bool aggregate = true;
    bool equal_session_weights = false;
    double tighten = 1.0;
    std::vector<int> criteria;
    std::string estimate_dir;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> columns;

    json to_json() const {
        return {{"subcommand", subcommand},
                {"inputs", inputs},
                {"model", model},
                {"scheme", scheme},
                {"horizon", horizon},
                {"burn_in", burn_in},
                {"grid", lobhawkes::to_json(grid)},
                {"quadrature", lobhawkes::to_json(quadrature)},
                {"window", {{"start", window_start}, {"end", window_end}}},
                {"randomization", {{"round_us", round_us}, {"jitter_us", jitter_us}}},
                {"seed", seed},
                {"threads", threads},
                {"out", out},
                {"strict", strict},
                {"aggregate", aggregate},
                {"equal_session_weights", equal_session_weights},
                {"tighten", tighten},
                {"criteria", criteria},
                {"estimate_dir", estimate_dir},
                {"rows", rows},
                {"columns", columns}};
    }

    /// Keys absent from `doc` keep their current values.
    void update(const json& source) {
        if (!source.is_object()) throw InvalidArgument("run configuration must be a JSON object");
        // simulation sidecars nest the configuration
        const json& doc = source.contains("run_config") ? source["run_config"] : source;
        const auto take = [&](const char* key, auto& field) {
            if (doc.contains(key)) doc.at(key).get_to(field);
        };
        for (const auto& [key, _] : doc.items()) {
            static const std::vector<std::string> known{
                "subcommand", "inputs", "model", "scheme", "horizon", "burn_in", "grid", "quadrature", "window",
                "randomization", "seed", "threads", "out", "strict", "aggregate", "equal_session_weights",
                "tighten", "criteria", "estimate_dir", "rows", "columns", "scheme_resolved"};
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw InvalidArgument("run configuration: unknown key '" + key + "'");
        }
        take("inputs", inputs);
        take("model", model);
        take("scheme", scheme);
        take("horizon", horizon);
        take("burn_in", burn_in);
        if (doc.contains("grid")) grid = linlog_params_from_json(doc["grid"]);
        if (doc.contains("quadrature")) quadrature = quadrature_params_from_json(doc["quadrature"]);
        if (doc.contains("window")) {
            window_start = doc["window"].value("start", window_start);
            window_end = doc["window"].value("end", window_end);
        }
        if (doc.contains("randomization")) {
            round_us = doc["randomization"].value("round_us", round_us);
            jitter_us = doc["randomization"].value("jitter_us", jitter_us);
        }
        take("seed", seed);
        take("threads", threads);
        take("out", out);
        take("strict", strict);
        take("aggregate", aggregate);
        take("equal_session_weights", equal_session_weights);
        take("tighten", tighten);
        take("criteria", criteria);
        take("estimate_dir", estimate_dir);
        take("rows", rows);
        take("columns", columns);
    }

    PipelineOptions pipeline() const {
        PipelineOptions p;
        p.grid = grid;
        p.quadrature = quadrature;
        p.estimation.equal_session_weights = equal_session_weights;
        p.estimation.threads = threads;
        return p;
    }
};

/// Options given on the command line override the config file, which
/// overrides the defaults.
class Flags {
public:
    template <class Field>
    CLI::Option* option(CLI::App* app, const std::string& name, Field field, const std::string& help) {
        auto* opt = app->add_option(name, field(given_), help)->capture_default_str();
        bind(app, opt, field);
        return opt;
    }

    template <class Field>
    CLI::Option* flag(CLI::App* app, const std::string& name, Field field, const std::string& help) {
        auto* opt = app->add_flag(name, field(given_), help);
        bind(app, opt, field);
        return opt;
    }

    RunConfig resolve(const CLI::App* sub, const std::string& config_path) const {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw InvalidArgument("cannot open config file '" + config_path + "'");
            json doc;
            try {
                in >> doc;
            } catch (const json::exception& e) {
                throw InvalidArgument("config file '" + config_path + "': " + e.what());
            }
            cfg.update(doc);
        }
        for (const auto& b : bindings_)
            if (b.app == sub && b.opt->count() > 0) b.apply(cfg);
        cfg.subcommand = sub->get_name();
        return cfg;
    }

private:
    struct Binding {
        const CLI::App* app;
        const CLI::Option* opt;
        std::function<void(RunConfig&)> apply;
    };

    template <class Field>
    void bind(const CLI::App* app, const CLI::Option* opt, Field field) {
        bindings_.push_back({app, opt, [this, field](RunConfig& cfg) { field(cfg) = field(given_); }});
    }

    RunConfig given_;
    std::vector<Binding> bindings_;
};

#define FIELD(member) [](RunConfig& c) -> auto& { return c.member; }

BinningScheme resolve_scheme(const std::string& spec, std::optional<std::size_t> dimension) {
    if (spec.empty() || spec == "identity") {
        if (!dimension) throw InvalidArgument("no binning scheme given and none recorded with the data");
        return BinningScheme::identity(static_cast<int>(*dimension));
    }
    if (spec.rfind("identity:", 0) == 0) return BinningScheme::identity(std::stoi(spec.substr(9)));
    if (spec == "bund") return BinningScheme::bund_unsigned();
    if (spec == "dax") return BinningScheme::dax_unsigned();
    if (spec == "four_bins:unsigned") return BinningScheme::four_bins(BinningMode::unsigned_trades);
    if (spec == "four_bins:signed") return BinningScheme::four_bins(BinningMode::signed_trades);
    if (spec == "four_bins:full_book") return BinningScheme::four_bins(BinningMode::full_book);
    if (!fs::exists(spec)) throw InvalidArgument("unknown binning scheme '" + spec + "'");
    return BinningScheme::load(spec);
}

/// Scheme for event files: the explicit one, else the one recorded in the
/// first sidecar.
BinningScheme scheme_for_inputs(const RunConfig& cfg) {
    if (!cfg.scheme.empty()) return resolve_scheme(cfg.scheme, std::nullopt);
    for (const auto& in : cfg.inputs) {
        const auto side = sidecar_path(in);
        if (!fs::exists(side)) continue;
        std::ifstream f(side);
        const json meta = json::parse(f);
        if (meta.contains("scheme")) return BinningScheme::from_json(meta["scheme"]);
        if (meta.contains("dimension")) return BinningScheme::identity(meta["dimension"].get<int>());
    }
    throw InvalidArgument("no binning scheme given (--scheme) and no sidecar records one");
}

MultivariateEventStream load_inputs(const RunConfig& cfg, const BinningScheme& scheme) {
    if (cfg.inputs.empty()) throw InvalidArgument("no input event files given");
    std::vector<fs::path> files(cfg.inputs.begin(), cfg.inputs.end());
    std::vector<std::string> diagnostics;
    SessionLoadOptions opts;
    opts.strict = cfg.strict;
    opts.aggregate = cfg.aggregate;
    auto stream = load_event_sessions(files, scheme, opts, &diagnostics);
    for (const auto& d : diagnostics) std::cerr << "skipped: " << d << '\n';
    return stream;
}

void write_json(const fs::path& path, const json& doc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

fs::path require_out(const RunConfig& cfg) {
    if (cfg.out.empty()) throw InvalidArgument("--out is required");
    return cfg.out;
}

void print_matrix(const std::string& title, const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
    std::cout << title << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::cout << "  " << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << ' ' << format_double(m(i, j));
        std::cout << '\n';
    }
}

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.model.empty()) throw InvalidArgument("--model is required");
    const auto model = HawkesModel::load(cfg.model);
    const auto out = require_out(cfg);
    const auto scheme = resolve_scheme(cfg.scheme, model.dimension());
    if (static_cast<std::size_t>(scheme.dimension()) != model.dimension())
        throw InvalidArgument("binning scheme has " + std::to_string(scheme.dimension()) + " components, the model " +
                              std::to_string(model.dimension()));

    SimulationOptions so;
    so.horizon = cfg.horizon;
    so.seed = cfg.seed;
    if (cfg.burn_in >= 0.0) so.burn_in = cfg.burn_in;
    so.session_id = out.stem().string();
    const auto result = simulate(model, so);

    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_session_csv(result.stream.sessions.front(), scheme, out);
    json meta = result.metadata();
    meta["simulated"] = true;
    meta["session_id"] = so.session_id;
    meta["flavor"] = to_string(model.flavor);
    meta["scheme"] = scheme.to_json();
    meta["run_config"] = cfg.to_json();
    write_json(sidecar_path(out), meta);

    std::cout << "wrote " << result.stream.total_count() << " events over " << format_double(result.horizon)
              << " s to " << out.string() << '\n';
    if (model.flavor == Flavor::positive_part)
        std::cout << "clipping frequency " << format_double(result.clipping_frequency) << '\n';
    return exit_ok;
}

int cmd_estimate(const RunConfig& cfg) {
    const auto out = require_out(cfg);
    const auto scheme = scheme_for_inputs(cfg);
    auto stream = load_inputs(cfg, scheme);
    const auto labels = scheme.labels();
    const auto p = run_pipeline(stream, cfg.pipeline());

    fs::create_directories(out);
    write_kernel_estimate(p.kernels, out, labels);
    write_conditional_law(p.claw, out / "conditional_law", labels);
    json doc = cfg.to_json();
    doc["scheme_resolved"] = scheme.to_json();
    write_json(out / "run_config.json", doc);

    std::cout << stream.sessions.size() << " session(s), " << stream.total_count() << " events, "
              << format_double(stream.total_time()) << " s\n";
    print_matrix("norms", p.kernels.norms, labels);
    print_matrix("rescaled norms", p.kernels.rescaled, labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        std::cout << labels[i] << ": mu " << format_double(p.kernels.mu[e]) << ", lambda "
                  << format_double(p.kernels.lambda[e]) << ", R " << format_double(p.kernels.ratios[e]) << "%\n";
    }
    for (auto i : p.kernels.negative_baselines())
        std::cerr << "warning: negative baseline for " << labels[i] << '\n';
    std::cout << "residual " << format_double(p.kernels.diagnostics.residual) << ", condition "
              << format_double(p.kernels.diagnostics.condition) << '\n';
    return exit_ok;
}

int cmd_report(const RunConfig& cfg) {
    const auto out = require_out(cfg);
    const fs::path src = cfg.estimate_dir.empty() ? fs::path(cfg.inputs.empty() ? "" : cfg.inputs.front())
                                                  : fs::path(cfg.estimate_dir);
    if (src.empty() || !fs::exists(src / "kernel_estimate.json"))
        throw InvalidArgument("--estimate must name a directory written by 'estimate'");
    const auto est = read_kernel_estimate(src);
    std::vector<std::string> labels;
    read_labeled_matrix(src / "norms.csv", &labels);

    std::optional<BinningScheme> scheme;
    if (!cfg.scheme.empty()) scheme = resolve_scheme(cfg.scheme, est.dimension);
    if (scheme) {
        if (static_cast<std::size_t>(scheme->dimension()) != est.dimension)
            throw InvalidArgument("binning scheme does not match the estimate dimension");
        labels = scheme->labels();
    }

    ReportBundle bundle(out);
    bundle.metadata()["run_config"] = cfg.to_json();
    bundle.metadata()["quadrature"] = to_json(est.quad.params);
    json sources = json::object();
    for (const auto& name : {"kernel_estimate.json", "norms.csv", "baseline.csv"})
        sources[name] = sha256_file(src / name);
    bundle.metadata()["sources"] = sources;

    emit_norm_tables(est, labels, bundle, scheme ? side_blocks_of(*scheme) : SideBlocks{});

    PairSelection selection;
    for (auto i : cfg.rows) {
        auto s = select_row(i, est.dimension);
        selection.insert(selection.end(), s.begin(), s.end());
    }
    for (auto j : cfg.columns) {
        auto s = select_column(j, est.dimension);
        selection.insert(selection.end(), s.begin(), s.end());
    }
    if (cfg.rows.empty() && cfg.columns.empty())
        for (std::size_t i = 0; i < est.dimension; ++i)
            for (std::size_t j = 0; j < est.dimension; ++j) selection.emplace_back(i, j);
    std::sort(selection.begin(), selection.end());
    selection.erase(std::unique(selection.begin(), selection.end()), selection.end());
    emit_kernel_curves(est, selection, labels, bundle);

    if (fs::exists(src / "conditional_law" / "conditional_law.json")) {
        const auto claw = read_conditional_law(src / "conditional_law");
        bundle.metadata()["grid"] = to_json(claw.grid.params);
        emit_conditional_law_curves(claw, selection, labels, bundle);
    }

    if (!cfg.inputs.empty() && cfg.estimate_dir.size()) {
        if (!scheme) scheme = scheme_for_inputs(cfg);
        const auto stream = load_inputs(cfg, *scheme);
        FlowStatisticsOptions fo;
        fo.trade_components.resize(static_cast<std::size_t>(scheme->dimension()));
        for (int c = 0; c < scheme->dimension(); ++c)
            fo.trade_components[static_cast<std::size_t>(c)] = scheme->component(c).etype == EventType::trade;
        emit_flow_report(flow_statistics(stream, fo), scheme->labels(), bundle);
        json inputs = json::object();
        for (const auto& f : cfg.inputs) inputs[f] = sha256_file(f);
        bundle.metadata()["inputs"] = inputs;
    }
    bundle.write_manifest();
    std::cout << "wrote " << bundle.files().size() << " files to " << out.string() << '\n';
    return exit_ok;
}

int cmd_roundtrip(const RunConfig& cfg) {
    AcceptanceOptions opts;
    opts.seed = cfg.seed;
    opts.tolerance_scale = cfg.tighten;
    opts.threads = cfg.threads;
    opts.only = cfg.criteria;
    opts.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
    const auto report = run_acceptance(opts);
    if (!cfg.out.empty()) {
        json doc = report.to_json();
        doc["run_config"] = cfg.to_json();
        write_json(fs::path(cfg.out) / "acceptance.json", doc);
    }
    std::cout << (report.passed() ? "all criteria passed" : "some criteria failed") << '\n';
    return report.passed() ? exit_ok : exit_acceptance;
}

MultivariateEventStream window_of(const MultivariateEventStream& stream, double start, double end) {
    MultivariateEventStream out(stream.dimension);
    for (const auto& s : stream.sessions) {
        MultivariateEventStream one(stream.dimension);
        one.sessions.push_back(s);
        const double stop = end < 0.0 ? s.duration : std::min(end, s.duration);
        auto f = filter_session(one, start, stop);
        out.sessions.push_back(std::move(f.sessions.front()));
    }
    return out;
}

int cmd_robustness(const RunConfig& cfg) {
    const auto out = require_out(cfg);
    const auto scheme = scheme_for_inputs(cfg);
    const auto stream = load_inputs(cfg, scheme);
    const auto labels = scheme.labels();
    const auto options = cfg.pipeline();

    const auto base = run_pipeline(stream, options).kernels;
    RandomizationReport rr;
    const auto randomized = run_pipeline(randomize_timestamps(stream, cfg.round_us, cfg.jitter_us, cfg.seed, &rr),
                                         options).kernels;
    const auto windowed = run_pipeline(window_of(stream, cfg.window_start, cfg.window_end), options).kernels;

    fs::create_directories(out);
    std::ofstream csv(out / "robustness.csv", std::ios::binary);
    if (!csv) throw InvalidArgument("cannot write robustness.csv");
    csv << "comparison,target,source,rescaled,rescaled_prime,relative_difference\n";
    json summary = json::object();
    for (const auto& [name, other] : {std::pair<std::string, const KernelEstimate*>{"randomized", &randomized},
                                      {"windowed", &windowed}}) {
        double worst = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            for (std::size_t j = 0; j < labels.size(); ++j) {
                const auto ei = static_cast<Eigen::Index>(i);
                const auto ej = static_cast<Eigen::Index>(j);
                const double n = base.rescaled(ei, ej);
                const double np = other->rescaled(ei, ej);
                const double rel = (n - np) / n;
                if (std::isfinite(rel)) worst = std::max(worst, std::abs(rel));
                csv << name << ',' << labels[i] << ',' << labels[j] << ',' << format_double(n) << ','
                    << format_double(np) << ',' << format_double(rel) << '\n';
            }
        summary[name] = {{"max_abs_relative_difference", worst}};
        std::cout << name << ": max |(n - n')/n| = " << format_double(worst) << '\n';
    }
    summary["randomized"]["clamped"] = rr.clamped_low + rr.clamped_high;
    json doc = cfg.to_json();
    doc["scheme_resolved"] = scheme.to_json();
    write_json(out / "run_config.json", doc);
    write_json(out / "robustness.json", summary);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric multivariate Hawkes estimation for order-book event flows"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lobhawkes 0.3.0");
    Flags flags;
    std::string config_path;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration (JSON); flags override it");
        flags.option(sub, "--seed", FIELD(seed), "Random seed");
        flags.option(sub, "--threads", FIELD(threads), "Worker threads");
        flags.option(sub, "--out", FIELD(out), "Output file or directory");
    };
    const auto data = [&](CLI::App* sub) {
        flags.option(sub, "inputs", FIELD(inputs), "Event CSV files, one session each");
        flags.option(sub, "--scheme", FIELD(scheme),
                     "Binning scheme: identity[:D], bund, dax, four_bins:{unsigned,signed,full_book} or a JSON file");
        flags.flag(sub, "--strict", FIELD(strict), "Fail on the first malformed line");
        flags.option(sub, "--aggregate", FIELD(aggregate), "Merge simultaneous same-side same-type events");
    };
    const auto grids = [&](CLI::App* sub) {
        flags.option(sub, "--h-min", FIELD(grid.h_min), "End of the linear part of the lag grid (s)");
        flags.option(sub, "--h-max", FIELD(grid.h_max), "Largest lag (s)");
        flags.option(sub, "--n-lin", FIELD(grid.n_lin), "Linear lag bins");
        flags.option(sub, "--n-log", FIELD(grid.n_log), "Logarithmic lag bins");
        flags.option(sub, "--x-min", FIELD(quadrature.x_min), "End of the linear quadrature part (s)");
        flags.option(sub, "--x-max", FIELD(quadrature.x_max), "Kernel support (s)");
        flags.option(sub, "--q-lin", FIELD(quadrature.n_lin), "Linear quadrature intervals");
        flags.option(sub, "--q-log", FIELD(quadrature.n_log), "Logarithmic quadrature intervals");
        flags.flag(sub, "--equal-session-weights", FIELD(equal_session_weights),
                   "Average per-session conditional laws with equal weights");
    };

    auto* sim = app.add_subcommand("simulate", "Simulate a Hawkes model into an event CSV");
    common(sim);
    flags.option(sim, "--model", FIELD(model), "Model file (JSON)");
    flags.option(sim, "--horizon", FIELD(horizon), "Seconds kept after burn-in");
    flags.option(sim, "--burn-in", FIELD(burn_in), "Burn-in seconds (negative: max(100/min mu, 10))");
    flags.option(sim, "--scheme", FIELD(scheme), "Binning scheme used to write marks (default identity)");

    auto* est = app.add_subcommand("estimate", "Estimate conditional laws and kernels");
    common(est);
    data(est);
    grids(est);

    auto* rep = app.add_subcommand("report", "Write norm tables and curves from an estimate directory");
    common(rep);
    flags.option(rep, "--estimate", FIELD(estimate_dir), "Directory written by 'estimate'");
    data(rep);
    flags.option(rep, "--rows", FIELD(rows), "Target components whose kernel rows are exported (0-based)");
    flags.option(rep, "--columns", FIELD(columns), "Source components whose kernel columns are exported (0-based)");

    auto* rt = app.add_subcommand("roundtrip", "Run the acceptance criteria");
    common(rt);
    flags.option(rt, "--tighten", FIELD(tighten), "Scale factor on every tolerance (< 1 tightens)");
    flags.option(rt, "--criteria", FIELD(criteria), "Criteria to run (1-8)");

    auto* rob = app.add_subcommand("robustness", "Compare estimates on randomized and windowed data");
    common(rob);
    data(rob);
    grids(rob);
    flags.option(rob, "--round-us", FIELD(round_us), "Timestamp rounding (us)");
    flags.option(rob, "--jitter-us", FIELD(jitter_us), "Uniform jitter subtracted after rounding (us)");
    flags.option(rob, "--window-start", FIELD(window_start), "Window start within each session (s)");
    flags.option(rob, "--window-end", FIELD(window_end), "Window end (s); negative: session end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        const RunConfig cfg = flags.resolve(sub, config_path);
        std::cout << "# lobhawkes " << cfg.subcommand << " configuration\n" << cfg.to_json().dump() << '\n';
        if (cfg.subcommand == "simulate") return cmd_simulate(cfg);
        if (cfg.subcommand == "estimate") return cmd_estimate(cfg);
        if (cfg.subcommand == "report") return cmd_report(cfg);
        if (cfg.subcommand == "roundtrip") return cmd_roundtrip(cfg);
        return cmd_robustness(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}
