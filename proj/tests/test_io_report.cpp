#include "doctest.h"

#include "oracles.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/hashing.hpp"
#include "lobhawkes/io.hpp"
#include "lobhawkes/model.hpp"
#include "lobhawkes/report.hpp"
#include "lobhawkes/simulate.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace lobhawkes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lobhawkes_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Fixture {
    MultivariateEventStream stream;
    ConditionalLawMatrix claw;
    KernelEstimate est;

    Fixture() {
        Eigen::VectorXd mu(2);
        mu << 1.0, 2.0;
        std::vector<std::vector<KernelSpec>> k(2, std::vector<KernelSpec>(2));
        k[0][1] = KernelSpec::exponential(0.3, 10.0);
        SimulationOptions o;
        o.horizon = 3000.0;
        o.seed = 4;
        stream = simulate(HawkesModel::linear(mu, k), o).stream;
        claw = estimate_conditional_law(stream, build_linlog_grid({0.0, 1e-3, 0.0, 100.0, 20, 100}));
        est = solve_wiener_hopf(claw, build_quadrature({0.0, 5e-4, 0.0, 0.5, 20, 20}));
    }
};

} // namespace

TEST_CASE("shortest round-trip number formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 5e-324}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isnan(parse_double("nan")));
    CHECK_THROWS_AS(parse_double("1.0x"), InvalidArgument);
}

TEST_CASE("SHA-256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("estimates serialize losslessly") {
    const Fixture f;
    const auto dir = scratch("serialize");
    write_kernel_estimate(f.est, dir / "k", {"S", "B"});
    write_conditional_law(f.claw, dir / "g", {"S", "B"});
    const auto est = read_kernel_estimate(dir / "k");
    const auto claw = read_conditional_law(dir / "g");

    CHECK(est.norms == f.est.norms);
    CHECK(est.rescaled == f.est.rescaled);
    CHECK(est.mu == f.est.mu);
    CHECK(est.lambda == f.est.lambda);
    CHECK(est.quad.nodes == f.est.quad.nodes);
    CHECK(est.quad.weights == f.est.quad.weights);
    for (std::size_t idx = 0; idx < 4; ++idx) {
        CHECK(est.phi[idx] == f.est.phi[idx]);
        CHECK(est.stderrs[idx] == f.est.stderrs[idx]);
    }
    CHECK(est.diagnostics.residual == f.est.diagnostics.residual);
    CHECK(claw.values == f.claw.values);
    CHECK(claw.stderrs == f.claw.stderrs);
    CHECK(claw.pairs == f.claw.pairs);
    CHECK(claw.status == f.claw.status);
    CHECK(claw.admissible == f.claw.admissible);
    CHECK(claw.grid.edges == f.claw.grid.edges);
    CHECK(claw.lambda == f.claw.lambda);

    std::vector<std::string> rows;
    std::vector<std::string> cols;
    CHECK(read_labeled_matrix(dir / "k" / "norms.csv", &rows, &cols) == f.est.norms);
    CHECK(rows == std::vector<std::string>{"S", "B"});
    CHECK(fs::exists(dir / "k" / "baseline.csv"));
    CHECK(fs::exists(dir / "k" / "phi_2_1.csv"));
    CHECK(fs::exists(dir / "g" / "g_1_2.csv"));
}

TEST_CASE("session files with sidecars") {
    const Fixture f;
    const auto dir = scratch("sessions");
    const auto scheme = BinningScheme::identity(2);
    write_session_csv(f.stream.sessions[0], scheme, dir / "a.csv");
    {
        std::ofstream side(sidecar_path(dir / "a.csv"));
        side << nlohmann::json{{"horizon", 3000.0}, {"simulated", true}, {"dimension", 2}}.dump();
    }
    const auto back = load_event_sessions({dir / "a.csv"}, scheme);
    CHECK(back.sessions[0].duration == 3000.0);
    for (std::size_t c = 0; c < 2; ++c) {
        REQUIRE(back.count(c) == f.stream.count(c));
        for (std::size_t k = 0; k < back.count(c); ++k)
            CHECK(std::abs(back.sessions[0].times[c][k] - f.stream.sessions[0].times[c][k]) < 1e-6);
    }
    CHECK_THROWS_AS(load_event_sessions({dir / "a.csv"}, BinningScheme::identity(3)), InvalidArgument);
    CHECK_THROWS_AS(load_event_sessions({dir / "missing.csv"}, scheme), InvalidArgument);
}

TEST_CASE("report bundle") {
    const Fixture f;
    const std::vector<std::string> labels{"S1", "B1"};

    const auto write = [&](const fs::path& dir) {
        ReportBundle bundle(dir);
        bundle.metadata()["seed"] = 4;
        emit_norm_tables(f.est, labels, bundle, side_blocks_of(BinningScheme::identity(2)));
        emit_kernel_curves(f.est, select_row(1, 2), labels, bundle);
        emit_conditional_law_curves(f.claw, select_column(0, 2), labels, bundle);
        emit_flow_report(flow_statistics(f.stream), labels, bundle);
        bundle.write_manifest();
        return bundle.files();
    };
    const auto a = scratch("report_a");
    const auto b = scratch("report_b");
    const auto files = write(a);
    write(b);
    CHECK(files.size() == 3 + 2 + 2 + 6);
    for (const auto& name : files) CHECK(slurp(a / name) == slurp(b / name));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    SUBCASE("curves read back exactly") {
        const auto rows = read_csv_rows(a / "kernels" / "phi_B1_S1.csv");
        REQUIRE(rows.size() == f.est.quad.size() + 1);
        CHECK(rows[0] == std::vector<std::string>{"node", "phi", "stderr"});
        for (std::size_t m = 0; m < f.est.quad.size(); ++m) {
            CHECK(parse_double(rows[m + 1][0]) == f.est.quad.nodes[m]);
            CHECK(parse_double(rows[m + 1][1]) == f.est.kernel(1, 0)[static_cast<Eigen::Index>(m)]);
        }
    }
    SUBCASE("summary fractions add up") {
        const auto rows = read_csv_rows(a / "flow" / "summary.csv");
        double total = 0.0;
        for (std::size_t r = 1; r < rows.size(); ++r) total += parse_double(rows[r][3]);
        CHECK(total == doctest::Approx(100.0));
    }
    SUBCASE("manifest lists every file with its hash") {
        std::ifstream in(a / "manifest.json");
        const auto doc = nlohmann::json::parse(in);
        CHECK(doc["files"].size() == files.size());
        for (const auto& entry : doc["files"])
            CHECK(entry["sha256"] == sha256_file(a / entry["path"].get<std::string>()));
    }
}

TEST_CASE("report argument checks") {
    const Fixture f;
    const auto dir = scratch("report_errors");
    ReportBundle bundle(dir);
    CHECK_THROWS_AS(emit_norm_tables(f.est, {"only"}, bundle), InvalidArgument);
    CHECK_THROWS_AS(emit_kernel_curves(f.est, {{0, 5}}, {"S1", "B1"}, bundle), InvalidArgument);
    emit_kernel_curves(f.est, {}, {"S1", "B1"}, bundle);
    CHECK(bundle.files().empty());
}

TEST_CASE("full-book quadrants") {
    const auto scheme = BinningScheme::four_bins(BinningMode::full_book);
    KernelEstimate est;
    est.dimension = 24;
    est.norms = Eigen::MatrixXd::Random(24, 24);
    est.rescaled = est.norms;
    est.mu = Eigen::VectorXd::Ones(24);
    est.lambda = Eigen::VectorXd::Ones(24);
    est.ratios = Eigen::VectorXd::Constant(24, 100.0);
    const auto dir = scratch("quadrants");
    ReportBundle bundle(dir);
    emit_norm_tables(est, scheme.labels(), bundle, side_blocks_of(scheme));
    std::vector<std::string> cols;
    const auto q = read_labeled_matrix(dir / "norms_bid_ask.csv", nullptr, &cols);
    CHECK(q.rows() == 12);
    CHECK(q == est.norms.block(12, 0, 12, 12));
    CHECK(cols.front() == "La1");
    CHECK(fs::exists(dir / "rescaled_norms_ask_ask.csv"));
    CHECK(bundle.files().size() == 3 + 8);
}
