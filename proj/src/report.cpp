#include "lobhawkes/report.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/hashing.hpp"
#include "lobhawkes/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace lobhawkes {

namespace fs = std::filesystem;

ReportBundle::ReportBundle(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path ReportBundle::add(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    const fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

fs::path ReportBundle::write_manifest(const std::string& name) const {
    std::vector<std::string> sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& f : sorted)
        listing.push_back({{"path", f}, {"sha256", sha256_file(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
    const nlohmann::json doc{{"metadata", metadata_}, {"files", listing}};
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + p.string() + "'");
    out << doc.dump(2) << '\n';
    return p;
}

namespace {

std::vector<std::string> file_labels(const std::vector<std::string>& labels, std::size_t d) {
    if (labels.size() != d)
        throw InvalidArgument("expected " + std::to_string(d) + " labels, got " + std::to_string(labels.size()));
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto l : labels) {
        for (auto& ch : l)
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
        if (l.empty() || !seen.insert(l).second) throw InvalidArgument("labels must be non-empty and distinct");
        out.push_back(l);
    }
    return out;
}

void check_selection(const PairSelection& selection, std::size_t d) {
    for (const auto& [i, j] : selection)
        if (i >= d || j >= d)
            throw InvalidArgument("selected pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
}

std::ofstream open(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + p.string() + "'");
    return out;
}

} // namespace

SideBlocks side_blocks_of(const BinningScheme& scheme) {
    SideBlocks b;
    b.names = scheme.side_blocks();
    if (!b.names.empty()) b.block_size = static_cast<std::size_t>(scheme.dimension()) / b.names.size();
    return b;
}

void emit_norm_tables(const KernelEstimate& est, const std::vector<std::string>& labels, ReportBundle& bundle,
                      const SideBlocks& blocks) {
    const std::size_t d = est.dimension;
    if (labels.size() != d)
        throw InvalidArgument("expected " + std::to_string(d) + " labels, got " + std::to_string(labels.size()));
    write_labeled_matrix(bundle.add("norms.csv"), est.norms, labels, labels);
    write_labeled_matrix(bundle.add("rescaled_norms.csv"), est.rescaled, labels, labels);
    {
        auto out = open(bundle.add("exogeneity.csv"));
        out << "component,mu,lambda,ratio_percent\n";
        for (std::size_t i = 0; i < d; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            out << labels[i] << ',' << format_double(est.mu[e]) << ',' << format_double(est.lambda[e]) << ','
                << format_double(est.ratios[e]) << '\n';
        }
    }
    if (blocks.names.empty()) return;
    const std::size_t n = blocks.block_size;
    if (n * blocks.names.size() != d) throw InvalidArgument("side blocks do not tile the dimension");
    const auto e = static_cast<Eigen::Index>(n);
    for (std::size_t bt = 0; bt < blocks.names.size(); ++bt)
        for (std::size_t bs = 0; bs < blocks.names.size(); ++bs) {
            const std::vector<std::string> rows(labels.begin() + static_cast<std::ptrdiff_t>(bt * n),
                                                labels.begin() + static_cast<std::ptrdiff_t>((bt + 1) * n));
            const std::vector<std::string> cols(labels.begin() + static_cast<std::ptrdiff_t>(bs * n),
                                                labels.begin() + static_cast<std::ptrdiff_t>((bs + 1) * n));
            const std::string tag = blocks.names[bt] + "_" + blocks.names[bs] + ".csv";
            const auto r0 = static_cast<Eigen::Index>(bt * n);
            const auto c0 = static_cast<Eigen::Index>(bs * n);
            write_labeled_matrix(bundle.add("norms_" + tag), est.norms.block(r0, c0, e, e), rows, cols);
            write_labeled_matrix(bundle.add("rescaled_norms_" + tag), est.rescaled.block(r0, c0, e, e), rows, cols);
        }
}

PairSelection select_row(std::size_t i, std::size_t dimension) {
    PairSelection s;
    for (std::size_t j = 0; j < dimension; ++j) s.emplace_back(i, j);
    return s;
}

PairSelection select_column(std::size_t j, std::size_t dimension) {
    PairSelection s;
    for (std::size_t i = 0; i < dimension; ++i) s.emplace_back(i, j);
    return s;
}

void emit_kernel_curves(const KernelEstimate& est, const PairSelection& selection,
                        const std::vector<std::string>& labels, ReportBundle& bundle) {
    check_selection(selection, est.dimension);
    const auto names = file_labels(labels, est.dimension);
    for (const auto& [i, j] : selection) {
        auto out = open(bundle.add("kernels/phi_" + names[i] + "_" + names[j] + ".csv"));
        out << "node,phi,stderr\n";
        const auto& phi = est.kernel(i, j);
        const auto& se = est.stderrs.at(est.index(i, j));
        for (Eigen::Index m = 0; m < phi.size(); ++m)
            out << format_double(est.quad.nodes[static_cast<std::size_t>(m)]) << ',' << format_double(phi[m]) << ','
                << format_double(se.size() ? se[m] : 0.0) << '\n';
    }
}

void emit_conditional_law_curves(const ConditionalLawMatrix& claw, const PairSelection& selection,
                                 const std::vector<std::string>& labels, ReportBundle& bundle) {
    check_selection(selection, claw.dimension);
    const auto names = file_labels(labels, claw.dimension);
    for (const auto& [i, j] : selection) {
        auto out = open(bundle.add("conditional_laws/g_" + names[i] + "_" + names[j] + ".csv"));
        out << "bin_left,bin_right,value,stderr,pairs,status\n";
        const auto idx = claw.index(i, j);
        for (std::size_t k = 0; k < claw.grid.bins(); ++k)
            out << format_double(claw.grid.left(k)) << ',' << format_double(claw.grid.right(k)) << ','
                << format_double(claw.values[idx][k]) << ',' << format_double(claw.stderrs[idx][k]) << ','
                << claw.pairs[idx][k] << ',' << to_string(claw.status[idx][k]) << '\n';
    }
}

void emit_flow_report(const FlowStatistics& stats, const std::vector<std::string>& labels, ReportBundle& bundle) {
    const std::size_t d = stats.counts.size();
    const auto names = file_labels(labels, d);
    const auto& grid = stats.duration_grid;

    const auto histogram = [&](const std::string& name, const std::vector<std::uint64_t>& h, std::uint64_t overflow) {
        auto out = open(bundle.add(name));
        out << "bin_left,bin_right,count\n";
        for (std::size_t k = 0; k < grid.bins(); ++k)
            out << format_double(grid.left(k)) << ',' << format_double(grid.right(k)) << ',' << h[k] << '\n';
        out << format_double(grid.edges.back()) << ",inf," << overflow << '\n';
    };
    histogram("flow/durations_pooled.csv", stats.pooled_durations, stats.pooled_overflow);
    for (std::size_t c = 0; c < d; ++c)
        histogram("flow/durations_" + names[c] + ".csv", stats.component_durations[c], stats.component_overflow[c]);

    {
        auto out = open(bundle.add("flow/volumes.csv"));
        out << "signed_volume,count\n";
        for (const auto& [v, n] : stats.signed_volumes) out << v << ',' << n << '\n';
    }
    {
        auto out = open(bundle.add("flow/autocorrelation.csv"));
        out << "lag,sign,size\n";
        for (std::size_t k = 0; k < stats.sign_autocorrelation.size(); ++k)
            out << k + 1 << ',' << format_double(stats.sign_autocorrelation[k]) << ','
                << format_double(stats.size_autocorrelation[k]) << '\n';
    }
    {
        std::uint64_t total = 0;
        for (auto c : stats.counts) total += c;
        auto out = open(bundle.add("flow/summary.csv"));
        out << "component,count,per_session,percent,intensity\n";
        for (std::size_t c = 0; c < d; ++c) {
            const double per_session =
                stats.sessions ? static_cast<double>(stats.counts[c]) / static_cast<double>(stats.sessions) : 0.0;
            const double percent = total ? 100.0 * static_cast<double>(stats.counts[c]) / static_cast<double>(total) : 0.0;
            out << labels[c] << ',' << stats.counts[c] << ',' << format_double(per_session) << ','
                << format_double(percent) << ',' << format_double(stats.intensity[c]) << '\n';
        }
    }
}

} // namespace lobhawkes
