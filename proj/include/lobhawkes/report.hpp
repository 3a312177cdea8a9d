#pragma once

#include "lobhawkes/estimate.hpp"
#include "lobhawkes/events.hpp"
#include "lobhawkes/whsolve.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lobhawkes {

/// Files written into one output directory plus the metadata needed to
/// reproduce them. `write_manifest` lists every file with its SHA-256.
class ReportBundle {
public:
    explicit ReportBundle(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    nlohmann::json& metadata() noexcept { return metadata_; }
    const std::vector<std::string>& files() const noexcept { return files_; }

    /// Absolute path for `name`, recorded for the manifest.
    std::filesystem::path add(const std::string& name);
    std::filesystem::path write_manifest(const std::string& name = "manifest.json") const;

private:
    std::filesystem::path dir_;
    nlohmann::json metadata_ = nlohmann::json::object();
    std::vector<std::string> files_;
};

/// Two side blocks of equal size (e.g. ask and bid) for quadrant extraction.
struct SideBlocks {
    std::vector<std::string> names;  // empty: no quadrants
    std::size_t block_size = 0;
};

SideBlocks side_blocks_of(const BinningScheme& scheme);

/// norms.csv, rescaled_norms.csv, exogeneity.csv and, with side blocks, the
/// quadrant files norms_<target>_<source>.csv / rescaled_norms_<target>_<source>.csv.
void emit_norm_tables(const KernelEstimate& est, const std::vector<std::string>& labels, ReportBundle& bundle,
                      const SideBlocks& blocks = {});

using PairSelection = std::vector<std::pair<std::size_t, std::size_t>>;
PairSelection select_row(std::size_t i, std::size_t dimension);
PairSelection select_column(std::size_t j, std::size_t dimension);

/// kernels/phi_<target>_<source>.csv with node,phi,stderr.
void emit_kernel_curves(const KernelEstimate& est, const PairSelection& selection,
                        const std::vector<std::string>& labels, ReportBundle& bundle);

/// conditional_laws/g_<target>_<source>.csv with bin_left,bin_right,value,stderr,pairs,status.
void emit_conditional_law_curves(const ConditionalLawMatrix& claw, const PairSelection& selection,
                                 const std::vector<std::string>& labels, ReportBundle& bundle);

/// Duration histograms, signed volume counts, trade autocorrelations and a
/// per-component summary (count, per session, percent, intensity).
void emit_flow_report(const FlowStatistics& stats, const std::vector<std::string>& labels, ReportBundle& bundle);

} // namespace lobhawkes
