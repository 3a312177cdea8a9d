#pragma once

#include "lobhawkes/estimate.hpp"
#include "lobhawkes/events.hpp"
#include "lobhawkes/whsolve.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lobhawkes {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Header row then one row per target: `,col1,col2` / `row1,v,v`.
void write_labeled_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                          const std::vector<std::string>& row_labels, const std::vector<std::string>& col_labels);
Eigen::MatrixXd read_labeled_matrix(const std::filesystem::path& path, std::vector<std::string>* row_labels = nullptr,
                                    std::vector<std::string>* col_labels = nullptr);

/// Rows of a comma-separated file, header included.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);

/// Default component names c1..cD.
std::vector<std::string> default_labels(std::size_t dimension);

nlohmann::json to_json(const LinLogParams& params);
LinLogParams linlog_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QuadratureParams& params);
QuadratureParams quadrature_params_from_json(const nlohmann::json& doc);

/// Writes g_<i>_<j>.csv (bin_left,bin_right,value,stderr,pairs; indices
/// 1-based) for every pair plus conditional_law.json with the mean
/// intensities, grid parameters and the data needed to restore bin flags.
void write_conditional_law(const ConditionalLawMatrix& claw, const std::filesystem::path& dir,
                           const std::vector<std::string>& labels = {});
ConditionalLawMatrix read_conditional_law(const std::filesystem::path& dir);

/// Writes phi_<i>_<j>.csv (node,weight,phi_value), norms.csv,
/// rescaled_norms.csv, baseline.csv and kernel_estimate.json.
void write_kernel_estimate(const KernelEstimate& est, const std::filesystem::path& dir,
                           const std::vector<std::string>& labels = {});
KernelEstimate read_kernel_estimate(const std::filesystem::path& dir);

struct SessionLoadOptions {
    bool strict = false;
    /// Merge simultaneous same-side same-type events. Files whose sidecar
    /// marks them as simulated are never aggregated.
    bool aggregate = true;
    /// Session length; otherwise the sidecar horizon, else the last event.
    std::optional<double> duration;
};

/// Reads one session per event CSV (with an optional <file>.meta.json
/// sidecar) and maps it with `scheme`.
MultivariateEventStream load_event_sessions(const std::vector<std::filesystem::path>& files,
                                            const BinningScheme& scheme, const SessionLoadOptions& options = {},
                                            std::vector<std::string>* diagnostics = nullptr);

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes a simulated session as an event CSV through `scheme`.
void write_session_csv(const Session& session, const BinningScheme& scheme, const std::filesystem::path& path);

} // namespace lobhawkes
