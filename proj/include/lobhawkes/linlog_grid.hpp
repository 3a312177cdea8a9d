#pragma once

#include <cstddef>
#include <vector>

namespace lobhawkes {

/// Parameters of a linear-then-logarithmic partition of [0, h_max].
///
/// The first `n_lin` cells have width `lin_step` and end at `h_min`; the
/// remaining `n_log` cells are log-spaced with ratio exp(`log_step`) and end
/// exactly at `h_max`. A zero step is derived from the counts, which is how
/// the defaults (50 + 1500 cells over [0, 2e4] s) are expressed.
struct LinLogParams {
    double lin_step = 0.0;
    double h_min = 1e-3;
    double log_step = 0.0;
    double h_max = 2e4;
    int n_lin = 50;
    int n_log = 1500;
};

/// Bin edges of the conditional-law histogram and of duration histograms.
struct LinLogGrid {
    LinLogParams params;  // with both steps resolved
    std::vector<double> edges;

    std::size_t bins() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
    double left(std::size_t k) const { return edges[k]; }
    double right(std::size_t k) const { return edges[k + 1]; }
    double width(std::size_t k) const { return edges[k + 1] - edges[k]; }

    /// Index of the cell [e_k, e_{k+1}) holding t; the last edge maps to the
    /// last cell. Returns -1 outside [0, h_max].
    long bin_of(double t) const;
};

/// Validates the parameters and returns the resolved grid.
/// Throws InvalidArgument when 0 < lin_step, n_lin * lin_step <= h_min < h_max
/// fails or when an explicit log_step disagrees with n_log.
LinLogGrid build_linlog_grid(const LinLogParams& params);

/// Same construction returning only the points; shared with the quadrature.
std::vector<double> linlog_points(LinLogParams& params);

} // namespace lobhawkes
