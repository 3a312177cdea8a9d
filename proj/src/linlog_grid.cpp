#include "lobhawkes/linlog_grid.hpp"

#include "lobhawkes/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lobhawkes {

std::vector<double> linlog_points(LinLogParams& p) {
    if (p.n_lin < 1 || p.n_log < 1)
        throw InvalidArgument("lin-log grid needs at least one linear and one logarithmic cell");
    if (!(p.h_min > 0.0) || !(p.h_max > p.h_min))
        throw InvalidArgument("lin-log grid requires 0 < h_min < h_max (got h_min=" +
                              std::to_string(p.h_min) + ", h_max=" + std::to_string(p.h_max) + ")");
    if (p.lin_step == 0.0) p.lin_step = p.h_min / p.n_lin;
    if (!(p.lin_step > 0.0))
        throw InvalidArgument("lin-log grid requires a positive linear step");
    if (p.n_lin * p.lin_step > p.h_min * (1.0 + 1e-12))
        throw InvalidArgument("lin-log grid requires n_lin * lin_step <= h_min");
    const double log_span = std::log(p.h_max / p.h_min);
    if (p.log_step == 0.0) {
        p.log_step = log_span / p.n_log;
    } else if (std::abs(p.log_step * p.n_log - log_span) > 1e-9 * std::max(1.0, log_span)) {
        throw InvalidArgument("lin-log grid: n_log * log_step must equal log(h_max / h_min)");
    }

    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(p.n_lin + p.n_log + 1));
    pts.push_back(0.0);
    for (int k = 1; k < p.n_lin; ++k) pts.push_back(k * p.lin_step);
    pts.push_back(p.h_min);
    for (int k = 1; k < p.n_log; ++k) pts.push_back(p.h_min * std::exp(k * p.log_step));
    pts.push_back(p.h_max);
    return pts;
}

LinLogGrid build_linlog_grid(const LinLogParams& params) {
    LinLogGrid grid;
    grid.params = params;
    grid.edges = linlog_points(grid.params);
    return grid;
}

long LinLogGrid::bin_of(double t) const {
    if (edges.size() < 2 || !(t >= 0.0) || t > edges.back()) return -1;
    if (t == edges.back()) return static_cast<long>(bins()) - 1;
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    return static_cast<long>(it - edges.begin()) - 1;
}

} // namespace lobhawkes
