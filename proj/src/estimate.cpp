#include "lobhawkes/estimate.hpp"

#include "lobhawkes/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace lobhawkes {

MeanIntensity estimate_mean_intensity(const MultivariateEventStream& stream) {
    const double total = stream.total_time();
    if (!(total > 0.0)) throw InvalidArgument("mean intensity needs a positive total session time");
    MeanIntensity out;
    out.total_time = total;
    out.lambda.resize(static_cast<Eigen::Index>(stream.dimension));
    out.empty.assign(stream.dimension, false);
    for (std::size_t c = 0; c < stream.dimension; ++c) {
        const std::size_t n = stream.count(c);
        out.lambda[static_cast<Eigen::Index>(c)] = static_cast<double>(n) / total;
        out.empty[c] = n == 0;
    }
    return out;
}

std::string to_string(BinStatus status) {
    switch (status) {
    case BinStatus::measured: return "measured";
    case BinStatus::no_window: return "no_window";
    case BinStatus::no_data: return "no_data";
    }
    return "unknown";
}

namespace {

/// Number of source events s with s + lag <= duration, for every right edge.
std::vector<std::size_t> admissible_counts(const std::vector<double>& src, const LinLogGrid& grid, double duration) {
    std::vector<std::size_t> m(grid.bins());
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double limit = duration - grid.right(k);
        m[k] = limit < 0.0 ? 0
                           : static_cast<std::size_t>(std::upper_bound(src.begin(), src.end(), limit) - src.begin());
    }
    return m;
}

/// Expected count of target events per unit lag in (s + a, s + b] for s
/// uniform on [0, duration - b]: the centring term matched to the window.
double window_reference(const std::vector<double>& tgt, double a, double b, double duration) {
    const double w = b - a;
    const double span = duration - b;
    auto lo = std::lower_bound(tgt.begin(), tgt.end(), a);
    if (span <= 0.0) {
        auto hi = std::upper_bound(tgt.begin(), tgt.end(), b);
        auto first = std::upper_bound(tgt.begin(), tgt.end(), a);
        return static_cast<double>(hi - first) / w;
    }
    const auto overlap = [&](double x) { return std::max(0.0, std::min(x - a, span) - std::max(x - b, 0.0)); };
    double sum = 0.0;
    if (b <= duration - w) {
        auto mid_lo = std::lower_bound(lo, tgt.end(), b);
        auto mid_hi = std::upper_bound(mid_lo, tgt.end(), duration - w);
        for (auto it = lo; it != mid_lo; ++it) sum += overlap(*it);
        sum += w * static_cast<double>(mid_hi - mid_lo);
        for (auto it = mid_hi; it != tgt.end(); ++it) sum += overlap(*it);
    } else {
        for (auto it = lo; it != tgt.end(); ++it) sum += overlap(*it);
    }
    return sum / (w * span);
}

/// Pair counts per bin: target events in (s + a, s + b] summed over the
/// admissible source prefix of that bin.
std::vector<std::uint64_t> count_pairs(const std::vector<double>& src, const std::vector<double>& tgt,
                                       const LinLogGrid& grid, const std::vector<std::size_t>& m) {
    const std::size_t bins = grid.bins();
    std::vector<std::uint64_t> pairs(bins, 0);
    if (src.empty() || tgt.empty()) return pairs;

    // Cost of scanning every pair within h_max against one sweep per edge.
    const double span = std::max(tgt.back() - tgt.front(), 1e-300);
    const double direct_cost = static_cast<double>(src.size()) *
                               (1.0 + static_cast<double>(tgt.size()) * std::min(1.0, grid.edges.back() / span));
    const double sweep_cost = static_cast<double>(bins + 1) * static_cast<double>(src.size() + tgt.size());
    if (direct_cost < sweep_cost) {
        // Same comparisons as the sweep (t against s + edge), so both paths
        // agree bit for bit.
        const double h_max = grid.edges.back();
        for (std::size_t n = 0; n < m[0]; ++n) {
            const double s = src[n];
            auto it = std::upper_bound(tgt.begin(), tgt.end(), s);
            for (; it != tgt.end() && *it <= s + h_max; ++it) {
                const double t = *it;
                // first edge e with t <= s + e; the pair falls in bin e - 1
                const auto e = static_cast<std::size_t>(
                    std::lower_bound(grid.edges.begin(), grid.edges.end(), t,
                                     [s](double edge, double value) { return s + edge < value; }) -
                    grid.edges.begin());
                if (e == 0 || e > bins) continue;
                if (n < m[e - 1]) ++pairs[e - 1];
            }
        }
        return pairs;
    }

    // Edge e is the left edge of bin e (prefix m[e]) and the right edge of
    // bin e - 1 (prefix m[e - 1] >= m[e]).
    std::vector<std::uint64_t> left(bins, 0);
    std::vector<std::uint64_t> right(bins, 0);
    for (std::size_t e = 0; e <= bins; ++e) {
        const std::size_t as_left = e < bins ? m[e] : 0;
        const std::size_t as_right = e > 0 ? m[e - 1] : 0;
        const std::size_t upto = std::max(as_left, as_right);
        if (upto == 0) continue;
        const double lag = grid.edges[e];
        auto p = static_cast<std::size_t>(std::upper_bound(tgt.begin(), tgt.end(), src[0] + lag) - tgt.begin());
        std::uint64_t acc = 0;
        for (std::size_t k = 0; k < upto; ++k) {
            const double x = src[k] + lag;
            while (p < tgt.size() && tgt[p] <= x) ++p;
            acc += p;
            if (k + 1 == as_left && e < bins) left[e] = acc;
            if (k + 1 == as_right && e > 0) right[e - 1] = acc;
        }
    }
    for (std::size_t k = 0; k < bins; ++k) pairs[k] = right[k] - left[k];
    return pairs;
}

struct PairAccumulator {
    std::vector<std::uint64_t> pairs;
    std::vector<double> weighted_ref;  // sum over sessions of m * reference
    std::vector<double> sum_value;     // equal-session weighting
    std::vector<double> sum_var;
    std::vector<std::uint32_t> sessions;
};

} // namespace

ConditionalLawMatrix estimate_conditional_law(const MultivariateEventStream& stream, const LinLogGrid& grid,
                                              const ConditionalLawOptions& options) {
    const std::size_t d = stream.dimension;
    const std::size_t bins = grid.bins();
    if (stream.sessions.empty() || d == 0) throw InvalidArgument("conditional law needs a non-empty stream");
    if (bins == 0) throw InvalidArgument("conditional law needs a grid with at least one bin");
    for (const auto& s : stream.sessions)
        if (s.dimension() != d) throw InvalidArgument("session dimension disagrees with the stream");

    ConditionalLawMatrix claw;
    claw.grid = grid;
    claw.dimension = d;
    claw.sessions = stream.sessions.size();
    claw.equal_session_weights = options.equal_session_weights;
    const MeanIntensity mi = estimate_mean_intensity(stream);
    claw.lambda = mi.lambda;
    claw.total_time = mi.total_time;
    claw.counts.resize(d);
    for (std::size_t c = 0; c < d; ++c) claw.counts[c] = stream.count(c);
    claw.admissible.assign(d, std::vector<std::uint64_t>(bins, 0));

    std::vector<PairAccumulator> acc(d * d);
    for (auto& a : acc) {
        a.pairs.assign(bins, 0);
        a.weighted_ref.assign(bins, 0.0);
        a.sum_value.assign(bins, 0.0);
        a.sum_var.assign(bins, 0.0);
        a.sessions.assign(bins, 0);
    }

    for (const auto& session : stream.sessions) {
        std::vector<std::vector<std::size_t>> m(d);
        for (std::size_t j = 0; j < d; ++j) {
            m[j] = admissible_counts(session.times[j], grid, session.duration);
            for (std::size_t k = 0; k < bins; ++k) claw.admissible[j][k] += m[j][k];
        }
        std::vector<std::vector<double>> ref(d, std::vector<double>(bins, 0.0));
        detail::parallel_for(d, options.threads, [&](std::size_t i) {
            for (std::size_t k = 0; k < bins; ++k)
                ref[i][k] = window_reference(session.times[i], grid.left(k), grid.right(k), session.duration);
        });
        detail::parallel_for(d * d, options.threads, [&](std::size_t task) {
            const std::size_t i = task / d;
            const std::size_t j = task % d;
            const auto pairs = count_pairs(session.times[j], session.times[i], grid, m[j]);
            PairAccumulator& a = acc[task];
            for (std::size_t k = 0; k < bins; ++k) {
                const auto n = m[j][k];
                if (n == 0) continue;
                a.pairs[k] += pairs[k];
                a.weighted_ref[k] += static_cast<double>(n) * ref[i][k];
                const double scale = grid.width(k) * static_cast<double>(n);
                a.sum_value[k] += static_cast<double>(pairs[k]) / scale - ref[i][k];
                a.sum_var[k] += static_cast<double>(pairs[k]) / (scale * scale);
                ++a.sessions[k];
            }
        });
    }

    claw.values.assign(d * d, std::vector<double>(bins, 0.0));
    claw.stderrs.assign(d * d, std::vector<double>(bins, 0.0));
    claw.pairs.assign(d * d, std::vector<std::uint64_t>(bins, 0));
    claw.status.assign(d * d, std::vector<BinStatus>(bins, BinStatus::measured));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t idx = claw.index(i, j);
            const PairAccumulator& a = acc[idx];
            std::size_t last = 0;
            bool any = false;
            for (std::size_t k = 0; k < bins; ++k)
                if (a.pairs[k] > 0) {
                    last = k;
                    any = true;
                }
            claw.pairs[idx] = a.pairs;
            for (std::size_t k = 0; k < bins; ++k) {
                const auto n = claw.admissible[j][k];
                if (n == 0) {
                    claw.status[idx][k] = BinStatus::no_window;
                    continue;
                }
                if (!any || k > last) {
                    claw.status[idx][k] = BinStatus::no_data;
                    continue;
                }
                const double scale = grid.width(k) * static_cast<double>(n);
                if (options.equal_session_weights) {
                    const double s = a.sessions[k];
                    claw.values[idx][k] = a.sum_value[k] / s;
                    claw.stderrs[idx][k] = std::sqrt(a.sum_var[k]) / s;
                } else {
                    claw.values[idx][k] =
                        static_cast<double>(a.pairs[k]) / scale - a.weighted_ref[k] / static_cast<double>(n);
                    claw.stderrs[idx][k] = std::sqrt(static_cast<double>(a.pairs[k])) / scale;
                }
            }
        }
    }
    return claw;
}

double ConditionalLawMatrix::at(std::size_t i, std::size_t j, double t) const {
    if (t < 0.0) {
        const double lj = lambda[static_cast<Eigen::Index>(j)];
        if (lj == 0.0) return 0.0;
        const long bin = grid.bin_of(-t);
        if (bin < 0 || status[index(j, i)][static_cast<std::size_t>(bin)] != BinStatus::measured) return 0.0;
        return lambda[static_cast<Eigen::Index>(i)] / lj * values[index(j, i)][static_cast<std::size_t>(bin)];
    }
    const long bin = grid.bin_of(t);
    if (bin < 0 || status[index(i, j)][static_cast<std::size_t>(bin)] != BinStatus::measured) return 0.0;
    return values[index(i, j)][static_cast<std::size_t>(bin)];
}

double conditional_law_at_negative_lag(const ConditionalLawMatrix& claw, std::size_t i, std::size_t j,
                                       std::size_t bin) {
    if (i >= claw.dimension || j >= claw.dimension || bin >= claw.grid.bins())
        throw InvalidArgument("conditional law index out of range");
    const double lj = claw.lambda[static_cast<Eigen::Index>(j)];
    if (lj == 0.0) throw InvalidArgument("negative-lag identity needs a nonzero mean intensity of the source");
    if (claw.status[claw.index(j, i)][bin] != BinStatus::measured) return 0.0;
    return claw.lambda[static_cast<Eigen::Index>(i)] / lj * claw.value(j, i, bin);
}

MultivariateEventStream time_reversed(const MultivariateEventStream& stream) {
    MultivariateEventStream out(stream.dimension);
    for (const auto& s : stream.sessions) {
        Session r(s.id, s.duration, stream.dimension);
        for (std::size_t c = 0; c < stream.dimension; ++c) {
            for (std::size_t k = s.times[c].size(); k-- > 0;) {
                r.times[c].push_back(s.duration - s.times[c][k]);
                r.marks[c].push_back(s.marks[c][k]);
            }
            make_strictly_increasing(r.times[c]);
        }
        out.sessions.push_back(std::move(r));
    }
    return out;
}

} // namespace lobhawkes
