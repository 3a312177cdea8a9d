#include "lobhawkes/events.hpp"

#include "lobhawkes/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lobhawkes {

namespace {

void add_duration(const LinLogGrid& grid, double d, std::vector<std::uint64_t>& hist, std::uint64_t& overflow) {
    const long bin = grid.bin_of(d);
    if (bin < 0) {
        ++overflow;
    } else {
        ++hist[static_cast<std::size_t>(bin)];
    }
}

/// Autocorrelation pooled over sessions; pairs never straddle two sessions.
std::vector<double> autocorrelation(const std::vector<std::vector<double>>& series, std::size_t max_lag) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        for (double x : s) sum += x;
        n += s.size();
    }
    std::vector<double> acf(max_lag, std::numeric_limits<double>::quiet_NaN());
    if (n == 0) return acf;
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (const auto& s : series)
        for (double x : s) var += (x - mean) * (x - mean);
    if (!(var > 0.0)) return acf;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double cov = 0.0;
        for (const auto& s : series)
            for (std::size_t t = 0; t + lag < s.size(); ++t) cov += (s[t] - mean) * (s[t + lag] - mean);
        acf[lag - 1] = cov / var;
    }
    return acf;
}

} // namespace

FlowStatistics flow_statistics(const MultivariateEventStream& stream, const FlowStatisticsOptions& options) {
    if (stream.sessions.empty()) throw InvalidArgument("flow_statistics needs at least one session");
    const std::size_t dim = stream.dimension;
    if (!options.trade_components.empty() && options.trade_components.size() != dim)
        throw InvalidArgument("trade_components must have one flag per component");

    FlowStatistics st;
    st.duration_grid = build_linlog_grid(options.duration_grid);
    const std::size_t nb = st.duration_grid.bins();
    st.pooled_durations.assign(nb, 0);
    st.component_durations.assign(dim, std::vector<std::uint64_t>(nb, 0));
    st.component_overflow.assign(dim, 0);
    st.counts.assign(dim, 0);
    st.sessions = stream.sessions.size();
    st.total_time = stream.total_time();

    const auto is_trade = [&](std::size_t c) {
        return options.trade_components.empty() || options.trade_components[c];
    };

    std::vector<std::vector<double>> signs;
    std::vector<std::vector<double>> sizes;
    for (const auto& s : stream.sessions) {
        std::vector<double> pooled;
        std::vector<std::pair<double, Mark>> trades;
        for (std::size_t c = 0; c < dim; ++c) {
            const auto& t = s.times[c];
            st.counts[c] += t.size();
            for (std::size_t k = 1; k < t.size(); ++k)
                add_duration(st.duration_grid, t[k] - t[k - 1], st.component_durations[c], st.component_overflow[c]);
            pooled.insert(pooled.end(), t.begin(), t.end());
            if (is_trade(c)) {
                for (std::size_t k = 0; k < t.size(); ++k) {
                    const Mark& m = s.marks[c][k];
                    trades.emplace_back(t[k], m);
                    const std::int64_t sign = m.side < 0 ? -1 : 1;
                    ++st.signed_volumes[sign * m.volume];
                }
            }
        }
        std::sort(pooled.begin(), pooled.end());
        for (std::size_t k = 1; k < pooled.size(); ++k)
            add_duration(st.duration_grid, pooled[k] - pooled[k - 1], st.pooled_durations, st.pooled_overflow);

        std::stable_sort(trades.begin(), trades.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<double> sg;
        std::vector<double> sz;
        for (const auto& [t, m] : trades) {
            sg.push_back(m.side < 0 ? -1.0 : 1.0);
            sz.push_back(static_cast<double>(m.volume));
        }
        st.trade_count += trades.size();
        signs.push_back(std::move(sg));
        sizes.push_back(std::move(sz));
    }

    st.sign_autocorrelation = autocorrelation(signs, options.max_lag);
    st.size_autocorrelation = autocorrelation(sizes, options.max_lag);
    st.intensity.assign(dim, 0.0);
    if (st.total_time > 0.0)
        for (std::size_t c = 0; c < dim; ++c) st.intensity[c] = static_cast<double>(st.counts[c]) / st.total_time;
    return st;
}

} // namespace lobhawkes
