#include "lobhawkes/simulate.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lobhawkes {

nlohmann::json SimulationResult::metadata() const {
    return {{"seed", seed},
            {"horizon", horizon},
            {"burn_in", burn_in},
            {"generator", generator},
            {"model_hash", model_hash},
            {"candidates", candidates},
            {"accepted", accepted},
            {"clipping_frequency", clipping_frequency},
            {"dimension", stream.dimension}};
}

double default_burn_in(const HawkesModel& model) {
    double min_mu = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < model.mu.size(); ++i)
        if (model.mu[i] > 0.0) min_mu = std::min(min_mu, model.mu[i]);
    return std::isfinite(min_mu) ? std::max(100.0 / min_mu, 10.0) : 10.0;
}

namespace {

void check_options(const SimulationOptions& options) {
    if (!(options.horizon > 0.0) || !std::isfinite(options.horizon))
        throw InvalidArgument("simulation horizon must be positive");
    if (!(options.truncation > 0.0)) throw InvalidArgument("kernel truncation must be positive");
    if (options.burn_in && !(*options.burn_in >= 0.0)) throw InvalidArgument("burn-in must be >= 0");
}

/// Drops burn-in events, re-bases to the kept window and packs the session.
MultivariateEventStream finish(std::vector<std::vector<double>>& history, double burn, double horizon,
                               const std::string& id) {
    const std::size_t d = history.size();
    MultivariateEventStream stream(d);
    Session s(id, horizon, d);
    for (std::size_t c = 0; c < d; ++c) {
        auto first = std::lower_bound(history[c].begin(), history[c].end(), burn);
        for (auto it = first; it != history[c].end(); ++it) s.times[c].push_back(std::min(*it - burn, horizon));
        make_strictly_increasing(s.times[c]);
        while (!s.times[c].empty() && s.times[c].back() > horizon) s.times[c].pop_back();
        s.marks[c].assign(s.times[c].size(), Mark{static_cast<std::int64_t>(c) + 1, 1});
    }
    stream.sessions.push_back(std::move(s));
    return stream;
}

} // namespace

SimulationResult simulate(const HawkesModel& model, const SimulationOptions& options) {
    if (model.flavor == Flavor::factorized) return simulate_factorized(model, options);
    check_options(options);
    model.validate();

    const std::size_t d = model.dimension();
    const bool clip = model.flavor == Flavor::positive_part;
    std::vector<std::vector<double>> reach(d, std::vector<double>(d, 0.0));
    std::vector<double> source_reach(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            reach[i][j] = model.kernel(i, j).is_zero() ? -1.0 : model.kernel(i, j).support_horizon(options.truncation);
            source_reach[j] = std::max(source_reach[j], reach[i][j]);
        }

    SimulationResult res;
    res.horizon = options.horizon;
    res.seed = options.seed;
    res.generator = Philox4x32::name;
    res.model_hash = model.hash();
    res.burn_in = options.burn_in.value_or(default_burn_in(model));
    const double end = res.burn_in + options.horizon;

    Philox4x32 rng(options.seed);
    std::vector<std::vector<double>> history(d);
    std::vector<std::size_t> window(d, 0);  // first event of each source still in reach
    std::vector<double> lambda(d, 0.0);
    const double mu_total = model.mu.sum();
    std::size_t clipped = 0;
    double t = 0.0;

    while (true) {
        double bound = mu_total;
        for (std::size_t j = 0; j < d; ++j) {
            const auto& h = history[j];
            while (window[j] < h.size() && t - h[window[j]] > source_reach[j]) ++window[j];
            for (std::size_t k = window[j]; k < h.size(); ++k)
                for (std::size_t i = 0; i < d; ++i)
                    if (t - h[k] <= reach[i][j]) bound += model.kernel(i, j).positive_sup_from(t - h[k]);
        }
        if (!(bound > 0.0)) break;
        t += rng.exponential(bound);
        if (t > end) break;

        double total = 0.0;
        bool negative = false;
        for (std::size_t i = 0; i < d; ++i) {
            double l = model.mu[static_cast<Eigen::Index>(i)];
            for (std::size_t j = 0; j < d; ++j) {
                if (reach[i][j] < 0.0) continue;
                const auto& h = history[j];
                for (std::size_t k = window[j]; k < h.size(); ++k)
                    if (t - h[k] <= reach[i][j]) l += model.kernel(i, j).value(t - h[k]);
            }
            if (l < 0.0) {
                negative = true;
                if (clip) l = 0.0;
            }
            lambda[i] = l;
            total += l;
        }
        ++res.candidates;
        if (negative) ++clipped;

        double u = rng.uniform() * bound;
        if (u >= total) continue;
        std::size_t pick = 0;
        while (pick + 1 < d && u >= lambda[pick]) {
            u -= lambda[pick];
            ++pick;
        }
        history[pick].push_back(t);
        ++res.accepted;
    }

    res.clipping_frequency = res.candidates ? static_cast<double>(clipped) / static_cast<double>(res.candidates) : 0.0;
    res.stream = finish(history, res.burn_in, options.horizon, options.session_id);
    return res;
}

SimulationResult simulate_factorized(const HawkesModel& model, const SimulationOptions& options) {
    check_options(options);
    if (model.flavor != Flavor::factorized || !model.factorized)
        throw InvalidArgument("simulate_factorized needs a factorized model");
    model.validate();

    const FactorizedMarks& fm = *model.factorized;
    const std::size_t d = fm.probs.size();
    const double reach = fm.base.is_zero() ? -1.0 : fm.base.support_horizon(options.truncation);

    SimulationResult res;
    res.horizon = options.horizon;
    res.seed = options.seed;
    res.generator = Philox4x32::name;
    res.model_hash = model.hash();
    res.burn_in = options.burn_in.value_or(default_burn_in(model));
    const double end = res.burn_in + options.horizon;

    std::vector<double> cumulative(d);
    std::partial_sum(fm.probs.begin(), fm.probs.end(), cumulative.begin());

    Philox4x32 rng(options.seed);
    std::vector<std::vector<double>> history(d);
    std::vector<std::pair<double, double>> recent;  // (time, f(mark)) of events still in reach
    std::size_t first = 0;
    double t = 0.0;

    while (true) {
        while (first < recent.size() && t - recent[first].first > reach) ++first;
        double bound = fm.mu_total;
        for (std::size_t k = first; k < recent.size(); ++k)
            bound += recent[k].second * fm.base.positive_sup_from(t - recent[k].first);
        if (!(bound > 0.0)) break;
        t += rng.exponential(bound);
        if (t > end) break;

        double lambda = fm.mu_total;
        for (std::size_t k = first; k < recent.size(); ++k)
            if (t - recent[k].first <= reach) lambda += recent[k].second * fm.base.value(t - recent[k].first);
        ++res.candidates;
        if (rng.uniform() * bound >= lambda) continue;

        const double u = rng.uniform() * cumulative.back();
        std::size_t bin = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                   cumulative.begin());
        bin = std::min(bin, d - 1);
        history[bin].push_back(t);
        recent.emplace_back(t, fm.f[bin]);
        ++res.accepted;
        if (first > 4096 && first * 2 > recent.size()) {
            recent.erase(recent.begin(), recent.begin() + static_cast<std::ptrdiff_t>(first));
            first = 0;
        }
    }

    res.stream = finish(history, res.burn_in, options.horizon, options.session_id);
    return res;
}

} // namespace lobhawkes
