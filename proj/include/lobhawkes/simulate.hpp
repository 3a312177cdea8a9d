#pragma once

#include "lobhawkes/model.hpp"
#include "lobhawkes/stream.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace lobhawkes {

struct SimulationOptions {
    double horizon = 0.0;  // seconds kept after burn-in
    std::uint64_t seed = 0;
    /// Defaults to max(100 / min positive mu, 10 s).
    std::optional<double> burn_in;
    /// Contributions older than the lag where |phi| < truncation are dropped.
    double truncation = 1e-8;
    std::string session_id = "sim";
};

struct SimulationResult {
    MultivariateEventStream stream;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::uint64_t seed = 0;
    std::string generator;
    std::string model_hash;
    std::size_t candidates = 0;
    std::size_t accepted = 0;  // including burn-in events
    /// Fraction of candidates at which some linear intensity was negative
    /// (positive-part flavor only).
    double clipping_frequency = 0.0;

    nlohmann::json metadata() const;
};

double default_burn_in(const HawkesModel& model);

/// Ogata thinning for the linear and positive-part flavors (the factorized
/// flavor is forwarded to simulate_factorized). Every event carries the mark
/// volume component + 1.
SimulationResult simulate(const HawkesModel& model, const SimulationOptions& options);

/// Draws event times from mu_total + sum_s f(v_s) phi(t - s) and i.i.d. mark
/// bins; each event lands in the component of its mark bin.
SimulationResult simulate_factorized(const HawkesModel& model, const SimulationOptions& options);

} // namespace lobhawkes
