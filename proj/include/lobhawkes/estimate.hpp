#pragma once

#include "lobhawkes/linlog_grid.hpp"
#include "lobhawkes/stream.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lobhawkes {

struct MeanIntensity {
    Eigen::VectorXd lambda;   // events per second, pooled over sessions
    std::vector<bool> empty;  // components without a single event
    double total_time = 0.0;
};

MeanIntensity estimate_mean_intensity(const MultivariateEventStream& stream);

enum class BinStatus : std::uint8_t {
    measured,
    no_window,  // no source event had the full lag window inside its session
    no_data,    // beyond the last bin that saw a pair; reported as 0
};

std::string to_string(BinStatus status);

struct ConditionalLawOptions {
    /// Average per-session estimates with equal weights instead of pooling
    /// pair counts (which weights sessions by their admissible event counts).
    bool equal_session_weights = false;
    unsigned threads = 1;
};

/// Empirical conditional laws g^{ij} on a lin-log grid. Entry (i, j) is the
/// excess rate of i-events at lag t after a j-event.
struct ConditionalLawMatrix {
    LinLogGrid grid;
    std::size_t dimension = 0;
    std::vector<std::vector<double>> values;   // [i * D + j][bin], 1/s
    std::vector<std::vector<double>> stderrs;  // [i * D + j][bin]
    std::vector<std::vector<std::uint64_t>> pairs;
    std::vector<std::vector<BinStatus>> status;
    std::vector<std::vector<std::uint64_t>> admissible;  // [j][bin] source events with a full window
    Eigen::VectorXd lambda;
    std::vector<std::size_t> counts;
    double total_time = 0.0;
    std::size_t sessions = 0;
    bool equal_session_weights = false;

    std::size_t index(std::size_t i, std::size_t j) const { return i * dimension + j; }
    double value(std::size_t i, std::size_t j, std::size_t bin) const { return values[index(i, j)][bin]; }
    double stderr_of(std::size_t i, std::size_t j, std::size_t bin) const { return stderrs[index(i, j)][bin]; }

    /// Piecewise-constant g^{ij}(t) for any real lag: bin value for t >= 0,
    /// the time-reversal identity for t < 0 and 0 beyond h_max. Flagged bins
    /// read as 0.
    double at(std::size_t i, std::size_t j, double t) const;
};

ConditionalLawMatrix estimate_conditional_law(const MultivariateEventStream& stream, const LinLogGrid& grid,
                                              const ConditionalLawOptions& options = {});

/// g^{ij} at the mirrored negative lag of `bin`: (Lambda_i / Lambda_j) g^{ji}.
/// Throws InvalidArgument when Lambda_j is zero.
double conditional_law_at_negative_lag(const ConditionalLawMatrix& claw, std::size_t i, std::size_t j,
                                       std::size_t bin);

/// Time-reversed copy of a stream (t -> duration - t). Its conditional laws
/// are those of the original at negative lags.
MultivariateEventStream time_reversed(const MultivariateEventStream& stream);

} // namespace lobhawkes
