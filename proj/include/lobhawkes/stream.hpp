#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lobhawkes {

/// Mark carried by each event: its size in contracts and the book side
/// (+1 ask / buy, -1 bid / sell, 0 when the side is not tracked).
struct Mark {
    std::int64_t volume = 1;
    std::int8_t side = 0;

    friend bool operator==(const Mark&, const Mark&) = default;
};

/// One trading day (or one simulated run). Times are seconds from the
/// session start; every component array is strictly increasing and lies in
/// [0, duration].
struct Session {
    std::string id;
    double duration = 0.0;
    std::vector<std::vector<double>> times;
    std::vector<std::vector<Mark>> marks;

    Session() = default;
    Session(std::string session_id, double length, std::size_t dimension)
        : id(std::move(session_id)), duration(length), times(dimension), marks(dimension) {}

    std::size_t dimension() const noexcept { return times.size(); }
    std::size_t count(std::size_t component) const { return times.at(component).size(); }
    std::size_t total_count() const noexcept;
};

/// A realization of a D-dimensional point process split into independent
/// sessions. Sessions are never concatenated by any estimator.
struct MultivariateEventStream {
    std::size_t dimension = 0;
    std::vector<Session> sessions;

    MultivariateEventStream() = default;
    explicit MultivariateEventStream(std::size_t dim) : dimension(dim) {}

    double total_time() const noexcept;
    std::size_t count(std::size_t component) const;
    std::size_t total_count() const noexcept;

    /// Throws InvalidArgument when a structural invariant does not hold.
    void validate() const;
};

/// Forces a sorted array to be strictly increasing by nudging each value that
/// does not exceed its predecessor to the next representable double.
void make_strictly_increasing(std::vector<double>& times);

} // namespace lobhawkes
