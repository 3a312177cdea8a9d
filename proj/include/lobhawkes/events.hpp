#pragma once

#include "lobhawkes/linlog_grid.hpp"
#include "lobhawkes/stream.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lobhawkes {

enum class Side : std::int8_t { bid = -1, ask = 1 };
enum class EventType : std::uint8_t { limit, cancel, trade };

char to_char(Side side) noexcept;
char to_char(EventType type) noexcept;

// ---------------------------------------------------------------------------
// Raw level-I records
// ---------------------------------------------------------------------------

/// Best bid and ask after a change at level I. Prices in ticks, sizes in
/// contracts; bid_price < ask_price and all four fields are positive.
struct QuoteSnapshot {
    std::int64_t bid_price = 0;
    std::int64_t bid_size = 0;
    std::int64_t ask_price = 0;
    std::int64_t ask_size = 0;
};

/// A transaction reported by the exchange, on the side of the book it hit.
struct TradeRecord {
    std::int64_t price = 0;
    std::int64_t volume = 0;
    Side side = Side::ask;
};

struct RawRecord {
    std::int64_t timestamp_us = 0;
    std::variant<QuoteSnapshot, TradeRecord> body;

    bool is_trade() const noexcept { return std::holds_alternative<TradeRecord>(body); }
    const QuoteSnapshot& quote() const { return std::get<QuoteSnapshot>(body); }
    const TradeRecord& trade() const { return std::get<TradeRecord>(body); }
};

struct OrderEvent {
    std::int64_t timestamp_us = 0;
    EventType etype = EventType::trade;
    Side side = Side::ask;
    std::int64_t volume = 1;
    std::int64_t price = 0;  // 0 when unknown

    friend bool operator==(const OrderEvent&, const OrderEvent&) = default;
};

enum class RecordFormat {
    snapshot_csv,  // timestamp_us,kind,bid_price,bid_size,ask_price,ask_size,trade_price,trade_volume,trade_side
    event_csv,     // timestamp_us,etype,side,volume[,price]
};

struct ParseOptions {
    /// Strict parsing throws on the first bad line; lenient parsing skips it
    /// and records a diagnostic. The header is validated in both modes.
    bool strict = true;
};

struct ParseDiagnostics {
    std::size_t lines = 0;
    std::size_t skipped = 0;
    std::vector<std::string> messages;
};

/// Reads level-I records. In event_csv format only trade rows are raw
/// records; limit and cancel rows are rejected (use parse_events for them).
std::vector<RawRecord> parse_records(std::istream& source, RecordFormat format,
                                     const ParseOptions& options = {},
                                     ParseDiagnostics* diagnostics = nullptr);

/// Reads an event CSV into typed order events.
std::vector<OrderEvent> parse_events(std::istream& source, const ParseOptions& options = {},
                                     ParseDiagnostics* diagnostics = nullptr);

void write_events(std::ostream& out, std::span<const OrderEvent> events);

// ---------------------------------------------------------------------------
// Order reconstruction
// ---------------------------------------------------------------------------

struct ReconstructionLog {
    std::size_t transitions = 0;
    std::size_t inconsistent = 0;    // skipped records
    std::size_t price_reveals = 0;   // deeper level exposed after a recede
    std::size_t leading_trades = 0;  // trades before the first snapshot
    std::vector<std::string> entries;
};

/// Classifies best-quote transitions into limit / cancel / trade events.
///
/// Records sharing a timestamp are treated as one transition. On each side,
/// with tv the coincident traded volume on that side:
///   same price:   trade(tv) if tv > 0, then the net change s1 - (s0 - tv)
///                 becomes a limit (> 0) or a cancel (< 0);
///   price improves: limit at the new best for its displayed size;
///   price recedes:  the old queue s0 leaves as trade(tv) plus cancel(s0 - tv);
///                   the revealed deeper level emits nothing.
/// A coincident trade larger than the old queue at an unchanged price is
/// inconsistent: the transition is skipped and logged.
std::vector<OrderEvent> reconstruct_orders(std::span<const RawRecord> records,
                                           ReconstructionLog* log = nullptr);

/// Merges events sharing (timestamp, side, etype), summing volumes. Events on
/// opposite sides, or of different types, are all kept in input order.
std::vector<OrderEvent> aggregate_simultaneous(std::span<const OrderEvent> events);

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

enum class BinningMode { unsigned_trades, signed_trades, full_book };

std::string to_string(BinningMode mode);
BinningMode binning_mode_from_string(const std::string& name);

struct ComponentInfo {
    EventType etype = EventType::trade;
    std::optional<Side> side;  // empty for unsigned trades
    int bin = 0;
    std::int64_t min_volume = 1;
    std::int64_t max_volume = 0;  // 0 means unbounded
    std::string label;
};

/// Maps (event type, side, volume) to a component index.
///
/// `edges` are the upper bounds of every bin but the last: bin k holds
/// volumes in (edges[k-1], edges[k]], the first bin starts at 1 and the last
/// is unbounded. Edges [1, 3, 10] give {1}, (1,3], (3,10], (10,inf).
///
/// Component order: unsigned B1..Bn; signed S1..Sn (bid side hit) then
/// B1..Bn (ask side hit); full book La, Ca, Ta blocks then Lb, Cb, Tb.
class BinningScheme {
public:
    BinningScheme(BinningMode mode, std::vector<std::int64_t> edges);

    static BinningScheme from_json(const nlohmann::json& doc);
    static BinningScheme load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Bund unsigned scheme {1},{2},{3},(3,7],(7,20],(20,inf).
    static BinningScheme bund_unsigned();
    /// DAX unsigned scheme {1},{2},{3},(3,5],(5,10],(10,inf).
    static BinningScheme dax_unsigned();
    /// Four bins with edges 1, 3, 10 in the given mode.
    static BinningScheme four_bins(BinningMode mode);
    /// Unsigned trades with one bin per volume 1..d-1 and a last open bin.
    static BinningScheme identity(int dimension);

    BinningMode mode() const noexcept { return mode_; }
    const std::vector<std::int64_t>& edges() const noexcept { return edges_; }
    int bins() const noexcept { return static_cast<int>(edges_.size()) + 1; }
    int dimension() const noexcept;

    int volume_bin(std::int64_t volume) const;
    /// Empty when the mode ignores this event type (e.g. limits in trade modes).
    std::optional<int> component_of(const OrderEvent& event) const;
    ComponentInfo component(int index) const;
    std::vector<std::string> labels() const;
    /// Names of the side blocks used for quadrant extraction; empty when the
    /// scheme has a single block.
    std::vector<std::string> side_blocks() const;
    /// An event that maps back to `index`, carrying the bin's smallest volume.
    OrderEvent representative_event(int index, std::int64_t timestamp_us) const;

private:
    BinningMode mode_;
    std::vector<std::int64_t> edges_;
};

struct SessionInfo {
    std::string id = "session";
    /// Session length in seconds; when absent the last event time is used.
    std::optional<double> duration;
};

/// Spreads sorted events over the scheme's components. Tied timestamps within
/// a component are separated by k * 2^-20 us before conversion to seconds
/// (and by one ulp when that is not representable).
MultivariateEventStream assign_components(std::span<const OrderEvent> events,
                                          const BinningScheme& scheme,
                                          const SessionInfo& session = {});

/// Inverse of assign_components for streams without volume information:
/// every event becomes the representative event of its component.
std::vector<OrderEvent> stream_to_events(const Session& session, const BinningScheme& scheme);

// ---------------------------------------------------------------------------
// Robustness transforms
// ---------------------------------------------------------------------------

struct RandomizationReport {
    std::size_t clamped_low = 0;
    std::size_t clamped_high = 0;
};

/// Rounds each timestamp to the nearest multiple of `round_to_us`, subtracts
/// an independent Uniform[0, jitter_us) draw and re-sorts every component.
/// Results outside [0, duration] are clamped and counted.
MultivariateEventStream randomize_timestamps(const MultivariateEventStream& stream,
                                             double round_to_us, double jitter_us,
                                             std::uint64_t seed,
                                             RandomizationReport* report = nullptr);

/// Keeps events in [start, end) of every session and re-bases them to start.
MultivariateEventStream filter_session(const MultivariateEventStream& stream, double start,
                                       double end);

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct FlowStatisticsOptions {
    LinLogParams duration_grid{1e-5, 1e-3, 0.0, 1e3, 100, 600};
    std::size_t max_lag = 50;
    /// Components whose events are trades; empty means every component.
    std::vector<bool> trade_components;
};

struct FlowStatistics {
    LinLogGrid duration_grid;
    std::vector<std::uint64_t> pooled_durations;
    std::vector<std::vector<std::uint64_t>> component_durations;
    std::uint64_t pooled_overflow = 0;
    std::vector<std::uint64_t> component_overflow;
    /// Trade volumes with sign +1 on the ask (buy) side and -1 on the bid.
    std::map<std::int64_t, std::uint64_t> signed_volumes;
    /// Autocorrelation of trade signs and sizes in trade time, lag 1..max_lag.
    std::vector<double> sign_autocorrelation;
    std::vector<double> size_autocorrelation;
    std::size_t trade_count = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> intensity;  // events per second
    double total_time = 0.0;
    std::size_t sessions = 0;
};

FlowStatistics flow_statistics(const MultivariateEventStream& stream,
                               const FlowStatisticsOptions& options = {});

} // namespace lobhawkes
