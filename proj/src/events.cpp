#include "lobhawkes/events.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string_view>

namespace lobhawkes {

// ---------------------------------------------------------------------------
// Stream helpers
// ---------------------------------------------------------------------------

std::size_t Session::total_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : times) n += t.size();
    return n;
}

double MultivariateEventStream::total_time() const noexcept {
    double total = 0.0;
    for (const auto& s : sessions) total += s.duration;
    return total;
}

std::size_t MultivariateEventStream::count(std::size_t component) const {
    std::size_t n = 0;
    for (const auto& s : sessions) n += s.count(component);
    return n;
}

std::size_t MultivariateEventStream::total_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sessions) n += s.total_count();
    return n;
}

void MultivariateEventStream::validate() const {
    for (const auto& s : sessions) {
        if (s.times.size() != dimension || s.marks.size() != dimension)
            throw InvalidArgument("session '" + s.id + "' has the wrong number of components");
        if (!(s.duration >= 0.0) || !std::isfinite(s.duration))
            throw InvalidArgument("session '" + s.id + "' has an invalid duration");
        for (std::size_t c = 0; c < dimension; ++c) {
            const auto& t = s.times[c];
            if (t.size() != s.marks[c].size())
                throw InvalidArgument("session '" + s.id + "': marks and times differ in length");
            for (std::size_t k = 0; k < t.size(); ++k) {
                if (!(t[k] >= 0.0) || t[k] > s.duration)
                    throw InvalidArgument("session '" + s.id + "': timestamp outside [0, duration]");
                if (k > 0 && !(t[k] > t[k - 1]))
                    throw InvalidArgument("session '" + s.id + "': component " + std::to_string(c) +
                                          " is not strictly increasing");
            }
        }
    }
}

void make_strictly_increasing(std::vector<double>& times) {
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1]))
            times[k] = std::nextafter(times[k - 1], std::numeric_limits<double>::infinity());
    }
}

namespace {

constexpr double kTieOffsetUs = 0x1.0p-20;

/// Microsecond values (sorted, possibly tied) to strictly increasing seconds.
std::vector<double> us_to_seconds(const std::vector<double>& us) {
    std::vector<double> out(us.size());
    std::size_t run = 0;
    for (std::size_t k = 0; k < us.size(); ++k) {
        run = (k > 0 && us[k] == us[k - 1]) ? run + 1 : 0;
        out[k] = (us[k] + static_cast<double>(run) * kTieOffsetUs) / 1e6;
    }
    make_strictly_increasing(out);
    return out;
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

struct FieldError {
    std::string message;
};

std::int64_t to_int(std::string_view field, const char* name) {
    std::int64_t value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end)
        throw FieldError{std::string("bad integer in field '") + name + "'"};
    return value;
}

std::int64_t positive(std::string_view field, const char* name, const char* what) {
    const auto v = to_int(field, name);
    if (v <= 0) throw FieldError{what};
    return v;
}

Side to_side(std::string_view field) {
    if (field == "a") return Side::ask;
    if (field == "b") return Side::bid;
    throw FieldError{"side must be 'a' or 'b'"};
}

EventType to_etype(std::string_view field) {
    if (field == "L") return EventType::limit;
    if (field == "C") return EventType::cancel;
    if (field == "T") return EventType::trade;
    throw FieldError{"etype must be L, C or T"};
}

constexpr std::string_view kSnapshotHeader =
    "timestamp_us,kind,bid_price,bid_size,ask_price,ask_size,trade_price,trade_volume,trade_side";
constexpr std::string_view kEventHeader = "timestamp_us,etype,side,volume";
constexpr std::string_view kEventHeaderPriced = "timestamp_us,etype,side,volume,price";

/// Line-by-line driver shared by both readers. `parse_line` returns false to
/// drop the line silently (blank lines).
template <typename Row, typename ParseLine>
std::vector<Row> read_csv(std::istream& source, std::initializer_list<std::string_view> headers,
                          const ParseOptions& options, ParseDiagnostics* diagnostics,
                          ParseLine&& parse_line) {
    std::vector<Row> rows;
    ParseDiagnostics local;
    ParseDiagnostics& diag = diagnostics ? *diagnostics : local;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();

    while (std::getline(source, line)) {
        ++lineno;
        ++diag.lines;
        const auto view = trim(line);
        if (!header_seen) {
            if (view.empty()) continue;
            if (std::find(headers.begin(), headers.end(), view) == headers.end())
                throw ParseError(lineno, "unexpected header '" + std::string(view) + "'");
            header_seen = true;
            continue;
        }
        if (view.empty()) continue;
        try {
            Row row = parse_line(split(view));
            if (row.timestamp_us < last_ts)
                throw OrderingError(lineno, "timestamp " + std::to_string(row.timestamp_us) +
                                                " precedes " + std::to_string(last_ts));
            last_ts = row.timestamp_us;
            rows.push_back(std::move(row));
        } catch (const FieldError& e) {
            if (options.strict) throw ParseError(lineno, e.message);
            ++diag.skipped;
            diag.messages.push_back("line " + std::to_string(lineno) + ": " + e.message);
        } catch (const ParseError& e) {
            if (options.strict) throw;
            ++diag.skipped;
            diag.messages.push_back(e.what());
        }
    }
    return rows;
}

RawRecord parse_snapshot_line(const std::vector<std::string_view>& f) {
    if (f.size() != 9) throw FieldError{"expected 9 fields, got " + std::to_string(f.size())};
    RawRecord rec;
    rec.timestamp_us = to_int(f[0], "timestamp_us");
    if (rec.timestamp_us < 0) throw FieldError{"negative timestamp"};
    if (f[1] == "Q") {
        QuoteSnapshot q;
        q.bid_price = positive(f[2], "bid_price", "nonpositive price");
        q.bid_size = positive(f[3], "bid_size", "nonpositive size");
        q.ask_price = positive(f[4], "ask_price", "nonpositive price");
        q.ask_size = positive(f[5], "ask_size", "nonpositive size");
        if (q.bid_price >= q.ask_price) throw FieldError{"crossed or locked quote"};
        rec.body = q;
    } else if (f[1] == "T") {
        TradeRecord t;
        t.price = positive(f[6], "trade_price", "nonpositive price");
        t.volume = positive(f[7], "trade_volume", "nonpositive volume");
        t.side = to_side(f[8]);
        rec.body = t;
    } else {
        throw FieldError{"kind must be Q or T"};
    }
    return rec;
}

OrderEvent parse_event_line(const std::vector<std::string_view>& f) {
    if (f.size() != 4 && f.size() != 5)
        throw FieldError{"expected 4 or 5 fields, got " + std::to_string(f.size())};
    OrderEvent ev;
    ev.timestamp_us = to_int(f[0], "timestamp_us");
    if (ev.timestamp_us < 0) throw FieldError{"negative timestamp"};
    ev.etype = to_etype(f[1]);
    ev.side = to_side(f[2]);
    ev.volume = positive(f[3], "volume", "nonpositive volume");
    if (f.size() == 5 && !f[4].empty()) ev.price = positive(f[4], "price", "nonpositive price");
    return ev;
}

} // namespace

char to_char(Side side) noexcept { return side == Side::ask ? 'a' : 'b'; }

char to_char(EventType type) noexcept {
    switch (type) {
    case EventType::limit: return 'L';
    case EventType::cancel: return 'C';
    case EventType::trade: return 'T';
    }
    return '?';
}

std::vector<RawRecord> parse_records(std::istream& source, RecordFormat format,
                                     const ParseOptions& options, ParseDiagnostics* diagnostics) {
    if (format == RecordFormat::snapshot_csv)
        return read_csv<RawRecord>(source, {kSnapshotHeader}, options, diagnostics, parse_snapshot_line);

    return read_csv<RawRecord>(source, {kEventHeader, kEventHeaderPriced}, options, diagnostics,
                               [](const std::vector<std::string_view>& f) {
                                   const OrderEvent ev = parse_event_line(f);
                                   if (ev.etype != EventType::trade)
                                       throw FieldError{"only trade rows are raw records"};
                                   RawRecord rec;
                                   rec.timestamp_us = ev.timestamp_us;
                                   rec.body = TradeRecord{ev.price, ev.volume, ev.side};
                                   return rec;
                               });
}

std::vector<OrderEvent> parse_events(std::istream& source, const ParseOptions& options,
                                     ParseDiagnostics* diagnostics) {
    return read_csv<OrderEvent>(source, {kEventHeader, kEventHeaderPriced}, options, diagnostics,
                                parse_event_line);
}

void write_events(std::ostream& out, std::span<const OrderEvent> events) {
    out << kEventHeaderPriced << '\n';
    for (const auto& ev : events) {
        out << ev.timestamp_us << ',' << to_char(ev.etype) << ',' << to_char(ev.side) << ','
            << ev.volume << ',';
        if (ev.price > 0) out << ev.price;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

std::vector<OrderEvent> aggregate_simultaneous(std::span<const OrderEvent> events) {
    std::vector<OrderEvent> out;
    out.reserve(events.size());
    std::size_t group_start = 0;  // first output index of the current timestamp
    for (const auto& ev : events) {
        if (!out.empty() && ev.timestamp_us < out.back().timestamp_us)
            throw InvalidArgument("aggregate_simultaneous requires events sorted by timestamp");
        if (out.empty() || ev.timestamp_us != out.back().timestamp_us) group_start = out.size();
        auto same = std::find_if(out.begin() + static_cast<std::ptrdiff_t>(group_start), out.end(),
                                 [&](const OrderEvent& o) { return o.side == ev.side && o.etype == ev.etype; });
        if (same != out.end()) {
            same->volume += ev.volume;
        } else {
            out.push_back(ev);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

std::string to_string(BinningMode mode) {
    switch (mode) {
    case BinningMode::unsigned_trades: return "unsigned_trades";
    case BinningMode::signed_trades: return "signed_trades";
    case BinningMode::full_book: return "full_book";
    }
    return "unknown";
}

BinningMode binning_mode_from_string(const std::string& name) {
    if (name == "unsigned_trades") return BinningMode::unsigned_trades;
    if (name == "signed_trades") return BinningMode::signed_trades;
    if (name == "full_book") return BinningMode::full_book;
    throw InvalidArgument("unknown binning mode '" + name + "'");
}

BinningScheme::BinningScheme(BinningMode mode, std::vector<std::int64_t> edges)
    : mode_(mode), edges_(std::move(edges)) {
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (edges_[k] < 1) throw InvalidArgument("bin edges must be >= 1 contract");
        if (k > 0 && edges_[k] <= edges_[k - 1]) throw InvalidArgument("bin edges must be strictly increasing");
    }
}

BinningScheme BinningScheme::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InvalidArgument("binning scheme must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "mode" && key != "edges" && key != "name")
            throw InvalidArgument("binning scheme: unknown key '" + key + "'");
    }
    if (!doc.contains("mode") || !doc["mode"].is_string())
        throw InvalidArgument("binning scheme: 'mode' must be a string");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw InvalidArgument("binning scheme: 'edges' must be a list");
    std::vector<std::int64_t> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_number_integer()) throw InvalidArgument("binning scheme: edges must be integers");
        edges.push_back(e.get<std::int64_t>());
    }
    return BinningScheme(binning_mode_from_string(doc["mode"].get<std::string>()), std::move(edges));
}

BinningScheme BinningScheme::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open binning scheme '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("binning scheme '" + path.string() + "': " + e.what());
    }
    return from_json(doc);
}

nlohmann::json BinningScheme::to_json() const {
    return nlohmann::json{{"mode", to_string(mode_)}, {"edges", edges_}};
}

BinningScheme BinningScheme::bund_unsigned() { return {BinningMode::unsigned_trades, {1, 2, 3, 7, 20}}; }
BinningScheme BinningScheme::dax_unsigned() { return {BinningMode::unsigned_trades, {1, 2, 3, 5, 10}}; }
BinningScheme BinningScheme::four_bins(BinningMode mode) { return {mode, {1, 3, 10}}; }

BinningScheme BinningScheme::identity(int dimension) {
    if (dimension < 1) throw InvalidArgument("identity scheme needs dimension >= 1");
    std::vector<std::int64_t> edges(static_cast<std::size_t>(dimension - 1));
    std::iota(edges.begin(), edges.end(), 1);
    return {BinningMode::unsigned_trades, std::move(edges)};
}

int BinningScheme::dimension() const noexcept {
    switch (mode_) {
    case BinningMode::unsigned_trades: return bins();
    case BinningMode::signed_trades: return 2 * bins();
    case BinningMode::full_book: return 6 * bins();
    }
    return 0;
}

int BinningScheme::volume_bin(std::int64_t volume) const {
    if (volume < 1) throw InvalidArgument("volume must be >= 1");
    return static_cast<int>(std::lower_bound(edges_.begin(), edges_.end(), volume) - edges_.begin());
}

std::optional<int> BinningScheme::component_of(const OrderEvent& event) const {
    const int bin = volume_bin(event.volume);
    const int n = bins();
    switch (mode_) {
    case BinningMode::unsigned_trades:
        if (event.etype != EventType::trade) return std::nullopt;
        return bin;
    case BinningMode::signed_trades:
        if (event.etype != EventType::trade) return std::nullopt;
        return (event.side == Side::bid ? 0 : n) + bin;
    case BinningMode::full_book: {
        const int block = event.side == Side::ask ? 0 : 3 * n;
        return block + static_cast<int>(event.etype) * n + bin;
    }
    }
    return std::nullopt;
}

ComponentInfo BinningScheme::component(int index) const {
    if (index < 0 || index >= dimension()) throw InvalidArgument("component index out of range");
    const int n = bins();
    ComponentInfo info;
    info.bin = index % n;
    info.min_volume = info.bin == 0 ? 1 : edges_[static_cast<std::size_t>(info.bin - 1)] + 1;
    info.max_volume = info.bin < n - 1 ? edges_[static_cast<std::size_t>(info.bin)] : 0;
    const std::string bin_no = std::to_string(info.bin + 1);
    switch (mode_) {
    case BinningMode::unsigned_trades:
        info.label = "B" + bin_no;
        break;
    case BinningMode::signed_trades:
        info.side = index < n ? Side::bid : Side::ask;
        info.label = (index < n ? "S" : "B") + bin_no;
        break;
    case BinningMode::full_book: {
        info.side = index < 3 * n ? Side::ask : Side::bid;
        info.etype = static_cast<EventType>((index % (3 * n)) / n);
        info.label = std::string(1, to_char(info.etype)) + to_char(*info.side) + bin_no;
        break;
    }
    }
    return info;
}

std::vector<std::string> BinningScheme::labels() const {
    std::vector<std::string> out;
    for (int i = 0; i < dimension(); ++i) out.push_back(component(i).label);
    return out;
}

std::vector<std::string> BinningScheme::side_blocks() const {
    switch (mode_) {
    case BinningMode::unsigned_trades: return {};
    case BinningMode::signed_trades: return {"sell", "buy"};
    case BinningMode::full_book: return {"ask", "bid"};
    }
    return {};
}

OrderEvent BinningScheme::representative_event(int index, std::int64_t timestamp_us) const {
    const auto info = component(index);
    OrderEvent ev;
    ev.timestamp_us = timestamp_us;
    ev.etype = info.etype;
    ev.side = info.side.value_or(Side::ask);
    ev.volume = info.min_volume;
    return ev;
}

MultivariateEventStream assign_components(std::span<const OrderEvent> events,
                                          const BinningScheme& scheme, const SessionInfo& session) {
    const auto dim = static_cast<std::size_t>(scheme.dimension());
    std::vector<std::vector<double>> us(dim);
    std::vector<std::vector<Mark>> marks(dim);
    std::int64_t last = 0;
    for (const auto& ev : events) {
        if (ev.timestamp_us < last)
            throw InvalidArgument("assign_components requires events sorted by timestamp");
        last = ev.timestamp_us;
        const auto comp = scheme.component_of(ev);
        if (!comp) continue;
        us[static_cast<std::size_t>(*comp)].push_back(static_cast<double>(ev.timestamp_us));
        marks[static_cast<std::size_t>(*comp)].push_back(
            Mark{ev.volume, static_cast<std::int8_t>(ev.side == Side::ask ? 1 : -1)});
    }

    Session s(session.id, 0.0, dim);
    double latest = static_cast<double>(last) / 1e6;
    for (std::size_t c = 0; c < dim; ++c) {
        s.times[c] = us_to_seconds(us[c]);
        s.marks[c] = std::move(marks[c]);
        if (!s.times[c].empty()) latest = std::max(latest, s.times[c].back());
    }
    if (session.duration) {
        if (!(*session.duration > 0.0)) throw InvalidArgument("session duration must be positive");
        if (latest > *session.duration)
            throw InvalidArgument("session '" + session.id + "' has events after its end");
        s.duration = *session.duration;
    } else {
        s.duration = latest;
    }

    MultivariateEventStream stream(dim);
    stream.sessions.push_back(std::move(s));
    return stream;
}

std::vector<OrderEvent> stream_to_events(const Session& session, const BinningScheme& scheme) {
    std::vector<std::pair<double, OrderEvent>> tagged;
    for (std::size_t c = 0; c < session.dimension(); ++c) {
        for (std::size_t k = 0; k < session.times[c].size(); ++k) {
            const auto t_us = static_cast<std::int64_t>(std::llround(session.times[c][k] * 1e6));
            OrderEvent ev = scheme.representative_event(static_cast<int>(c), t_us);
            const Mark& m = session.marks[c][k];
            OrderEvent marked = ev;
            marked.volume = m.volume;
            if (m.volume >= 1 && scheme.component_of(marked) == static_cast<int>(c)) ev.volume = m.volume;
            tagged.emplace_back(session.times[c][k], ev);
        }
    }
    std::stable_sort(tagged.begin(), tagged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<OrderEvent> out;
    out.reserve(tagged.size());
    for (auto& [t, ev] : tagged) out.push_back(ev);
    return out;
}

// ---------------------------------------------------------------------------
// Robustness transforms
// ---------------------------------------------------------------------------

MultivariateEventStream randomize_timestamps(const MultivariateEventStream& stream,
                                             double round_to_us, double jitter_us,
                                             std::uint64_t seed, RandomizationReport* report) {
    if (!(round_to_us > 0.0)) throw InvalidArgument("round_to must be positive");
    if (!(jitter_us >= 0.0)) throw InvalidArgument("jitter width must be non-negative");
    RandomizationReport local;
    RandomizationReport& rep = report ? *report : local;

    MultivariateEventStream out(stream.dimension);
    for (std::size_t si = 0; si < stream.sessions.size(); ++si) {
        const Session& s = stream.sessions[si];
        Session r(s.id, s.duration, stream.dimension);
        const double end_us = s.duration * 1e6;
        for (std::size_t c = 0; c < stream.dimension; ++c) {
            Philox4x32 rng(seed, si * stream.dimension + c);
            std::vector<std::pair<double, Mark>> moved;
            moved.reserve(s.times[c].size());
            for (std::size_t k = 0; k < s.times[c].size(); ++k) {
                double t = std::round(s.times[c][k] * 1e6 / round_to_us) * round_to_us;
                if (jitter_us > 0.0) t -= rng.uniform() * jitter_us;
                if (t < 0.0) {
                    t = 0.0;
                    ++rep.clamped_low;
                } else if (t > end_us) {
                    t = std::floor(end_us);
                    ++rep.clamped_high;
                }
                moved.emplace_back(t, s.marks[c][k]);
            }
            std::stable_sort(moved.begin(), moved.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<double> us;
            us.reserve(moved.size());
            for (const auto& [t, m] : moved) {
                us.push_back(t);
                r.marks[c].push_back(m);
            }
            r.times[c] = us_to_seconds(us);
            // ties nudged past the session end are dropped and counted as clamped
            while (!r.times[c].empty() && r.times[c].back() > s.duration) {
                r.times[c].pop_back();
                r.marks[c].pop_back();
                ++rep.clamped_high;
            }
        }
        out.sessions.push_back(std::move(r));
    }
    return out;
}

MultivariateEventStream filter_session(const MultivariateEventStream& stream, double start, double end) {
    MultivariateEventStream out(stream.dimension);
    for (const auto& s : stream.sessions) {
        if (!(start >= 0.0 && start < end && end <= s.duration))
            throw InvalidArgument("filter_session requires 0 <= start < end <= session duration");
        // the session end itself stays inside a window that reaches it
        const bool closed = end == s.duration;
        Session f(s.id, end - start, stream.dimension);
        for (std::size_t c = 0; c < stream.dimension; ++c) {
            const auto& t = s.times[c];
            auto lo = std::lower_bound(t.begin(), t.end(), start);
            auto hi = closed ? std::upper_bound(t.begin(), t.end(), end) : std::lower_bound(t.begin(), t.end(), end);
            const auto from = static_cast<std::size_t>(lo - t.begin());
            const auto to = static_cast<std::size_t>(hi - t.begin());
            for (std::size_t k = from; k < to; ++k) {
                f.times[c].push_back(start == 0.0 ? t[k] : std::min(t[k] - start, f.duration));
                f.marks[c].push_back(s.marks[c][k]);
            }
            make_strictly_increasing(f.times[c]);
        }
        out.sessions.push_back(std::move(f));
    }
    return out;
}

} // namespace lobhawkes
