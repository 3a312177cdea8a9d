#include "lobhawkes/events.hpp"

#include <array>
#include <optional>

namespace lobhawkes {

namespace {

struct BookSide {
    std::int64_t price = 0;
    std::int64_t size = 0;
};

int slot(Side side) { return side == Side::ask ? 0 : 1; }

/// True when `next` is a better quote than `prev` on this side.
bool improves(Side side, std::int64_t prev, std::int64_t next) {
    return side == Side::ask ? next < prev : next > prev;
}

} // namespace

std::vector<OrderEvent> reconstruct_orders(std::span<const RawRecord> records, ReconstructionLog* log) {
    ReconstructionLog local;
    ReconstructionLog& lg = log ? *log : local;
    std::vector<OrderEvent> out;

    std::optional<std::array<BookSide, 2>> book;
    std::array<std::int64_t, 2> pending{0, 0};  // traded volume since the last snapshot

    std::size_t k = 0;
    while (k < records.size()) {
        const std::int64_t ts = records[k].timestamp_us;
        std::size_t end = k;
        while (end < records.size() && records[end].timestamp_us == ts) ++end;

        std::vector<OrderEvent> trades;
        std::array<std::int64_t, 2> tv = pending;
        const QuoteSnapshot* snap = nullptr;
        for (std::size_t r = k; r < end; ++r) {
            if (records[r].is_trade()) {
                const auto& t = records[r].trade();
                trades.push_back(OrderEvent{ts, EventType::trade, t.side, t.volume, t.price});
                tv[static_cast<std::size_t>(slot(t.side))] += t.volume;
            } else {
                snap = &records[r].quote();
            }
        }
        k = end;

        if (!book) {
            if (!trades.empty()) {
                lg.leading_trades += trades.size();
                lg.entries.push_back("t=" + std::to_string(ts) + ": trade before the first snapshot ignored");
            }
            if (snap) book = std::array<BookSide, 2>{BookSide{snap->ask_price, snap->ask_size},
                                                     BookSide{snap->bid_price, snap->bid_size}};
            continue;
        }

        if (!snap) {
            out.insert(out.end(), trades.begin(), trades.end());
            pending = tv;
            continue;
        }

        ++lg.transitions;
        const std::array<BookSide, 2> next{BookSide{snap->ask_price, snap->ask_size},
                                           BookSide{snap->bid_price, snap->bid_size}};
        std::vector<OrderEvent> quote_events;
        bool consistent = true;
        for (Side side : {Side::ask, Side::bid}) {
            const auto s = static_cast<std::size_t>(slot(side));
            const BookSide& old_q = (*book)[s];
            const BookSide& new_q = next[s];
            if (new_q.price == old_q.price) {
                if (tv[s] > old_q.size) {
                    consistent = false;
                    lg.entries.push_back("t=" + std::to_string(ts) + ": traded " + std::to_string(tv[s]) +
                                         " exceeds queue " + std::to_string(old_q.size) + " at " +
                                         to_char(side));
                    break;
                }
                const std::int64_t net = new_q.size - (old_q.size - tv[s]);
                if (net > 0) quote_events.push_back({ts, EventType::limit, side, net, new_q.price});
                if (net < 0) quote_events.push_back({ts, EventType::cancel, side, -net, old_q.price});
            } else if (improves(side, old_q.price, new_q.price)) {
                quote_events.push_back({ts, EventType::limit, side, new_q.size, new_q.price});
            } else {
                if (old_q.size > tv[s])
                    quote_events.push_back({ts, EventType::cancel, side, old_q.size - tv[s], old_q.price});
                ++lg.price_reveals;
            }
        }

        book = next;
        pending = {0, 0};
        if (!consistent) {
            ++lg.inconsistent;
            continue;
        }
        out.insert(out.end(), trades.begin(), trades.end());
        out.insert(out.end(), quote_events.begin(), quote_events.end());
    }
    return out;
}

} // namespace lobhawkes
