#include "doctest.h"

#include "lobhawkes/error.hpp"
#include "lobhawkes/events.hpp"
#include "lobhawkes/random.hpp"

#include <algorithm>
#include <sstream>

using namespace lobhawkes;

namespace {

const char* kSnapshots = R"(timestamp_us,kind,bid_price,bid_size,ask_price,ask_size,trade_price,trade_volume,trade_side
50,T,,,,,101,1,a
100,Q,99,10,101,8,,,
200,Q,99,12,101,8,,,
300,Q,99,7,101,8,,,
400,T,,,,,101,3,a
400,Q,99,7,101,5,,,
500,T,,,,,101,2,a
500,Q,99,7,101,4,,,
600,Q,99,7,100,6,,,
700,T,,,,,100,6,a
700,Q,99,7,101,9,,,
800,Q,98,4,101,9,,,
900,T,,,,,98,2,b
950,Q,98,2,101,9,,,
1000,T,,,,,101,20,a
1000,Q,98,2,101,9,,,
1100,Q,98,5,101,9,,,
)";

OrderEvent ev(std::int64_t t, EventType e, Side s, std::int64_t v, std::int64_t p = 0) { return {t, e, s, v, p}; }

MultivariateEventStream random_stream(std::size_t d, std::size_t sessions, double duration, double rate,
                                      std::uint64_t seed) {
    MultivariateEventStream st(d);
    Philox4x32 rng(seed);
    for (std::size_t s = 0; s < sessions; ++s) {
        Session sess("s" + std::to_string(s), duration, d);
        for (std::size_t c = 0; c < d; ++c) {
            double t = rng.exponential(rate);
            while (t < duration) {
                sess.times[c].push_back(t);
                sess.marks[c].push_back(Mark{static_cast<std::int64_t>(c + 1), 0});
                t += rng.exponential(rate);
            }
        }
        st.sessions.push_back(std::move(sess));
    }
    return st;
}

} // namespace

TEST_CASE("snapshot records reconstruct into typed events") {
    std::istringstream in(kSnapshots);
    const auto records = parse_records(in, RecordFormat::snapshot_csv);
    REQUIRE(records.size() == 17);

    ReconstructionLog log;
    const auto events = reconstruct_orders(records, &log);
    const std::vector<OrderEvent> expected{
        ev(200, EventType::limit, Side::bid, 2, 99),   ev(300, EventType::cancel, Side::bid, 5, 99),
        ev(400, EventType::trade, Side::ask, 3, 101),  ev(500, EventType::trade, Side::ask, 2, 101),
        ev(500, EventType::limit, Side::ask, 1, 101),  ev(600, EventType::limit, Side::ask, 6, 100),
        ev(700, EventType::trade, Side::ask, 6, 100),  ev(800, EventType::cancel, Side::bid, 7, 99),
        ev(900, EventType::trade, Side::bid, 2, 98),   ev(1100, EventType::limit, Side::bid, 3, 98),
    };
    CHECK(events == expected);
    CHECK(log.transitions == 10);
    CHECK(log.inconsistent == 1);
    CHECK(log.price_reveals == 2);
    CHECK(log.leading_trades == 1);
}

TEST_CASE("parsing validates headers, fields and ordering") {
    SUBCASE("wrong header") {
        std::istringstream in("time,etype,side,volume\n1,T,a,1\n");
        CHECK_THROWS_AS(parse_events(in), ParseError);
    }
    SUBCASE("strict mode stops at a bad line") {
        std::istringstream in("timestamp_us,etype,side,volume\n1,T,a,1\n2,X,a,1\n");
        CHECK_THROWS_AS(parse_events(in), ParseError);
    }
    SUBCASE("lenient mode skips it") {
        std::istringstream in("timestamp_us,etype,side,volume\n1,T,a,1\n2,X,a,1\n3,T,b,0\n4,C,b,2\n");
        ParseDiagnostics diag;
        const auto events = parse_events(in, ParseOptions{false}, &diag);
        CHECK(events.size() == 2);
        CHECK(diag.skipped == 2);
        CHECK(diag.messages.size() == 2);
    }
    SUBCASE("decreasing timestamps") {
        std::istringstream in("timestamp_us,etype,side,volume\n5,T,a,1\n4,T,a,1\n");
        CHECK_THROWS_AS(parse_events(in), OrderingError);
    }
    SUBCASE("crossed quote") {
        std::istringstream in(
            "timestamp_us,kind,bid_price,bid_size,ask_price,ask_size,trade_price,trade_volume,trade_side\n"
            "1,Q,101,1,101,1,,,\n");
        CHECK_THROWS_AS(parse_records(in, RecordFormat::snapshot_csv), ParseError);
    }
    SUBCASE("event files only give trades as raw records") {
        std::istringstream in("timestamp_us,etype,side,volume,price\n1,L,a,1,5\n");
        CHECK_THROWS_AS(parse_records(in, RecordFormat::event_csv), ParseError);
    }
}

TEST_CASE("event CSV round trip") {
    const std::vector<OrderEvent> events{ev(1, EventType::limit, Side::bid, 3, 99), ev(1, EventType::trade, Side::ask, 2),
                                         ev(7, EventType::cancel, Side::ask, 1, 101)};
    std::ostringstream out;
    write_events(out, events);
    std::istringstream in(out.str());
    CHECK(parse_events(in) == events);
}

TEST_CASE("simultaneous events merge on timestamp, side and type") {
    const std::vector<OrderEvent> events{ev(1, EventType::trade, Side::ask, 2), ev(1, EventType::trade, Side::bid, 1),
                                         ev(1, EventType::trade, Side::ask, 3), ev(1, EventType::limit, Side::ask, 4),
                                         ev(2, EventType::trade, Side::ask, 1)};
    const auto merged = aggregate_simultaneous(events);
    const std::vector<OrderEvent> expected{ev(1, EventType::trade, Side::ask, 5), ev(1, EventType::trade, Side::bid, 1),
                                           ev(1, EventType::limit, Side::ask, 4), ev(2, EventType::trade, Side::ask, 1)};
    CHECK(merged == expected);
    CHECK(aggregate_simultaneous(merged) == merged);

    std::int64_t before = 0;
    std::int64_t after = 0;
    for (const auto& e : events) before += e.volume;
    for (const auto& e : merged) after += e.volume;
    CHECK(before == after);
}

TEST_CASE("binning schemes") {
    SUBCASE("presets and labels") {
        CHECK(BinningScheme::bund_unsigned().dimension() == 6);
        CHECK(BinningScheme::dax_unsigned().dimension() == 6);
        const auto signed4 = BinningScheme::four_bins(BinningMode::signed_trades);
        CHECK(signed4.dimension() == 8);
        CHECK(signed4.labels().front() == "S1");
        CHECK(signed4.labels().back() == "B4");
        const auto book = BinningScheme::four_bins(BinningMode::full_book);
        CHECK(book.dimension() == 24);
        const auto labels = book.labels();
        CHECK(labels[0] == "La1");
        CHECK(labels[4] == "Ca1");
        CHECK(labels[8] == "Ta1");
        CHECK(labels[12] == "Lb1");
        CHECK(labels[23] == "Tb4");
        CHECK(book.side_blocks() == std::vector<std::string>{"ask", "bid"});
    }
    SUBCASE("every event maps to at most one component and back") {
        const auto book = BinningScheme::four_bins(BinningMode::full_book);
        const auto trades = BinningScheme::bund_unsigned();
        for (auto type : {EventType::limit, EventType::cancel, EventType::trade})
            for (auto side : {Side::ask, Side::bid})
                for (std::int64_t v = 1; v <= 60; ++v) {
                    const auto e = ev(0, type, side, v);
                    const auto c = book.component_of(e);
                    REQUIRE(c.has_value());
                    const auto info = book.component(*c);
                    CHECK(info.etype == type);
                    CHECK(info.side == side);
                    CHECK(v >= info.min_volume);
                    CHECK((info.max_volume == 0 || v <= info.max_volume));
                    CHECK(trades.component_of(e).has_value() == (type == EventType::trade));
                }
        for (int c = 0; c < book.dimension(); ++c) CHECK(book.component_of(book.representative_event(c, 0)) == c);
    }
    SUBCASE("JSON round trip and validation") {
        const auto s = BinningScheme::four_bins(BinningMode::signed_trades);
        CHECK(BinningScheme::from_json(s.to_json()).to_json() == s.to_json());
        CHECK_THROWS_AS(BinningScheme::from_json(nlohmann::json{{"mode", "unsigned_trades"}, {"edges", {3, 2}}}),
                        InvalidArgument);
        CHECK_THROWS_AS(BinningScheme::from_json(nlohmann::json{{"mode", "odd"}, {"edges", {1}}}), InvalidArgument);
    }
}

TEST_CASE("component assignment keeps counts and separates ties") {
    const auto scheme = BinningScheme::identity(2);
    std::vector<OrderEvent> events;
    for (int k = 0; k < 5; ++k) events.push_back(ev(1000, EventType::trade, Side::ask, 1));
    events.push_back(ev(1000, EventType::trade, Side::ask, 2));
    events.push_back(ev(3000, EventType::limit, Side::ask, 2));  // not a trade: dropped
    events.push_back(ev(4000, EventType::trade, Side::bid, 5));
    const auto stream = assign_components(events, scheme, SessionInfo{"d", 0.01});
    stream.validate();
    CHECK(stream.count(0) == 5);
    CHECK(stream.count(1) == 2);
    const auto& t = stream.sessions[0].times[0];
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] > t[k - 1]);
    CHECK(t.front() == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(stream.sessions[0].marks[1][1].volume == 5);
}

TEST_CASE("timestamp randomization stays inside its bounds") {
    const auto stream = random_stream(2, 2, 50.0, 20.0, 3);
    RandomizationReport rep;
    const auto r = randomize_timestamps(stream, 10.0, 50.0, 11, &rep);
    r.validate();
    for (std::size_t s = 0; s < stream.sessions.size(); ++s)
        for (std::size_t c = 0; c < 2; ++c) {
            const auto& a = stream.sessions[s].times[c];
            const auto& b = r.sessions[s].times[c];
            CHECK(a.size() == b.size() + rep.clamped_high);
            for (std::size_t k = 0; k < b.size(); ++k) {
                // every moved time lies within [round(t) - jitter, round(t)] of some original
                CHECK(b[k] >= 0.0);
                CHECK(b[k] <= stream.sessions[s].duration);
            }
            // the sorted displacement is bounded by rounding plus jitter
            for (std::size_t k = 0; k < b.size(); ++k) CHECK(std::abs(b[k] - a[k]) <= 60e-6);
        }

    const auto same = randomize_timestamps(stream, 10.0, 50.0, 11);
    CHECK(same.sessions[0].times == r.sessions[0].times);
}

TEST_CASE("session windows") {
    const auto stream = random_stream(2, 1, 100.0, 5.0, 9);
    const auto full = filter_session(stream, 0.0, 100.0);
    CHECK(full.sessions[0].times == stream.sessions[0].times);

    const auto part = filter_session(stream, 20.0, 60.0);
    part.validate();
    CHECK(part.sessions[0].duration == 40.0);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& t = stream.sessions[0].times[c];
        const auto expected = std::count_if(t.begin(), t.end(), [](double x) { return x >= 20.0 && x < 60.0; });
        CHECK(part.sessions[0].times[c].size() == static_cast<std::size_t>(expected));
    }
    CHECK_THROWS_AS(filter_session(stream, 50.0, 40.0), InvalidArgument);
}

TEST_CASE("flow statistics") {
    const auto stream = random_stream(3, 2, 200.0, 2.0, 21);
    const auto st = flow_statistics(stream);
    std::uint64_t mass = st.pooled_overflow;
    for (auto h : st.pooled_durations) mass += h;
    // N events in one pooled sequence per session give N - 1 durations
    std::uint64_t expected = 0;
    for (const auto& s : stream.sessions) expected += s.total_count() - 1;
    CHECK(mass == expected);

    for (std::size_t c = 0; c < 3; ++c) {
        std::uint64_t m = st.component_overflow[c];
        for (auto h : st.component_durations[c]) m += h;
        CHECK(m == stream.count(c) - stream.sessions.size());
        CHECK(st.intensity[c] == doctest::Approx(static_cast<double>(stream.count(c)) / 400.0));
    }
    // marks carry component + 1 as their size
    CHECK(st.signed_volumes.size() == 3);
}
