#include <doctest.h>

#include "perp/book.hpp"

using namespace perp;

namespace {

RawEvent snapshot(Ts ts, int64_t seq, std::vector<Level> bids, std::vector<Level> asks) {
    RawEvent ev;
    ev.timestamp_received = ts;
    ev.timestamp = ts;
    ev.event_type = EventType::book;
    ev.market = "m";
    ev.asset_id = "a";
    ev.seq = seq;
    ev.payload = BookPayload{std::move(bids), std::move(asks)};
    return ev;
}

RawEvent delta(Ts ts, int64_t seq, std::vector<PriceChangePayload::Change> changes) {
    RawEvent ev;
    ev.timestamp_received = ts;
    ev.timestamp = ts;
    ev.event_type = EventType::price_change;
    ev.market = "m";
    ev.asset_id = "a";
    ev.seq = seq;
    ev.payload = PriceChangePayload{std::move(changes), std::nullopt, std::nullopt};
    return ev;
}

CleanEvent cleaned(RawEvent ev, int64_t idx) {
    CleanEvent c;
    static_cast<RawEvent&>(c) = std::move(ev);
    c.monotone_index = idx;
    c.dormant = false;
    return c;
}

std::vector<CleanEvent> small_sequence() {
    std::vector<CleanEvent> evs;
    evs.push_back(cleaned(snapshot(0, 1, {{0.49, 50}}, {{0.51, 60}}), 0));
    evs.push_back(cleaned(delta(5, 2, {{BookSide::bid, 0.48, 10}}), 1));
    evs.push_back(cleaned(delta(8, 3, {{BookSide::ask, 0.51, 0}}), 2));
    return evs;
}

}  // namespace

TEST_CASE("snapshot replaces all levels") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}, {0.48, 10}}, {{0.51, 60}}));
    CHECK(book.has_snapshot);
    CHECK(book.bids.size() == 2);
    CHECK(book.best_bid()->price == 0.49);
    CHECK(book.best_ask()->price == 0.51);

    apply_event(book, snapshot(10, 2, {{0.40, 5}}, {{0.60, 5}}));
    CHECK(book.bids.size() == 1);
    CHECK(book.best_bid()->price == 0.40);
}

TEST_CASE("zero-size snapshot levels are skipped") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}, {0.45, 0}}, {{0.51, 0}}));
    CHECK(book.bids.size() == 1);
    CHECK(book.asks.empty());
}

TEST_CASE("price_change deletes at size zero and upserts otherwise") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}}, {{0.51, 60}}));
    apply_event(book, delta(5, 2, {{BookSide::bid, 0.48, 10}}));
    CHECK(book.bids.size() == 2);
    CHECK(book.bids.at(0.48) == 10.0);
    apply_event(book, delta(8, 3, {{BookSide::ask, 0.51, 0}}));
    CHECK(book.asks.empty());
    CHECK_FALSE(book.mid().has_value());
}

TEST_CASE("deltas before the first snapshot are ignored") {
    OrderBookState book;
    apply_event(book, delta(1, 1, {{BookSide::bid, 0.40, 5}}));
    CHECK(book.bids.empty());
    CHECK_FALSE(book.has_snapshot);
    apply_event(book, snapshot(2, 2, {{0.49, 50}}, {{0.51, 60}}));
    CHECK(book.bids.size() == 1);
}

TEST_CASE("events older than the book are stale") {
    OrderBookState book;
    apply_event(book, snapshot(10, 1, {{0.49, 50}}, {{0.51, 60}}));
    try {
        apply_event(book, delta(5, 2, {{BookSide::bid, 0.48, 10}}));
        FAIL("expected stale_event");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::stale_event);
    }
}

TEST_CASE("trades and tick changes only touch metadata") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}}, {{0.51, 60}}));

    RawEvent tr;
    tr.timestamp_received = 3;
    tr.timestamp = 3;
    tr.event_type = EventType::last_trade_price;
    tr.market = "m";
    tr.asset_id = "a";
    tr.seq = 2;
    tr.payload = TradePayload{0.50, 7.0, TradeSide::buy, 0.0, "t1"};
    apply_event(book, tr);
    REQUIRE(book.last_trade.has_value());
    CHECK(book.last_trade->price == 0.50);
    CHECK(book.last_trade_ts == 3);
    CHECK(book.bids.size() == 1);

    RawEvent tk;
    tk.timestamp_received = 4;
    tk.timestamp = 4;
    tk.event_type = EventType::tick_size_change;
    tk.market = "m";
    tk.asset_id = "a";
    tk.seq = 3;
    tk.payload = TickSizePayload{0.001};
    apply_event(book, tk);
    CHECK(book.tick_size == 0.001);
}

TEST_CASE("book_at replays up to the cutoff inclusive") {
    auto evs = small_sequence();
    OrderBookState at3 = book_at(evs, 3);
    CHECK(at3.bids.size() == 1);
    CHECK(at3.asks.size() == 1);

    OrderBookState at5 = book_at(evs, 5);
    CHECK(at5.bids.size() == 2);

    OrderBookState at8 = book_at(evs, 8);
    CHECK(at8.asks.empty());
}

TEST_CASE("book_at before any snapshot throws") {
    std::vector<CleanEvent> evs;
    evs.push_back(cleaned(delta(5, 1, {{BookSide::bid, 0.4, 5}}), 0));
    evs.push_back(cleaned(snapshot(10, 2, {{0.49, 50}}, {{0.51, 60}}), 1));
    try {
        book_at(evs, 7);
        FAIL("expected no_snapshot_before");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::no_snapshot_before);
    }
    CHECK_NOTHROW(book_at(evs, 10));
}

TEST_CASE("depth within a band sums displayed size per side") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}, {0.40, 99}}, {{0.51, 60}, {0.53, 70}}));
    DepthProfile d = depth_within(book, 0.50, 200);
    CHECK(d.bid_depth_within == 50.0);
    CHECK(d.ask_depth_within == 60.0);  // 0.53 sits outside +/- 0.02
    CHECK(d.total() == 110.0);
    CHECK(d.window_bps == 200);

    DepthProfile wide = depth_within(book, 0.50, 400);
    CHECK(wide.ask_depth_within == 130.0);

    OrderBookState empty;
    DepthProfile z = depth_within(empty, 0.50, 200);
    CHECK(z.total() == 0.0);
    DepthProfile no_mid = depth_within(empty, 200);
    CHECK(no_mid.total() == 0.0);
}

TEST_CASE("depth is monotone in the window width") {
    OrderBookState book;
    apply_event(book, snapshot(0, 1, {{0.49, 50}, {0.47, 20}, {0.44, 30}},
                               {{0.51, 60}, {0.55, 40}}));
    double prev = -1.0;
    for (int bps : {50, 100, 200, 400, 800, 1600}) {
        double cur = depth_within(book, 0.50, bps).total();
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("reapplying the same snapshot is idempotent") {
    OrderBookState book;
    auto snap = snapshot(0, 1, {{0.49, 50}}, {{0.51, 60}});
    apply_event(book, snap);
    auto bids_before = book.bids;
    auto asks_before = book.asks;
    apply_event(book, snap);
    CHECK(book.bids == bids_before);
    CHECK(book.asks == asks_before);
}

TEST_CASE("cursor replay agrees with full-prefix replay") {
    auto evs = small_sequence();
    BookCursor cur(evs);
    for (Ts t : {0, 5, 8}) {
        cur.advance_to(t);
        OrderBookState ref = book_at(evs, t);
        CHECK(cur.book().bids == ref.bids);
        CHECK(cur.book().asks == ref.asks);
    }
    CHECK(cur.done());
}

TEST_CASE("cursor steps one event at a time") {
    auto evs = small_sequence();
    BookCursor cur(evs);
    CHECK(cur.step());
    CHECK(cur.position() == 1);
    CHECK(cur.book().has_snapshot);
    CHECK(cur.step());
    CHECK(cur.step());
    CHECK_FALSE(cur.step());
    CHECK(cur.done());
    CHECK(cur.peek() == nullptr);
}

TEST_CASE("advance_to applies events at the boundary timestamp") {
    auto evs = small_sequence();
    BookCursor cur(evs);
    size_t n = cur.advance_to(5);
    CHECK(n == 2);
    CHECK(cur.book().bids.size() == 2);
    CHECK(cur.advance_to(4) == 0);  // never goes backwards
}
