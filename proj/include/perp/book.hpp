#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "perp/events.hpp"
#include "perp/types.hpp"

namespace perp {

struct DepthProfile {
    Size bid_depth_within = 0.0;
    Size ask_depth_within = 0.0;
    int window_bps = 0;

    Size total() const { return bid_depth_within + ask_depth_within; }
};

struct OrderBookState {
    // best bid first / best ask first
    std::map<Price, Size, std::greater<Price>> bids;
    std::map<Price, Size> asks;
    Ts last_snapshot_ts = -1;
    Ts as_of_ts = -1;
    double tick_size = 0.01;
    bool has_snapshot = false;
    bool dormant = false;  // last snapshot had both sides empty
    std::optional<TradePayload> last_trade;
    Ts last_trade_ts = -1;

    std::optional<Level> best_bid() const {
        if (bids.empty()) return std::nullopt;
        return Level{bids.begin()->first, bids.begin()->second};
    }
    std::optional<Level> best_ask() const {
        if (asks.empty()) return std::nullopt;
        return Level{asks.begin()->first, asks.begin()->second};
    }
    std::optional<Price> mid() const {
        if (bids.empty() || asks.empty()) return std::nullopt;
        return 0.5 * (bids.begin()->first + asks.begin()->first);
    }
};

// Apply one cleaned event in place.  book events replace all levels,
// price_change overwrites the named levels (size 0 deletes), trades and tick
// changes only touch metadata.  Throws stale_event when the event is older
// than the book's as_of time.
void apply_event(OrderBookState& book, const RawEvent& ev);

// Reconstruct the book state as of time t (inclusive) by replaying the
// cleaned per-market sequence.  Throws no_snapshot_before when no book
// snapshot exists at or before t.
OrderBookState book_at(const std::vector<CleanEvent>& events, Ts t);

// Displayed size within +/- window_bps of the given mid, per side.
// window_bps is converted to absolute price as window_bps / 10000.
DepthProfile depth_within(const OrderBookState& book, Price mid, int window_bps);

// Same but against the book's own mid; zeros when the mid is undefined.
DepthProfile depth_within(const OrderBookState& book, int window_bps);

// Incremental replay cursor: keeps one book and a position in the event
// sequence, advancing monotonically.  The per-market simulation loops use
// this instead of book_at to stay O(events).
class BookCursor {
public:
    explicit BookCursor(const std::vector<CleanEvent>& events) : events_(&events) {}

    // apply all events with timestamp_received <= t; returns events applied
    size_t advance_to(Ts t);
    // apply exactly one next event if any; returns false at end
    bool step();

    const OrderBookState& book() const { return book_; }
    size_t position() const { return pos_; }
    bool done() const { return pos_ >= events_->size(); }
    const CleanEvent* peek() const { return done() ? nullptr : &(*events_)[pos_]; }

private:
    const std::vector<CleanEvent>* events_;
    OrderBookState book_;
    size_t pos_ = 0;
};

}  // namespace perp
