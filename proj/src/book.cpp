#include "perp/book.hpp"

namespace perp {

void apply_event(OrderBookState& book, const RawEvent& ev) {
    if (ev.timestamp_received < book.as_of_ts)
        throw Error(Error::Kind::stale_event,
                    "event at " + std::to_string(ev.timestamp_received) + " older than book as_of " +
                        std::to_string(book.as_of_ts));
    book.as_of_ts = ev.timestamp_received;

    switch (ev.event_type) {
        case EventType::book: {
            const auto& bp = ev.book();
            book.bids.clear();
            book.asks.clear();
            for (const auto& l : bp.bids)
                if (l.size > 0.0) book.bids[l.price] = l.size;
            for (const auto& l : bp.asks)
                if (l.size > 0.0) book.asks[l.price] = l.size;
            book.last_snapshot_ts = ev.timestamp_received;
            book.has_snapshot = true;
            book.dormant = bp.bids.empty() && bp.asks.empty();
            break;
        }
        case EventType::price_change: {
            if (!book.has_snapshot) break;  // deltas before the first snapshot carry no base state
            for (const auto& c : ev.price_change().changes) {
                if (c.side == BookSide::bid) {
                    if (c.size > 0.0) book.bids[c.price] = c.size;
                    else book.bids.erase(c.price);
                } else {
                    if (c.size > 0.0) book.asks[c.price] = c.size;
                    else book.asks.erase(c.price);
                }
            }
            break;
        }
        case EventType::last_trade_price:
            book.last_trade = ev.trade();
            book.last_trade_ts = ev.timestamp_received;
            break;
        case EventType::tick_size_change:
            book.tick_size = ev.tick_size_change().tick_size;
            break;
    }
}

OrderBookState book_at(const std::vector<CleanEvent>& events, Ts t) {
    // start from the most recent snapshot at or before t, then roll deltas
    size_t start = events.size();
    for (size_t i = 0; i < events.size(); ++i) {
        if (events[i].timestamp_received > t) break;
        if (events[i].event_type == EventType::book) start = i;
    }
    if (start == events.size())
        throw Error(Error::Kind::no_snapshot_before, "no book snapshot at or before " + std::to_string(t));

    OrderBookState book;
    for (size_t i = start; i < events.size() && events[i].timestamp_received <= t; ++i)
        apply_event(book, events[i]);
    return book;
}

DepthProfile depth_within(const OrderBookState& book, Price mid, int window_bps) {
    DepthProfile d;
    d.window_bps = window_bps;
    const double window = static_cast<double>(window_bps) / 10000.0;
    for (const auto& [p, s] : book.bids) {
        if (p < mid - window) break;  // descending order, rest are further away
        d.bid_depth_within += s;
    }
    for (const auto& [p, s] : book.asks) {
        if (p > mid + window) break;
        d.ask_depth_within += s;
    }
    return d;
}

DepthProfile depth_within(const OrderBookState& book, int window_bps) {
    auto m = book.mid();
    if (!m) return DepthProfile{0.0, 0.0, window_bps};
    return depth_within(book, *m, window_bps);
}

size_t BookCursor::advance_to(Ts t) {
    size_t n = 0;
    while (pos_ < events_->size() && (*events_)[pos_].timestamp_received <= t) {
        apply_event(book_, (*events_)[pos_]);
        ++pos_;
        ++n;
    }
    return n;
}

bool BookCursor::step() {
    if (done()) return false;
    apply_event(book_, (*events_)[pos_]);
    ++pos_;
    return true;
}

}  // namespace perp
