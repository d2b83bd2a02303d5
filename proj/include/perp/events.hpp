#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "perp/types.hpp"

namespace perp {

enum class EventType : uint8_t { book, price_change, last_trade_price, tick_size_change };

const char* to_string(EventType t);

struct BookPayload {
    std::vector<Level> bids;
    std::vector<Level> asks;
};

struct PriceChangePayload {
    struct Change {
        BookSide side = BookSide::bid;
        Price price = 0.0;
        Size size = 0.0;  // absolute new size; 0 deletes the level
    };
    std::vector<Change> changes;
    // best bid/ask as reported by the feed alongside the delta, used to score
    // reconstruction agreement
    std::optional<Price> feed_best_bid;
    std::optional<Price> feed_best_ask;
};

struct TradePayload {
    Price price = 0.0;
    Size size = 0.0;
    TradeSide side = TradeSide::buy;
    double fee = 0.0;
    std::string tx;
};

struct TickSizePayload {
    double tick_size = 0.01;
};

struct RawEvent {
    Ts timestamp_received = 0;
    Ts timestamp = 0;
    EventType event_type = EventType::book;
    std::string market;
    std::string asset_id;
    int64_t seq = 0;
    std::variant<BookPayload, PriceChangePayload, TradePayload, TickSizePayload> payload;

    const BookPayload& book() const { return std::get<BookPayload>(payload); }
    const PriceChangePayload& price_change() const { return std::get<PriceChangePayload>(payload); }
    const TradePayload& trade() const { return std::get<TradePayload>(payload); }
    const TickSizePayload& tick_size_change() const { return std::get<TickSizePayload>(payload); }
};

// Cleaned event: same record plus its position in the per-market cleaned
// order and the dormancy marker for all-empty book snapshots.
struct CleanEvent : RawEvent {
    int64_t monotone_index = 0;
    bool dormant = false;
};

// One line of canonical JSONL -> typed event.  Throws Error with kind
// malformed_record / unknown_event_type / out_of_range_price.
RawEvent parse_event(const std::string& line);

// Typed event -> canonical JSONL line (no trailing newline). Byte-stable:
// identical events serialize identically on every run.
std::string serialize_event(const RawEvent& ev);

// Shortest-round-trip decimal formatting for payload numerics.
std::string format_decimal(double v);

// Strict decimal parse (full consumption, finite). Returns nullopt on junk.
std::optional<double> parse_decimal(const std::string& s);

}  // namespace perp
