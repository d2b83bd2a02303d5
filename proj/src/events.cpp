#include "perp/events.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace perp {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(MarketClass c) {
    switch (c) {
        case MarketClass::politics: return "politics";
        case MarketClass::sports: return "sports";
        case MarketClass::crypto: return "crypto";
        default: return "other";
    }
}

MarketClass market_class_from_string(const std::string& s) {
    if (s == "politics") return MarketClass::politics;
    if (s == "sports") return MarketClass::sports;
    if (s == "crypto") return MarketClass::crypto;
    return MarketClass::other;
}

const char* to_string(EventType t) {
    switch (t) {
        case EventType::book: return "book";
        case EventType::price_change: return "price_change";
        case EventType::last_trade_price: return "last_trade_price";
        default: return "tick_size_change";
    }
}

std::string format_decimal(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_decimal(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    const char* end = begin + s.size();
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

namespace {

[[noreturn]] void malformed(const std::string& why) {
    throw Error(Error::Kind::malformed_record, "malformed record: " + why);
}

double require_decimal(const json& j, const char* field) {
    if (!j.contains(field)) malformed(std::string("missing field ") + field);
    const auto& v = j.at(field);
    std::optional<double> d;
    if (v.is_string()) {
        d = parse_decimal(v.get<std::string>());
    } else if (v.is_number()) {
        d = v.get<double>();
    }
    if (!d) malformed(std::string("bad numeric in ") + field);
    return *d;
}

Price require_price(const json& j, const char* field) {
    double p = require_decimal(j, field);
    if (p < 0.0 || p > 1.0)
        throw Error(Error::Kind::out_of_range_price, "price out of [0,1]: " + format_decimal(p));
    return p;
}

Size require_size(const json& j, const char* field) {
    double s = require_decimal(j, field);
    if (s < 0.0) malformed("negative size");
    return s;
}

int64_t require_int(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number_integer())
        malformed(std::string("missing or non-integer ") + field);
    return j.at(field).get<int64_t>();
}

std::string require_string(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string())
        malformed(std::string("missing or non-string ") + field);
    return j.at(field).get<std::string>();
}

std::vector<Level> parse_levels(const json& arr, const char* what) {
    if (!arr.is_array()) malformed(std::string(what) + " is not an array");
    std::vector<Level> out;
    out.reserve(arr.size());
    for (const auto& lv : arr) {
        Level l;
        l.price = require_price(lv, "price");
        l.size = require_size(lv, "size");
        out.push_back(l);
    }
    return out;
}

void put_levels(ordered_json& obj, const char* key, const std::vector<Level>& levels) {
    ordered_json arr = ordered_json::array();
    for (const auto& l : levels) {
        ordered_json lv;
        lv["price"] = format_decimal(l.price);
        lv["size"] = format_decimal(l.size);
        arr.push_back(std::move(lv));
    }
    obj[key] = std::move(arr);
}

}  // namespace

RawEvent parse_event(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    if (!j.is_object()) malformed("not an object");

    RawEvent ev;
    ev.timestamp_received = require_int(j, "timestamp_received");
    ev.timestamp = require_int(j, "timestamp");
    if (ev.timestamp_received <= 0) malformed("timestamp_received must be positive");
    ev.market = require_string(j, "market");
    ev.asset_id = require_string(j, "asset_id");
    ev.seq = require_int(j, "seq");

    std::string type = require_string(j, "event_type");
    if (!j.contains("payload") || !j.at("payload").is_object()) malformed("missing payload");
    const json& p = j.at("payload");

    if (type == "book") {
        ev.event_type = EventType::book;
        BookPayload bp;
        bp.bids = parse_levels(p.value("bids", json::array()), "bids");
        bp.asks = parse_levels(p.value("asks", json::array()), "asks");
        ev.payload = std::move(bp);
    } else if (type == "price_change") {
        ev.event_type = EventType::price_change;
        PriceChangePayload pc;
        const auto& changes = p.value("changes", json::array());
        if (!changes.is_array()) malformed("changes is not an array");
        for (const auto& c : changes) {
            PriceChangePayload::Change ch;
            std::string side = require_string(c, "side");
            if (side == "bid") ch.side = BookSide::bid;
            else if (side == "ask") ch.side = BookSide::ask;
            else malformed("bad side " + side);
            ch.price = require_price(c, "price");
            ch.size = require_size(c, "size");
            pc.changes.push_back(ch);
        }
        if (p.contains("best_bid")) pc.feed_best_bid = require_price(p, "best_bid");
        if (p.contains("best_ask")) pc.feed_best_ask = require_price(p, "best_ask");
        ev.payload = std::move(pc);
    } else if (type == "last_trade_price") {
        ev.event_type = EventType::last_trade_price;
        TradePayload tp;
        tp.price = require_price(p, "price");
        tp.size = require_size(p, "size");
        std::string side = require_string(p, "side");
        if (side == "buy") tp.side = TradeSide::buy;
        else if (side == "sell") tp.side = TradeSide::sell;
        else malformed("bad trade side " + side);
        tp.fee = p.contains("fee") ? require_decimal(p, "fee") : 0.0;
        tp.tx = p.value("tx", "");
        ev.payload = std::move(tp);
    } else if (type == "tick_size_change") {
        ev.event_type = EventType::tick_size_change;
        TickSizePayload ts;
        ts.tick_size = require_decimal(p, "tick_size");
        if (ts.tick_size <= 0.0) malformed("non-positive tick size");
        ev.payload = ts;
    } else {
        throw Error(Error::Kind::unknown_event_type, "unknown event_type: " + type);
    }
    return ev;
}

std::string serialize_event(const RawEvent& ev) {
    ordered_json j;
    j["timestamp_received"] = ev.timestamp_received;
    j["timestamp"] = ev.timestamp;
    j["event_type"] = to_string(ev.event_type);
    j["market"] = ev.market;
    j["asset_id"] = ev.asset_id;
    j["seq"] = ev.seq;

    ordered_json p;
    switch (ev.event_type) {
        case EventType::book: {
            const auto& bp = ev.book();
            put_levels(p, "bids", bp.bids);
            put_levels(p, "asks", bp.asks);
            break;
        }
        case EventType::price_change: {
            const auto& pc = ev.price_change();
            ordered_json arr = ordered_json::array();
            for (const auto& c : pc.changes) {
                ordered_json ch;
                ch["side"] = c.side == BookSide::bid ? "bid" : "ask";
                ch["price"] = format_decimal(c.price);
                ch["size"] = format_decimal(c.size);
                arr.push_back(std::move(ch));
            }
            p["changes"] = std::move(arr);
            if (pc.feed_best_bid) p["best_bid"] = format_decimal(*pc.feed_best_bid);
            if (pc.feed_best_ask) p["best_ask"] = format_decimal(*pc.feed_best_ask);
            break;
        }
        case EventType::last_trade_price: {
            const auto& tp = ev.trade();
            p["price"] = format_decimal(tp.price);
            p["size"] = format_decimal(tp.size);
            p["side"] = tp.side == TradeSide::buy ? "buy" : "sell";
            p["fee"] = format_decimal(tp.fee);
            p["tx"] = tp.tx;
            break;
        }
        case EventType::tick_size_change: {
            p["tick_size"] = format_decimal(ev.tick_size_change().tick_size);
            break;
        }
    }
    j["payload"] = std::move(p);
    return j.dump();
}

}  // namespace perp
