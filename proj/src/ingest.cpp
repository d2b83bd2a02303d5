#include "perp/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "perp/book.hpp"

namespace perp {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<CleanEvent> clean_stream(std::vector<RawEvent> events, CleaningStats& stats) {
    stats.total_in += events.size();

    std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.market != b.market) return a.market < b.market;
        if (a.timestamp_received != b.timestamp_received) return a.timestamp_received < b.timestamp_received;
        return a.seq < b.seq;
    });

    std::vector<CleanEvent> out;
    out.reserve(events.size());
    std::string prev_line;
    int64_t monotone = 0;
    const std::string* prev_market = nullptr;

    for (auto& ev : events) {
        // serialized form doubles as the exact-duplicate / conflict fingerprint
        std::string line = serialize_event(ev);
        if (!out.empty() && out.back().market == ev.market &&
            out.back().timestamp_received == ev.timestamp_received && out.back().seq == ev.seq) {
            if (line == prev_line) {
                ++stats.duplicates_dropped;
            } else {
                ++stats.payload_conflicts;  // keep first
            }
            continue;
        }
        if (!prev_market || *prev_market != ev.market) monotone = 0;

        CleanEvent ce;
        static_cast<RawEvent&>(ce) = std::move(ev);
        ce.monotone_index = monotone++;
        if (ce.event_type == EventType::book) {
            const auto& bp = ce.book();
            ce.dormant = bp.bids.empty() && bp.asks.empty();
            if (ce.dormant) ++stats.dormancy_markers;
        }
        out.push_back(std::move(ce));
        prev_line = std::move(line);
        prev_market = &out.back().market;
    }
    stats.total_out += out.size();
    return out;
}

std::vector<RawEvent> load_events(const std::string& path, CleaningStats& stats) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::io_error, "cannot open " + path);
    std::vector<RawEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(parse_event(line));
        } catch (const Error&) {
            ++stats.malformed_dropped;
        }
    }
    return out;
}

namespace {

json parse_line_or_throw(const std::string& line, const std::string& path) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(Error::Kind::malformed_record, path + ": " + e.what());
    }
}

}  // namespace

std::vector<ResolutionRecord> load_resolutions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::io_error, "cannot open " + path);
    std::vector<ResolutionRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = parse_line_or_throw(line, path);
        ResolutionRecord r;
        r.market = j.at("market").get<std::string>();
        r.outcome = j.at("outcome").get<int>();
        if (r.outcome != 0 && r.outcome != 1)
            throw Error(Error::Kind::malformed_record, path + ": outcome must be 0 or 1");
        r.resolution_ts = j.at("resolution_ts").get<Ts>();
        r.disputed = j.value("disputed", false);
        r.oracle_source = j.value("oracle_source", "");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MarketMeta> load_metadata(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::io_error, "cannot open " + path);
    std::vector<MarketMeta> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = parse_line_or_throw(line, path);
        MarketMeta m;
        m.market = j.at("market").get<std::string>();
        m.cls = market_class_from_string(j.value("class", "other"));
        m.first_seen_ts = j.value("first_seen_ts", Ts{0});
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<NewsWindowRec> load_news(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::io_error, "cannot open " + path);
    std::vector<NewsWindowRec> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = parse_line_or_throw(line, path);
        NewsWindowRec w;
        w.cls = market_class_from_string(j.value("class", "other"));
        w.start_ts = j.at("start_ts").get<Ts>();
        w.end_ts = j.at("end_ts").get<Ts>();
        if (w.start_ts >= w.end_ts)
            throw Error(Error::Kind::malformed_record, path + ": start_ts >= end_ts");
        w.label = j.value("label", "");
        out.push_back(std::move(w));
    }
    return out;
}

std::string serialize_resolution(const ResolutionRecord& r) {
    ordered_json j;
    j["market"] = r.market;
    j["outcome"] = r.outcome;
    j["resolution_ts"] = r.resolution_ts;
    j["disputed"] = r.disputed;
    j["oracle_source"] = r.oracle_source;
    return j.dump();
}

std::string serialize_metadata(const MarketMeta& m) {
    ordered_json j;
    j["market"] = m.market;
    j["class"] = to_string(m.cls);
    j["first_seen_ts"] = m.first_seen_ts;
    return j.dump();
}

std::string serialize_news(const NewsWindowRec& w) {
    ordered_json j;
    j["class"] = to_string(w.cls);
    j["start_ts"] = w.start_ts;
    j["end_ts"] = w.end_ts;
    j["label"] = w.label;
    return j.dump();
}

std::vector<MarketData> group_markets(const std::vector<CleanEvent>& events,
                                      const std::vector<MarketMeta>& metadata,
                                      const std::vector<ResolutionRecord>& resolutions) {
    std::map<std::string, MarketData> by_id;
    for (const auto& ev : events) {
        auto& md = by_id[ev.market];
        if (md.id.empty()) {
            md.id = ev.market;
            md.first_seen_ts = ev.timestamp_received;
        }
        md.events.push_back(ev);
    }
    for (const auto& m : metadata) {
        auto it = by_id.find(m.market);
        if (it == by_id.end()) continue;
        it->second.cls = m.cls;
        if (m.first_seen_ts > 0) it->second.first_seen_ts = m.first_seen_ts;
    }
    for (const auto& r : resolutions) {
        auto it = by_id.find(r.market);
        if (it != by_id.end()) it->second.resolution = r;
    }
    std::vector<MarketData> out;
    out.reserve(by_id.size());
    for (auto& [id, md] : by_id) out.push_back(std::move(md));
    return out;
}

ReconstructionScore score_reconstruction(const std::vector<CleanEvent>& events) {
    ReconstructionScore score;
    OrderBookState book;
    for (const auto& ev : events) {
        apply_event(book, ev);
        if (ev.event_type != EventType::price_change) continue;
        const auto& pc = ev.price_change();
        if (!pc.feed_best_bid && !pc.feed_best_ask) continue;
        ++score.checked;
        bool ok = true;
        if (pc.feed_best_bid) {
            auto bb = book.best_bid();
            ok = ok && bb && bb->price == *pc.feed_best_bid;
        }
        if (pc.feed_best_ask) {
            auto ba = book.best_ask();
            ok = ok && ba && ba->price == *pc.feed_best_ask;
        }
        if (ok) ++score.matched;
    }
    return score;
}

}  // namespace perp
