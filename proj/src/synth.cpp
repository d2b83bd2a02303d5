#include "perp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "perp/rng.hpp"

namespace perp {

namespace {

void check_spec(const SynthSpec& s) {
    auto bad = [](const std::string& what) {
        throw Error(Error::Kind::invalid_spec, "synth spec: " + what);
    };
    if (s.p0 < 0.0 || s.p0 > 1.0) bad("p0 outside [0,1]");
    for (const auto& [h, p] : s.waypoints) {
        if (p < 0.0 || p > 1.0) bad("waypoint price outside [0,1]");
        if (h < 0.0) bad("negative waypoint offset");
    }
    if (s.rho_target <= 0.0) bad("rho_target must be positive");
    if (s.lifetime_hours <= 0.0) bad("lifetime must be positive");
    if (s.events_per_hour <= 0.0) bad("event rate must be positive");
    if (s.snapshot_every == 0) bad("snapshot cadence must be positive");
    if (s.levels_per_side == 0) bad("need at least one level per side");
    for (double hs : s.half_spread)
        if (hs <= 0.0) bad("half-spread must be positive");
    if (s.resolved && s.outcome != 0 && s.outcome != 1) bad("outcome must be 0 or 1");
}

double base_mid(const SynthSpec& s, double hours) {
    if (s.waypoints.empty()) return s.p0;
    if (hours <= s.waypoints.front().first) return s.waypoints.front().second;
    for (size_t i = 1; i < s.waypoints.size(); ++i) {
        const auto& [h0, p0] = s.waypoints[i - 1];
        const auto& [h1, p1] = s.waypoints[i];
        if (hours <= h1) {
            const double f = h1 == h0 ? 1.0 : (hours - h0) / (h1 - h0);
            return p0 + f * (p1 - p0);
        }
    }
    return s.waypoints.back().second;
}

size_t region_of(double mid) {
    if (mid <= 0.1) return 0;
    if (mid <= 0.3) return 1;
    if (mid <= 0.7) return 2;
    if (mid <= 0.9) return 3;
    return 4;
}

struct BookShape {
    std::vector<Level> bids;
    std::vector<Level> asks;
};

BookShape make_book(const SynthSpec& s, double mid, SplitMix64& rng) {
    const double hs = s.half_spread[region_of(mid)];
    const bool boundary = mid < s.boundary_edge || mid > 1.0 - s.boundary_edge;
    const double rho = boundary ? s.rho_target : 1.0;
    BookShape b;
    for (uint32_t i = 0; i < s.levels_per_side; ++i) {
        const double jitter =
            s.size_jitter > 0.0 ? 1.0 + s.size_jitter * (2.0 * rng.u01() - 1.0) : 1.0;
        const double ask_size = s.depth_per_level * jitter;
        const Price bid_px = mid - hs - i * s.level_gap;
        const Price ask_px = mid + hs + i * s.level_gap;
        if (bid_px > 0.0) b.bids.push_back({bid_px, rho * ask_size});
        if (ask_px < 1.0) b.asks.push_back({ask_px, ask_size});
    }
    return b;
}

RawEvent base_event(const SynthSpec& s, Ts ts, int64_t seq) {
    RawEvent ev;
    ev.timestamp_received = ts;
    ev.timestamp = ts;
    ev.market = s.market;
    ev.asset_id = s.asset_id;
    ev.seq = seq;
    return ev;
}

}  // namespace

SynthMarket generate(const SynthSpec& spec) {
    check_spec(spec);
    SplitMix64 rng(spec.seed);

    const Ts total_ms = static_cast<Ts>(spec.lifetime_hours * ms_per_hour);
    const Ts tau = spec.start_ts + total_ms;
    const auto n_events = static_cast<int64_t>(spec.lifetime_hours * spec.events_per_hour);
    const Ts dt = std::max<Ts>(1, total_ms / std::max<int64_t>(n_events, 1));
    const double hold_from_hours = spec.lifetime_hours - spec.hold_final_hours;
    const double terminal_mid = spec.waypoints.empty() ? spec.p0 : spec.waypoints.back().second;

    SynthMarket out;
    out.spec = spec;
    out.meta = {spec.market, spec.cls, spec.start_ts};
    if (spec.resolved) out.resolution = ResolutionRecord{spec.market, spec.outcome, tau, false, "synth"};

    BookShape prev;
    int64_t seq = 1;
    uint32_t deltas_since_snapshot = 0;
    uint32_t trade_count = 0;

    for (int64_t i = 0; i < n_events; ++i) {
        const Ts ts = spec.start_ts + i * dt;
        if (ts >= tau) break;
        const double hours = hours_between(spec.start_ts, ts);

        double mid;
        if (hours >= hold_from_hours) {
            mid = terminal_mid;
        } else {
            mid = base_mid(spec, hours);
            if (spec.wiggle > 0.0) mid += spec.wiggle * (2.0 * rng.u01() - 1.0);
        }
        // keep the whole ladder strictly inside (0,1)
        const double span =
            spec.half_spread[region_of(std::clamp(mid, 0.0, 1.0))] +
            spec.levels_per_side * spec.level_gap + 1e-3;
        mid = std::clamp(mid, std::min(span, 0.5), std::max(1.0 - span, 0.5));

        if (i == 1) {
            RawEvent ev = base_event(spec, ts, seq++);
            ev.event_type = EventType::tick_size_change;
            ev.payload = TickSizePayload{0.001};
            out.events.push_back(std::move(ev));
            continue;
        }

        const bool trade_slot = spec.trade_every > 0 && i > 0 && i % spec.trade_every == 0;
        if (trade_slot) {
            RawEvent ev = base_event(spec, ts, seq++);
            ev.event_type = EventType::last_trade_price;
            TradePayload t;
            t.price = spec.trade_jitter > 0.0
                          ? std::clamp(mid + spec.trade_jitter * (2.0 * rng.u01() - 1.0), 0.001, 0.999)
                          : mid;
            t.size = rng.lognormal(1.5, 0.8);
            t.side = trade_count % 2 == 0 ? TradeSide::buy : TradeSide::sell;
            t.fee = 0.0;
            char buf[32];
            std::snprintf(buf, sizeof buf, "tx-%06u", trade_count);
            t.tx = buf;
            ++trade_count;
            ev.payload = std::move(t);
            out.events.push_back(std::move(ev));
            continue;
        }

        BookShape shape = make_book(spec, mid, rng);
        const bool snapshot = i == 0 || deltas_since_snapshot >= spec.snapshot_every;
        RawEvent ev = base_event(spec, ts, seq++);
        if (snapshot) {
            ev.event_type = EventType::book;
            ev.payload = BookPayload{shape.bids, shape.asks};
            deltas_since_snapshot = 0;
        } else {
            ev.event_type = EventType::price_change;
            PriceChangePayload pc;
            auto diff = [&pc](const std::vector<Level>& before, const std::vector<Level>& after,
                              BookSide side) {
                for (const auto& lv : before) {
                    const bool still_there = std::any_of(
                        after.begin(), after.end(), [&](const Level& n) { return n.price == lv.price; });
                    if (!still_there) pc.changes.push_back({side, lv.price, 0.0});
                }
                for (const auto& lv : after) {
                    const auto same = std::find_if(before.begin(), before.end(), [&](const Level& o) {
                        return o.price == lv.price && o.size == lv.size;
                    });
                    if (same == before.end()) pc.changes.push_back({side, lv.price, lv.size});
                }
            };
            diff(prev.bids, shape.bids, BookSide::bid);
            diff(prev.asks, shape.asks, BookSide::ask);
            pc.feed_best_bid = shape.bids.empty() ? std::optional<Price>{} : shape.bids.front().price;
            pc.feed_best_ask = shape.asks.empty() ? std::optional<Price>{} : shape.asks.front().price;
            ev.payload = std::move(pc);
            ++deltas_since_snapshot;
        }
        out.events.push_back(std::move(ev));
        prev = std::move(shape);
    }
    return out;
}

std::vector<SynthMarket> generate_batch(const std::vector<SynthSpec>& specs) {
    std::vector<SynthMarket> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(generate(s));
    return out;
}

std::vector<SynthSpec> default_batch_specs(size_t n, uint64_t seed) {
    std::vector<SynthSpec> specs;
    specs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        SynthSpec s;
        s.seed = derive_seed(seed, i);
        char buf[32];
        std::snprintf(buf, sizeof buf, "synth-%04zu", i);
        s.market = buf;
        std::snprintf(buf, sizeof buf, "tok-%04zu", i);
        s.asset_id = buf;
        const MarketClass classes[] = {MarketClass::politics, MarketClass::sports,
                                       MarketClass::crypto};
        s.cls = classes[i % 3];
        s.start_ts = 1'750'000'000'000 + static_cast<Ts>(i) * 7 * ms_per_hour;
        s.lifetime_hours = 72.0;
        switch (i % 5) {
            case 0:  // low boundary, asymmetric depth
                s.p0 = 0.05;
                s.rho_target = 1.7;
                s.wiggle = 0.004;
                s.outcome = 0;
                break;
            case 1:  // mid regime, collapses up
                s.p0 = 0.5;
                s.wiggle = 0.02;
                s.outcome = 1;
                break;
            case 2:  // drifting path
                s.p0 = 0.35;
                s.waypoints = {{0.0, 0.35}, {36.0, 0.6}, {71.0, 0.6}};
                s.wiggle = 0.01;
                s.outcome = i % 2 == 0 ? 1 : 0;
                break;
            case 3:  // high boundary
                s.p0 = 0.93;
                s.rho_target = 1.7;
                s.wiggle = 0.004;
                s.outcome = 1;
                break;
            default:  // still-open market
                s.p0 = 0.45;
                s.wiggle = 0.015;
                s.resolved = false;
                break;
        }
        specs.push_back(std::move(s));
    }
    return specs;
}

MarketData to_market_data(const SynthMarket& m) {
    CleaningStats stats;
    std::vector<RawEvent> raw = m.events;
    auto cleaned = clean_stream(std::move(raw), stats);
    std::vector<ResolutionRecord> res;
    if (m.resolution) res.push_back(*m.resolution);
    auto grouped = group_markets(cleaned, {m.meta}, res);
    if (grouped.empty())
        throw Error(Error::Kind::invalid_spec, "generated market produced no events");
    return std::move(grouped.front());
}

void write_jsonl(const std::vector<SynthMarket>& batch, const std::string& path) {
    std::string stem = path;
    const std::string ext = ".jsonl";
    if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0)
        stem.resize(stem.size() - ext.size());

    auto open = [](const std::string& p) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Error::Kind::io_error, "cannot write " + p);
        return f;
    };

    std::ofstream events = open(path);
    std::ofstream resolutions = open(stem + ".resolutions.jsonl");
    std::ofstream metadata = open(stem + ".metadata.jsonl");
    std::ofstream news = open(stem + ".news.jsonl");

    for (const auto& m : batch) {
        for (const auto& ev : m.events) events << serialize_event(ev) << '\n';
        if (m.resolution) resolutions << serialize_resolution(*m.resolution) << '\n';
        metadata << serialize_metadata(m.meta) << '\n';
        for (const auto& w : m.spec.news) news << serialize_news(w) << '\n';
    }
}

}  // namespace perp
