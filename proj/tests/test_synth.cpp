#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "perp/book.hpp"
#include "perp/synth.hpp"

using namespace perp;

namespace {

SynthSpec mini_spec() {
    SynthSpec s;
    s.seed = 9;
    s.market = "shape-m";
    s.asset_id = "shape-a";
    s.lifetime_hours = 6.0;
    s.events_per_hour = 17.0;
    s.wiggle = 0.0;
    s.trade_jitter = 0.0;
    s.size_jitter = 0.0;
    return s;
}

std::string serialize_all(const SynthMarket& m) {
    std::string out;
    for (const auto& ev : m.events) {
        out += serialize_event(ev);
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("the same seed reproduces the stream byte for byte") {
    SynthSpec s = mini_spec();
    s.wiggle = 0.01;
    s.trade_jitter = 0.002;
    s.size_jitter = 0.3;
    SynthMarket a = generate(s);
    SynthMarket b = generate(s);
    CHECK(serialize_all(a) == serialize_all(b));
    REQUIRE(a.resolution.has_value());
    REQUIRE(b.resolution.has_value());
    CHECK(a.resolution->resolution_ts == b.resolution->resolution_ts);

    s.seed = 10;
    SynthMarket c = generate(s);
    CHECK(serialize_all(a) != serialize_all(c));
}

TEST_CASE("structurally impossible specs are rejected up front") {
    auto expect_invalid = [](SynthSpec s) {
        try {
            generate(s);
            FAIL("expected invalid_spec");
        } catch (const Error& e) {
            CHECK(e.kind() == Error::Kind::invalid_spec);
        }
    };

    SynthSpec s = mini_spec();
    s.p0 = 1.2;
    expect_invalid(s);

    s = mini_spec();
    s.rho_target = -1.0;
    expect_invalid(s);

    s = mini_spec();
    s.lifetime_hours = 0.0;
    expect_invalid(s);

    s = mini_spec();
    s.snapshot_every = 0;
    expect_invalid(s);

    s = mini_spec();
    s.outcome = 2;
    expect_invalid(s);

    s = mini_spec();
    s.waypoints = {{0.0, 0.5}, {3.0, 1.5}};
    expect_invalid(s);

    s = mini_spec();
    s.events_per_hour = -5.0;
    expect_invalid(s);
}

TEST_CASE("the emitted event mix follows the configured cadences") {
    SynthMarket m = generate(mini_spec());
    REQUIRE(m.events.size() == 102);

    std::map<EventType, int> counts;
    for (const auto& ev : m.events) counts[ev.event_type]++;
    CHECK(counts[EventType::book] == 2);
    CHECK(counts[EventType::tick_size_change] == 1);
    CHECK(counts[EventType::last_trade_price] == 10);
    CHECK(counts[EventType::price_change] == 89);

    CHECK(m.events[0].event_type == EventType::book);
    CHECK(m.events[1].event_type == EventType::tick_size_change);

    Ts tau = m.resolution->resolution_ts;
    Ts prev_ts = 0;
    int64_t prev_seq = 0;
    for (const auto& ev : m.events) {
        CHECK(ev.market == "shape-m");
        CHECK(ev.asset_id == "shape-a");
        CHECK(ev.timestamp_received >= prev_ts);
        if (prev_seq != 0) CHECK(ev.seq > prev_seq);
        CHECK(ev.timestamp_received < tau);
        prev_ts = ev.timestamp_received;
        prev_seq = ev.seq;
    }
}

TEST_CASE("generated streams clean without a single drop") {
    SynthSpec s = mini_spec();
    s.wiggle = 0.02;
    s.trade_jitter = 0.002;
    SynthMarket m = generate(s);
    CleaningStats stats;
    auto cleaned = clean_stream(m.events, stats);
    CHECK(cleaned.size() == m.events.size());
    CHECK(stats.duplicates_dropped == 0);
    CHECK(stats.payload_conflicts == 0);
    CHECK(stats.dormancy_markers == 0);
    for (size_t i = 1; i < cleaned.size(); ++i)
        CHECK(cleaned[i].monotone_index > cleaned[i - 1].monotone_index);
}

TEST_CASE("replaying a generated stream keeps a crossed-free two-sided book") {
    SynthSpec s = mini_spec();
    s.market = "replay-m";
    s.lifetime_hours = 12.0;
    s.events_per_hour = 120.0;
    s.wiggle = 0.02;
    s.trade_jitter = 0.002;
    SynthMarket m = generate(s);
    CleaningStats stats;
    auto cleaned = clean_stream(m.events, stats);

    OrderBookState book;
    int book_states = 0;
    for (const auto& ev : cleaned) {
        apply_event(book, ev);
        if (ev.event_type == EventType::book || ev.event_type == EventType::price_change) {
            REQUIRE(book.best_bid().has_value());
            REQUIRE(book.best_ask().has_value());
            CHECK(book.best_bid()->price < book.best_ask()->price);
            CHECK(book.best_bid()->price > 0.0);
            CHECK(book.best_ask()->price < 1.0);
            ++book_states;
        }
    }
    CHECK(book_states > 100);

    ReconstructionScore score = score_reconstruction(cleaned);
    CHECK(score.checked > 0);
    CHECK(score.agreement() == 1.0);
}

TEST_CASE("boundary markets carry the configured depth asymmetry") {
    SynthSpec s = mini_spec();
    s.market = "skew-m";
    s.p0 = 0.05;
    s.rho_target = 1.7;
    s.wiggle = 0.004;
    SynthMarket m = generate(s);
    CleaningStats stats;
    auto cleaned = clean_stream(m.events, stats);

    OrderBookState book;
    int checked = 0;
    for (const auto& ev : cleaned) {
        apply_event(book, ev);
        if (ev.event_type != EventType::book && ev.event_type != EventType::price_change) continue;
        Size bid_total = 0.0, ask_total = 0.0;
        for (const auto& [p, sz] : book.bids) bid_total += sz;
        for (const auto& [p, sz] : book.asks) ask_total += sz;
        REQUIRE(ask_total > 0.0);
        CHECK(bid_total / ask_total == doctest::Approx(1.7).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("quiet trades print exactly at the mid") {
    SynthMarket m = generate(mini_spec());
    int trades = 0;
    for (const auto& ev : m.events) {
        if (ev.event_type != EventType::last_trade_price) continue;
        CHECK(ev.trade().price == 0.5);
        CHECK(ev.trade().size > 0.0);
        ++trades;
    }
    CHECK(trades == 10);
}

TEST_CASE("resolution metadata lines up with the spec") {
    SynthSpec s = mini_spec();
    s.outcome = 0;
    SynthMarket m = generate(s);
    REQUIRE(m.resolution.has_value());
    CHECK(m.resolution->market == "shape-m");
    CHECK(m.resolution->outcome == 0);
    CHECK(m.resolution->resolution_ts ==
          s.start_ts + static_cast<Ts>(s.lifetime_hours * ms_per_hour));
    CHECK_FALSE(m.resolution->disputed);
    CHECK(m.meta.market == "shape-m");
    CHECK(m.meta.cls == MarketClass::politics);

    s.resolved = false;
    SynthMarket u = generate(s);
    CHECK_FALSE(u.resolution.has_value());
}

TEST_CASE("batch specs stagger starts and cycle the archetypes") {
    auto specs = default_batch_specs(7, 99);
    REQUIRE(specs.size() == 7);
    for (size_t i = 1; i < specs.size(); ++i) {
        CHECK(specs[i].start_ts > specs[i - 1].start_ts);
        CHECK(specs[i].seed != specs[i - 1].seed);
        CHECK(specs[i].market != specs[i - 1].market);
    }
    CHECK(specs[0].cls == MarketClass::politics);
    CHECK(specs[1].cls == MarketClass::sports);
    CHECK(specs[2].cls == MarketClass::crypto);
    CHECK(specs[3].cls == MarketClass::politics);
    CHECK_FALSE(specs[4].resolved);  // the persistent-uncertainty archetype
    CHECK(specs[0].p0 < 0.1);

    auto markets = generate_batch(specs);
    REQUIRE(markets.size() == 7);
    for (const auto& mk : markets) CHECK_FALSE(mk.events.empty());
}

TEST_CASE("market data joins carry class and resolution through") {
    SynthSpec s = mini_spec();
    s.cls = MarketClass::crypto;
    MarketData md = to_market_data(generate(s));
    CHECK(md.id == "shape-m");
    CHECK(md.cls == MarketClass::crypto);
    REQUIRE(md.resolution.has_value());
    CHECK(md.resolution->outcome == 1);
    CHECK(md.events.size() == 102);
    CHECK(md.first_seen_ts == s.start_ts);
}

TEST_CASE("written corpora load back with sidecars intact") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "perp_synth_io";
    fs::create_directories(dir);
    fs::path events_path = dir / "corpus.jsonl";

    auto specs = default_batch_specs(3, 5);
    for (auto& s : specs) {
        s.lifetime_hours = 2.0;
        s.events_per_hour = 30.0;
    }
    auto batch = generate_batch(specs);
    write_jsonl(batch, events_path.string());

    CleaningStats stats;
    auto raw = load_events(events_path.string(), stats);
    size_t expected = 0;
    for (const auto& m : batch) expected += m.events.size();
    CHECK(raw.size() == expected);
    CHECK(stats.malformed_dropped == 0);

    auto res = load_resolutions((dir / "corpus.resolutions.jsonl").string());
    auto meta = load_metadata((dir / "corpus.metadata.jsonl").string());
    size_t resolved = 0;
    for (const auto& m : batch)
        if (m.resolution) ++resolved;
    CHECK(res.size() == resolved);
    CHECK(meta.size() == batch.size());

    auto cleaned = clean_stream(raw, stats);
    auto grouped = group_markets(cleaned, meta, res);
    CHECK(grouped.size() == batch.size());

    fs::remove_all(dir);
}
