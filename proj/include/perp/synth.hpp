#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perp/ingest.hpp"

namespace perp {

// Deterministic test-instrument generator.  One spec describes the structural
// properties of one market (mid path, spread regime, depth asymmetry,
// terminal outcome); generate() turns it into a canonical event stream whose
// measured stylized facts land on the requested targets.
struct SynthSpec {
    uint64_t seed = 1;
    std::string market = "synth-0000";
    std::string asset_id = "tok-0000";
    MarketClass cls = MarketClass::politics;
    Ts start_ts = 1'750'000'000'000;
    double lifetime_hours = 72.0;

    // base mid path: piecewise linear through (hours-from-start, price)
    // waypoints; empty means constant p0
    double p0 = 0.5;
    std::vector<std::pair<double, double>> waypoints;
    double wiggle = 0.0;            // uniform jitter amplitude on the mid
    double hold_final_hours = 1.0;  // terminal stretch pinned to the final value, no jitter

    bool resolved = true;
    int outcome = 1;

    // half-spread per index region [0,.1], (.1,.3], (.3,.7], (.7,.9], (.9,1]
    std::array<double, 5> half_spread = {0.0055, 0.0725, 0.27, 0.07, 0.00525};
    double rho_target = 1.0;    // bid/ask depth ratio while the mid sits in a boundary region
    double boundary_edge = 0.10;
    double events_per_hour = 120.0;
    uint32_t snapshot_every = 50;  // full book snapshot every N deltas
    uint32_t trade_every = 10;     // every Nth event is a trade instead of a delta
    uint32_t levels_per_side = 3;
    double level_gap = 0.005;
    double depth_per_level = 60.0;
    double size_jitter = 0.0;   // relative jitter on ask sizes; bids stay exactly rho * ask
    double trade_jitter = 0.002;  // trade price offset around the mid; 0 prints exactly at mid

    std::vector<NewsWindowRec> news;
};

struct SynthMarket {
    SynthSpec spec;
    std::vector<RawEvent> events;  // time-ordered, ends strictly before resolution
    std::optional<ResolutionRecord> resolution;
    MarketMeta meta;
};

// Throws invalid_spec on out-of-range prices, non-positive rho/rates/spreads.
SynthMarket generate(const SynthSpec& spec);

std::vector<SynthMarket> generate_batch(const std::vector<SynthSpec>& specs);

// Mixed corpus cycling boundary / mid / drifting / high / unresolved
// archetypes, sub-seeded per market, start times staggered across days.
std::vector<SynthSpec> default_batch_specs(size_t n, uint64_t seed);

// Clean, join and return the single per-market series (test convenience).
MarketData to_market_data(const SynthMarket& m);

// Events to `path`, plus sibling <stem>.resolutions.jsonl,
// <stem>.metadata.jsonl and <stem>.news.jsonl next to it.
void write_jsonl(const std::vector<SynthMarket>& batch, const std::string& path);

}  // namespace perp
