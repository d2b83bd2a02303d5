#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perp/events.hpp"

namespace perp {

struct CleaningStats {
    uint64_t total_in = 0;
    uint64_t total_out = 0;
    uint64_t duplicates_dropped = 0;
    uint64_t malformed_dropped = 0;
    uint64_t payload_conflicts = 0;   // same (market, ts, seq), different payload; first kept
    uint64_t dormancy_markers = 0;    // empty-book snapshots retained and flagged
};

// Sort by (market, timestamp_received, seq), drop exact duplicates, keep the
// first of conflicting (ts, seq) pairs, flag empty-book snapshots as dormancy
// markers.  Total: every problem becomes a stat, never an error.
std::vector<CleanEvent> clean_stream(std::vector<RawEvent> events, CleaningStats& stats);

// Read a JSONL event file; unparseable or out-of-range lines are dropped and
// counted in stats.malformed_dropped.
std::vector<RawEvent> load_events(const std::string& path, CleaningStats& stats);

struct ResolutionRecord {
    std::string market;
    int outcome = 0;  // R in {0,1}
    Ts resolution_ts = 0;
    bool disputed = false;
    std::string oracle_source;
};

struct MarketMeta {
    std::string market;
    MarketClass cls = MarketClass::other;
    Ts first_seen_ts = 0;
};

struct NewsWindowRec {
    MarketClass cls = MarketClass::other;
    Ts start_ts = 0;
    Ts end_ts = 0;
    std::string label;
};

std::vector<ResolutionRecord> load_resolutions(const std::string& path);
std::vector<MarketMeta> load_metadata(const std::string& path);
std::vector<NewsWindowRec> load_news(const std::string& path);

std::string serialize_resolution(const ResolutionRecord& r);
std::string serialize_metadata(const MarketMeta& m);
std::string serialize_news(const NewsWindowRec& w);

// One market's worth of cleaned data joined with its metadata and resolution.
struct MarketData {
    std::string id;
    MarketClass cls = MarketClass::other;
    Ts first_seen_ts = 0;
    std::vector<CleanEvent> events;
    std::optional<ResolutionRecord> resolution;
};

// Split a cleaned multi-market stream into per-market series joined against
// metadata and resolutions.  Output sorted by market id.
std::vector<MarketData> group_markets(const std::vector<CleanEvent>& events,
                                      const std::vector<MarketMeta>& metadata,
                                      const std::vector<ResolutionRecord>& resolutions);

struct ReconstructionScore {
    uint64_t checked = 0;  // price_change events carrying feed best bid/ask
    uint64_t matched = 0;

    double agreement() const { return checked == 0 ? 1.0 : static_cast<double>(matched) / checked; }
};

// Replay one market and compare reconstructed best bid/ask against the feed
// fields on every price_change event that carries them.
ReconstructionScore score_reconstruction(const std::vector<CleanEvent>& events);

}  // namespace perp
