#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perp/index.hpp"
#include "perp/ingest.hpp"

namespace perp {

struct SfParams {
    int band_bps = 200;
    int tight_band_bps = 50;
    double boundary_edge = 0.10;  // index level below which a market counts as boundary-low
    std::vector<int> depth_distances_bps = {1, 5, 25, 100, 200, 500};
    double rho_floor = 1.5;   // depth-asymmetry materiality floor
    double jump_floor = 0.10;  // terminal-jump materiality floor
    // replay carries no live perp quote, so the basis is the configured
    // constant offset; the news/control blocks measure its magnitude
    double synthetic_basis = 0.0;
    IndexParams index;
    std::vector<NewsWindowRec> news;
    bool parallel = true;
};

struct TradeSizeStats {
    uint64_t n = 0;
    double median = 0.0;
    double mean = 0.0;
    double p99 = 0.0;
};

// One fact block per field; class-keyed maps carry a "pooled" row next to the
// per-class rows, and keys are absent when no market produced the statistic.
struct SfReport {
    std::map<std::string, double> sf1_rho;
    std::map<std::string, double> sf2_jump;
    uint64_t sf2_usable = 0;
    uint64_t sf2_dark = 0;  // resolved markets with no final-hour price_change
    std::optional<double> sf3_news_basis;
    std::optional<double> sf3_control_basis;
    std::array<std::optional<double>, 5> sf4_half_spread;  // index regions low to high
    std::map<int, double> sf5_depth;                       // distance bps -> pooled median
    std::map<std::string, TradeSizeStats> sf6_trade_size;
    std::map<std::string, std::array<uint64_t, 24>> sf7_hourly;
    std::map<std::string, double> sf8_surge;
    std::array<std::optional<double>, 5> sf9_wide;   // ttr buckets far to near, wide band
    std::array<std::optional<double>, 5> sf9_tight;
    std::array<std::optional<double>, 4> sf9_contraction;  // successive wide-band ratios
    bool e1_depth_asymmetry_pass = false;
    bool e1_terminal_jump_pass = false;
};

// Deterministic order statistic: sorted[(n - 1) / 2]; nullopt when empty.
std::optional<double> lower_median(std::vector<double> xs);

// Time-to-resolution buckets [24h,12h) [12h,3h) [3h,1h) [1h,5min) [5min,0),
// far to near; nullopt outside [0, 24h).
std::optional<size_t> sf9_bucket(double ttr_hours);

SfReport compute_stylized_facts(const std::vector<MarketData>& markets, const SfParams& p = {});

nlohmann::json to_json(const SfReport& r);

}  // namespace perp
