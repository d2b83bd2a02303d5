#pragma once

#include <optional>
#include <vector>

#include "perp/book.hpp"
#include "perp/ingest.hpp"
#include "perp/types.hpp"

namespace perp {

struct IndexPoint {
    Ts ts = 0;
    double value = 0.0;
};

using IndexPath = std::vector<IndexPoint>;

struct VolEstimate {
    double sigma = 0.0;  // per sqrt(hour) return units
    double window_hours = 1.0;
    uint64_t n_increments = 0;
    bool boundary_mode_used = false;
};

struct VolParams {
    double window_hours = 1.0;
    double floor = 0.005;  // near-boundary level switching log to linear increments
};

// sigma^2 = mean of squared log-return increments between consecutive path
// points inside [t - W, t); an increment with either endpoint <= floor or
// >= 1 - floor uses the linear difference instead.  No increments -> sigma 0.
VolEstimate realized_vol(const IndexPath& path, Ts t, const VolParams& p = {});

struct TradeObs {
    Ts ts = 0;
    Price price = 0.0;
    Size size = 0.0;
};

// Size-weighted EMA over the trailing n_events trades (zero-size trades are
// excluded before windowing).  No usable trades -> nullopt.
std::optional<double> ema_vwap(const std::vector<TradeObs>& trades, size_t n_events = 200,
                               double alpha = 0.005);

struct HazardBins {
    // time-to-resolution buckets (lo, hi] in hours; last bucket open-ended
    std::vector<double> ttr_edges_hours = {0.0, 1.0, 3.0, 12.0, 24.0};
    // index regions: first closed [0, e1], then (e_i, e_{i+1}]
    std::vector<double> region_edges = {0.0, 0.1, 0.3, 0.7, 0.9, 1.0};
    double smoothing_alpha = 1.0;
    double jump_threshold = 0.10;
    double grid_hours = 1.0;  // exposure grid spacing and jump horizon
};

struct HazardTable {
    HazardBins bins;
    // [ttr_bin][region][news]
    std::vector<std::vector<std::vector<uint64_t>>> jumps;
    std::vector<std::vector<std::vector<uint64_t>>> exposures;
    uint64_t total_jumps = 0;
    uint64_t total_exposures = 0;

    size_t n_ttr() const { return bins.ttr_edges_hours.size(); }
    size_t n_regions() const { return bins.region_edges.size() - 1; }
    double global_rate() const;
    double cell_prob(size_t ti, size_t ri, bool news) const;
};

struct TrainingMarket {
    IndexPath path;
    Ts resolution_ts = 0;
    MarketClass cls = MarketClass::other;
};

// Cell probability = (jumps + alpha) / (exposures + 2 alpha); exposures are
// counted on a grid_hours-spaced grid from path start to tau - grid, a jump
// being |I(t + H) - I(t)| > threshold.  Zero-exposure cells fall back to the
// globally smoothed rate at eval time.
HazardTable fit_jump_hazard(const std::vector<TrainingMarket>& training,
                            const std::vector<NewsWindowRec>& news, const HazardBins& bins = {});

// Bucketing is total: ttr beyond the last edge clamps into the open-ended
// bucket, exact edges go to the lower bucket.
double eval_jump_hazard(const HazardTable& table, double ttr_hours, Price index, bool news_active);

size_t ttr_bucket(const HazardBins& bins, double ttr_hours);
size_t region_bucket(const HazardBins& bins, Price index);

bool news_active(const std::vector<NewsWindowRec>& news, MarketClass cls, Ts t);

struct ManipCost {
    double kappa = 0.0;  // sum of price * size over asks strictly below index + delta
    double target_delta = 0.05;
    bool reached = false;  // a resting ask at or beyond the displacement threshold remains
};

ManipCost manip_cost(const OrderBookState& book, std::optional<Price> index,
                     double target_delta = 0.05);

// 1 = resolved undisputed, 0 = resolved disputed, nullopt = unresolved.
std::optional<int> resolution_clarity(const std::optional<ResolutionRecord>& record);

}  // namespace perp
