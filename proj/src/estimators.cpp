#include "perp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perp {

VolEstimate realized_vol(const IndexPath& path, Ts t, const VolParams& p) {
    VolEstimate est;
    est.window_hours = p.window_hours;
    const Ts w_ms = static_cast<Ts>(p.window_hours * ms_per_hour);
    const Ts lo = t - w_ms;

    // binary-search the window start so repeated calls on a growing path stay
    // O(log n + window); monotonicity is checked over the scanned range
    auto first = std::lower_bound(path.begin(), path.end(), lo,
                                  [](const IndexPoint& pt, Ts v) { return pt.ts < v; });
    if (first != path.begin() && std::prev(first)->ts >= lo)
        throw Error(Error::Kind::non_monotone_timestamps, "index path not sorted by ts");

    double sum_sq = 0.0;
    uint64_t n = 0;
    const IndexPoint* prev = nullptr;
    Ts prev_ts = std::numeric_limits<Ts>::min();
    for (auto it = first; it != path.end(); ++it) {
        const auto& pt = *it;
        if (pt.ts < prev_ts)
            throw Error(Error::Kind::non_monotone_timestamps, "index path not sorted by ts");
        prev_ts = pt.ts;
        if (pt.ts >= t) break;
        if (prev) {
            const double a = prev->value;
            const double b = pt.value;
            const bool boundary = a <= p.floor || a >= 1.0 - p.floor || b <= p.floor || b >= 1.0 - p.floor;
            double inc;
            if (boundary) {
                inc = b - a;
                est.boundary_mode_used = true;
            } else {
                inc = std::log(b / a);
            }
            // zero increments are dropped so repeated identical prints leave
            // the estimate unchanged
            if (inc != 0.0) {
                sum_sq += inc * inc;
                ++n;
            }
        }
        prev = &pt;
    }
    est.n_increments = n;
    est.sigma = n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n));
    return est;
}

std::optional<double> ema_vwap(const std::vector<TradeObs>& trades, size_t n_events, double alpha) {
    if (alpha <= 0.0 || alpha > 1.0)
        throw Error(Error::Kind::bad_config, "ema_vwap alpha must be in (0,1]");
    if (n_events == 0)
        throw Error(Error::Kind::bad_config, "ema_vwap window must be >= 1 event");

    // collect the trailing n_events trades with positive size
    std::vector<const TradeObs*> window;
    window.reserve(n_events);
    for (auto it = trades.rbegin(); it != trades.rend() && window.size() < n_events; ++it)
        if (it->size > 0.0) window.push_back(&*it);
    if (window.empty()) return std::nullopt;

    double num = 0.0;
    double den = 0.0;
    for (auto it = window.rbegin(); it != window.rend(); ++it) {
        num = (*it)->price * (*it)->size + (1.0 - alpha) * num;
        den = (*it)->size + (1.0 - alpha) * den;
    }
    return num / den;
}

double HazardTable::global_rate() const {
    const double a = bins.smoothing_alpha;
    return (static_cast<double>(total_jumps) + a) / (static_cast<double>(total_exposures) + 2.0 * a);
}

double HazardTable::cell_prob(size_t ti, size_t ri, bool news) const {
    const size_t ni = news ? 1 : 0;
    const uint64_t exp_count = exposures[ti][ri][ni];
    if (exp_count == 0) return global_rate();
    const double a = bins.smoothing_alpha;
    return (static_cast<double>(jumps[ti][ri][ni]) + a) / (static_cast<double>(exp_count) + 2.0 * a);
}

size_t ttr_bucket(const HazardBins& bins, double ttr_hours) {
    // buckets are (edge_i, edge_{i+1}]; anything beyond the last edge falls in
    // the open-ended final bucket; ttr <= 0 goes to the first
    const auto& e = bins.ttr_edges_hours;
    for (size_t i = 0; i + 1 < e.size(); ++i)
        if (ttr_hours <= e[i + 1]) return i;
    return e.size() - 1;
}

size_t region_bucket(const HazardBins& bins, Price index) {
    const auto& e = bins.region_edges;
    if (index <= e[1]) return 0;  // first region closed at 0
    for (size_t i = 1; i + 1 < e.size(); ++i)
        if (index <= e[i + 1]) return i;
    return e.size() - 2;
}

bool news_active(const std::vector<NewsWindowRec>& news, MarketClass cls, Ts t) {
    for (const auto& w : news)
        if (w.cls == cls && t >= w.start_ts && t < w.end_ts) return true;
    return false;
}

namespace {

// path value as of t (last point with ts <= t); nullopt before the first point
std::optional<double> path_value_at(const IndexPath& path, Ts t) {
    if (path.empty() || path.front().ts > t) return std::nullopt;
    auto it = std::upper_bound(path.begin(), path.end(), t,
                               [](Ts lhs, const IndexPoint& rhs) { return lhs < rhs.ts; });
    return std::prev(it)->value;
}

}  // namespace

HazardTable fit_jump_hazard(const std::vector<TrainingMarket>& training,
                            const std::vector<NewsWindowRec>& news, const HazardBins& bins) {
    if (training.empty())
        throw Error(Error::Kind::empty_training_set, "hazard fit requires at least one training market");

    HazardTable table;
    table.bins = bins;
    const size_t nt = table.n_ttr();
    const size_t nr = table.n_regions();
    table.jumps.assign(nt, std::vector<std::vector<uint64_t>>(nr, std::vector<uint64_t>(2, 0)));
    table.exposures.assign(nt, std::vector<std::vector<uint64_t>>(nr, std::vector<uint64_t>(2, 0)));

    const Ts h_ms = static_cast<Ts>(bins.grid_hours * ms_per_hour);
    for (const auto& tm : training) {
        if (tm.path.empty()) continue;
        const Ts tau = tm.resolution_ts;
        for (Ts t = tm.path.front().ts; t + h_ms <= tau; t += h_ms) {
            auto v0 = path_value_at(tm.path, t);
            auto v1 = path_value_at(tm.path, t + h_ms);
            if (!v0 || !v1) continue;
            const double ttr = hours_between(t, tau);
            const size_t ti = ttr_bucket(bins, ttr);
            const size_t ri = region_bucket(bins, *v0);
            const size_t ni = news_active(news, tm.cls, t) ? 1 : 0;
            ++table.exposures[ti][ri][ni];
            ++table.total_exposures;
            if (std::abs(*v1 - *v0) > bins.jump_threshold) {
                ++table.jumps[ti][ri][ni];
                ++table.total_jumps;
            }
        }
    }
    return table;
}

double eval_jump_hazard(const HazardTable& table, double ttr_hours, Price index, bool news) {
    if (table.exposures.empty()) return table.global_rate();
    const size_t ti = ttr_bucket(table.bins, ttr_hours);
    const size_t ri = region_bucket(table.bins, index);
    return table.cell_prob(ti, ri, news);
}

ManipCost manip_cost(const OrderBookState& book, std::optional<Price> index, double target_delta) {
    if (target_delta <= 0.0)
        throw Error(Error::Kind::bad_config, "manip_cost target_delta must be positive");
    if (!index) throw Error(Error::Kind::missing_mid, "manip_cost requires an index value");

    ManipCost mc;
    mc.target_delta = target_delta;
    const double threshold = *index + target_delta;
    for (const auto& [p, s] : book.asks) {
        if (p < threshold) {
            mc.kappa += p * s;
        } else {
            mc.reached = true;  // a resting ask at/beyond the displacement level survives the sweep
            break;
        }
    }
    return mc;
}

std::optional<int> resolution_clarity(const std::optional<ResolutionRecord>& record) {
    if (!record) return std::nullopt;
    return record->disputed ? 0 : 1;
}

}  // namespace perp
