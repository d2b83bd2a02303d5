#include "perp/stylized.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "perp/book.hpp"
#include "perp/estimators.hpp"

namespace perp {

namespace {

constexpr size_t n_regions = 5;
constexpr size_t n_ttr_buckets = 5;

// Weighted lower median: smallest value whose cumulative weight reaches half
// the total.  Mirrors the index module's walk convention.
std::optional<double> weighted_median(std::vector<std::pair<double, double>> samples) {
    double total = 0.0;
    for (const auto& s : samples) total += s.second;
    if (total <= 0.0) return std::nullopt;
    std::stable_sort(samples.begin(), samples.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double cum = 0.0;
    for (const auto& [v, w] : samples) {
        cum += w;
        if (cum >= 0.5 * total) return v;
    }
    return samples.back().first;
}

// Everything measurable from one market in a single forward replay.
struct PerMarket {
    MarketClass cls = MarketClass::other;
    std::optional<double> rho;
    bool resolved = false;
    bool dark = false;
    std::optional<double> jump;
    uint64_t news_obs = 0;
    uint64_t control_obs = 0;
    std::array<std::optional<double>, n_regions> half_spread;
    std::vector<std::optional<double>> depth_at;  // aligned with p.depth_distances_bps
    std::vector<double> trade_sizes;
    std::array<uint64_t, 24> hourly{};
    std::optional<double> surge;
    std::array<std::optional<double>, n_ttr_buckets> depth_wide;
    std::array<std::optional<double>, n_ttr_buckets> depth_tight;
};

bool in_any_window(const std::vector<NewsWindowRec>& news, MarketClass cls, Ts t) {
    for (const auto& w : news)
        if (w.cls == cls && t >= w.start_ts && t < w.end_ts) return true;
    return false;
}

PerMarket measure_market(const MarketData& md, const SfParams& p) {
    PerMarket out;
    out.cls = md.cls;
    out.resolved = md.resolution.has_value();
    out.depth_at.resize(p.depth_distances_bps.size());

    const Ts tau = out.resolved ? md.resolution->resolution_ts : 0;
    const Ts final_hour_start = tau - ms_per_hour;
    const Ts final_day_start = tau - 24 * ms_per_hour;
    static const HazardBins regions;

    std::vector<double> rho_samples;
    std::array<std::vector<std::pair<double, double>>, n_regions> spread_samples;
    std::vector<std::vector<double>> depth_samples(p.depth_distances_bps.size());
    std::array<std::vector<double>, n_ttr_buckets> wide_samples;
    std::array<std::vector<double>, n_ttr_buckets> tight_samples;
    std::optional<Price> final_hour_index;
    bool final_hour_price_change = false;
    uint64_t final_day_events = 0;
    uint64_t prior_events = 0;

    OrderBookState book;
    std::vector<TradeObs> trades;

    for (const auto& ev : md.events) {
        const Ts ts = ev.timestamp_received;
        apply_event(book, ev);

        out.hourly[static_cast<size_t>(((ts / ms_per_hour) % 24 + 24) % 24)]++;
        if (out.resolved) {
            if (ts >= final_day_start && ts < tau)
                ++final_day_events;
            else if (ts < final_day_start)
                ++prior_events;
        }
        if (in_any_window(p.news, md.cls, ts)) ++out.news_obs;
        // matched control: the same window shape shifted one day later
        if (in_any_window(p.news, md.cls, ts - 24 * ms_per_hour)) ++out.control_obs;

        if (ev.event_type == EventType::last_trade_price) {
            const auto& tr = ev.trade();
            trades.push_back({ts, tr.price, tr.size});
            out.trade_sizes.push_back(tr.size);
            if (auto mid = book.mid(); mid && tr.size > 0.0) {
                double hs = 0.5 * (book.best_ask()->price - book.best_bid()->price);
                spread_samples[region_bucket(regions, *mid)].push_back({hs, tr.size});
            }
        }

        const bool book_shaped =
            ev.event_type == EventType::book || ev.event_type == EventType::price_change;
        if (book_shaped) {
            if (auto mid = book.mid()) {
                DepthProfile band = depth_within(book, *mid, p.band_bps);
                if (*mid < p.boundary_edge && band.ask_depth_within > 0.0)
                    rho_samples.push_back(band.bid_depth_within / band.ask_depth_within);
                for (size_t i = 0; i < p.depth_distances_bps.size(); ++i)
                    depth_samples[i].push_back(
                        depth_within(book, *mid, p.depth_distances_bps[i]).total());
                if (out.resolved) {
                    if (auto bucket = sf9_bucket(hours_between(ts, tau))) {
                        wide_samples[*bucket].push_back(band.total());
                        tight_samples[*bucket].push_back(
                            depth_within(book, *mid, p.tight_band_bps).total());
                    }
                }
            }
            if (out.resolved && ts >= final_hour_start && ts < tau) {
                if (ev.event_type == EventType::price_change) final_hour_price_change = true;
                if (auto iv = composite_index_from_book(book, trades, p.index))
                    final_hour_index = iv->value;
            }
        }
    }

    out.rho = lower_median(std::move(rho_samples));
    for (size_t r = 0; r < n_regions; ++r)
        out.half_spread[r] = weighted_median(std::move(spread_samples[r]));
    for (size_t i = 0; i < depth_samples.size(); ++i)
        out.depth_at[i] = lower_median(std::move(depth_samples[i]));
    for (size_t b = 0; b < n_ttr_buckets; ++b) {
        out.depth_wide[b] = lower_median(std::move(wide_samples[b]));
        out.depth_tight[b] = lower_median(std::move(tight_samples[b]));
    }

    if (out.resolved) {
        if (final_hour_price_change && final_hour_index) {
            out.jump = std::abs(*final_hour_index - static_cast<double>(md.resolution->outcome));
        } else {
            out.dark = true;
        }
        if (!md.events.empty()) {
            double prior_days =
                hours_between(md.events.front().timestamp_received, final_day_start) / 24.0;
            if (prior_days > 0.0 && prior_events > 0) {
                double baseline = static_cast<double>(prior_events) / prior_days;
                out.surge = static_cast<double>(final_day_events) / baseline;
            }
        }
    }
    return out;
}

void add_class_medians(std::map<std::string, double>& dest,
                       const std::vector<PerMarket>& stats,
                       const std::function<std::optional<double>(const PerMarket&)>& pick) {
    std::map<std::string, std::vector<double>> by_class;
    for (const auto& s : stats) {
        if (auto v = pick(s)) {
            by_class[to_string(s.cls)].push_back(*v);
            by_class["pooled"].push_back(*v);
        }
    }
    for (auto& [key, values] : by_class) dest[key] = *lower_median(std::move(values));
}

}  // namespace

std::optional<double> lower_median(std::vector<double> xs) {
    if (xs.empty()) return std::nullopt;
    size_t k = (xs.size() - 1) / 2;
    std::nth_element(xs.begin(), xs.begin() + k, xs.end());
    return xs[k];
}

std::optional<size_t> sf9_bucket(double ttr_hours) {
    if (ttr_hours < 0.0 || ttr_hours >= 24.0) return std::nullopt;
    if (ttr_hours >= 12.0) return 0;
    if (ttr_hours >= 3.0) return 1;
    if (ttr_hours >= 1.0) return 2;
    if (ttr_hours >= 5.0 / 60.0) return 3;
    return 4;
}

SfReport compute_stylized_facts(const std::vector<MarketData>& markets, const SfParams& p) {
    std::vector<PerMarket> stats(markets.size());
#pragma omp parallel for schedule(dynamic) if (p.parallel)
    for (size_t i = 0; i < markets.size(); ++i) stats[i] = measure_market(markets[i], p);

    SfReport rep;
    add_class_medians(rep.sf1_rho, stats, [](const PerMarket& s) { return s.rho; });
    add_class_medians(rep.sf2_jump, stats, [](const PerMarket& s) { return s.jump; });
    for (const auto& s : stats) {
        if (s.jump) ++rep.sf2_usable;
        if (s.dark) ++rep.sf2_dark;
    }

    uint64_t news_obs = 0, control_obs = 0;
    for (const auto& s : stats) {
        news_obs += s.news_obs;
        control_obs += s.control_obs;
    }
    if (news_obs > 0) rep.sf3_news_basis = std::abs(p.synthetic_basis);
    if (control_obs > 0) rep.sf3_control_basis = std::abs(p.synthetic_basis);

    for (size_t r = 0; r < n_regions; ++r) {
        std::vector<double> vals;
        for (const auto& s : stats)
            if (s.half_spread[r]) vals.push_back(*s.half_spread[r]);
        rep.sf4_half_spread[r] = lower_median(std::move(vals));
    }

    for (size_t i = 0; i < p.depth_distances_bps.size(); ++i) {
        std::vector<double> vals;
        for (const auto& s : stats)
            if (i < s.depth_at.size() && s.depth_at[i]) vals.push_back(*s.depth_at[i]);
        if (auto m = lower_median(std::move(vals))) rep.sf5_depth[p.depth_distances_bps[i]] = *m;
    }

    std::map<std::string, std::vector<double>> sizes;
    for (const auto& s : stats)
        if (!s.trade_sizes.empty()) {
            auto& dst = sizes[to_string(s.cls)];
            dst.insert(dst.end(), s.trade_sizes.begin(), s.trade_sizes.end());
        }
    for (auto& [cls, values] : sizes) {
        TradeSizeStats ts;
        ts.n = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        ts.mean = sum / static_cast<double>(values.size());
        std::sort(values.begin(), values.end());
        ts.median = values[(values.size() - 1) / 2];
        ts.p99 = values[static_cast<size_t>(0.99 * static_cast<double>(values.size() - 1))];
        rep.sf6_trade_size[cls] = ts;
    }

    for (const auto& s : stats) {
        auto& row = rep.sf7_hourly[to_string(s.cls)];
        for (size_t h = 0; h < 24; ++h) row[h] += s.hourly[h];
    }

    add_class_medians(rep.sf8_surge, stats, [](const PerMarket& s) { return s.surge; });

    for (size_t b = 0; b < n_ttr_buckets; ++b) {
        std::vector<double> wide, tight;
        for (const auto& s : stats) {
            if (s.depth_wide[b]) wide.push_back(*s.depth_wide[b]);
            if (s.depth_tight[b]) tight.push_back(*s.depth_tight[b]);
        }
        rep.sf9_wide[b] = lower_median(std::move(wide));
        rep.sf9_tight[b] = lower_median(std::move(tight));
    }
    for (size_t b = 0; b + 1 < n_ttr_buckets; ++b)
        if (rep.sf9_wide[b] && rep.sf9_wide[b + 1] && *rep.sf9_wide[b] > 0.0)
            rep.sf9_contraction[b] = *rep.sf9_wide[b + 1] / *rep.sf9_wide[b];

    auto pooled = [](const std::map<std::string, double>& m) -> std::optional<double> {
        auto it = m.find("pooled");
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
    rep.e1_depth_asymmetry_pass = pooled(rep.sf1_rho).value_or(0.0) >= p.rho_floor;
    rep.e1_terminal_jump_pass = pooled(rep.sf2_jump).value_or(0.0) >= p.jump_floor;
    return rep;
}

nlohmann::json to_json(const SfReport& r) {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    auto opt_array = [&](const auto& arr) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : arr) out.push_back(opt(v));
        return out;
    };

    nlohmann::json sf5 = nlohmann::json::object();
    for (const auto& [bps, v] : r.sf5_depth) sf5[std::to_string(bps)] = v;
    nlohmann::json sf6 = nlohmann::json::object();
    for (const auto& [cls, s] : r.sf6_trade_size)
        sf6[cls] = {{"n", s.n}, {"median", s.median}, {"mean", s.mean}, {"p99", s.p99}};

    return {
        {"sf1_rho", r.sf1_rho},
        {"sf2_jump", r.sf2_jump},
        {"sf2_usable", r.sf2_usable},
        {"sf2_dark", r.sf2_dark},
        {"sf3_news_basis", opt(r.sf3_news_basis)},
        {"sf3_control_basis", opt(r.sf3_control_basis)},
        {"sf4_half_spread", opt_array(r.sf4_half_spread)},
        {"sf5_depth", sf5},
        {"sf6_trade_size", sf6},
        {"sf7_hourly", r.sf7_hourly},
        {"sf8_surge", r.sf8_surge},
        {"sf9_wide", opt_array(r.sf9_wide)},
        {"sf9_tight", opt_array(r.sf9_tight)},
        {"sf9_contraction", opt_array(r.sf9_contraction)},
        {"e1_depth_asymmetry_pass", r.e1_depth_asymmetry_pass},
        {"e1_terminal_jump_pass", r.e1_terminal_jump_pass},
    };
}

}  // namespace perp
