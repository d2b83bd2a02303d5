#include "perp/eligibility.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "perp/rng.hpp"

namespace perp {

const char* to_string(SuitDim d) {
    switch (d) {
        case SuitDim::liquidity_adequacy: return "liquidity_adequacy";
        case SuitDim::spread_regime: return "spread_regime";
        case SuitDim::depth_stability: return "depth_stability";
        case SuitDim::jump_containment: return "jump_containment";
        case SuitDim::stale_quote_rate: return "stale_quote_rate";
        case SuitDim::resolution_timing: return "resolution_timing";
    }
    return "unknown";
}

std::vector<MappedSuitability> percentile_map(const std::vector<RawSuitability>& rows) {
    std::map<MarketClass, std::array<std::vector<double>, n_suit_dims>> class_values;
    for (const auto& r : rows)
        for (size_t d = 0; d < n_suit_dims; ++d)
            class_values[r.cls][d].push_back(r.raw[d]);
    for (auto& [cls, dims] : class_values)
        for (auto& vals : dims) std::sort(vals.begin(), vals.end());

    std::vector<MappedSuitability> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        MappedSuitability m;
        m.market = r.market;
        m.cls = r.cls;
        for (size_t d = 0; d < n_suit_dims; ++d) {
            const auto& vals = class_values[r.cls][d];
            auto lo = std::lower_bound(vals.begin(), vals.end(), r.raw[d]);
            auto hi = std::upper_bound(vals.begin(), vals.end(), r.raw[d]);
            double less = static_cast<double>(lo - vals.begin());
            double equal = static_cast<double>(hi - lo);
            m.dims[d] = (less + 0.5 * equal) / static_cast<double>(vals.size());
        }
        out.push_back(std::move(m));
    }
    return out;
}

double suitability_score(const std::array<double, n_suit_dims>& dims,
                         const std::array<double, n_suit_dims>& weights) {
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || std::isnan(w))
            throw Error(Error::Kind::bad_weights, "negative suitability weight");
        wsum += w;
    }
    if (wsum <= 0.0) throw Error(Error::Kind::bad_weights, "all-zero suitability weights");
    for (double d : dims) {
        if (std::isnan(d)) throw Error(Error::Kind::missing_dimension, "NaN suitability dimension");
        if (d < 0.0 || d > 1.0)
            throw Error(Error::Kind::bad_config, "suitability dimension outside [0, 1]");
    }
    double log_sum = 0.0;
    for (size_t i = 0; i < n_suit_dims; ++i) {
        double w = weights[i] / wsum;
        if (w == 0.0) continue;
        if (dims[i] == 0.0) return 0.0;
        log_sum += w * std::log(dims[i]);
    }
    return std::exp(log_sum);
}

ListingDecision listing_decision(double score, const OverlayFlags& flags, double threshold) {
    if (flags.default_no_list) return {false, "governance"};
    if (score < threshold) return {false, "quantitative"};
    return {true, ""};
}

const char* to_string(GateBranch b) {
    switch (b) {
        case GateBranch::full_panel: return "full_panel";
        case GateBranch::sports_crypto_heavy: return "sports_crypto_heavy";
        case GateBranch::protocol_paper: return "protocol_paper";
    }
    return "unknown";
}

GateOutcome adequacy_gate(const GateCounts& counts, const GateFloors& floors) {
    GateOutcome out;
    out.counts = counts;
    out.floors = floors;
    bool politics_ok = counts.n_politics >= floors.politics;
    bool sports_ok = counts.n_sports >= floors.sports;
    bool crypto_ok = counts.n_crypto >= floors.crypto;
    bool total_ok = counts.total() >= floors.total;
    if (politics_ok && sports_ok && crypto_ok && total_ok)
        out.branch = GateBranch::full_panel;
    else if (sports_ok && crypto_ok)
        out.branch = GateBranch::sports_crypto_heavy;
    else
        out.branch = GateBranch::protocol_paper;
    out.sports_trigger = counts.sports_share() > floors.sports_share_trigger;
    return out;
}

nlohmann::json to_json(const GateOutcome& g) {
    return {
        {"branch", to_string(g.branch)},
        {"sports_trigger", g.sports_trigger},
        {"counts",
         {{"politics", g.counts.n_politics},
          {"sports", g.counts.n_sports},
          {"crypto", g.counts.n_crypto},
          {"other", g.counts.n_other},
          {"total", g.counts.total()},
          {"sports_share", g.counts.sports_share()},
          {"gamma_miss_rate", g.counts.gamma_miss_rate},
          {"resolution_join_rate", g.counts.resolution_join_rate}}},
        {"floors",
         {{"politics", g.floors.politics},
          {"sports", g.floors.sports},
          {"crypto", g.floors.crypto},
          {"total", g.floors.total},
          {"sports_share_trigger", g.floors.sports_share_trigger}}},
    };
}

GateCounts usable_counts(const std::vector<MarketData>& markets, const UsableParams& p) {
    GateCounts counts;
    uint64_t gamma_miss = 0;
    uint64_t resolved = 0;
    for (const auto& md : markets) {
        if (md.cls == MarketClass::other) ++gamma_miss;
        if (md.resolution) ++resolved;
        if (!md.resolution || md.events.size() < p.min_events) continue;
        double lifetime = hours_between(md.events.front().timestamp_received,
                                        md.events.back().timestamp_received);
        if (lifetime < p.min_lifetime_hours) continue;
        switch (md.cls) {
            case MarketClass::politics: ++counts.n_politics; break;
            case MarketClass::sports: ++counts.n_sports; break;
            case MarketClass::crypto: ++counts.n_crypto; break;
            case MarketClass::other: ++counts.n_other; break;
        }
    }
    if (!markets.empty()) {
        counts.gamma_miss_rate = static_cast<double>(gamma_miss) / markets.size();
        counts.resolution_join_rate = static_cast<double>(resolved) / markets.size();
    }
    return counts;
}

std::vector<std::string> stratified_sample(
    const std::vector<std::pair<std::string, Ts>>& market_first_seen, size_t per_day,
    uint64_t seed) {
    constexpr Ts ms_per_day = 24 * ms_per_hour;
    std::map<Ts, std::vector<std::string>> by_day;
    for (const auto& [id, ts] : market_first_seen) by_day[ts / ms_per_day].push_back(id);

    std::vector<std::vector<std::string>> picks;
    uint64_t day_ordinal = 0;
    for (auto& [day, ids] : by_day) {
        std::sort(ids.begin(), ids.end());
        SplitMix64 g(derive_seed(seed, day_ordinal++));
        deterministic_shuffle(ids, g);
        if (ids.size() > per_day) ids.resize(per_day);
        picks.push_back(std::move(ids));
    }

    std::vector<std::string> out;
    for (size_t k = 0;; ++k) {
        bool any = false;
        for (auto& day_picks : picks)
            if (k < day_picks.size()) {
                out.push_back(day_picks[k]);
                any = true;
            }
        if (!any) break;
    }
    return out;
}

}  // namespace perp
