#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perp/ingest.hpp"

namespace perp {

// The six scored listing dimensions, in storage order.
enum class SuitDim : size_t {
    liquidity_adequacy,
    spread_regime,
    depth_stability,
    jump_containment,
    stale_quote_rate,
    resolution_timing,
};
constexpr size_t n_suit_dims = 6;
const char* to_string(SuitDim d);

struct RawSuitability {
    std::string market;
    MarketClass cls = MarketClass::other;
    std::array<double, n_suit_dims> raw{};  // raw features, larger = better
};

struct MappedSuitability {
    std::string market;
    MarketClass cls = MarketClass::other;
    std::array<double, n_suit_dims> dims{};  // class-percentile mapped to (0, 1)
};

// Midpoint-rank empirical CDF within each event class, per dimension:
// p = (count_less + 0.5 * count_equal) / n.  Never exactly 0 or 1, so the
// mapping itself cannot annihilate the geometric mean.
std::vector<MappedSuitability> percentile_map(const std::vector<RawSuitability>& rows);

// Weighted geometric mean over the six dimensions.  Weights are normalized
// internally, so any nonnegative vector with positive sum is accepted and
// scaling all weights leaves the score unchanged.  A zero dimension with
// positive weight forces the score to zero.  Throws bad_weights on a negative
// or all-zero weight vector, missing_dimension on a NaN dimension, bad_config
// on a dimension outside [0, 1].
constexpr std::array<double, n_suit_dims> equal_weights() {
    return {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
}
double suitability_score(const std::array<double, n_suit_dims>& dims,
                         const std::array<double, n_suit_dims>& weights = equal_weights());

// Governance overlay: graded flags reported separately, never folded into the
// quantitative score.  default_no_list marks the categorical exclusion list.
struct OverlayFlags {
    int insider_exposure = 0;
    int resolution_ambiguity = 0;
    int manipulation_surface = 0;
    int concentration = 0;
    bool default_no_list = false;
};

struct ListingDecision {
    bool eligible = false;
    std::string reason;  // "", "governance" or "quantitative"
};

// Eligible iff score >= threshold and the overlay does not categorically
// exclude; the governance tier is checked first.
ListingDecision listing_decision(double score, const OverlayFlags& flags, double threshold = 0.60);

struct GateCounts {
    uint64_t n_politics = 0;
    uint64_t n_sports = 0;
    uint64_t n_crypto = 0;
    uint64_t n_other = 0;
    double gamma_miss_rate = 0.0;       // fraction without a class-metadata join
    double resolution_join_rate = 0.0;  // fraction with a resolution join

    uint64_t three_class_total() const { return n_politics + n_sports + n_crypto; }
    uint64_t total() const { return three_class_total() + n_other; }
    double sports_share() const {
        uint64_t t = three_class_total();
        return t == 0 ? 0.0 : static_cast<double>(n_sports) / static_cast<double>(t);
    }
};

struct GateFloors {
    uint64_t politics = 20;
    uint64_t sports = 20;
    uint64_t crypto = 50;  // pre-registered default; the published table used 30
    uint64_t total = 100;
    double sports_share_trigger = 0.70;
};

enum class GateBranch : uint8_t { full_panel, sports_crypto_heavy, protocol_paper };
const char* to_string(GateBranch b);

struct GateOutcome {
    GateBranch branch = GateBranch::protocol_paper;
    bool sports_trigger = false;
    GateCounts counts;
    GateFloors floors;
};

GateOutcome adequacy_gate(const GateCounts& counts, const GateFloors& floors = {});
nlohmann::json to_json(const GateOutcome& g);

struct UsableParams {
    double min_lifetime_hours = 24.0;
    uint64_t min_events = 100;
};

// Usable-resolved census: a market counts toward its class when it has a
// resolution join, lived at least the lifetime floor and cleared the activity
// floor.  gamma_miss_rate and resolution_join_rate are measured over the full
// input.
GateCounts usable_counts(const std::vector<MarketData>& markets, const UsableParams& p = {});

// Per-UTC-day uniform sample without replacement, min(per_day, available)
// from each day, deterministic in the seed; output order is round-robin
// across days so any prefix is day-balanced.
std::vector<std::string> stratified_sample(
    const std::vector<std::pair<std::string, Ts>>& market_first_seen, size_t per_day,
    uint64_t seed);

}  // namespace perp
