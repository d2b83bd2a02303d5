#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace perp {

using Ts = int64_t;  // milliseconds UTC
using Price = double;
using Size = double;

constexpr Ts ms_per_hour = 3'600'000;
constexpr Ts ms_per_second = 1'000;

inline double hours_between(Ts from, Ts to) {
    return static_cast<double>(to - from) / static_cast<double>(ms_per_hour);
}

enum class BookSide : uint8_t { bid, ask };
enum class TradeSide : uint8_t { buy, sell };
enum class PositionSide : uint8_t { long_, short_ };

enum class MarketClass : uint8_t { politics, sports, crypto, other };

const char* to_string(MarketClass c);
MarketClass market_class_from_string(const std::string& s);

struct Level {
    Price price = 0.0;
    Size size = 0.0;
};

// Single error type for the whole library; callers that need to branch on
// cause check kind(), everything else treats it as a runtime_error.
class Error : public std::runtime_error {
public:
    enum class Kind : uint8_t {
        malformed_record,
        unknown_event_type,
        out_of_range_price,
        stale_event,
        no_snapshot_before,
        non_monotone_timestamps,
        missing_mid,
        missing_value,
        empty_training_set,
        no_components,
        negative_notional,
        degenerate_index,
        closed_account,
        unresolved_market,
        inconsistent_config,
        no_entry_quote,
        no_resolved_markets,
        missing_metric,
        unknown_axis,
        out_of_range,
        invalid_spec,
        missing_dimension,
        bad_weights,
        io_error,
        bad_config,
    };

    Error(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline Error make_error(Error::Kind k, const std::string& what) { return Error(k, what); }

}  // namespace perp
