#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "perp/estimators.hpp"
#include "perp/funding.hpp"
#include "perp/index.hpp"
#include "perp/ingest.hpp"
#include "perp/liquidation.hpp"
#include "perp/margin.hpp"
#include "perp/resolution.hpp"

namespace perp {

enum class EngineId : uint8_t { e0, e1, e2, custom };
enum class IndexSource : uint8_t { reference_direct, composite };
enum class MarginMode : uint8_t { static_vol, jump_aware };
enum class FundingMode : uint8_t { naive, aware };
enum class LeverageMode : uint8_t { constant, compressed };

const char* to_string(EngineId id);

struct EngineParams {
    MarginParams margin;
    FundingParams funding;
    LiquidationParams liquidation;
    IndexParams index;
    VolParams vol;
    double synthetic_basis = 0.0;  // mark = index + basis; no perp market exists in replay
    std::shared_ptr<const HazardTable> hazard;  // fitted upstream; empty 2alpha prior when absent
    std::vector<NewsWindowRec> news;
};

struct EngineConfig {
    EngineId id = EngineId::custom;
    IndexSource index_source = IndexSource::composite;
    MarginMode margin_mode = MarginMode::jump_aware;
    FundingMode funding_mode = FundingMode::aware;
    LeverageMode leverage_mode = LeverageMode::compressed;
    MechanicId mechanic = MechanicId::R3;
    EngineParams params;
};

// Canonical wiring for the three named engines; throws inconsistent_config on
// a named id whose wiring fields were tampered with.
EngineConfig build_engine(EngineId id, EngineParams params = {});
void validate_engine(const EngineConfig& cfg);

enum class MarginBasis : uint8_t {
    entry_value,  // collateral = notional * entry_price / L
    unit_payout,  // collateral = notional / L
};

struct ExitRule {
    // equity thresholds as fractions of posted collateral; disabled when <= 0
    double stop_loss_frac = 0.0;
    double take_profit_frac = 0.0;
    double timeout_hours = 0.0;
};

struct PositionSpec {
    PositionSide side = PositionSide::long_;
    double leverage = 1.0;
    double notional = 1.0;     // units
    Ts entry_ts = 0;           // enter at first valid index at or after this instant
    MarginBasis margin_basis = MarginBasis::entry_value;
    std::optional<ExitRule> exit;
};

enum class Terminal : uint8_t { survived, liquidated, settled, halt_closed };

const char* to_string(Terminal t);

struct PositionOutcome {
    Terminal terminal = Terminal::survived;
    double final_pnl = 0.0;       // trader view: floored equity minus collateral
    std::optional<Ts> liquidation_ts;  // first maintenance breach
    double bad_debt = 0.0;        // max(0, -final equity)
    double max_drawdown = 0.0;    // worst (collateral - equity)+ along the path
    double final_equity = 0.0;    // before the zero floor
    Price entry_price = 0.0;
    Ts entry_at = 0;
    double collateral = 0.0;
    uint32_t compliance_closes = 0;  // leverage-cap partial closes (not liquidations)
    uint32_t forced_fills = 0;       // zero-depth minimum-lot fills
};

// Pure per-instant building blocks, shared by the incremental simulator and
// the stateless oracle so the two can be compared bitwise.
std::optional<Price> compute_index(const EngineConfig& engine, const OrderBookState& book,
                                   const std::vector<TradeObs>& trades);
double jump_prob(const EngineConfig& engine, double ttr_hours, Price index, MarketClass cls, Ts t);
double funding_rate(const EngineConfig& engine, FundingRule rule, Price mark, Price index,
                    double ttr_hours);

// Deterministic rule evaluation of one position along one market path.
// Throws no_entry_quote when no valid index ever appears at/after entry_ts
// strictly before resolution.
PositionOutcome simulate_position(const EngineConfig& engine, const MarketData& market,
                                  const PositionSpec& spec);

// Batch wrapper: outcomes in spec order.
std::vector<PositionOutcome> simulate_market(const EngineConfig& engine, const MarketData& market,
                                             const std::vector<PositionSpec>& specs);

// Stateless oracle: re-derives book, index, estimators and account state from
// scratch at every event, sharing only the pure formula functions.  Exists so
// tests can compare the incremental simulator against a rewrite with no
// shared state.
PositionOutcome reference_simulate_position(const EngineConfig& engine, const MarketData& market,
                                            const PositionSpec& spec);

}  // namespace perp
