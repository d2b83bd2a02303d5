#pragma once

#include <optional>

#include "perp/book.hpp"
#include "perp/types.hpp"

namespace perp {

struct LiquidationParams {
    double eta_trnch = 0.25;       // depth fraction per tranche
    double delta_trnch_s = 60.0;   // spacing between tranches, seconds
    double cascade_ratio = 1.0;    // pending/depth ratio beyond which throughput halves
    double throttle = 0.5;
    double phi_fund = 0.05;        // insurance fund as fraction of open interest
    enum class ExecMode : uint8_t { at_mid, walk_book } exec_mode = ExecMode::walk_book;
};

struct AccountState {
    PositionSide side = PositionSide::long_;
    double notional = 0.0;        // units at entry
    double remaining = 0.0;       // units still open
    Price entry_price = 0.0;
    double margin_posted = 0.0;
    double realized_pnl = 0.0;
    double funding_accrued = 0.0;
    double leverage_at_entry = 1.0;
    bool open = false;
    std::optional<Ts> liquidated_at;

    double direction() const { return side == PositionSide::long_ ? 1.0 : -1.0; }
    double unrealized(Price mark) const { return direction() * remaining * (mark - entry_price); }
    double equity(Price mark) const {
        return margin_posted + realized_pnl + funding_accrued + unrealized(mark);
    }
    // realize PnL on qty units closed at the given price
    void close_units(double qty, Price price) {
        realized_pnl += direction() * qty * (price - entry_price);
        remaining -= qty;
    }
};

struct InsuranceFund {
    double balance = 0.0;
    double initial_size = 0.0;
    uint64_t bad_debt_events = 0;
    double total_drawdown = 0.0;
};

// breach iff equity < maintenance (strict; equality is healthy).
bool margin_breach(const AccountState& a, Price mark, double maintenance);

struct TranchePlan {
    double size = 0.0;
    bool forced_min_lot = false;  // zero-depth progress rule
};

// min(remaining, eta * depth); zero depth falls back to a minimum lot of 1 so
// liquidation always makes progress, flagged for exclusion.
TranchePlan plan_tranches(double remaining, double depth, const LiquidationParams& p = {});

// 1 while pending pressure stays within cascade_ratio * depth, else throttle.
double throttle_factor(double lambda, double depth, const LiquidationParams& p = {});

struct Fill {
    double filled = 0.0;
    Price price = 0.0;  // VWAP over consumed levels
    bool book_exhausted = false;
};

// Close `tranche` units of the account against the book.  at_mid fills at the
// prevailing mid up to the displayed size within 200 bps on the exit side;
// walk_book consumes levels in price order realizing slippage.  When the exit
// side is completely empty the whole tranche fills at fallback_price (the
// prevailing mark), so dormant books cannot stall a liquidation.
Fill execute_tranche(AccountState& a, const OrderBookState& book, double tranche,
                     LiquidationParams::ExecMode mode, Price fallback_price);

// Route a fully closed account's shortfall to the fund: negative final equity
// becomes a bad-debt event and drawdown; the account is floored at zero.
void settle_shortfall(AccountState& a, InsuranceFund& fund, Price final_mark);

}  // namespace perp
