#include "perp/liquidation.hpp"

#include <algorithm>

namespace perp {

bool margin_breach(const AccountState& a, Price mark, double maintenance) {
    if (!a.open) throw Error(Error::Kind::closed_account, "margin check on a closed account");
    return a.equity(mark) < maintenance;
}

TranchePlan plan_tranches(double remaining, double depth, const LiquidationParams& p) {
    TranchePlan plan;
    if (remaining <= 0.0) return plan;
    const double by_depth = p.eta_trnch * depth;
    if (by_depth <= 0.0) {
        plan.size = std::min(remaining, 1.0);
        plan.forced_min_lot = true;
        return plan;
    }
    plan.size = std::min(remaining, by_depth);
    return plan;
}

double throttle_factor(double lambda, double depth, const LiquidationParams& p) {
    return lambda <= p.cascade_ratio * depth ? 1.0 : p.throttle;
}

namespace {

template <typename Map>
Fill walk_levels(const Map& levels, double qty) {
    Fill f;
    double cost = 0.0;
    for (const auto& [price, size] : levels) {
        if (f.filled >= qty) break;
        const double take = std::min(qty - f.filled, size);
        cost += price * take;
        f.filled += take;
    }
    if (f.filled < qty) f.book_exhausted = true;
    if (f.filled > 0.0) f.price = cost / f.filled;
    return f;
}

}  // namespace

Fill execute_tranche(AccountState& a, const OrderBookState& book, double tranche,
                     LiquidationParams::ExecMode mode, Price fallback_price) {
    Fill f;
    if (tranche <= 0.0) return f;
    const bool closing_long = a.side == PositionSide::long_;

    if (mode == LiquidationParams::ExecMode::at_mid) {
        auto mid = book.mid();
        if (!mid) throw Error(Error::Kind::missing_mid, "at_mid execution with no mid");
        DepthProfile d = depth_within(book, *mid, 200);
        const double available = closing_long ? d.bid_depth_within : d.ask_depth_within;
        f.filled = std::min(tranche, available);
        f.price = *mid;
        f.book_exhausted = f.filled < tranche;
    } else {
        if (closing_long ? book.bids.empty() : book.asks.empty()) {
            // nothing displayed at all: the tranche clears at the prevailing
            // mark so dormant books cannot stall the queue
            f.filled = tranche;
            f.price = fallback_price;
        } else if (closing_long) {
            f = walk_levels(book.bids, tranche);
        } else {
            f = walk_levels(book.asks, tranche);
        }
    }

    if (f.filled > 0.0) a.close_units(f.filled, f.price);
    return f;
}

void settle_shortfall(AccountState& a, InsuranceFund& fund, Price final_mark) {
    const double eq = a.equity(final_mark);
    if (eq < 0.0) {
        fund.balance -= -eq;
        fund.bad_debt_events += 1;
        fund.total_drawdown += -eq;
        a.realized_pnl += -eq;  // floor the account at zero equity
    }
}

}  // namespace perp
