// Stateless re-evaluation of one position, used as a test oracle against the
// incremental simulator.  Market quantities (index series, depth, books for
// tranche execution) are re-derived from the raw event prefix rather than
// carried forward in simulation state; only the account ledger and schedule
// positions persist across events.  Pure formula primitives are shared with
// the production path so agreement can be checked bitwise.

#include <algorithm>
#include <cmath>

#include "perp/engine.hpp"

namespace perp {

namespace {

struct EventObs {
    Ts ts = 0;
    std::optional<Price> index_at_event;  // value computed at this event, if any
    std::optional<Price> carry;           // last defined value through this event
    double depth = 0.0;
    bool has_mid = false;
};

// Fresh replay of the full prefix [0, k]; levels identical to the incremental
// book by reconstruction determinism.
OrderBookState rebuild_book(const std::vector<CleanEvent>& events, size_t upto_inclusive) {
    OrderBookState b;
    for (size_t j = 0; j <= upto_inclusive && j < events.size(); ++j) apply_event(b, events[j]);
    return b;
}

}  // namespace

PositionOutcome reference_simulate_position(const EngineConfig& engine, const MarketData& market,
                                            const PositionSpec& spec) {
    const auto& events = market.events;
    const size_t n = events.size();
    const bool has_tau = market.resolution.has_value();
    const Ts tau = has_tau ? market.resolution->resolution_ts : 0;
    const ProtocolSchedule sched = ProtocolSchedule::for_class(market.cls);
    const Ts halt_start = has_tau ? tau - static_cast<Ts>(sched.delta_b_hours * ms_per_hour) : 0;
    const bool r3 = engine.mechanic == MechanicId::R3;
    const Ts funding_ms = static_cast<Ts>(engine.params.funding.interval_hours * ms_per_hour);
    const Ts tranche_ms = static_cast<Ts>(engine.params.liquidation.delta_trnch_s * ms_per_second);
    const double basis = engine.params.synthetic_basis;

    // Pure derivation of the per-event observation series.
    std::vector<EventObs> series(n);
    IndexPath ipath;
    {
        OrderBookState b;
        std::vector<TradeObs> trades;
        std::optional<Price> carry;
        for (size_t k = 0; k < n; ++k) {
            apply_event(b, events[k]);
            if (events[k].event_type == EventType::last_trade_price)
                trades.push_back({events[k].timestamp_received, events[k].trade().price,
                                  events[k].trade().size});
            EventObs& o = series[k];
            o.ts = events[k].timestamp_received;
            o.index_at_event = compute_index(engine, b, trades);
            if (o.index_at_event) {
                carry = o.index_at_event;
                ipath.push_back({o.ts, *o.index_at_event});
            }
            o.carry = carry;
            o.depth = depth_within(b, engine.params.index.band_bps).total();
            o.has_mid = b.mid().has_value();
        }
    }

    auto ttr_at = [&](Ts t) { return has_tau ? hours_between(t, tau) : 1e9; };

    AccountState account;
    account.side = spec.side;
    account.leverage_at_entry = spec.leverage;
    double collateral = 0.0;
    double static_maintenance = 0.0;
    bool entered = false, halted = false, in_liquidation = false, exited = false;
    bool fully_liquidated = false;
    Ts entry_at = 0, next_funding = 0, next_tranche = 0;
    std::optional<Ts> first_breach;
    double max_drawdown = 0.0;
    uint32_t compliance_closes = 0, forced_fills = 0;

    auto settle_funding_to = [&](Ts up_to, std::optional<Price> carry_value) {
        while (entered && account.open && next_funding <= up_to) {
            const Ts b = next_funding;
            if (has_tau && b >= tau) break;
            if (r3 && has_tau && b >= halt_start) break;
            const Price index = *carry_value;
            const Price mark = index + basis;
            const FundingRule rule =
                engine.funding_mode == FundingMode::aware ? FundingRule::aware : FundingRule::naive;
            const double rate = funding_rate(engine, rule, mark, index, ttr_at(b));
            account.funding_accrued +=
                funding_payment(spec.side, rate, account.remaining, engine.params.funding.interval_hours);
            next_funding += funding_ms;
        }
    };

    auto note_dd = [&](double eq) {
        const double dd = collateral - eq;
        if (dd > max_drawdown) max_drawdown = dd;
    };

    std::optional<Price> final_carry;

    for (size_t k = 0; k < n; ++k) {
        const Ts ts = series[k].ts;
        const std::optional<Price> carry_prev = k > 0 ? series[k - 1].carry : std::nullopt;

        if (entered && account.open) settle_funding_to(ts, carry_prev);

        if (r3 && has_tau && ts >= halt_start && entered && account.open && !halted) {
            account.close_units(account.remaining, *carry_prev);
            account.open = false;
            halted = true;
            final_carry = carry_prev;
            break;
        }
        if (has_tau && ts >= tau) break;

        const std::optional<Price> carry = series[k].carry;
        final_carry = carry;

        if (!entered && ts >= spec.entry_ts && carry && !(r3 && has_tau && ts >= halt_start)) {
            entered = true;
            entry_at = ts;
            account.open = true;
            account.entry_price = *carry + basis;
            account.notional = spec.notional;
            account.remaining = spec.notional;
            collateral = spec.margin_basis == MarginBasis::entry_value
                             ? spec.notional * (*carry) / spec.leverage
                             : spec.notional / spec.leverage;
            account.margin_posted = collateral;
            static_maintenance = engine.params.margin.mu * collateral;
            next_funding = ts + funding_ms;
        }

        if (!entered || !account.open) continue;

        const Price mark = *carry + basis;
        note_dd(account.equity(mark));

        if (engine.leverage_mode == LeverageMode::compressed && has_tau && !in_liquidation) {
            const double cap = leverage_cap(ttr_at(ts), engine.params.margin);
            const double eq = account.equity(mark);
            const double expo =
                spec.side == PositionSide::long_ ? account.remaining * mark
                                                 : account.remaining * (1.0 - mark);
            if (eq > 0.0 && expo > cap * eq) {
                const double unit_value = spec.side == PositionSide::long_ ? mark : 1.0 - mark;
                if (unit_value > 0.0) {
                    const double target_units = cap * eq / unit_value;
                    const double dq = account.remaining - target_units;
                    if (dq > 0.0) {
                        account.close_units(dq, mark);
                        ++compliance_closes;
                    }
                }
            }
        }

        double maintenance;
        if (engine.margin_mode == MarginMode::static_vol) {
            maintenance = static_maintenance;
        } else {
            VolEstimate vol = realized_vol(ipath, ts, engine.params.vol);
            const double pi = jump_prob(engine, ttr_at(ts), *carry, market.cls, ts);
            MarginQuote q = initial_margin(account.remaining, vol.sigma, pi, ttr_at(ts), *carry,
                                           series[k].depth, engine.params.margin);
            maintenance = q.maintenance;
        }

        if (!in_liquidation && margin_breach(account, mark, maintenance)) {
            in_liquidation = true;
            if (!first_breach) first_breach = ts;
            account.liquidated_at = first_breach;
            next_tranche = ts;
        }

        while (in_liquidation && account.open && next_tranche <= ts) {
            if (account.equity(mark) >= maintenance) {
                in_liquidation = false;
                break;
            }
            const double depth = series[k].depth;
            TranchePlan plan = plan_tranches(account.remaining, depth, engine.params.liquidation);
            double size = plan.size;
            if (!plan.forced_min_lot)
                size *= throttle_factor(account.remaining, depth, engine.params.liquidation);
            else
                ++forced_fills;

            if (engine.params.liquidation.exec_mode == LiquidationParams::ExecMode::at_mid &&
                !series[k].has_mid) {
                account.close_units(std::min(size, account.remaining), mark);
                ++forced_fills;
            } else {
                OrderBookState exec_book = rebuild_book(events, k);
                Fill f = execute_tranche(account, exec_book, size, engine.params.liquidation.exec_mode,
                                         mark);
                if (f.filled <= 0.0) {
                    account.close_units(std::min(size, account.remaining), mark);
                    ++forced_fills;
                }
            }
            next_tranche += tranche_ms;

            if (account.remaining <= 1e-12) {
                account.remaining = 0.0;
                account.open = false;
                fully_liquidated = true;
            }
        }

        if (account.open && !in_liquidation && spec.exit) {
            const double eq = account.equity(mark);
            const auto& xr = *spec.exit;
            const bool stop = xr.stop_loss_frac > 0.0 && eq <= (1.0 - xr.stop_loss_frac) * collateral;
            const bool take = xr.take_profit_frac > 0.0 && eq >= (1.0 + xr.take_profit_frac) * collateral;
            const bool timed = xr.timeout_hours > 0.0 &&
                               ts >= entry_at + static_cast<Ts>(xr.timeout_hours * ms_per_hour);
            if (stop || take || timed) {
                account.close_units(account.remaining, mark);
                account.open = false;
                exited = true;
            }
        }
    }

    if (!entered)
        throw Error(Error::Kind::no_entry_quote, "no valid index at or after the entry instant");

    Price final_mark = (final_carry ? *final_carry : account.entry_price) + basis;

    if (account.open) {
        if (r3 && has_tau) {
            settle_funding_to(halt_start, final_carry);
            account.close_units(account.remaining, *final_carry);
            account.open = false;
            halted = true;
            final_mark = *final_carry + basis;
        } else if (has_tau) {
            settle_funding_to(tau, final_carry);
            account.close_units(account.remaining, static_cast<Price>(market.resolution->outcome));
            account.open = false;
            final_mark = static_cast<Price>(market.resolution->outcome);
        }
    }

    PositionOutcome out;
    out.entry_price = account.entry_price;
    out.entry_at = entry_at;
    out.collateral = collateral;
    out.liquidation_ts = first_breach;
    out.compliance_closes = compliance_closes;
    out.forced_fills = forced_fills;

    const double final_eq = account.equity(final_mark);
    out.final_equity = final_eq;
    out.bad_debt = std::max(0.0, -final_eq);
    out.final_pnl = std::max(final_eq, 0.0) - collateral;
    note_dd(final_eq);
    out.max_drawdown = std::max(0.0, max_drawdown);

    if (halted) {
        out.terminal = Terminal::halt_closed;
    } else if (fully_liquidated) {
        out.terminal = Terminal::liquidated;
    } else if (account.open || exited) {
        out.terminal = Terminal::survived;
    } else {
        out.terminal = Terminal::settled;
    }
    return out;
}

}  // namespace perp
