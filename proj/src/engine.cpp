#include "perp/engine.hpp"

#include <algorithm>
#include <cmath>

namespace perp {

const char* to_string(EngineId id) {
    switch (id) {
        case EngineId::e0: return "E0";
        case EngineId::e1: return "E1";
        case EngineId::e2: return "E2";
        default: return "custom";
    }
}

const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::survived: return "survived";
        case Terminal::liquidated: return "liquidated";
        case Terminal::settled: return "settled";
        default: return "halt_closed";
    }
}

EngineConfig build_engine(EngineId id, EngineParams params) {
    EngineConfig cfg;
    cfg.id = id;
    cfg.params = std::move(params);
    switch (id) {
        case EngineId::e0:
            cfg.index_source = IndexSource::reference_direct;
            cfg.margin_mode = MarginMode::static_vol;
            cfg.funding_mode = FundingMode::naive;
            cfg.leverage_mode = LeverageMode::constant;
            cfg.mechanic = MechanicId::R0;
            break;
        case EngineId::e1:
            cfg.index_source = IndexSource::reference_direct;
            cfg.margin_mode = MarginMode::jump_aware;
            cfg.funding_mode = FundingMode::naive;
            cfg.leverage_mode = LeverageMode::compressed;
            cfg.mechanic = MechanicId::R0;
            break;
        case EngineId::e2:
            cfg.index_source = IndexSource::composite;
            cfg.margin_mode = MarginMode::jump_aware;
            cfg.funding_mode = FundingMode::aware;
            cfg.leverage_mode = LeverageMode::compressed;
            cfg.mechanic = MechanicId::R3;
            break;
        case EngineId::custom:
            break;
    }
    return cfg;
}

void validate_engine(const EngineConfig& cfg) {
    if (cfg.id == EngineId::custom) return;
    EngineConfig canon = build_engine(cfg.id, {});
    const bool ok = cfg.index_source == canon.index_source && cfg.margin_mode == canon.margin_mode &&
                    cfg.funding_mode == canon.funding_mode &&
                    cfg.leverage_mode == canon.leverage_mode && cfg.mechanic == canon.mechanic;
    if (!ok)
        throw Error(Error::Kind::inconsistent_config,
                    std::string("wiring override conflicts with engine id ") + to_string(cfg.id));
}

std::optional<Price> compute_index(const EngineConfig& engine, const OrderBookState& book,
                                   const std::vector<TradeObs>& trades) {
    if (engine.index_source == IndexSource::reference_direct) return reference_direct_index(book);
    auto v = composite_index_from_book(book, trades, engine.params.index);
    if (!v) return std::nullopt;
    return v->value;
}

double jump_prob(const EngineConfig& engine, double ttr_hours, Price index, MarketClass cls, Ts t) {
    const bool news = news_active(engine.params.news, cls, t);
    if (engine.params.hazard) return eval_jump_hazard(*engine.params.hazard, ttr_hours, index, news);
    // no fitted table: the Laplace prior with zero observations
    return 0.5;
}

double funding_rate(const EngineConfig& engine, FundingRule rule, Price mark, Price index,
                    double ttr_hours) {
    const auto& fp = engine.params.funding;
    // the boundary correction is undefined at an exactly-degenerate index;
    // fall back to the basis-only rate there
    if (rule == FundingRule::aware && index > 0.0 && index < 1.0)
        return funding_aware(mark, index, ttr_hours, fp);
    return funding_naive(mark, index, fp.c);
}

namespace {

constexpr double far_future_hours = 1e9;

struct SimState {
    AccountState account;
    double collateral = 0.0;
    double static_maintenance = 0.0;
    bool entered = false;
    bool halted = false;
    bool in_liquidation = false;
    bool exited = false;
    bool fully_liquidated = false;
    Ts entry_at = 0;
    Ts next_funding = 0;
    Ts next_tranche = 0;
    std::optional<Ts> first_breach;
    double max_drawdown = 0.0;
    uint32_t compliance_closes = 0;
    uint32_t forced_fills = 0;
};

void note_drawdown(SimState& st, double equity) {
    const double dd = st.collateral - equity;
    if (dd > st.max_drawdown) st.max_drawdown = dd;
}

double exposure_value(const AccountState& a, Price mark) {
    return a.side == PositionSide::long_ ? a.remaining * mark : a.remaining * (1.0 - mark);
}

}  // namespace

PositionOutcome simulate_position(const EngineConfig& engine, const MarketData& market,
                                  const PositionSpec& spec) {
    const bool has_tau = market.resolution.has_value();
    const Ts tau = has_tau ? market.resolution->resolution_ts : 0;
    const ProtocolSchedule sched = ProtocolSchedule::for_class(market.cls);
    const Ts halt_start = has_tau ? tau - static_cast<Ts>(sched.delta_b_hours * ms_per_hour) : 0;
    const bool r3 = engine.mechanic == MechanicId::R3;
    const Ts funding_ms = static_cast<Ts>(engine.params.funding.interval_hours * ms_per_hour);
    const Ts tranche_ms = static_cast<Ts>(engine.params.liquidation.delta_trnch_s * ms_per_second);

    OrderBookState book;
    std::vector<TradeObs> trades;
    IndexPath ipath;
    std::optional<Price> last_index;
    SimState st;
    st.account.side = spec.side;
    st.account.leverage_at_entry = spec.leverage;

    auto ttr_at = [&](Ts t) { return has_tau ? hours_between(t, tau) : far_future_hours; };

    auto funding_due = [&](Ts up_to) {
        // boundaries settle on carry-forward state, strictly before any halt
        // or settlement instant
        while (st.entered && st.account.open && st.next_funding <= up_to) {
            const Ts b = st.next_funding;
            if (has_tau && b >= tau) break;
            if (r3 && has_tau && b >= halt_start) break;
            const Price index = *last_index;
            const Price mark = index + engine.params.synthetic_basis;
            const FundingRule rule =
                engine.funding_mode == FundingMode::aware ? FundingRule::aware : FundingRule::naive;
            const double rate = funding_rate(engine, rule, mark, index, ttr_at(b));
            st.account.funding_accrued += funding_payment(
                spec.side, rate, st.account.remaining, engine.params.funding.interval_hours);
            st.next_funding += funding_ms;
        }
    };

    auto halt_close = [&]() {
        // forced close of the whole position at the index value prevailing at
        // halt entry; not a liquidation, the book is not walked
        const Price close_price = *last_index;
        st.account.close_units(st.account.remaining, close_price);
        st.account.open = false;
        st.halted = true;
    };

    auto maintenance_at = [&](Ts ts) {
        if (engine.margin_mode == MarginMode::static_vol) return st.static_maintenance;
        const double ttr = ttr_at(ts);
        VolEstimate vol = realized_vol(ipath, ts, engine.params.vol);
        const double pi = jump_prob(engine, ttr, *last_index, market.cls, ts);
        const double depth = depth_within(book, engine.params.index.band_bps).total();
        MarginQuote q = initial_margin(st.account.remaining, vol.sigma, pi, ttr, *last_index, depth,
                                       engine.params.margin);
        return q.maintenance;
    };

    for (const auto& ev : market.events) {
        const Ts ts = ev.timestamp_received;

        if (st.entered && st.account.open) funding_due(ts);

        if (r3 && has_tau && ts >= halt_start && st.entered && st.account.open && !st.halted) {
            halt_close();
            break;
        }
        if (has_tau && ts >= tau) break;

        apply_event(book, ev);
        if (ev.event_type == EventType::last_trade_price)
            trades.push_back({ts, ev.trade().price, ev.trade().size});

        if (auto v = compute_index(engine, book, trades)) {
            last_index = *v;
            ipath.push_back({ts, *v});
        }

        if (!st.entered && ts >= spec.entry_ts && last_index &&
            !(r3 && has_tau && ts >= halt_start)) {
            st.entered = true;
            st.entry_at = ts;
            st.account.open = true;
            st.account.entry_price = *last_index + engine.params.synthetic_basis;
            st.account.notional = spec.notional;
            st.account.remaining = spec.notional;
            st.collateral = spec.margin_basis == MarginBasis::entry_value
                                ? spec.notional * (*last_index) / spec.leverage
                                : spec.notional / spec.leverage;
            st.account.margin_posted = st.collateral;
            st.static_maintenance = engine.params.margin.mu * st.collateral;
            st.next_funding = ts + funding_ms;
        }

        if (!st.entered || !st.account.open) continue;

        const Price mark = *last_index + engine.params.synthetic_basis;
        note_drawdown(st, st.account.equity(mark));

        // leverage compression: partial close back to the schedule cap at the
        // prevailing mark; keeps equity unchanged, shrinks exposure
        if (engine.leverage_mode == LeverageMode::compressed && has_tau && !st.in_liquidation) {
            const double cap = leverage_cap(ttr_at(ts), engine.params.margin);
            const double eq = st.account.equity(mark);
            const double expo = exposure_value(st.account, mark);
            if (eq > 0.0 && expo > cap * eq) {
                const double unit_value =
                    spec.side == PositionSide::long_ ? mark : 1.0 - mark;
                if (unit_value > 0.0) {
                    const double target_units = cap * eq / unit_value;
                    const double dq = st.account.remaining - target_units;
                    if (dq > 0.0) {
                        st.account.close_units(dq, mark);
                        ++st.compliance_closes;
                    }
                }
            }
        }

        double maintenance = maintenance_at(ts);
        if (!st.in_liquidation && margin_breach(st.account, mark, maintenance)) {
            st.in_liquidation = true;
            if (!st.first_breach) st.first_breach = ts;
            st.account.liquidated_at = st.first_breach;
            st.next_tranche = ts;
        }

        while (st.in_liquidation && st.account.open && st.next_tranche <= ts) {
            if (st.account.equity(mark) >= maintenance) {
                st.in_liquidation = false;  // partial closes restored health
                break;
            }
            const double depth = depth_within(book, engine.params.index.band_bps).total();
            TranchePlan plan = plan_tranches(st.account.remaining, depth, engine.params.liquidation);
            double size = plan.size;
            if (!plan.forced_min_lot)
                size *= throttle_factor(st.account.remaining, depth, engine.params.liquidation);
            else
                ++st.forced_fills;

            // several tranches can fall on one sparse-event stretch; they all
            // see the same displayed book (no self-impact model)
            if (engine.params.liquidation.exec_mode == LiquidationParams::ExecMode::at_mid &&
                !book.mid()) {
                st.account.close_units(std::min(size, st.account.remaining), mark);
                ++st.forced_fills;
            } else {
                Fill f = execute_tranche(st.account, book, size, engine.params.liquidation.exec_mode,
                                         mark);
                if (f.filled <= 0.0) {
                    st.account.close_units(std::min(size, st.account.remaining), mark);
                    ++st.forced_fills;
                }
            }
            st.next_tranche += tranche_ms;

            if (st.account.remaining <= 1e-12) {
                st.account.remaining = 0.0;
                st.account.open = false;
                st.fully_liquidated = true;
            }
        }

        if (st.account.open && !st.in_liquidation && spec.exit) {
            const double eq = st.account.equity(mark);
            const auto& xr = *spec.exit;
            const bool stop = xr.stop_loss_frac > 0.0 && eq <= (1.0 - xr.stop_loss_frac) * st.collateral;
            const bool take = xr.take_profit_frac > 0.0 && eq >= (1.0 + xr.take_profit_frac) * st.collateral;
            const bool timed = xr.timeout_hours > 0.0 &&
                               ts >= st.entry_at + static_cast<Ts>(xr.timeout_hours * ms_per_hour);
            if (stop || take || timed) {
                st.account.close_units(st.account.remaining, mark);
                st.account.open = false;
                st.exited = true;
            }
        }
    }

    if (!st.entered)
        throw Error(Error::Kind::no_entry_quote, "no valid index at or after the entry instant");

    Price final_mark = (last_index ? *last_index : st.account.entry_price) + engine.params.synthetic_basis;

    if (st.account.open) {
        if (r3 && has_tau) {
            // data ran out before an event crossed the halt boundary; the halt
            // still fires on the clock
            funding_due(halt_start);
            halt_close();
            final_mark = *last_index + engine.params.synthetic_basis;
        } else if (has_tau) {
            funding_due(tau);
            st.account.close_units(st.account.remaining, static_cast<Price>(market.resolution->outcome));
            st.account.open = false;
            final_mark = static_cast<Price>(market.resolution->outcome);
        }
    }

    PositionOutcome out;
    out.entry_price = st.account.entry_price;
    out.entry_at = st.entry_at;
    out.collateral = st.collateral;
    out.liquidation_ts = st.first_breach;
    out.compliance_closes = st.compliance_closes;
    out.forced_fills = st.forced_fills;

    const double final_eq = st.account.equity(final_mark);
    out.final_equity = final_eq;
    out.bad_debt = std::max(0.0, -final_eq);
    out.final_pnl = std::max(final_eq, 0.0) - st.collateral;
    note_drawdown(st, final_eq);
    out.max_drawdown = std::max(0.0, st.max_drawdown);

    if (st.halted) {
        out.terminal = Terminal::halt_closed;
    } else if (st.fully_liquidated) {
        out.terminal = Terminal::liquidated;
    } else if (st.account.open || st.exited) {
        // still open at data end on an unresolved market, or a voluntary exit
        out.terminal = Terminal::survived;
    } else {
        out.terminal = Terminal::settled;
    }
    return out;
}

std::vector<PositionOutcome> simulate_market(const EngineConfig& engine, const MarketData& market,
                                             const std::vector<PositionSpec>& specs) {
    std::vector<PositionOutcome> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(simulate_position(engine, market, s));
    return out;
}

}  // namespace perp
