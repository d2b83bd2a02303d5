#include <doctest.h>

#include <cmath>
#include <string>

#include "perp/engine.hpp"
#include "perp/synth.hpp"

using namespace perp;

namespace {

SynthSpec quiet_spec(double p0, int outcome, uint64_t seed) {
    SynthSpec s;
    s.seed = seed;
    s.market = "eng-m";
    s.asset_id = "eng-a";
    s.cls = MarketClass::politics;
    s.lifetime_hours = 12.0;
    s.p0 = p0;
    s.wiggle = 0.0;
    s.trade_jitter = 0.0;
    s.size_jitter = 0.0;
    s.resolved = true;
    s.outcome = outcome;
    return s;
}

MarketData make_market(const SynthSpec& s) { return to_market_data(generate(s)); }

PositionSpec long_at(double leverage, double notional = 100.0) {
    PositionSpec p;
    p.side = PositionSide::long_;
    p.leverage = leverage;
    p.notional = notional;
    return p;
}

}  // namespace

TEST_CASE("named engines wire their components canonically") {
    EngineConfig e0 = build_engine(EngineId::e0);
    CHECK(e0.index_source == IndexSource::reference_direct);
    CHECK(e0.margin_mode == MarginMode::static_vol);
    CHECK(e0.funding_mode == FundingMode::naive);
    CHECK(e0.leverage_mode == LeverageMode::constant);
    CHECK(e0.mechanic == MechanicId::R0);

    EngineConfig e1 = build_engine(EngineId::e1);
    CHECK(e1.margin_mode == MarginMode::jump_aware);
    CHECK(e1.funding_mode == FundingMode::naive);
    CHECK(e1.mechanic == MechanicId::R0);

    EngineConfig e2 = build_engine(EngineId::e2);
    CHECK(e2.index_source == IndexSource::composite);
    CHECK(e2.funding_mode == FundingMode::aware);
    CHECK(e2.mechanic == MechanicId::R3);

    CHECK(std::string(to_string(EngineId::e0)) == "E0");
    CHECK(std::string(to_string(EngineId::e2)) == "E2");
    CHECK_NOTHROW(validate_engine(e0));
    CHECK_NOTHROW(validate_engine(e1));
    CHECK_NOTHROW(validate_engine(e2));
}

TEST_CASE("tampered named wiring is rejected") {
    EngineConfig e1 = build_engine(EngineId::e1);
    e1.funding_mode = FundingMode::aware;
    try {
        validate_engine(e1);
        FAIL("expected inconsistent_config");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::inconsistent_config);
    }

    EngineConfig e2 = build_engine(EngineId::e2);
    e2.mechanic = MechanicId::R1;
    CHECK_THROWS_AS(validate_engine(e2), Error);

    // custom ids may wire anything
    EngineConfig cst;
    cst.id = EngineId::custom;
    cst.margin_mode = MarginMode::static_vol;
    cst.mechanic = MechanicId::R2;
    CHECK_NOTHROW(validate_engine(cst));
}

TEST_CASE("jump probability without a fitted table is the flat prior") {
    EngineConfig e2 = build_engine(EngineId::e2);
    CHECK(jump_prob(e2, 5.0, 0.5, MarketClass::politics, 0) == 0.5);
}

TEST_CASE("funding rate falls back to the basis-only rule at a degenerate index") {
    EngineConfig e2 = build_engine(EngineId::e2);
    CHECK(funding_rate(e2, FundingRule::aware, 0.5, 0.0, 5.0) ==
          funding_naive(0.5, 0.0, e2.params.funding.c));
    // and honors the requested rule away from the boundary
    CHECK(funding_rate(e2, FundingRule::naive, 0.54, 0.5, 5.0) ==
          funding_naive(0.54, 0.5, e2.params.funding.c));
    CHECK(funding_rate(e2, FundingRule::aware, 0.54, 0.5, 5.0) ==
          funding_aware(0.54, 0.5, 5.0, e2.params.funding));
}

TEST_CASE("a flat market resolving for the long side pays out half the notional") {
    MarketData md = make_market(quiet_spec(0.5, 1, 21));
    PositionOutcome out = simulate_position(build_engine(EngineId::e0), md, long_at(1.0));
    CHECK(out.terminal == Terminal::settled);
    CHECK(out.terminal != Terminal::liquidated);
    CHECK(out.entry_price == 0.5);
    CHECK(out.collateral == 50.0);
    CHECK(out.final_pnl == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(out.bad_debt == 0.0);
    CHECK_FALSE(out.liquidation_ts.has_value());
}

TEST_CASE("a leveraged long through a collapse leaves exactly the uncovered loss") {
    MarketData md = make_market(quiet_spec(0.5, 0, 22));
    PositionOutcome out = simulate_position(build_engine(EngineId::e0), md, long_at(5.0));
    CHECK(out.terminal == Terminal::settled);
    CHECK(std::abs(out.bad_debt - 40.0) <= 1e-12);
    CHECK(out.final_equity == doctest::Approx(-40.0).epsilon(1e-12));
    CHECK_FALSE(out.liquidation_ts.has_value());
    CHECK(out.final_pnl == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("no leverage means no bad debt on either outcome") {
    for (int outcome : {0, 1}) {
        MarketData md = make_market(quiet_spec(0.5, outcome, 23));
        PositionOutcome out = simulate_position(build_engine(EngineId::e0), md, long_at(1.0));
        CHECK(out.bad_debt == 0.0);
    }
}

TEST_CASE("settlement bad debt grows with leverage") {
    MarketData md = make_market(quiet_spec(0.5, 0, 24));
    EngineConfig e0 = build_engine(EngineId::e0);
    double prev = -1.0;
    for (double lev : {1.0, 2.0, 5.0, 10.0}) {
        PositionOutcome out = simulate_position(e0, md, long_at(lev));
        CHECK(out.bad_debt == doctest::Approx(std::max(0.0, 50.0 - 50.0 / lev)).epsilon(1e-9));
        CHECK(out.bad_debt >= prev);
        prev = out.bad_debt;
    }
}

TEST_CASE("the halting mechanic closes flat positions before resolution risk hits") {
    MarketData md = make_market(quiet_spec(0.5, 0, 25));
    PositionOutcome out = simulate_position(build_engine(EngineId::e2), md, long_at(1.0));
    CHECK(out.terminal == Terminal::halt_closed);
    CHECK(out.final_pnl == 0.0);
    CHECK(out.bad_debt == 0.0);
    CHECK(out.compliance_closes == 0);
    CHECK_FALSE(out.liquidation_ts.has_value());
    // the same position under the baseline engine eats the full collapse
    PositionOutcome base = simulate_position(build_engine(EngineId::e0), md, long_at(1.0));
    CHECK(base.terminal == Terminal::settled);
    CHECK(base.final_pnl == doctest::Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("risk-aware margining liquidates oversized positions on empty-band books") {
    // mid-regime synthetic books quote far outside the index band, so banded
    // depth is zero and the size add-on dominates at 5x
    MarketData md = make_market(quiet_spec(0.5, 1, 26));
    PositionOutcome out = simulate_position(build_engine(EngineId::e2), md, long_at(5.0));
    CHECK(out.terminal == Terminal::liquidated);
    REQUIRE(out.liquidation_ts.has_value());
    CHECK(*out.liquidation_ts == out.entry_at);
    CHECK(out.forced_fills > 0);
    CHECK(out.bad_debt > 0.0);
}

TEST_CASE("leverage compression unwinds exposure on the way into resolution") {
    MarketData md = make_market(quiet_spec(0.5, 0, 27));
    EngineConfig squeezed;
    squeezed.id = EngineId::custom;
    squeezed.index_source = IndexSource::reference_direct;
    squeezed.margin_mode = MarginMode::static_vol;
    squeezed.funding_mode = FundingMode::naive;
    squeezed.leverage_mode = LeverageMode::compressed;
    squeezed.mechanic = MechanicId::R0;
    PositionOutcome out = simulate_position(squeezed, md, long_at(5.0));
    CHECK(out.terminal == Terminal::settled);
    CHECK(out.compliance_closes > 10);
    CHECK(out.bad_debt < 1.0);
    CHECK_FALSE(out.liquidation_ts.has_value());

    PositionOutcome base = simulate_position(build_engine(EngineId::e0), md, long_at(5.0));
    CHECK(out.bad_debt < base.bad_debt);
}

TEST_CASE("voluntary exits leave the position survived") {
    SynthSpec down = quiet_spec(0.5, 0, 28);
    down.waypoints = {{0.0, 0.5}, {12.0, 0.3}};
    MarketData md = make_market(down);
    EngineConfig e0 = build_engine(EngineId::e0);

    PositionSpec stop = long_at(1.0);
    stop.exit = ExitRule{0.3, 0.0, 0.0};
    PositionOutcome so = simulate_position(e0, md, stop);
    CHECK(so.terminal == Terminal::survived);
    CHECK_FALSE(so.liquidation_ts.has_value());
    CHECK(so.final_pnl < -14.0);
    CHECK(so.final_pnl > -17.0);

    SynthSpec up = quiet_spec(0.5, 1, 29);
    up.waypoints = {{0.0, 0.5}, {12.0, 0.7}};
    MarketData mu = make_market(up);
    PositionSpec take = long_at(1.0);
    take.exit = ExitRule{0.0, 0.2, 0.0};
    PositionOutcome to = simulate_position(e0, mu, take);
    CHECK(to.terminal == Terminal::survived);
    CHECK(to.final_pnl > 9.0);
    CHECK(to.final_pnl < 11.5);

    MarketData mf = make_market(quiet_spec(0.5, 1, 30));
    PositionSpec timed = long_at(1.0);
    timed.exit = ExitRule{0.0, 0.0, 2.0};
    PositionOutcome td = simulate_position(e0, mf, timed);
    CHECK(td.terminal == Terminal::survived);
    CHECK(td.final_pnl == 0.0);
}

TEST_CASE("a market with no usable index refuses entry") {
    MarketData empty;
    empty.id = "void";
    try {
        simulate_position(build_engine(EngineId::e0), empty, long_at(1.0));
        FAIL("expected no_entry_quote");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::no_entry_quote);
    }

    MarketData md = make_market(quiet_spec(0.5, 1, 31));
    PositionSpec late = long_at(1.0);
    late.entry_ts = md.events.back().timestamp_received + ms_per_hour;
    CHECK_THROWS_AS(simulate_position(build_engine(EngineId::e0), md, late), Error);
}

TEST_CASE("entry waits for the requested instant") {
    MarketData md = make_market(quiet_spec(0.5, 1, 32));
    PositionSpec later = long_at(1.0);
    later.entry_ts = md.events.front().timestamp_received + 2 * ms_per_hour;
    PositionOutcome out = simulate_position(build_engine(EngineId::e0), md, later);
    CHECK(out.entry_at >= later.entry_ts);
}

TEST_CASE("batch simulation preserves spec order") {
    MarketData md = make_market(quiet_spec(0.5, 1, 33));
    EngineConfig e0 = build_engine(EngineId::e0);
    std::vector<PositionSpec> specs = {long_at(1.0), long_at(5.0)};
    auto outs = simulate_market(e0, md, specs);
    REQUIRE(outs.size() == 2);
    CHECK(outs[0].collateral == 50.0);
    CHECK(outs[1].collateral == 10.0);
}

TEST_CASE("the incremental simulator matches the stateless rewrite") {
    std::vector<SynthSpec> specs;
    {
        SynthSpec a = quiet_spec(0.5, 1, 41);
        specs.push_back(a);

        SynthSpec b = quiet_spec(0.5, 1, 42);
        b.cls = MarketClass::sports;
        b.waypoints = {{0.0, 0.5}, {6.0, 0.35}, {12.0, 0.55}};
        b.wiggle = 0.005;
        b.trade_jitter = 0.002;
        specs.push_back(b);

        SynthSpec c = quiet_spec(0.05, 0, 43);
        c.cls = MarketClass::crypto;
        c.rho_target = 1.7;
        c.wiggle = 0.004;
        c.trade_jitter = 0.002;
        specs.push_back(c);

        SynthSpec d = quiet_spec(0.5, 0, 44);
        d.waypoints = {{0.0, 0.5}, {12.0, 0.25}};
        d.wiggle = 0.01;
        d.trade_jitter = 0.002;
        d.size_jitter = 0.2;
        specs.push_back(d);
    }

    EngineParams params;
    params.synthetic_basis = 0.002;

    PositionSpec long5 = long_at(5.0);
    PositionSpec short3;
    short3.side = PositionSide::short_;
    short3.leverage = 3.0;
    short3.notional = 100.0;
    short3.margin_basis = MarginBasis::unit_payout;
    short3.exit = ExitRule{0.5, 0.5, 6.0};

    for (const auto& s : specs) {
        MarketData md = make_market(s);
        for (EngineId id : {EngineId::e0, EngineId::e1, EngineId::e2}) {
            EngineConfig engine = build_engine(id, params);
            for (const PositionSpec& ps : {long5, short3}) {
                PositionOutcome a = simulate_position(engine, md, ps);
                PositionOutcome b = reference_simulate_position(engine, md, ps);
                CHECK(a.terminal == b.terminal);
                CHECK(a.liquidation_ts == b.liquidation_ts);
                CHECK(a.final_pnl == b.final_pnl);
                CHECK(a.bad_debt == b.bad_debt);
                CHECK(a.final_equity == b.final_equity);
                CHECK(a.max_drawdown == b.max_drawdown);
                CHECK(a.entry_price == b.entry_price);
                CHECK(a.entry_at == b.entry_at);
                CHECK(a.collateral == b.collateral);
                CHECK(a.compliance_closes == b.compliance_closes);
                CHECK(a.forced_fills == b.forced_fills);
            }
        }
    }
}
