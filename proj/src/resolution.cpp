#include "perp/resolution.hpp"

#include "perp/margin.hpp"

namespace perp {

const char* to_string(MechanicId m) {
    switch (m) {
        case MechanicId::R0: return "R0";
        case MechanicId::R1: return "R1";
        case MechanicId::R2: return "R2";
        default: return "R3";
    }
}

const char* to_string(Stage s) {
    switch (s) {
        case Stage::normal: return "normal";
        case Stage::compression: return "compression";
        case Stage::halt: return "halt";
        default: return "settlement";
    }
}

ProtocolSchedule ProtocolSchedule::for_class(MarketClass cls) {
    ProtocolSchedule s;
    s.delta_r_hours = cls == MarketClass::sports ? 3.0 : 1.0;
    s.delta_a_hours = 2.0 * s.delta_r_hours;
    s.delta_b_hours = s.delta_r_hours;
    return s;
}

Stage stage_at(Ts t, Ts tau, const ProtocolSchedule& s, MechanicId mechanic) {
    if (t >= tau) return Stage::settlement;
    if (mechanic == MechanicId::R0) return Stage::normal;

    const Ts a_start = tau - static_cast<Ts>(s.delta_a_hours * ms_per_hour);
    if (mechanic == MechanicId::R3) {
        const Ts b_start = tau - static_cast<Ts>(s.delta_b_hours * ms_per_hour);
        if (t >= b_start) return Stage::halt;
    }
    if (t >= a_start) return Stage::compression;
    return Stage::normal;
}

MechanicConstraints mechanic_constraints(MechanicId mechanic, Stage stage, double ttr_hours,
                                         const MarginParams& mp) {
    MechanicConstraints c;
    c.funding_rule = (mechanic == MechanicId::R2 || mechanic == MechanicId::R3) ? FundingRule::aware
                                                                                : FundingRule::naive;
    if (mechanic != MechanicId::R0 && (stage == Stage::compression || stage == Stage::halt))
        c.leverage_cap_override = leverage_cap(ttr_hours, mp);
    if (mechanic == MechanicId::R3 && stage == Stage::halt) {
        c.orders_allowed = false;
        c.forced_close = true;
    }
    return c;
}

double settle_at_resolution(AccountState& a, int outcome, InsuranceFund& fund) {
    if (outcome != 0 && outcome != 1)
        throw Error(Error::Kind::unresolved_market, "settlement requires outcome in {0,1}");
    const Price settle_price = static_cast<Price>(outcome);
    if (a.remaining > 0.0) a.close_units(a.remaining, settle_price);
    a.open = false;
    const double eq = a.equity(settle_price);
    settle_shortfall(a, fund, settle_price);
    return eq;
}

}  // namespace perp
