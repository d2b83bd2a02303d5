#pragma once

#include <optional>

#include "perp/liquidation.hpp"
#include "perp/types.hpp"

namespace perp {

enum class MechanicId : uint8_t { R0, R1, R2, R3 };
enum class Stage : uint8_t { normal, compression, halt, settlement };

enum class FundingRule : uint8_t { naive, aware };

const char* to_string(MechanicId m);
const char* to_string(Stage s);

struct ProtocolSchedule {
    double delta_r_hours = 1.0;     // class-dependent base width (sports 3h)
    double delta_a_hours = 2.0;     // compression begins at tau - delta_a
    double delta_b_hours = 1.0;     // halt begins at tau - delta_b (R3 only)
    double delta_disp_hours = 1.0;  // dispute horizon past tau

    static ProtocolSchedule for_class(MarketClass cls);
};

// Stage of the protocol at time t for a market resolving at tau.  R3 walks
// normal -> compression -> halt -> settlement; R1/R2 compress but never halt;
// R0 stays normal until settlement.
Stage stage_at(Ts t, Ts tau, const ProtocolSchedule& s, MechanicId mechanic);

struct MechanicConstraints {
    bool orders_allowed = true;
    std::optional<double> leverage_cap_override;  // static schedule cap when compression is active
    FundingRule funding_rule = FundingRule::naive;
    bool forced_close = false;  // R3 halt: close at the prevailing index at halt entry
};

struct MarginParams;  // margin.hpp

MechanicConstraints mechanic_constraints(MechanicId mechanic, Stage stage, double ttr_hours,
                                         const struct MarginParams& margin_params);

// Cash settlement at resolution: longs settle at R, shorts at 1 - R, shortfall
// routed through settle_shortfall.  Returns final account equity before the
// zero floor.
double settle_at_resolution(AccountState& a, int outcome, InsuranceFund& fund);

}  // namespace perp
