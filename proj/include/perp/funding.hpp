#pragma once

#include "perp/types.hpp"

namespace perp {

struct FundingParams {
    double c = 0.001;          // base rate per hour
    double beta_f = 0.5;       // boundary correction strength
    double delta_b = 0.10;     // boundary threshold
    double ramp_hours = 12.0;
    double h_m_hours = 1.0;
    double interval_hours = 1.0;
};

// (mark - index) / min(index, 1 - index); undefined at index 0 or 1.
double relbasis(Price mark, Price index);

// F = c * (mark - index); |F| <= c on the [0,1]^2 domain.
double funding_naive(Price mark, Price index, double c = 0.001);

// Time multiplier shared by both aware terms: 1 far out, 1 + ramp/H at ttr 0.
double funding_gain(double ttr_hours, const FundingParams& p = {});

// alpha(ttr) * (mark - index) + beta(ttr) * 1[boundary] * relbasis, with
// alpha = c * g, beta = beta_f * c * g.  Unbounded toward the boundary by
// design; throws degenerate_index at index 0 or 1 (relbasis undefined there).
double funding_aware(Price mark, Price index, double ttr_hours, const FundingParams& p = {});

// Signed per-interval payment on remaining units: positive rate means longs
// pay and shorts receive.  Returns the equity change for the given side.
double funding_payment(PositionSide side, double rate_per_hour, double units, double hours);

}  // namespace perp
