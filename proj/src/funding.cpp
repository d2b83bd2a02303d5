#include "perp/funding.hpp"

namespace perp {

double relbasis(Price mark, Price index) {
    if (index <= 0.0 || index >= 1.0)
        throw Error(Error::Kind::degenerate_index, "relbasis undefined at index 0 or 1");
    const double denom = index < 1.0 - index ? index : 1.0 - index;
    return (mark - index) / denom;
}

double funding_naive(Price mark, Price index, double c) { return c * (mark - index); }

double funding_gain(double ttr_hours, const FundingParams& p) {
    const double ttr = ttr_hours > 0.0 ? ttr_hours : 0.0;
    return 1.0 + p.ramp_hours / (ttr + p.h_m_hours);
}

double funding_aware(Price mark, Price index, double ttr_hours, const FundingParams& p) {
    if (index <= 0.0 || index >= 1.0)
        throw Error(Error::Kind::degenerate_index, "aware funding undefined at index 0 or 1");
    const double g = funding_gain(ttr_hours, p);
    const double alpha = p.c * g;
    double rate = alpha * (mark - index);
    const bool boundary = index < p.delta_b || index > 1.0 - p.delta_b;
    if (boundary) {
        const double beta = p.beta_f * p.c * g;
        rate += beta * relbasis(mark, index);
    }
    return rate;
}

double funding_payment(PositionSide side, double rate_per_hour, double units, double hours) {
    const double paid = rate_per_hour * units * hours;
    return side == PositionSide::long_ ? -paid : paid;
}

}  // namespace perp
