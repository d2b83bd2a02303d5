#include "perp/margin.hpp"

#include <algorithm>
#include <cmath>

namespace perp {

double phi(double ttr_hours, Price index, double tau_phi_hours) {
    const double severity = std::max(index, 1.0 - index);
    return severity * std::exp(-std::max(ttr_hours, 0.0) / tau_phi_hours);
}

MarginQuote initial_margin(double x, double sigma, double pi_jump, double ttr_hours, Price index,
                           double depth, const MarginParams& p) {
    if (x < 0.0) throw Error(Error::Kind::negative_notional, "initial_margin requires x >= 0");
    MarginQuote q;
    q.vol_component = p.m_sigma * sigma * std::sqrt(p.h_m_hours) * x;
    q.jump_component = p.m_jump * pi_jump * x * phi(ttr_hours, index, p.tau_phi_hours);
    q.size_addon = p.m_depth * std::max(0.0, x - p.f_depth * depth);
    q.initial = q.vol_component + q.jump_component + q.size_addon;
    q.maintenance = p.mu * q.initial;
    return q;
}

double maintenance_margin(const MarginQuote& q, double mu) { return mu * q.initial; }

double leverage_cap(double ttr_hours, const MarginParams& p) {
    const double t = std::max(ttr_hours, 0.0);
    return std::min(p.l_cap, 1.0 + (p.l_cap - 1.0) * std::min(t / p.ramp_hours, 1.0));
}

double dynamic_leverage_cap(double sigma, double pi_jump, double ttr_hours, Price index,
                            const MarginParams& p) {
    const double den = p.m_sigma * sigma + p.m_jump * pi_jump * phi(ttr_hours, index, p.tau_phi_hours);
    if (den == 0.0) return p.l_cap;
    return std::min(p.l_cap, std::max(1.0, 1.0 / den));
}

}  // namespace perp
