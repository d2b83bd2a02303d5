#pragma once

#include "perp/types.hpp"

namespace perp {

struct MarginParams {
    double m_sigma = 3.0;
    double m_jump = 0.5;
    double mu = 0.5;            // maintenance fraction of initial
    double tau_phi_hours = 12.0;
    double h_m_hours = 1.0;     // margin horizon
    double m_depth = 0.5;       // size add-on slope
    double f_depth = 0.1;       // depth fraction absorbed before the add-on fires
    double l_cap = 5.0;
    double ramp_hours = 12.0;
};

struct MarginQuote {
    double vol_component = 0.0;
    double jump_component = 0.0;
    double size_addon = 0.0;
    double initial = 0.0;
    double maintenance = 0.0;
};

// Jump severity: max(I, 1-I) * exp(-ttr / tau_phi).  Equals the worst-case
// terminal move at ttr = 0, decays to 0 far from resolution.
double phi(double ttr_hours, Price index, double tau_phi_hours = 12.0);

// vol + jump + size add-on; the vol component carries no index multiplier.
MarginQuote initial_margin(double x, double sigma, double pi_jump, double ttr_hours, Price index,
                           double depth, const MarginParams& p = {});

double maintenance_margin(const MarginQuote& q, double mu);

// Static schedule: 1 at ttr = 0, linear up to l_cap at ttr >= ramp.
double leverage_cap(double ttr_hours, const MarginParams& p = {});

// Risk-inverse cap, floored at 1 (a cap below 1x would force closing solvent
// positions) and topped at l_cap; zero denominator means no risk signal.
double dynamic_leverage_cap(double sigma, double pi_jump, double ttr_hours, Price index,
                            const MarginParams& p = {});

}  // namespace perp
