#include <doctest.h>

#include <cmath>
#include <random>

#include "perp/margin.hpp"

using namespace perp;

TEST_CASE("jump severity at resolution is the worst-case move") {
    CHECK(phi(0.0, 0.3) == 0.7);
    CHECK(phi(0.0, 0.8) == 0.8);
    CHECK(phi(0.0, 0.5) == 0.5);
}

TEST_CASE("jump severity decays with time to resolution") {
    CHECK(phi(12.0, 0.5) == doctest::Approx(0.5 / std::exp(1.0)).epsilon(1e-14));
    CHECK(phi(24.0, 0.5) < phi(12.0, 0.5));
    CHECK(phi(12.0, 0.5) < phi(0.0, 0.5));
    // negative ttr clamps to zero rather than amplifying
    CHECK(phi(-3.0, 0.3) == 0.7);
}

TEST_CASE("initial margin worked example") {
    // x = 100, sigma = 0.02, no jump risk, deep book
    MarginQuote q = initial_margin(100.0, 0.02, 0.0, 24.0, 0.5, 1e9);
    CHECK(q.vol_component == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(q.size_addon == 0.0);
    CHECK(q.initial == doctest::Approx(6.0 + q.jump_component).epsilon(1e-12));
}

TEST_CASE("jump component at the resolution instant") {
    // pi = 1, I = 0.5, ttr = 0: 0.5 * 1 * 100 * 0.5 = 25
    MarginQuote q = initial_margin(100.0, 0.0, 1.0, 0.0, 0.5, 1e9);
    CHECK(q.jump_component == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(q.vol_component == 0.0);
}

TEST_CASE("size add-on fires once depth stops absorbing the position") {
    // x = 100, D = 500: max(0, 100 - 50) * 0.5 = 25
    MarginQuote q = initial_margin(100.0, 0.0, 0.0, 24.0, 0.5, 500.0);
    CHECK(q.size_addon == doctest::Approx(25.0).epsilon(1e-12));
    MarginQuote deep = initial_margin(100.0, 0.0, 0.0, 24.0, 0.5, 1e6);
    CHECK(deep.size_addon == 0.0);
}

TEST_CASE("margin components scale linearly in the position") {
    MarginQuote q1 = initial_margin(100.0, 0.02, 0.3, 6.0, 0.4, 1e9);
    MarginQuote q2 = initial_margin(200.0, 0.02, 0.3, 6.0, 0.4, 1e9);
    CHECK(q2.vol_component == doctest::Approx(2.0 * q1.vol_component).epsilon(1e-12));
    CHECK(q2.jump_component == doctest::Approx(2.0 * q1.jump_component).epsilon(1e-12));
    CHECK(q2.initial == doctest::Approx(2.0 * q1.initial).epsilon(1e-12));
}

TEST_CASE("zero position needs zero margin") {
    MarginQuote q = initial_margin(0.0, 0.05, 0.5, 1.0, 0.3, 100.0);
    CHECK(q.initial == 0.0);
    CHECK(q.maintenance == 0.0);
}

TEST_CASE("negative position size is rejected") {
    try {
        initial_margin(-1.0, 0.02, 0.0, 24.0, 0.5, 1e9);
        FAIL("expected negative_notional");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::negative_notional);
    }
}

TEST_CASE("maintenance is a fixed fraction of initial") {
    MarginQuote q = initial_margin(100.0, 0.02, 0.0, 24.0, 0.5, 1e9);
    CHECK(maintenance_margin(q, 0.5) == doctest::Approx(0.5 * q.initial).epsilon(1e-14));
    CHECK(q.maintenance == doctest::Approx(0.5 * q.initial).epsilon(1e-14));
}

TEST_CASE("static leverage schedule ramps from one to the cap") {
    CHECK(leverage_cap(0.0) == 1.0);
    CHECK(leverage_cap(6.0) == 3.0);
    CHECK(leverage_cap(12.0) == 5.0);
    CHECK(leverage_cap(24.0) == 5.0);
    double prev = 0.0;
    for (double ttr : {0.0, 1.0, 3.0, 6.0, 9.0, 12.0, 48.0}) {
        double cap = leverage_cap(ttr);
        CHECK(cap >= prev);
        prev = cap;
    }
}

TEST_CASE("dynamic cap with no risk signal is the schedule cap") {
    CHECK(dynamic_leverage_cap(0.0, 0.0, 24.0, 0.5) == 5.0);
}

TEST_CASE("dynamic cap worked example") {
    // sigma = 0, pi = 1, I = 1, ttr = 0: denominator = 0.5 * 1 * 1 = 0.5
    CHECK(dynamic_leverage_cap(0.0, 1.0, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dynamic cap saturates at its floor when risk dominates") {
    // denominator >= 1 forces the floor of 1x
    CHECK(dynamic_leverage_cap(1.0, 0.0, 0.0, 0.5) == 1.0);
    CHECK(dynamic_leverage_cap(0.5, 1.0, 0.0, 1.0) == 1.0);
}

TEST_CASE("jump margin covers the worst-case settlement move near resolution") {
    // at ttr = 0 with pi = 1 the jump component is at least half the
    // worst-case terminal loss
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> idx(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double I = idx(rng);
        MarginQuote q = initial_margin(100.0, 0.0, 1.0, 0.0, I, 1e9);
        CHECK(q.jump_component >= 0.5 * 100.0 * std::max(I, 1.0 - I) - 1e-9);
    }
}
