#include <doctest.h>

#include <cmath>

#include "perp/funding.hpp"

using namespace perp;

TEST_CASE("relative basis amplifies displacement near the boundary") {
    CHECK(relbasis(0.05, 0.01) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(relbasis(0.5, 0.5) == 0.0);
    CHECK(relbasis(0.6, 0.5) == doctest::Approx(0.2).epsilon(1e-12));
    // symmetric distance from the other boundary
    CHECK(relbasis(0.95, 0.99) == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("relative basis is undefined at a degenerate index") {
    for (double index : {0.0, 1.0, -0.1, 1.1}) {
        try {
            relbasis(0.5, index);
            FAIL("expected degenerate_index");
        } catch (const Error& e) {
            CHECK(e.kind() == Error::Kind::degenerate_index);
        }
    }
}

TEST_CASE("naive funding is proportional to the basis") {
    CHECK(funding_naive(0.5, 0.5) == 0.0);
    CHECK(funding_naive(0.54, 0.5) == doctest::Approx(4e-5).epsilon(1e-12));
    CHECK(funding_naive(1.0, 0.0) == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("naive funding is bounded by the base rate") {
    const double c = 0.001;
    for (int mi = 0; mi <= 100; ++mi) {
        for (int ii = 0; ii <= 100; ++ii) {
            const double m = mi / 100.0;
            const double i = ii / 100.0;
            CHECK(std::abs(funding_naive(m, i, c)) <= c + 1e-15);
        }
    }
}

TEST_CASE("funding gain explodes toward resolution") {
    CHECK(funding_gain(0.0) == 13.0);
    CHECK(funding_gain(1e9) == doctest::Approx(1.0).epsilon(1e-6));
    double prev = 1e18;
    for (double ttr : {0.0, 0.5, 1.0, 3.0, 12.0, 48.0}) {
        double g = funding_gain(ttr);
        CHECK(g <= prev);
        prev = g;
    }
    // negative ttr clamps to the ttr = 0 gain
    CHECK(funding_gain(-5.0) == 13.0);
}

TEST_CASE("aware funding matches the naive shape deep inside the interior") {
    // far from resolution and boundary the gain tends to 1 and the boundary
    // term is off
    const double rate = funding_aware(0.54, 0.5, 1e9);
    CHECK(rate == doctest::Approx(4e-5).epsilon(1e-6));
}

TEST_CASE("aware funding worked example at the boundary") {
    FundingParams p;
    const double g = 1.0 + 12.0 / 13.0;
    const double expected =
        p.c * g * (0.01 - 0.05) + p.beta_f * p.c * g * ((0.01 - 0.05) / 0.05);
    CHECK(funding_aware(0.01, 0.05, 12.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the boundary term engages strictly inside the thresholds") {
    FundingParams p;
    const double interior = p.c * funding_gain(6.0) * 0.04;
    // at exactly 0.10 the boundary term stays off
    CHECK(funding_aware(0.14, 0.10, 6.0) == doctest::Approx(interior).epsilon(1e-12));
    CHECK(funding_aware(0.1399, 0.0999, 6.0) >
          funding_aware(0.14, 0.10, 6.0) + 1e-4);
    // mirrored at the top
    CHECK(funding_aware(0.94, 0.90, 6.0) == doctest::Approx(interior).epsilon(1e-12));
    CHECK(std::abs(funding_aware(0.9401, 0.9001, 6.0)) >
          std::abs(funding_aware(0.94, 0.90, 6.0)) + 1e-4);
}

TEST_CASE("aware funding grows strictly as the index approaches the boundary") {
    // fixed positive displacement, shrinking index: the relative term takes over
    const double d = 0.04;
    double prev = 0.0;
    for (double index : {0.05, 0.02, 0.01, 0.005}) {
        const double rate = funding_aware(index + d, index, 6.0);
        CHECK(rate > prev);
        prev = rate;
    }
}

TEST_CASE("aware funding is antisymmetric under complementing both prices") {
    for (double index : {0.05, 0.3, 0.5, 0.85}) {
        for (double mark : {0.02, 0.4, 0.77}) {
            const double a = funding_aware(mark, index, 4.0);
            const double b = funding_aware(1.0 - mark, 1.0 - index, 4.0);
            CHECK(a == doctest::Approx(-b).epsilon(1e-10));
        }
    }
}

TEST_CASE("aware funding rejects degenerate indices") {
    try {
        funding_aware(0.5, 0.0, 6.0);
        FAIL("expected degenerate_index");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::degenerate_index);
    }
    CHECK_THROWS_AS(funding_aware(0.5, 1.0, 6.0), Error);
}

TEST_CASE("funding payments move equity between the two sides") {
    // positive rate: longs pay, shorts receive
    CHECK(funding_payment(PositionSide::long_, 0.001, 10.0, 1.0) ==
          doctest::Approx(-0.01).epsilon(1e-15));
    CHECK(funding_payment(PositionSide::short_, 0.001, 10.0, 1.0) ==
          doctest::Approx(0.01).epsilon(1e-15));
    // zero sum across the pair
    const double lp = funding_payment(PositionSide::long_, 0.002, 7.0, 3.0);
    const double sp = funding_payment(PositionSide::short_, 0.002, 7.0, 3.0);
    CHECK(lp + sp == 0.0);
    CHECK(funding_payment(PositionSide::long_, 0.0, 10.0, 1.0) == 0.0);
}
