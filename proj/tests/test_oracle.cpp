#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speq/oracle.hpp"

using namespace speq;

TEST_CASE("delayed-trading benchmark: frozen prices and gaps") {
    DelayOracle o;  // s = 8, T = 1
    CHECK(o.p_dyn(0.0) == doctest::Approx(-4.0));
    CHECK(o.p_dyn(1.8) == doctest::Approx(-0.16));
    CHECK(o.p_dyn(3.0) == doctest::Approx(8.0));
    CHECK(o.p_sta(0.0) == doctest::Approx(-3.0));
    CHECK(o.gap(0.0) == doctest::Approx(1.0));       // T^2 inside the delay region
    CHECK(o.gap(1.8) == doctest::Approx(0.4));       // (s/2 - 2|x|) T in between
    CHECK(o.gap(3.0) == doctest::Approx(0.0));
    CHECK(o.gap(-1.8) == doctest::Approx(0.4));      // symmetric in x
}

TEST_CASE("delayed-trading benchmark: value branches meet continuously") {
    DelayOracle o;
    // waiting and trading branches cross at |x| = s/4 - T/2 at t = 0
    double xc = o.s / 4.0 - o.T / 2.0;
    double wait = xc * xc - o.s * o.T / 2.0;
    double trade = (xc + o.T) * (xc + o.T) - o.s * o.T;
    CHECK(wait == doctest::Approx(trade));
    CHECK(o.value(0.0, xc - 1e-9) == doctest::Approx(o.value(0.0, xc + 1e-9)));
    // the gap closes exactly at |x| = s/4
    CHECK(o.gap(o.s / 4.0) == doctest::Approx(0.0));
    CHECK(o.gap(o.s / 4.0 - 0.05) == doctest::Approx(0.1));
}

TEST_CASE("delayed-trading benchmark: volatility shifts the static price linearly") {
    DelayOracle o;
    for (double vsq : {0.25, 0.0625, 0.01}) {
        CHECK(o.p_sta(0.0, vsq) - o.p_sta(0.0) == doctest::Approx(vsq * o.T).epsilon(1e-12));
        CHECK(o.p_sta(2.5, vsq) - o.p_sta(2.5) == doctest::Approx(vsq * o.T).epsilon(1e-12));
    }
}

TEST_CASE("delayed-trading benchmark: static positions absorb the supply") {
    DelayOracle o;
    for (double x : {0.0, 1.0, 2.2, 3.5, -1.7}) {
        double total = o.q(x, 0) + o.q(x, 1);
        CHECK(total == doctest::Approx(o.s));
        CHECK(o.q(x, 0) >= 0.0);
        CHECK(o.q(x, 1) >= 0.0);  // no shorting in this instance
    }
}

TEST_CASE("delayed-trading benchmark: dynamic positions split the supply in waves") {
    DelayOracle o;
    // inner region: both agents hold, shares tilt with x
    CHECK(o.phi(0.0, 0.0, 0) == doctest::Approx(4.0));
    CHECK(o.phi(0.0, 0.0, 1) == doctest::Approx(4.0));
    CHECK(o.phi(0.0, 1.0, 0) == doctest::Approx(6.0));
    CHECK(o.phi(0.0, 1.0, 1) == doctest::Approx(2.0));
    // outer region: the agent whose belief points outward holds everything
    CHECK(o.phi(0.0, 3.0, 0) == doctest::Approx(8.0));
    CHECK(o.phi(0.0, 3.0, 1) == doctest::Approx(0.0));
    CHECK(o.phi(0.0, -3.0, 1) == doctest::Approx(8.0));
    CHECK(o.phi(0.0, -3.0, 0) == doctest::Approx(0.0));
    // positions clear at every probed point
    for (double x : {0.3, 1.2, 1.9, 2.6}) {
        CHECK(o.phi(0.25, x, 0) + o.phi(0.25, x, 1) == doctest::Approx(o.s));
    }
    CHECK(o.path_position(0.5, 3.0, 0) == doctest::Approx(8.0));
}

TEST_CASE("polynomial benchmark: prices, gap, positions") {
    SymmetricOracle o;  // b = (1, 0), unit vols, T = 1
    CHECK(o.p_dyn(0.0) == doctest::Approx(1.25));
    CHECK(o.e(0.0, 0) == doctest::Approx(2.0));
    CHECK(o.e(0.0, 1) == doctest::Approx(1.0));
    CHECK(o.p_sta(0.0) == doctest::Approx(1.5));
    CHECK(o.gap(0.0) == doctest::Approx(0.25));  // (b1 - b2)^2 T^2 / 4
    CHECK(o.phi(0.0, 0.0, 0) == doctest::Approx(0.5));
    CHECK(o.phi(0.0, 0.0, 1) == doctest::Approx(-0.5));
    CHECK(o.q(0.0, 0) == doctest::Approx(0.5));
    CHECK(o.q(0.0, 1) == doctest::Approx(-0.5));
    // positions always net to the zero supply
    for (double x : {-2.0, 0.7, 3.1})
        CHECK(o.phi(0.4, x, 0) + o.phi(0.4, x, 1) == doctest::Approx(0.0));
}

TEST_CASE("polynomial benchmark: opposing drifts double the disagreement") {
    SymmetricOracle o;
    o.b1 = 1.0;
    o.b2 = -1.0;
    CHECK(o.p_dyn(0.0) == doctest::Approx(1.0));
    CHECK(o.p_sta(0.0) == doctest::Approx(2.0));
    CHECK(o.gap(0.0) == doctest::Approx(1.0));
}

TEST_CASE("polynomial benchmark: agreement kills the gap") {
    SymmetricOracle o;
    o.b2 = o.b1;
    o.sigma2_sq = o.sigma1_sq;
    for (double x : {-1.0, 0.0, 2.0}) {
        CHECK(o.gap(x) == doctest::Approx(0.0));
        CHECK(o.phi(0.0, x, 0) == doctest::Approx(0.0));
    }
}

TEST_CASE("costless-long benchmark") {
    NoCostOracle o;
    CHECK(o.value(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(o.p() == doctest::Approx(1.0));
    CHECK(o.q()[0] == doctest::Approx(1.0));
    CHECK(o.q()[1] == doctest::Approx(-1.0));
    CHECK(o.phi2(0.0, 0.0) == doctest::Approx(-2.0));
    CHECK(o.path_position2(0.0) == doctest::Approx(-2.0));
    CHECK(o.path_position2(1.0) == doctest::Approx(0.0));

    NoCostOracle longer;
    longer.T = 2.0;
    CHECK(longer.p() == doctest::Approx(4.0));
    CHECK(longer.q()[1] == doctest::Approx(-2.0));
}
