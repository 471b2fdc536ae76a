#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "speq/rng.hpp"
#include "speq/static_market.hpp"

using namespace speq;

namespace {

MarketSpec uniform_spec(int n, double a_minus, double a_plus, double supply,
                        double horizon = 1.0) {
    MarketSpec spec;
    for (int i = 0; i < n; ++i)
        spec.agents.push_back(
            {CoefficientField::constant(0.0), CoefficientField::constant(1.0)});
    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {a_minus, a_plus, 0.0, 0.0};
    spec.supply = CoefficientField::constant(supply);
    spec.horizon = horizon;
    return spec;
}

}  // namespace

TEST_CASE("hand-solved static equilibrium") {
    MarketSpec spec = uniform_spec(2, 1.0, 1.0, 0.0);
    std::vector<double> e = {2.0, 0.0};
    StaticEquilibrium eq = static_price(e, spec);
    CHECK(eq.p_sta == doctest::Approx(1.0));
    CHECK(eq.p_enumerate == doctest::Approx(eq.p_root).epsilon(1e-12));
    CHECK(eq.q[0] == doctest::Approx(1.0));
    CHECK(eq.q[1] == doctest::Approx(-1.0));
}

TEST_CASE("supply presses the static price down") {
    MarketSpec spec = uniform_spec(2, 1.0, 1.0, 1.0);
    std::vector<double> e = {2.0, 0.0};
    StaticEquilibrium eq = static_price(e, spec);
    // clearing: (2-p) + (0-p) = 1 * T
    CHECK(eq.p_sta == doctest::Approx(0.5));
    double total = std::accumulate(eq.q.begin(), eq.q.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("limit prices from sorted prefix means") {
    MarketSpec spec = uniform_spec(2, 1.0, 1.0, 0.0);
    std::vector<double> e = {2.0, 0.0};
    StaticLimits lim0 = static_limits(e, spec);
    CHECK(lim0.p_limit_long == doctest::Approx(2.0));
    CHECK(lim0.p_limit_short == doctest::Approx(2.0));  // the top agent alone

    MarketSpec with_supply = uniform_spec(2, 1.0, 1.0, 1.0);
    StaticLimits lim1 = static_limits(e, with_supply);
    CHECK(lim1.p_limit_long == doctest::Approx(2.0));  // free longs ignore supply
    // best of: {0} alone (2 - 1)/1 = 1, both (2 + 0 - 1)/2 = 0.5
    CHECK(lim1.p_limit_short == doctest::Approx(1.0));
    CHECK(lim1.short_optimizer == 0b01u);
}

TEST_CASE("static price is sandwiched by its limits") {
    const std::uint64_t seed = 31337;
    for (int k = 0; k < 500; ++k) {
        int n = 2 + static_cast<int>(rng::uniform(seed, k, 0, 7) * 6.0);
        MarketSpec spec = uniform_spec(n, 1.0, 1.0, 2.0 * rng::uniform(seed, k, 1, 0),
                                       0.5 + 1.5 * rng::uniform(seed, k, 2, 0));
        std::vector<double> e(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            e[static_cast<std::size_t>(i)] = 10.0 * rng::uniform(seed, k, 3, i) - 5.0;

        StaticEquilibrium eq = static_price(e, spec);
        StaticLimits lim = static_limits(e, spec);
        CHECK(std::abs(eq.p_enumerate - eq.p_root) < 1e-10);
        CHECK(eq.p_sta <= lim.p_limit_long + 1e-10);
        CHECK(eq.p_sta <= lim.p_limit_short + 1e-10);

        double total = std::accumulate(eq.q.begin(), eq.q.end(), 0.0);
        CHECK(std::abs(total - spec.supply(0.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("expectations recover known payoff means") {
    MarketSpec spec = uniform_spec(2, 1.0, 1.0, 0.0);
    spec.agents[1].drift = CoefficientField::constant(1.0);
    GridSpec grid = make_grid(spec, 401);
    std::vector<double> e = expectations(spec, grid);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(5e-3));  // E[W_1^2]
    CHECK(e[1] == doctest::Approx(2.0).epsilon(5e-3));  // E[(1 + W_1)^2]

    spec.payoff = PayoffField::constant(3.5);
    std::vector<double> c = expectations(spec, grid);
    CHECK(c[0] == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("static preconditions: constant supply and quadratic costs only") {
    MarketSpec spec = uniform_spec(2, 1.0, 1.0, 0.0);
    std::vector<double> e = {1.0, 0.0};

    MarketSpec varying = spec;
    varying.supply = CoefficientField::affine(1.0, 0.25);
    CHECK_THROWS_AS(static_price(e, varying), std::invalid_argument);

    MarketSpec beta = spec;
    beta.costs.mode = CostMode::linear_augmented;
    beta.costs.shared = {1.0, 1.0, 0.5, 0.5};
    CHECK_THROWS_AS(static_price(e, beta), std::invalid_argument);
    GridSpec grid = make_grid(spec, 101);
    CHECK_THROWS_AS(expectations(beta, grid), std::invalid_argument);
}

TEST_CASE("scaling costs and supply together leaves the static price fixed") {
    MarketSpec spec = uniform_spec(3, 0.6, 1.2, 0.8);
    std::vector<double> e = {1.5, -0.5, 0.75};
    double base = static_price(e, spec).p_sta;
    for (double lam : {0.25, 4.0}) {
        MarketSpec scaled = with_common_scale(spec, lam);
        CHECK(static_price(e, scaled).p_sta == doctest::Approx(base).epsilon(1e-12));
    }
}
