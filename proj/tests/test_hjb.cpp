#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speq/equilibrium.hpp"
#include "speq/oracle.hpp"

using namespace speq;

namespace {

MarketSpec two_agent(double b1, double s1, double b2, double s2, double a_minus,
                     double a_plus, double supply) {
    MarketSpec spec;
    spec.agents = {{CoefficientField::constant(b1), CoefficientField::constant(s1)},
                   {CoefficientField::constant(b2), CoefficientField::constant(s2)}};
    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {a_minus, a_plus, 0.0, 0.0};
    spec.supply = CoefficientField::constant(supply);
    spec.degenerate = (s1 == 0.0 && s2 == 0.0);
    return spec;
}

MarketSpec single_agent(double b, double sigma, double supply) {
    MarketSpec spec;
    spec.agents = {{CoefficientField::constant(b), CoefficientField::constant(sigma)}};
    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {1.0, 1.0, 0.0, 0.0};
    spec.supply = CoefficientField::constant(supply);
    spec.degenerate = (sigma == 0.0);
    return spec;
}

}  // namespace

TEST_CASE("grid construction follows the width and CFL rules") {
    MarketSpec spec = two_agent(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0);
    GridSpec grid = make_grid(spec, 801);
    CHECK(grid.nx == 801);
    // half width 5*1*1 + 8*1*1 = 13, centered on x0 = 0
    CHECK(grid.x_lo == doctest::Approx(-13.0));
    CHECK(grid.x_hi == doctest::Approx(13.0));
    CHECK(grid.x(400) == doctest::Approx(0.0));
    double dx = grid.dx();
    double dt = spec.horizon / grid.nt;
    CHECK(dt * (1.0 / (dx * dx) + 1.0 / dx) <= 0.9 + 1e-12);
    CHECK_NOTHROW(check_grid(spec, grid));

    GridSpec tight = grid;
    tight.nt = 3;
    CHECK_THROWS_AS(check_grid(spec, tight), CflError);
}

TEST_CASE("constant payoff with zero supply solves to a constant") {
    MarketSpec spec = two_agent(1.0, 1.0, -0.5, 0.8, 0.5, 1.0, 0.0);
    spec.payoff = PayoffField::constant(4.25);
    GridSpec grid = make_grid(spec, 101);
    PriceField f = solve_hjb(spec, grid, SolveMode::full);
    for (int k = 0; k <= grid.nt; k += grid.nt / 4)
        for (int j = 0; j < grid.nx; j += 10)
            CHECK(f.v(k, j) == doctest::Approx(4.25).epsilon(1e-13));
    CHECK(f.price(spec.x0) == doctest::Approx(4.25));
}

TEST_CASE("single martingale agent prices the payoff expectation") {
    MarketSpec spec = single_agent(0.0, 1.0, 0.0);
    GridSpec grid = make_grid(spec, 401);
    PriceField f = solve_hjb(spec, grid, SolveMode::full);
    CHECK(f.price(0.0) == doctest::Approx(1.0).epsilon(5e-3));  // E[W_1^2]
}

TEST_CASE("quadratic instance matches its closed form") {
    MarketSpec spec = two_agent(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0);
    GridSpec grid = make_grid(spec, 201);
    PriceField f = solve_hjb(spec, grid, SolveMode::full);
    SymmetricOracle oracle;
    CHECK(f.price(0.0) == doctest::Approx(oracle.p_dyn(0.0)).epsilon(5e-3));
    CHECK(f.at(0.5, 1.0) == doctest::Approx(oracle.value(0.5, 1.0)).epsilon(5e-3));
    CHECK(f.at(0.25, -2.0) == doctest::Approx(oracle.value(0.25, -2.0)).epsilon(5e-3));
}

TEST_CASE("serial and parallel sweeps are bitwise identical") {
    MarketSpec spec = two_agent(1.0, 1.0, -0.5, 0.8, 0.5, 1.0, 0.7);
    GridSpec grid = make_grid(spec, 151);
    PriceField a = solve_hjb(spec, grid, SolveMode::full, Exec::serial);
    PriceField b = solve_hjb(spec, grid, SolveMode::full, Exec::parallel);
    CHECK(a.values == b.values);
    CHECK(a.theta == b.theta);
    CHECK(a.opt_shorts == b.opt_shorts);
}

TEST_CASE("planner replay of the stepping argmax reproduces the solve") {
    MarketSpec spec = two_agent(1.0, 1.0, -0.5, 0.8, 0.5, 1.0, 0.7);
    GridSpec grid = make_grid(spec, 151);
    PriceField f = solve_hjb(spec, grid, SolveMode::full);
    PriceField r = solve_linear(spec, grid, optimal_assignment(f));
    CHECK(f.values == r.values);
}

TEST_CASE("zero-volatility first-order solve hits the deterministic value") {
    MarketSpec spec = two_agent(1.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.0);
    GridSpec grid = make_grid(spec, 801);
    PriceField f = solve_zero_vol(spec, grid);
    // no supply, no delay: value is the better agent's deterministic payoff
    CHECK(f.price(1.0) == doctest::Approx(4.0).epsilon(2e-2));
    CHECK(f.price(-3.0) == doctest::Approx(16.0).epsilon(2e-2));  // pessimist rides down
}

TEST_CASE("zero-volatility solver rejects unflagged or non-constant-supply input") {
    MarketSpec spec = two_agent(1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 0.0);
    GridSpec grid = make_grid(spec, 101);
    CHECK_THROWS_AS(solve_zero_vol(spec, grid), std::invalid_argument);

    MarketSpec degen = two_agent(1.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.0);
    degen.supply = CoefficientField::affine(1.0, 0.5);
    GridSpec g2 = make_grid(degen, 101);
    CHECK_THROWS_AS(solve_zero_vol(degen, g2), std::invalid_argument);
}

TEST_CASE("agent count past the enumeration cap is rejected") {
    MarketSpec spec;
    for (int i = 0; i < 17; ++i)
        spec.agents.push_back(
            {CoefficientField::constant(0.0), CoefficientField::constant(1.0)});
    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {1.0, 1.0, 0.0, 0.0};
    GridSpec grid = make_grid(spec, 51);
    CHECK_THROWS_AS(solve_hjb(spec, grid, SolveMode::full), std::invalid_argument);
}

TEST_CASE("limit modes dominate the full solve") {
    MarketSpec spec = two_agent(1.0, 1.0, 0.0, 1.0, 0.5, 1.0, 1.0);
    GridSpec grid = make_grid(spec, 201);
    double full = solve_hjb(spec, grid, SolveMode::full).price(0.0);
    double lim_long = solve_hjb(spec, grid, SolveMode::limit_long).price(0.0);
    double lim_short = solve_hjb(spec, grid, SolveMode::limit_short).price(0.0);
    // Removing either cost channel (free longs, or banning costly shorts)
    // only raises the price; both limits sit above the full equilibrium.
    CHECK(full <= lim_long + 1e-9);
    CHECK(full <= lim_short + 1e-9);
}
