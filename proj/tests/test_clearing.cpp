#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "speq/clearing.hpp"
#include "speq/rng.hpp"

using namespace speq;

namespace {

MarketSpec uniform_spec(int n, double a_minus, double a_plus, double supply) {
    MarketSpec spec;
    for (int i = 0; i < n; ++i)
        spec.agents.push_back(
            {CoefficientField::constant(0.0), CoefficientField::constant(1.0)});
    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {a_minus, a_plus, 0.0, 0.0};
    spec.supply = CoefficientField::constant(supply);
    return spec;
}

MarketSpec la_spec(int n, double alpha, double beta, double supply) {
    MarketSpec spec = uniform_spec(n, alpha, alpha, supply);
    spec.costs.mode = CostMode::linear_augmented;
    spec.costs.shared = {alpha, alpha, beta, beta};
    return spec;
}

// Bisection on the monotone aggregate excess demand; shares nothing with the
// kernel's breakpoint scan.
double bisect_theta(const std::vector<double>& ell, const MarketSpec& spec,
                    double supply) {
    auto g = [&](double th) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ell.size(); ++i)
            sum += demand(ell[i] + th, spec.costs.agent(static_cast<int>(i)));
        return sum - supply;
    };
    double lo = -1e6, hi = 1e6;
    REQUIRE(g(lo) <= 0.0);
    REQUIRE(g(hi) >= 0.0);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("demand rule branches") {
    AgentCost c{0.5, 2.0, 0.0, 0.0};
    CHECK(demand(3.0, c) == doctest::Approx(6.0));
    CHECK(demand(-3.0, c) == doctest::Approx(-1.5));
    CHECK(demand(0.0, c) == 0.0);

    AgentCost d{1.0, 1.0, 0.5, 0.25};
    CHECK(demand(1.0, d) == doctest::Approx(0.75));   // above the long kink
    CHECK(demand(0.1, d) == 0.0);                     // dead zone
    CHECK(demand(-0.3, d) == 0.0);
    CHECK(demand(-1.0, d) == doctest::Approx(-0.5));  // below the short kink
}

TEST_CASE("group coefficients, two agents with asymmetric alpha") {
    MarketSpec spec = uniform_spec(2, 1.0, 2.0, 3.0);
    spec.agents[0].drift = CoefficientField::constant(1.0);
    spec.agents[1].drift = CoefficientField::constant(-1.0);

    // agent 1 short: denominator alpha_plus + alpha_minus = 3
    auto c1 = subset_coefficients(0b10, 0.0, 0.0, spec);
    CHECK(c1.mu == doctest::Approx(1.0 / 3.0));
    CHECK(c1.sigma_sq == doctest::Approx(1.0));
    CHECK(c1.kappa == doctest::Approx(1.0));

    // everyone long: denominator 2 alpha_plus = 4
    auto c0 = subset_coefficients(0b00, 0.0, 0.0, spec);
    CHECK(c0.mu == doctest::Approx(0.0));
    CHECK(c0.kappa == doctest::Approx(0.75));
}

TEST_CASE("pair coefficients absorb the linear cost offsets") {
    MarketSpec spec = la_spec(2, 1.0, 0.5, 1.0);
    spec.agents[0].drift = CoefficientField::constant(1.0);
    spec.agents[1].drift = CoefficientField::constant(-1.0);

    // shorts {1}, longs {0}: kappa = (s - alpha_minus beta_minus + alpha_plus beta_plus)/D
    auto c = subset_pair_coefficients(0b10, 0b01, 0.0, 0.0, spec);
    CHECK(c.mu == doctest::Approx(0.0));  // (1*1 + 1*(-1)) / 2
    CHECK(c.kappa == doctest::Approx((1.0 - 0.5 + 0.5) / 2.0));
    CHECK(c.longs.has_value());
    CHECK(*c.longs == 0b01u);

    // singleton long group, no shorts
    auto cl = subset_pair_coefficients(0b00, 0b01, 0.0, 0.0, spec);
    CHECK(cl.mu == doctest::Approx(1.0));
    CHECK(cl.kappa == doctest::Approx(1.5));
}

TEST_CASE("clearing matches hand-solved two-agent cases") {
    std::vector<double> ell = {1.0, -1.0};

    SUBCASE("symmetric costs, zero supply") {
        MarketSpec spec = uniform_spec(2, 1.0, 1.0, 0.0);
        auto r = clear_root({ell, 0.0}, 0.0, 0.0, spec);
        CHECK(r.theta == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(r.demands[0] == doctest::Approx(1.0));
        CHECK(r.demands[1] == doctest::Approx(-1.0));
        CHECK(r.hamiltonian == doctest::Approx(-r.theta));
    }
    SUBCASE("supply absorbs the short side") {
        MarketSpec spec = uniform_spec(2, 1.0, 1.0, 2.0);
        auto r = clear_root({ell, 2.0}, 0.0, 0.0, spec);
        CHECK(r.theta == doctest::Approx(1.0));
        CHECK(r.demands[0] == doctest::Approx(2.0));
        CHECK(r.demands[1] == doctest::Approx(0.0));
    }
    SUBCASE("cheaper longs tilt theta down") {
        MarketSpec spec = uniform_spec(2, 1.0, 2.0, 0.0);
        auto r = clear_root({ell, 0.0}, 0.0, 0.0, spec);
        CHECK(r.theta == doctest::Approx(-1.0 / 3.0));
        CHECK(r.demands[0] == doctest::Approx(4.0 / 3.0));
        CHECK(r.demands[1] == doctest::Approx(-4.0 / 3.0));
    }
    SUBCASE("dead zone: root set is an interval, lower endpoint returned") {
        MarketSpec spec = la_spec(2, 1.0, 1.0, 0.0);
        std::vector<double> small = {0.1, -0.1};
        auto r = clear_root({small, 0.0}, 0.0, 0.0, spec);
        CHECK(r.theta == doctest::Approx(-0.9));
        CHECK(r.demands[0] == doctest::Approx(0.0));
        CHECK(r.demands[1] == doctest::Approx(0.0));
        auto e = clear_enumerate({small, 0.0}, 0.0, 0.0, spec);
        CHECK(e.theta == doctest::Approx(r.theta));
    }
}

TEST_CASE("enumeration and root scan agree against an independent bisection") {
    const std::uint64_t seed = 555;
    for (int k = 0; k < 300; ++k) {
        int n = 1 + static_cast<int>(rng::uniform(seed, k, 0, 2) * 6.0);
        MarketSpec spec = uniform_spec(n, 1.0, 1.0, 0.0);
        spec.costs.mode = CostMode::heterogeneous;
        spec.costs.per_agent.clear();
        std::vector<double> ell(static_cast<std::size_t>(n));
        double supply = 2.0 * rng::uniform(seed, k, 1, 0);
        for (int i = 0; i < n; ++i) {
            ell[static_cast<std::size_t>(i)] = 6.0 * rng::uniform(seed, k, 2, i) - 3.0;
            double am = 0.2 + 1.3 * rng::uniform(seed, k, 3, i);
            spec.costs.per_agent.push_back({am, am + 1.5 * rng::uniform(seed, k, 4, i), 0.0, 0.0});
        }
        spec.supply = CoefficientField::constant(supply);

        auto re = clear_enumerate({ell, supply}, 0.0, 0.0, spec);
        auto rr = clear_root({ell, supply}, 0.0, 0.0, spec);
        double rb = bisect_theta(ell, spec, supply);
        CHECK(std::abs(re.theta - rr.theta) < 1e-10);
        CHECK(std::abs(rr.theta - rb) < 1e-7);

        double total = 0.0;
        for (double q : rr.demands) total += q;
        CHECK(std::abs(total - supply) < 1e-9);
    }
}

TEST_CASE("optimizer signs cohere with the demand signs") {
    const std::uint64_t seed = 909;
    for (int k = 0; k < 200; ++k) {
        int n = 2 + static_cast<int>(rng::uniform(seed, k, 0, 9) * 5.0);
        MarketSpec spec = uniform_spec(n, 0.7, 1.4, 0.0);
        std::vector<double> ell(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            ell[static_cast<std::size_t>(i)] = 4.0 * rng::uniform(seed, k, 1, i) - 2.0;
        double supply = 1.5 * rng::uniform(seed, k, 2, 0);
        spec.supply = CoefficientField::constant(supply);

        auto r = clear_enumerate({ell, supply}, 0.0, 0.0, spec);
        for (int i = 0; i < n; ++i) {
            double q = r.demands[static_cast<std::size_t>(i)];
            if (q < -1e-9) CHECK(((r.optimizer.shorts >> i) & 1u) == 1u);
            if (q > 1e-9) CHECK(((r.optimizer.shorts >> i) & 1u) == 0u);
        }

        auto part = optimal_partition(ell, r.theta, spec);
        CHECK((part.shorts & part.longs) == 0u);
        CHECK(part.flat == 0u);  // no dead zones here
        for (int i = 0; i < n; ++i) {
            double q = r.demands[static_cast<std::size_t>(i)];
            if (q < -1e-9) CHECK(((part.shorts >> i) & 1u) == 1u);
            if (q > 1e-9) CHECK(((part.longs >> i) & 1u) == 1u);
        }
    }
}

TEST_CASE("flat agents land in the flat set only with dead zones") {
    MarketSpec spec = la_spec(3, 1.0, 0.5, 0.0);
    std::vector<double> ell = {2.0, 0.0, -2.0};
    auto part = optimal_partition(ell, 0.0, spec);
    CHECK(((part.longs >> 0) & 1u) == 1u);
    CHECK(((part.flat >> 1) & 1u) == 1u);
    CHECK(((part.shorts >> 2) & 1u) == 1u);
}

TEST_CASE("enumeration cap throws past 16 agents") {
    MarketSpec spec = uniform_spec(17, 1.0, 1.0, 0.0);
    std::vector<double> ell(17, 0.5);
    CHECK_THROWS_AS(clear_enumerate({ell, 0.0}, 0.0, 0.0, spec),
                    std::invalid_argument);
}

TEST_CASE("uniform costs are the shared special case of per-agent costs") {
    std::vector<double> ell = {1.3, -0.4, 0.2};
    MarketSpec u = uniform_spec(3, 0.6, 1.1, 0.9);
    MarketSpec h = u;
    h.costs.mode = CostMode::heterogeneous;
    h.costs.per_agent.assign(3, u.costs.shared);

    auto ru = clear_root({ell, 0.9}, 0.0, 0.0, u);
    auto rh = clear_root({ell, 0.9}, 0.0, 0.0, h);
    CHECK(std::abs(ru.theta - rh.theta) < 1e-15);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(ru.demands[static_cast<std::size_t>(i)] -
                       rh.demands[static_cast<std::size_t>(i)]) < 1e-15);
}
