#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "speq/csv.hpp"
#include "speq/market.hpp"
#include "speq/rng.hpp"

using namespace speq;

namespace {

MarketSpec sample_spec() {
    MarketSpec spec;
    spec.agents = {
        {CoefficientField::constant(1.0), CoefficientField::constant(1.0)},
        {CoefficientField::affine(0.25, -0.5), CoefficientField::constant(0.8)},
    };
    spec.costs.mode = CostMode::heterogeneous;
    spec.costs.per_agent = {{0.5, 1.0, 0.0, 0.0}, {0.8, 1.25, 0.0, 0.0}};
    spec.supply = CoefficientField::constant(0.75);
    spec.payoff = PayoffField::quadratic();
    spec.horizon = 1.5;
    spec.x0 = 0.25;
    return spec;
}

}  // namespace

TEST_CASE("coefficient field evaluation and exact bounds") {
    auto c = CoefficientField::constant(2.5);
    CHECK(c(0.0, -3.0) == 2.5);
    CHECK(c.is_constant_value());

    auto a = CoefficientField::affine(1.0, 2.0);
    CHECK(a(0.7, 3.0) == doctest::Approx(7.0));
    auto ab = a.bounds(1.0, -1.0, 2.0);
    CHECK(ab.lo == doctest::Approx(-1.0));
    CHECK(ab.hi == doctest::Approx(5.0));
    CHECK(ab.lo_x == doctest::Approx(-1.0));

    auto tb = CoefficientField::table({0.0, 1.0}, {-1.0, 1.0},
                                      {{0.0, 2.0}, {4.0, 6.0}});
    CHECK(tb(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(tb(0.5, -1.0) == doctest::Approx(2.0));
    CHECK(tb(1.0, 1.0) == doctest::Approx(6.0));
    // Clamped outside the hull: the exact range equals the sample range.
    CHECK(tb(2.0, 5.0) == doctest::Approx(6.0));
    auto bb = tb.bounds(1.0, -10.0, 10.0);
    CHECK(bb.lo == doctest::Approx(0.0));
    CHECK(bb.hi == doctest::Approx(6.0));
}

TEST_CASE("payoff kinds") {
    CHECK(PayoffField::quadratic()(-3.0) == doctest::Approx(9.0));
    CHECK(PayoffField::constant(4.0)(17.0) == 4.0);
    CHECK(PayoffField::affine(1.0, -2.0)(2.0) == doctest::Approx(-3.0));
    auto t = PayoffField::table({0.0, 1.0}, {5.0, 7.0});
    CHECK(t(0.5) == doctest::Approx(6.0));
    CHECK(t(-1.0) == doctest::Approx(5.0));
}

TEST_CASE("carry cost is piecewise quadratic with optional linear part") {
    MarketSpec spec = sample_spec();
    // agent 0: alpha_minus 0.5, alpha_plus 1.0
    CHECK(spec.carry_cost(0, 2.0) == doctest::Approx(2.0));     // y^2/(2*1)
    CHECK(spec.carry_cost(0, -2.0) == doctest::Approx(4.0));    // y^2/(2*0.5)
    CHECK(spec.carry_cost(0, 0.0) == 0.0);

    spec.costs.mode = CostMode::linear_augmented;
    spec.costs.shared = {1.0, 1.0, 0.5, 0.25};
    CHECK(spec.carry_cost(0, 1.0) == doctest::Approx(0.5 + 0.25));
    CHECK(spec.carry_cost(0, -1.0) == doctest::Approx(0.5 + 0.5));
}

TEST_CASE("validation rejects broken specs") {
    MarketSpec spec = sample_spec();
    CHECK(validate(spec, -5.0, 5.0).passed);

    SUBCASE("no agents") {
        spec.agents.clear();
        spec.costs.per_agent.clear();
        CHECK_FALSE(validate(spec, -5.0, 5.0).passed);
    }
    SUBCASE("vol below floor without the degenerate flag") {
        spec.agents[0].vol = CoefficientField::constant(0.0);
        CHECK_FALSE(validate(spec, -5.0, 5.0).passed);
        spec.degenerate = true;
        CHECK(validate(spec, -5.0, 5.0).passed);
    }
    SUBCASE("negative supply somewhere") {
        spec.supply = CoefficientField::affine(0.0, 1.0);
        auto rep = validate(spec, -5.0, 5.0);
        CHECK_FALSE(rep.passed);
        CHECK(rep.violations.front().x == doctest::Approx(-5.0));
    }
    SUBCASE("alpha ordering") {
        spec.costs.per_agent[0] = {2.0, 1.0, 0.0, 0.0};
        CHECK_FALSE(validate(spec, -5.0, 5.0).passed);
    }
    SUBCASE("nonpositive horizon") {
        spec.horizon = 0.0;
        CHECK_FALSE(validate(spec, -5.0, 5.0).passed);
    }
    SUBCASE("uniform mode forbids beta") {
        spec.costs.mode = CostMode::uniform;
        spec.costs.shared = {1.0, 1.0, 0.1, 0.0};
        CHECK_FALSE(validate(spec, -5.0, 5.0).passed);
    }
}

TEST_CASE("json config round-trips bit-exactly") {
    MarketSpec spec = sample_spec();
    MarketSpec back = spec_from_json(spec_to_json(spec));
    CHECK(back.agents[0].drift == spec.agents[0].drift);
    CHECK(back.agents[1].drift == spec.agents[1].drift);
    CHECK(back.agents[1].vol == spec.agents[1].vol);
    CHECK(back.supply == spec.supply);
    CHECK(back.payoff == spec.payoff);
    CHECK(back.horizon == spec.horizon);
    CHECK(back.x0 == spec.x0);
    CHECK(back.costs.per_agent[1].alpha_plus == spec.costs.per_agent[1].alpha_plus);
    CHECK(spec_hash(back) == spec_hash(spec));
}

TEST_CASE("config errors surface as invalid_argument") {
    CHECK_THROWS_AS(spec_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(spec_from_json("{}"), std::invalid_argument);
    CHECK_THROWS_AS(
        spec_from_json(R"({"agents":[],"costs":{"mode":"nope"},"supply":{},"payoff":{},"T":1,"x0":0})"),
        std::invalid_argument);
    CHECK_THROWS_AS(load_spec("/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("sweep helpers modify copies consistently") {
    MarketSpec spec = sample_spec();
    auto s2 = with_supply_scaled(spec, 2.0);
    CHECK(s2.supply(0.0, 0.0) == doctest::Approx(1.5));
    CHECK(spec.supply(0.0, 0.0) == doctest::Approx(0.75));

    auto lam = with_common_scale(spec, 3.0);
    CHECK(lam.costs.per_agent[0].alpha_minus == doctest::Approx(1.5));
    CHECK(lam.costs.per_agent[1].alpha_plus == doctest::Approx(3.75));
    CHECK(lam.supply(0.0, 0.0) == doctest::Approx(2.25));

    spec.costs.mode = CostMode::uniform;
    spec.costs.shared = {0.5, 1.0, 0.0, 0.0};
    auto ap = with_alpha_plus(spec, 4.0);
    CHECK(ap.costs.shared.alpha_plus == 4.0);
    CHECK(ap.costs.shared.alpha_minus == 0.5);
    CHECK_THROWS_AS(with_alpha_plus(spec, 0.25), std::invalid_argument);  // < alpha_minus
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.25, -3.0, 1e-300, 8.988465674311579e307, 0.1}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_int(-42) == "-42");
}

TEST_CASE("counter rng is a pure function of its coordinates") {
    auto a = rng::philox(42, 7, 3, 0);
    auto b = rng::philox(42, 7, 3, 0);
    for (int i = 0; i < 4; ++i) CHECK(a.v[i] == b.v[i]);
    auto c = rng::philox(42, 7, 3, 1);
    bool differs = false;
    for (int i = 0; i < 4; ++i) differs = differs || (a.v[i] != c.v[i]);
    CHECK(differs);

    std::set<double> seen;
    for (int p = 0; p < 100; ++p) {
        double u = rng::uniform(1, p, 0, 0);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        seen.insert(u);
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("normal draws have the right first two moments") {
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int p = 0; p < n; ++p) {
        double z = rng::normal(9, p, 0);
        sum += z;
        sum2 += z * z;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}
