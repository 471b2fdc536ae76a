#include "speq/static_market.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "speq/clearing.hpp"

namespace speq {

namespace {

void require_static_form(const MarketSpec& spec) {
    if (!spec.supply.is_constant_value())
        throw std::invalid_argument("static market: supply must be constant");
    if (spec.costs.has_beta())
        throw std::invalid_argument("static market: defined for quadratic costs only");
}

}  // namespace

std::vector<double> expectations(const MarketSpec& spec, const GridSpec& grid, Exec exec) {
    require_static_form(spec);
    const int n = spec.n();
    std::vector<double> e(static_cast<std::size_t>(n));
    auto no_shorts = [](double, double) -> std::uint32_t { return 0; };
    for (int i = 0; i < n; ++i) {
        MarketSpec single = spec;
        single.agents = {spec.agents[static_cast<std::size_t>(i)]};
        single.costs.mode = CostMode::uniform;
        single.costs.shared = spec.costs.agent(i);
        single.costs.shared.beta_minus = 0.0;
        single.costs.shared.beta_plus = 0.0;
        single.costs.per_agent.clear();
        single.supply = CoefficientField::constant(0.0);
        PriceField f = solve_linear(single, grid, no_shorts, exec);
        e[static_cast<std::size_t>(i)] = f.price(spec.x0);
    }
    return e;
}

StaticEquilibrium static_price(std::span<const double> e, const MarketSpec& spec) {
    require_static_form(spec);
    const int n = spec.n();
    if (static_cast<int>(e.size()) != n)
        throw std::invalid_argument("static_price: expectation count mismatch");
    for (double v : e)
        if (!std::isfinite(v)) throw std::invalid_argument("static_price: non-finite expectation");
    const double horizon = spec.horizon;
    const double st = spec.supply(0.0, spec.x0) * horizon;

    StaticEquilibrium eq;
    eq.e.assign(e.begin(), e.end());

    // Route one: the clearing root of p -> sum_i demand(e_i - p) / T - s.
    LocalValuations vals{e, st};
    ClearingResult root = clear_root(vals, 0.0, spec.x0, spec);
    eq.p_root = -root.theta;

    // Route two: direct maximization over sign assignments, kept free of the
    // clearing kernel so the two can disagree if either is wrong.
    if (n > 16) throw std::invalid_argument("static_price: enumeration capped at 16 agents");
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double num = -st, den = 0.0;
        for (int i = 0; i < n; ++i) {
            const AgentCost c = spec.costs.agent(i);
            double w = ((mask >> i) & 1u) ? c.alpha_minus : c.alpha_plus;
            num += w * e[static_cast<std::size_t>(i)];
            den += w;
        }
        best = std::max(best, num / den);
    }
    eq.p_enumerate = best;
    eq.p_sta = eq.p_root;

    eq.q.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        eq.q[static_cast<std::size_t>(i)] =
            demand(e[static_cast<std::size_t>(i)] - eq.p_sta, spec.costs.agent(i)) / horizon;
    return eq;
}

StaticLimits static_limits(std::span<const double> e, const MarketSpec& spec) {
    require_static_form(spec);
    const int n = spec.n();
    if (static_cast<int>(e.size()) != n)
        throw std::invalid_argument("static_limits: expectation count mismatch");
    StaticLimits lim;
    lim.p_limit_long = *std::max_element(e.begin(), e.end());

    // No-shorting price: best alpha_plus-weighted group average net of the
    // spread supply cost. The maximizing group is a prefix of the descending
    // sort, so scanning prefixes is exhaustive.
    const double st = spec.supply(0.0, spec.x0) * spec.horizon;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (e[static_cast<std::size_t>(a)] != e[static_cast<std::size_t>(b)])
            return e[static_cast<std::size_t>(a)] > e[static_cast<std::size_t>(b)];
        return a < b;
    });
    double num = -st, den = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    std::uint32_t prefix = 0, best_mask = 0;
    for (int r = 0; r < n; ++r) {
        int i = order[static_cast<std::size_t>(r)];
        double w = spec.costs.agent(i).alpha_plus;
        num += w * e[static_cast<std::size_t>(i)];
        den += w;
        prefix |= 1u << i;
        double value = num / den;
        if (value > best) {
            best = value;
            best_mask = prefix;
        }
    }
    lim.p_limit_short = best;
    lim.short_optimizer = best_mask;
    return lim;
}

}  // namespace speq
