#pragma once

#include <span>

#include "speq/hjb.hpp"

namespace speq {

/// Buy-and-hold equilibrium of the same market: one trade at 0, unwind at T.
/// Defined for constant supply and purely quadratic costs.
struct StaticEquilibrium {
    double p_sta = 0.0;             // canonical value (root route)
    double p_enumerate = 0.0;       // subset-max route; agrees to ~1e-12
    double p_root = 0.0;
    std::vector<double> q;          // static positions, sum = supply
    std::vector<double> e;          // inputs echoed back
};

/// Per-agent terminal-payoff expectations E_i[f(X_T)] at (0, x0) via
/// single-agent zero-cost solves on the given grid.
std::vector<double> expectations(const MarketSpec& spec, const GridSpec& grid,
                                 Exec exec = Exec::parallel);

/// Static price from expectations, via both the subset maximization and the
/// exact piecewise-linear root in p; positions q_i = demand(e_i - p)/T.
StaticEquilibrium static_price(std::span<const double> e, const MarketSpec& spec);

struct StaticLimits {
    double p_limit_long = 0.0;        // costless shorts: max_i e_i
    double p_limit_short = 0.0;       // no shorting: best group average net of cost
    std::uint32_t short_optimizer = 0;  // argmax group of the no-short price
};

/// Closed-form limit prices from expectations (sort + prefix means; exact).
StaticLimits static_limits(std::span<const double> e, const MarketSpec& spec);

}  // namespace speq
