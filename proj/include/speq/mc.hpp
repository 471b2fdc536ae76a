#pragma once

#include <cstdint>
#include <functional>

#include "speq/equilibrium.hpp"

namespace speq {

struct SimConfig {
    std::int64_t n_paths = 100000;
    double dt = 0.0;       // 0 = horizon/1000
    std::uint64_t seed = 42;
    bool antithetic = false;
    /// Coefficient lookups are reflected back into [clamp_lo, clamp_hi]
    /// (0,0 = derive from the domain width rule). The state itself is never
    /// clamped; paths that leave the interval are counted and the run aborts
    /// if more than abort_clamp_fraction of them do.
    double clamp_lo = 0.0;
    double clamp_hi = 0.0;
    double abort_clamp_fraction = 1e-3;
    Exec exec = Exec::parallel;
};

struct ValueEstimate {
    double mean = 0.0;
    /// Sample std over iid units / sqrt(units); the unit is the antithetic
    /// pair when pairing is on.
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t clamped_paths = 0;
};

/// Euler-Maruyama estimate of the planner value: path follows the assigned
/// group's (mu, Sigma), accumulating -kappa dt (left endpoint), plus f(X_T).
ValueEstimate control_value(const MarketSpec& spec,
                            const std::function<std::uint32_t(double, double)>& assignment,
                            const SimConfig& cfg);

/// Gain of one agent trading a position rule against the solved price field
/// under that agent's own belief: sum position * dP - carry cost dt.
ValueEstimate strategy_payoff(const MarketSpec& spec, const PriceField& field,
                              const std::function<double(double, double)>& position,
                              int agent, const SimConfig& cfg);

/// E_i[f(X_T)] under agent i's belief.
ValueEstimate belief_expectation(const MarketSpec& spec, int agent, const SimConfig& cfg);

}  // namespace speq
