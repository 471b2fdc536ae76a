#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "speq/market.hpp"

namespace speq {

/// Per-agent local valuations ell_i = b_i v_x + (1/2) sigma_i^2 v_xx at one
/// point, together with the supply there. theta (= dv/dt) is the unknown the
/// kernel solves for; the agent valuation entering demands is ell_i + theta.
struct LocalValuations {
    std::span<const double> ell;
    double supply = 0.0;
};

/// Drift / variance / running-cost coefficients of one candidate group
/// assignment, normalized by its demand-slope denominator.
struct SubsetCoefficients {
    double mu = 0.0;
    double sigma_sq = 0.0;
    double kappa = 0.0;
    std::uint32_t shorts = 0;          // bitmask, bit i set = agent i short side
    std::optional<std::uint32_t> longs;  // explicit long group (beta modes only)
};

struct Partition {
    std::uint32_t shorts = 0;
    std::uint32_t longs = 0;
    std::uint32_t flat = 0;
};

struct ClearingResult {
    double theta = 0.0;
    double hamiltonian = 0.0;  // == -theta
    SubsetCoefficients optimizer;
    std::vector<double> demands;
};

/// Position demanded by an agent with cost parameters c when its valuation of
/// an extra unit is z: alpha_plus (z - beta_plus)^+  -  alpha_minus (z + beta_minus)^-.
double demand(double z, const AgentCost& c);

/// Group coefficients for short set I (complement long) in the modes without
/// dead zones; mu and sigma_sq are alpha-weighted averages of b_i, sigma_i^2,
/// kappa = supply / denominator.
SubsetCoefficients subset_coefficients(std::uint32_t shorts, double t, double x,
                                       const MarketSpec& spec);

/// Coefficients for an explicit disjoint pair (shorts I, longs J), J != I^c in
/// general; used when linear cost terms put some agents flat. Denominator
/// counts only I and J members, kappa absorbs the beta offsets.
SubsetCoefficients subset_pair_coefficients(std::uint32_t shorts, std::uint32_t longs,
                                            double t, double x, const MarketSpec& spec);

/// theta by maximizing the normalized group value over candidate assignments:
/// all 2^n short sets when no dead zones, otherwise all branch-consistent
/// disjoint pairs excluding (empty, empty). Demands follow from the per-agent
/// rule at ell_i + theta. Throws if n exceeds the enumeration cap.
ClearingResult clear_enumerate(const LocalValuations& vals, double t, double x,
                               const MarketSpec& spec, int cap = 16);

/// theta as the root of the nondecreasing piecewise-linear aggregate demand
/// g(theta) = sum_i demand(ell_i + theta) - supply. The bracketing segment is
/// solved exactly. When the root set is an interval (possible only with dead
/// zones and matching supply), the enumeration's selection is returned.
ClearingResult clear_root(const LocalValuations& vals, double t, double x,
                          const MarketSpec& spec);

/// Sign partition at a solved theta: shorts strictly below the lower kink,
/// longs strictly above the upper kink, the rest flat. Without dead zones the
/// flat set is empty: zero-valuation agents sit in the long group.
Partition optimal_partition(std::span<const double> ell, double theta,
                            const MarketSpec& spec);

}  // namespace speq
