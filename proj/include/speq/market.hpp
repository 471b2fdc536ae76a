#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speq/field.hpp"

namespace speq {

/// One agent's subjective model: dX = drift dt + vol dW under that agent's
/// measure. vol must stay >= sigma_min on the solve domain unless the whole
/// instance is flagged degenerate.
struct BeliefSpec {
    CoefficientField drift;
    CoefficientField vol;
};

enum class CostMode { uniform, linear_augmented, heterogeneous };

/// Per-agent carrying-cost parameters. alpha is the *inverse* cost scale
/// (larger alpha = cheaper position); beta adds a linear cost with a no-trade
/// dead zone of width beta_minus + beta_plus in the valuation.
struct AgentCost {
    double alpha_minus = 1.0;
    double alpha_plus = 1.0;
    double beta_minus = 0.0;
    double beta_plus = 0.0;
};

struct CostStructure {
    CostMode mode = CostMode::uniform;
    AgentCost shared;                  // uniform and linear_augmented modes
    std::vector<AgentCost> per_agent;  // heterogeneous mode

    const AgentCost& agent(int i) const;
    bool has_beta() const;
    /// Throws std::invalid_argument on violated parameter invariants.
    void check(int n_agents) const;
};

struct MarketSpec {
    std::vector<BeliefSpec> agents;
    CostStructure costs;
    CoefficientField supply = CoefficientField::constant(0.0);
    PayoffField payoff = PayoffField::quadratic();
    double horizon = 1.0;
    double x0 = 0.0;
    /// Explicit opt-in for zero-volatility instances; skips the sigma_min check.
    bool degenerate = false;

    int n() const { return static_cast<int>(agents.size()); }

    /// Carrying cost c_i(y) for a held position y (piecewise quadratic plus
    /// optional linear part).
    double carry_cost(int i, double y) const;
};

struct Violation {
    std::string what;
    double t = 0.0, x = 0.0;
};

struct ValidationReport {
    bool passed = true;
    std::vector<Violation> violations;
};

inline constexpr double kSigmaMin = 1e-6;

/// Structural and domain checks: n >= 1, positive horizon, cost parameter
/// invariants, vol >= sigma_min (unless degenerate), supply >= 0, finite
/// fields. Domain is [x_lo, x_hi]; offending points are reported exactly
/// (field extrema sit on corners / sample nodes).
ValidationReport validate(const MarketSpec& spec, double x_lo, double x_hi);

/// validate() and throw std::invalid_argument on the first violation.
void require_valid(const MarketSpec& spec, double x_lo, double x_hi);

// Config (de)serialization. Round-trips bit-exactly for all doubles.
MarketSpec spec_from_json(const std::string& text);
MarketSpec load_spec(const std::string& path);
std::string spec_to_json(const MarketSpec& spec);

/// FNV-1a over the canonical serialized form; stable run identifier.
std::uint64_t spec_hash(const MarketSpec& spec);

// Parameter-sweep helpers; each returns a modified copy.
MarketSpec with_supply_scaled(const MarketSpec& spec, double factor);
MarketSpec with_alpha_plus(const MarketSpec& spec, double alpha_plus);
MarketSpec with_alpha_minus(const MarketSpec& spec, double alpha_minus);
MarketSpec with_common_scale(const MarketSpec& spec, double lambda);

}  // namespace speq
