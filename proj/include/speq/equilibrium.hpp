#pragma once

#include <functional>

#include "speq/hjb.hpp"

namespace speq {

/// Equilibrium positions phi_i on the nt x nx step grid, rebuilt from the
/// stored theta and the same spatial differences the solver recorded it
/// against, so the positions clear the stored supply to rounding.
struct PortfolioField {
    GridSpec grid;
    double horizon = 1.0;
    int n_agents = 0;
    std::vector<std::vector<double>> phi;  // [agent][k * nx + j]
    /// Nodes where the limit_long absorber was split among tied optimists.
    long tie_nodes = 0;

    double at(int agent, int k, int j) const {
        return phi[agent][static_cast<std::size_t>(k) * grid.nx + j];
    }
    /// Interpolated position: piecewise-constant in t over steps, linear in x.
    double interp(int agent, double t, double x) const;
};

/// Positions for a solved field. full mode: per-agent demand at ell_i + theta.
/// limit_long: shorts at alpha_minus (ell_i + theta), the unique optimist
/// absorbs supply plus all shorts (equal split + flag on ties). limit_short:
/// alpha_plus (ell_i + theta)^+. Rejects agent-count mismatches.
PortfolioField portfolios(const PriceField& field, const MarketSpec& spec);

/// max over nodes of |sum_i phi_i - supply|.
double clearing_residual(const PortfolioField& pf, const MarketSpec& spec);

/// Planner assignment replaying the solve's stepping argmax groups
/// (nearest-node lookup).
std::function<std::uint32_t(double, double)> optimal_assignment(const PriceField& field);

}  // namespace speq
