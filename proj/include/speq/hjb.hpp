#pragma once

#include <functional>

#include "speq/clearing.hpp"
#include "speq/grid.hpp"

namespace speq {

enum class Exec { serial, parallel };

/// Explicit monotone backward solve of
///   dv/dt + sup_groups ( mu v_x + (1/2) Sigma^2 v_xx - kappa ) = 0,  v(T,.) = payoff,
/// with the group family set by mode: all cost-weighted short sets (full),
/// single agents ignoring cost and supply (limit_long), or nonempty
/// equal-weight groups with kappa = s/(|J| alpha_plus) (limit_short).
/// Per candidate the first difference is central where |mu| <= Sigma^2/dx
/// (keeps the stencil monotone), upwind otherwise; second difference central;
/// constant-extension ghosts at the edges. theta is stored from the clearing
/// kernel on the same differences the portfolio extraction uses.
PriceField solve_hjb(const MarketSpec& spec, const GridSpec& grid, SolveMode mode,
                     Exec exec = Exec::parallel);

/// Same scheme with the group fixed by a planner assignment (t, x) -> short
/// set; no sup. Supply and costs enter through the group's kappa. The
/// assignment is queried at the midpoint of each step interval.
PriceField solve_linear(const MarketSpec& spec, const GridSpec& grid,
                        const std::function<std::uint32_t(double, double)>& assignment,
                        Exec exec = Exec::parallel);

/// First-order Hamilton-Jacobi solve for flagged zero-volatility instances:
/// the degenerate limit_short equation. Requires constant supply.
PriceField solve_zero_vol(const MarketSpec& spec, const GridSpec& grid,
                          Exec exec = Exec::parallel);

}  // namespace speq
