#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "speq/market.hpp"

namespace speq {

enum class Scheme { explicit_upwind, degenerate_upwind };

/// Uniform space-time grid for the backward solve. nt counts time steps, so
/// there are nt+1 value rows; x0 sits on the center node when nx is odd and
/// the domain is built by make_grid.
struct GridSpec {
    double x_lo = -1.0;
    double x_hi = 1.0;
    int nx = 801;
    int nt = 1;
    Scheme scheme = Scheme::explicit_upwind;

    double dx() const { return (x_hi - x_lo) / (nx - 1); }
    double x(int j) const { return x_lo + j * dx(); }
};

/// Largest |drift| and |vol| of any agent over [0,T] x [x_lo,x_hi] (exact,
/// from field structure).
struct CoefficientBounds {
    double max_abs_drift = 0.0;
    double max_vol = 0.0;
};
CoefficientBounds coefficient_bounds(const MarketSpec& spec, double x_lo, double x_hi);

/// Domain from the width rule half_width = 5 max|b| T + 8 max(sigma) sqrt(T)
/// (floored at 1, scaled by width_multiplier, centered on x0), nt from the
/// CFL bound dt (max sigma^2/dx^2 + max|b|/dx) <= cfl_safety unless
/// overridden. Scheme follows the degenerate flag.
GridSpec make_grid(const MarketSpec& spec, int nx = 801, double width_multiplier = 1.0,
                   double cfl_safety = 0.9, int nt_override = 0);

/// Validates grid invariants incl. the CFL condition against the spec's
/// coefficient bounds. Throws CflError / std::invalid_argument.
void check_grid(const MarketSpec& spec, const GridSpec& grid);

struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric failure during a sweep; carries the node location.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SolveMode { full, limit_long, limit_short };

/// Backward-solved value surface. values row k is t_k = k*T/nt; theta[k][j]
/// is dv/dt on [t_k, t_{k+1}) computed by the clearing kernel from the
/// level-(k+1) central/one-sided spatial differences (never from a time
/// difference). opt_shorts / opt_longs record the stepping argmax groups.
struct PriceField {
    GridSpec grid;
    double horizon = 1.0;
    int n_agents = 0;
    SolveMode mode = SolveMode::full;
    bool degenerate = false;

    std::vector<double> values;              // (nt+1) * nx
    std::vector<double> theta;               // nt * nx
    std::vector<std::uint32_t> opt_shorts;   // nt * nx
    std::vector<std::uint32_t> opt_longs;    // nt * nx (beta modes; else complement)

    double v(int k, int j) const { return values[static_cast<std::size_t>(k) * grid.nx + j]; }
    double th(int k, int j) const { return theta[static_cast<std::size_t>(k) * grid.nx + j]; }
    double t(int k) const { return horizon * k / grid.nt; }

    /// Bilinear interpolation in (t, x); clamped to the grid hull.
    double at(double t, double x) const;

    /// Time-step row containing t (clamped to [0, nt-1]); for interval fields.
    int step_index(double t) const;
    /// Nearest spatial node index.
    int node_index(double x) const;

    /// Dynamic equilibrium price at (0, x).
    double price(double x) const { return at(0.0, x); }
};

}  // namespace speq
