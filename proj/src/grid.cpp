#include "speq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace speq {

CoefficientBounds coefficient_bounds(const MarketSpec& spec, double x_lo, double x_hi) {
    CoefficientBounds out;
    for (const BeliefSpec& a : spec.agents) {
        auto bd = a.drift.bounds(spec.horizon, x_lo, x_hi);
        out.max_abs_drift = std::max({out.max_abs_drift, std::abs(bd.lo), std::abs(bd.hi)});
        auto bv = a.vol.bounds(spec.horizon, x_lo, x_hi);
        out.max_vol = std::max({out.max_vol, std::abs(bv.lo), std::abs(bv.hi)});
    }
    return out;
}

GridSpec make_grid(const MarketSpec& spec, int nx, double width_multiplier,
                   double cfl_safety, int nt_override) {
    if (nx < 3) throw std::invalid_argument("make_grid: nx must be at least 3");
    if (width_multiplier <= 0.0) throw std::invalid_argument("make_grid: bad width multiplier");
    if (cfl_safety <= 0.0 || cfl_safety > 1.0)
        throw std::invalid_argument("make_grid: cfl safety must be in (0,1]");

    const double T = spec.horizon;
    // The width rule references coefficient bounds over the domain itself, so
    // iterate to a fixed point; constant and table fields settle in one pass.
    double half = 1.0;
    for (int it = 0; it < 32; ++it) {
        CoefficientBounds cb = coefficient_bounds(spec, spec.x0 - half, spec.x0 + half);
        double want =
            std::max(1.0, 5.0 * cb.max_abs_drift * T + 8.0 * cb.max_vol * std::sqrt(T));
        if (want > 1e9) throw std::invalid_argument("make_grid: domain width diverges");
        if (want <= half * (1.0 + 1e-12)) {
            half = want;
            break;
        }
        half = want;
    }
    half *= width_multiplier;

    GridSpec g;
    g.x_lo = spec.x0 - half;
    g.x_hi = spec.x0 + half;
    g.nx = nx;
    g.scheme = spec.degenerate ? Scheme::degenerate_upwind : Scheme::explicit_upwind;

    CoefficientBounds cb = coefficient_bounds(spec, g.x_lo, g.x_hi);
    double dx = g.dx();
    double rate = cb.max_vol * cb.max_vol / (dx * dx) + cb.max_abs_drift / dx;
    if (nt_override > 0) {
        g.nt = nt_override;
    } else if (rate == 0.0) {
        g.nt = 1;
    } else {
        g.nt = std::max(1, static_cast<int>(std::ceil(T * rate / cfl_safety)));
    }
    check_grid(spec, g);
    return g;
}

void check_grid(const MarketSpec& spec, const GridSpec& grid) {
    if (grid.nx < 3) throw std::invalid_argument("grid: nx must be at least 3");
    if (grid.nt < 1) throw std::invalid_argument("grid: nt must be at least 1");
    if (!(grid.x_lo < grid.x_hi)) throw std::invalid_argument("grid: empty domain");
    if (!std::isfinite(grid.x_lo) || !std::isfinite(grid.x_hi))
        throw std::invalid_argument("grid: domain not finite");

    CoefficientBounds cb = coefficient_bounds(spec, grid.x_lo, grid.x_hi);
    double dx = grid.dx();
    double dt = spec.horizon / grid.nt;
    double load = dt * (cb.max_vol * cb.max_vol / (dx * dx) + cb.max_abs_drift / dx);
    if (load > 1.0 + 1e-12)
        throw CflError("time step violates the explicit stability bound: dt*(sigma^2/dx^2 + |b|/dx) = " +
                       std::to_string(load));
}

double PriceField::at(double tq, double xq) const {
    const int nx = grid.nx, nt = grid.nt;
    double tau = std::clamp(tq, 0.0, horizon);
    double pos_t = tau / horizon * nt;
    int k0 = std::min(static_cast<int>(pos_t), nt - 1);
    double ft = pos_t - k0;

    double xx = std::clamp(xq, grid.x_lo, grid.x_hi);
    double pos_x = (xx - grid.x_lo) / grid.dx();
    int j0 = std::min(static_cast<int>(pos_x), nx - 2);
    double fx = pos_x - j0;

    double a = v(k0, j0) * (1.0 - fx) + v(k0, j0 + 1) * fx;
    double b = v(k0 + 1, j0) * (1.0 - fx) + v(k0 + 1, j0 + 1) * fx;
    return a * (1.0 - ft) + b * ft;
}

int PriceField::step_index(double tq) const {
    double pos = tq / horizon * grid.nt;
    return std::clamp(static_cast<int>(std::floor(pos)), 0, grid.nt - 1);
}

int PriceField::node_index(double xq) const {
    double pos = (xq - grid.x_lo) / grid.dx();
    return std::clamp(static_cast<int>(std::lround(pos)), 0, grid.nx - 1);
}

}  // namespace speq
