#pragma once

#include <algorithm>
#include <vector>

#include "speq/clearing.hpp"
#include "speq/market.hpp"

// Shared between the backward solver and the portfolio extraction: both must
// difference a value row identically, or the stored theta would not clear the
// rebuilt valuations.
namespace speq::detail {

struct Diffs {
    double dc;   // central first difference (ghost-extended at the edges)
    double df;   // forward difference, 0 at the right edge
    double db;   // backward difference, 0 at the left edge
    double d2;   // central second difference with constant-extension ghosts
    double dce;  // extraction first difference: central inside, one-sided at edges
};

inline Diffs diffs(const double* row, int j, int nx, double dx) {
    double v0 = row[j];
    double vm = j > 0 ? row[j - 1] : v0;
    double vp = j < nx - 1 ? row[j + 1] : v0;
    Diffs d;
    d.df = (vp - v0) / dx;
    d.db = (v0 - vm) / dx;
    d.dc = (vp - vm) / (2.0 * dx);
    d.d2 = (vp - 2.0 * v0 + vm) / (dx * dx);
    d.dce = j == 0 ? d.df : (j == nx - 1 ? d.db : d.dc);
    return d;
}

/// Smallest theta with sum_i demand(ell_i + theta) = supply. Aggregate demand
/// is nondecreasing piecewise linear; on a flat segment at the target (dead
/// zone interval, s = 0) the lower endpoint is returned, matching the
/// enumeration tie-break of the clearing kernel.
inline double smallest_clearing_theta(const double* ell, const AgentCost* cost, int n,
                                      double supply, std::vector<double>& bp,
                                      std::vector<double>& gs) {
    bp.clear();
    for (int i = 0; i < n; ++i) {
        bp.push_back(-cost[i].beta_minus - ell[i]);
        bp.push_back(cost[i].beta_plus - ell[i]);
    }
    std::sort(bp.begin(), bp.end());

    gs.resize(bp.size());
    for (std::size_t k = 0; k < bp.size(); ++k) {
        double g = 0.0;
        for (int i = 0; i < n; ++i) g += demand(ell[i] + bp[k], cost[i]);
        gs[k] = g;
    }

    if (gs.front() >= supply) {
        double slope = 0.0;
        for (int i = 0; i < n; ++i) slope += cost[i].alpha_minus;
        return bp.front() - (gs.front() - supply) / slope;
    }

    const double flat_eps = 1e-10 * (1.0 + std::abs(supply));
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        if (bp[k] == bp[k + 1]) continue;
        double slope = 0.0;
        for (int i = 0; i < n; ++i) {
            if (-cost[i].beta_minus - ell[i] >= bp[k + 1]) slope += cost[i].alpha_minus;
            if (cost[i].beta_plus - ell[i] <= bp[k]) slope += cost[i].alpha_plus;
        }
        if (slope == 0.0) {
            if (std::abs(gs[k] - supply) <= flat_eps) return bp[k];
            continue;
        }
        if (gs[k + 1] < supply) continue;
        return bp[k] + (supply - gs[k]) / slope;
    }

    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += cost[i].alpha_plus;
    return bp.back() + (supply - gs.back()) / slope;
}

}  // namespace speq::detail
