#include "speq/hjb.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "stencil_detail.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace speq {

namespace {

struct Ctx {
    const MarketSpec* spec;
    GridSpec grid;
    SolveMode mode;
    const std::function<std::uint32_t(double, double)>* assignment;  // linear solve
    int n;
    std::vector<AgentCost> cost;
    bool beta;
    std::uint32_t full_mask;
    double dx, dt;
};

struct Scratch {
    std::vector<double> b, s2, ell;
    std::vector<double> bp, gs;
    std::vector<int> order;
};

// First difference per candidate: central while the three-point stencil stays
// monotone for this (mu, Sigma^2), upwind by drift sign otherwise.
double candidate_value(double mu, double sig2, double kappa, const detail::Diffs& d,
                       double dx) {
    double dv = std::abs(mu) <= sig2 / dx ? d.dc : (mu > 0.0 ? d.df : d.db);
    return mu * dv + 0.5 * sig2 * d.d2 - kappa;
}

// Equal-weight-alpha_plus group coefficients of the no-shorting limit; the
// running cost is supply split over the group's total long capacity.
void short_group(const Ctx& c, const Scratch& sc, std::uint32_t mask, double supply,
                 double& mu, double& sig2, double& kappa) {
    double num_mu = 0.0, num_sig = 0.0, den = 0.0;
    for (int i = 0; i < c.n; ++i) {
        if (!((mask >> i) & 1u)) continue;
        double w = c.cost[static_cast<std::size_t>(i)].alpha_plus;
        den += w;
        num_mu += w * sc.b[static_cast<std::size_t>(i)];
        num_sig += w * sc.s2[static_cast<std::size_t>(i)];
    }
    mu = num_mu / den;
    sig2 = num_sig / den;
    kappa = supply / den;
}

struct NodeOut {
    double h = 0.0;
    double theta = 0.0;
    std::uint32_t shorts = 0;
    std::uint32_t longs = 0;
};

NodeOut update_node(const Ctx& c, double t_data, int j, const double* row, Scratch& sc) {
    const MarketSpec& spec = *c.spec;
    const double x = c.grid.x(j);
    detail::Diffs d = detail::diffs(row, j, c.grid.nx, c.dx);

    for (int i = 0; i < c.n; ++i) {
        sc.b[static_cast<std::size_t>(i)] = spec.agents[static_cast<std::size_t>(i)].drift(t_data, x);
        double sg = spec.agents[static_cast<std::size_t>(i)].vol(t_data, x);
        sc.s2[static_cast<std::size_t>(i)] = sg * sg;
        sc.ell[static_cast<std::size_t>(i)] =
            sc.b[static_cast<std::size_t>(i)] * d.dce + 0.5 * sc.s2[static_cast<std::size_t>(i)] * d.d2;
    }
    const double supply = spec.supply(t_data, x);

    NodeOut out;
    if (c.assignment != nullptr) {
        // Query inside the step interval this update governs, so a replay of
        // stored per-step groups reads the matching row.
        std::uint32_t mask = (*c.assignment)(t_data - 0.5 * c.dt, x) & c.full_mask;
        SubsetCoefficients g = subset_coefficients(mask, t_data, x, spec);
        out.h = candidate_value(g.mu, g.sigma_sq, g.kappa, d, c.dx);
        out.theta = -out.h;
        out.shorts = mask;
        out.longs = c.full_mask & ~mask;
        return out;
    }

    switch (c.mode) {
        case SolveMode::full: {
            out.theta = detail::smallest_clearing_theta(sc.ell.data(), c.cost.data(), c.n,
                                                        supply, sc.bp, sc.gs);
            if (!c.beta) {
                double best = -std::numeric_limits<double>::infinity();
                std::uint32_t best_mask = 0;
                for (std::uint32_t mask = 0; mask <= c.full_mask; ++mask) {
                    SubsetCoefficients g = subset_coefficients(mask, t_data, x, spec);
                    double cand = candidate_value(g.mu, g.sigma_sq, g.kappa, d, c.dx);
                    if (cand > best) {
                        best = cand;
                        best_mask = mask;
                    }
                }
                out.h = best;
                out.shorts = best_mask;
                out.longs = c.full_mask & ~best_mask;
            } else {
                // Policy frozen from the clearing root: the strict sign groups
                // at theta, or the binding kink agent alone when everyone is
                // inside a dead zone (interval root, lower endpoint).
                std::uint32_t I = 0, J = 0;
                for (int i = 0; i < c.n; ++i) {
                    double z = sc.ell[static_cast<std::size_t>(i)] + out.theta;
                    const AgentCost& ac = c.cost[static_cast<std::size_t>(i)];
                    if (z < -ac.beta_minus)
                        I |= 1u << i;
                    else if (z > ac.beta_plus)
                        J |= 1u << i;
                }
                if (I == 0u && J == 0u) {
                    int arg = 0;
                    double lo = sc.ell[0] + c.cost[0].beta_minus;
                    for (int i = 1; i < c.n; ++i) {
                        double cand = sc.ell[static_cast<std::size_t>(i)] +
                                      c.cost[static_cast<std::size_t>(i)].beta_minus;
                        if (cand < lo) {
                            lo = cand;
                            arg = i;
                        }
                    }
                    I = 1u << arg;
                }
                SubsetCoefficients g = subset_pair_coefficients(I, J, t_data, x, spec);
                out.h = candidate_value(g.mu, g.sigma_sq, g.kappa, d, c.dx);
                out.shorts = I;
                out.longs = J;
            }
            break;
        }
        case SolveMode::limit_long: {
            double best = -std::numeric_limits<double>::infinity();
            int best_i = 0;
            for (int i = 0; i < c.n; ++i) {
                double cand = candidate_value(sc.b[static_cast<std::size_t>(i)],
                                              sc.s2[static_cast<std::size_t>(i)], 0.0, d, c.dx);
                if (cand > best) {
                    best = cand;
                    best_i = i;
                }
            }
            out.h = best;
            out.longs = 1u << best_i;
            // theta from the same valuations the extraction uses.
            double top = sc.ell[0];
            for (int i = 1; i < c.n; ++i) top = std::max(top, sc.ell[static_cast<std::size_t>(i)]);
            out.theta = -top;
            break;
        }
        case SolveMode::limit_short: {
            double best = -std::numeric_limits<double>::infinity();
            std::uint32_t best_mask = 1;
            for (std::uint32_t mask = 1; mask <= c.full_mask; ++mask) {
                double mu, sig2, kappa;
                short_group(c, sc, mask, supply, mu, sig2, kappa);
                double cand = candidate_value(mu, sig2, kappa, d, c.dx);
                if (cand > best) {
                    best = cand;
                    best_mask = mask;
                }
            }
            out.h = best;
            out.longs = best_mask;
            // theta solves sum alpha_plus (ell + theta)^+ = supply on the
            // extraction valuations: the best group is a prefix of the ells
            // sorted decreasingly, so scan prefixes exactly.
            sc.order.resize(static_cast<std::size_t>(c.n));
            for (int i = 0; i < c.n; ++i) sc.order[static_cast<std::size_t>(i)] = i;
            std::sort(sc.order.begin(), sc.order.end(), [&](int a, int bdx) {
                double ea = sc.ell[static_cast<std::size_t>(a)], eb = sc.ell[static_cast<std::size_t>(bdx)];
                if (ea != eb) return ea > eb;
                return a < bdx;
            });
            double num = -supply, den = 0.0;
            double top = -std::numeric_limits<double>::infinity();
            for (int r = 0; r < c.n; ++r) {
                int i = sc.order[static_cast<std::size_t>(r)];
                double w = c.cost[static_cast<std::size_t>(i)].alpha_plus;
                num += w * sc.ell[static_cast<std::size_t>(i)];
                den += w;
                top = std::max(top, num / den);
            }
            out.theta = -top;
            break;
        }
    }
    return out;
}

PriceField run(const MarketSpec& spec, const GridSpec& grid, SolveMode mode, Exec exec,
               const std::function<std::uint32_t(double, double)>* assignment) {
    require_valid(spec, grid.x_lo, grid.x_hi);
    check_grid(spec, grid);
    const int n = spec.n();
    if (n > 16) throw std::invalid_argument("solver: subset enumeration capped at 16 agents");

    Ctx c;
    c.spec = &spec;
    c.grid = grid;
    c.mode = mode;
    c.assignment = assignment;
    c.n = n;
    c.cost.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c.cost.push_back(spec.costs.agent(i));
    c.beta = spec.costs.has_beta();
    c.full_mask = (1u << n) - 1u;
    c.dx = grid.dx();
    c.dt = spec.horizon / grid.nt;

    const int nx = grid.nx, nt = grid.nt;
    PriceField f;
    f.grid = grid;
    f.horizon = spec.horizon;
    f.n_agents = n;
    f.mode = mode;
    f.degenerate = spec.degenerate;
    f.values.assign(static_cast<std::size_t>(nt + 1) * nx, 0.0);
    f.theta.assign(static_cast<std::size_t>(nt) * nx, 0.0);
    f.opt_shorts.assign(static_cast<std::size_t>(nt) * nx, 0u);
    f.opt_longs.assign(static_cast<std::size_t>(nt) * nx, 0u);

    double* terminal = f.values.data() + static_cast<std::size_t>(nt) * nx;
    for (int j = 0; j < nx; ++j) terminal[j] = spec.payoff(grid.x(j));

    std::atomic<long> bad_node{-1};
    for (int k = nt - 1; k >= 0; --k) {
        const double t_data = spec.horizon * (k + 1) / nt;
        const double* row = f.values.data() + static_cast<std::size_t>(k + 1) * nx;
        double* out_row = f.values.data() + static_cast<std::size_t>(k) * nx;
        double* th_row = f.theta.data() + static_cast<std::size_t>(k) * nx;
        std::uint32_t* ms_row = f.opt_shorts.data() + static_cast<std::size_t>(k) * nx;
        std::uint32_t* ml_row = f.opt_longs.data() + static_cast<std::size_t>(k) * nx;

        auto work = [&](int j, Scratch& sc) {
            NodeOut o = update_node(c, t_data, j, row, sc);
            double v_new = row[j] + c.dt * o.h;
            out_row[j] = v_new;
            th_row[j] = o.theta;
            ms_row[j] = o.shorts;
            ml_row[j] = o.longs;
            if (!std::isfinite(v_new) || !std::isfinite(o.theta)) {
                long id = static_cast<long>(k) * nx + j;
                long expect = -1;
                bad_node.compare_exchange_strong(expect, id);
            }
        };

        if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel
            {
                Scratch sc;
                sc.b.resize(static_cast<std::size_t>(n));
                sc.s2.resize(static_cast<std::size_t>(n));
                sc.ell.resize(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
                for (int j = 0; j < nx; ++j) work(j, sc);
            }
#else
            Scratch sc;
            sc.b.resize(static_cast<std::size_t>(n));
            sc.s2.resize(static_cast<std::size_t>(n));
            sc.ell.resize(static_cast<std::size_t>(n));
            for (int j = 0; j < nx; ++j) work(j, sc);
#endif
        } else {
            Scratch sc;
            sc.b.resize(static_cast<std::size_t>(n));
            sc.s2.resize(static_cast<std::size_t>(n));
            sc.ell.resize(static_cast<std::size_t>(n));
            for (int j = 0; j < nx; ++j) work(j, sc);
        }

        long bad = bad_node.load();
        if (bad >= 0) {
            int bk = static_cast<int>(bad / nx), bj = static_cast<int>(bad % nx);
            throw NumericError("non-finite value at step " + std::to_string(bk) + ", node " +
                               std::to_string(bj) + " (t=" + std::to_string(f.t(bk)) +
                               ", x=" + std::to_string(grid.x(bj)) + ")");
        }
    }
    return f;
}

}  // namespace

PriceField solve_hjb(const MarketSpec& spec, const GridSpec& grid, SolveMode mode, Exec exec) {
    return run(spec, grid, mode, exec, nullptr);
}

PriceField solve_linear(const MarketSpec& spec, const GridSpec& grid,
                        const std::function<std::uint32_t(double, double)>& assignment,
                        Exec exec) {
    if (!assignment) throw std::invalid_argument("solve_linear: empty assignment");
    return run(spec, grid, SolveMode::full, exec, &assignment);
}

PriceField solve_zero_vol(const MarketSpec& spec, const GridSpec& grid, Exec exec) {
    if (!spec.degenerate)
        throw std::invalid_argument("solve_zero_vol: instance must be flagged degenerate");
    if (!spec.supply.is_constant_value())
        throw std::invalid_argument("solve_zero_vol: supply must be constant");
    return run(spec, grid, SolveMode::limit_short, exec, nullptr);
}

}  // namespace speq
