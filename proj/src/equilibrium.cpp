#include "speq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "stencil_detail.hpp"

namespace speq {

double PortfolioField::interp(int agent, double t, double x) const {
    int k = static_cast<int>(std::floor(t / horizon * grid.nt));
    k = std::clamp(k, 0, grid.nt - 1);
    double pos = (x - grid.x_lo) / grid.dx();
    int j0 = std::clamp(static_cast<int>(std::floor(pos)), 0, grid.nx - 2);
    double w = std::clamp(pos - j0, 0.0, 1.0);
    return (1.0 - w) * at(agent, k, j0) + w * at(agent, k, j0 + 1);
}

PortfolioField portfolios(const PriceField& field, const MarketSpec& spec) {
    if (field.n_agents != spec.n())
        throw std::invalid_argument("portfolios: field was solved for a different agent count");
    const int nx = field.grid.nx, nt = field.grid.nt, n = spec.n();
    const double dx = field.grid.dx();

    PortfolioField pf;
    pf.grid = field.grid;
    pf.horizon = field.horizon;
    pf.n_agents = n;
    pf.phi.assign(static_cast<std::size_t>(n),
                  std::vector<double>(static_cast<std::size_t>(nt) * nx, 0.0));

    std::vector<AgentCost> cost;
    cost.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cost.push_back(spec.costs.agent(i));

    std::vector<double> ell(static_cast<std::size_t>(n));
    for (int k = 0; k < nt; ++k) {
        const double t_data = field.horizon * (k + 1) / nt;
        const double* row = field.values.data() + static_cast<std::size_t>(k + 1) * nx;
        for (int j = 0; j < nx; ++j) {
            const double x = field.grid.x(j);
            detail::Diffs d = detail::diffs(row, j, nx, dx);
            double top = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                double b = spec.agents[static_cast<std::size_t>(i)].drift(t_data, x);
                double sg = spec.agents[static_cast<std::size_t>(i)].vol(t_data, x);
                ell[static_cast<std::size_t>(i)] = b * d.dce + 0.5 * sg * sg * d.d2;
                top = std::max(top, ell[static_cast<std::size_t>(i)]);
            }
            const double theta = field.th(k, j);
            const std::size_t node = static_cast<std::size_t>(k) * nx + j;
            switch (field.mode) {
                case SolveMode::full:
                    for (int i = 0; i < n; ++i)
                        pf.phi[static_cast<std::size_t>(i)][node] =
                            demand(ell[static_cast<std::size_t>(i)] + theta,
                                   cost[static_cast<std::size_t>(i)]);
                    break;
                case SolveMode::limit_short:
                    for (int i = 0; i < n; ++i)
                        pf.phi[static_cast<std::size_t>(i)][node] =
                            cost[static_cast<std::size_t>(i)].alpha_plus *
                            std::max(ell[static_cast<std::size_t>(i)] + theta, 0.0);
                    break;
                case SolveMode::limit_long: {
                    // Pessimists short against alpha_minus; the most optimistic
                    // agents jointly absorb the supply plus every short.
                    double shorted = 0.0;
                    int n_top = 0;
                    for (int i = 0; i < n; ++i) {
                        if (ell[static_cast<std::size_t>(i)] == top) {
                            ++n_top;
                            continue;
                        }
                        double q = cost[static_cast<std::size_t>(i)].alpha_minus *
                                   (ell[static_cast<std::size_t>(i)] + theta);
                        pf.phi[static_cast<std::size_t>(i)][node] = std::min(q, 0.0);
                        shorted += pf.phi[static_cast<std::size_t>(i)][node];
                    }
                    double share = (spec.supply(t_data, x) - shorted) / n_top;
                    for (int i = 0; i < n; ++i)
                        if (ell[static_cast<std::size_t>(i)] == top)
                            pf.phi[static_cast<std::size_t>(i)][node] = share;
                    if (n_top > 1) ++pf.tie_nodes;
                    break;
                }
            }
        }
    }
    return pf;
}

double clearing_residual(const PortfolioField& pf, const MarketSpec& spec) {
    const int nx = pf.grid.nx, nt = pf.grid.nt, n = pf.n_agents;
    double worst = 0.0;
    for (int k = 0; k < nt; ++k) {
        const double t_data = pf.horizon * (k + 1) / nt;
        for (int j = 0; j < nx; ++j) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) total += pf.at(i, k, j);
            worst = std::max(worst, std::abs(total - spec.supply(t_data, pf.grid.x(j))));
        }
    }
    return worst;
}

std::function<std::uint32_t(double, double)> optimal_assignment(const PriceField& field) {
    auto masks = std::make_shared<std::vector<std::uint32_t>>(field.opt_shorts);
    const int nx = field.grid.nx, nt = field.grid.nt;
    const double x_lo = field.grid.x_lo, dx = field.grid.dx(), horizon = field.horizon;
    return [masks, nx, nt, x_lo, dx, horizon](double t, double x) -> std::uint32_t {
        int k = std::clamp(static_cast<int>(std::floor(t / horizon * nt)), 0, nt - 1);
        int j = std::clamp(static_cast<int>(std::lround((x - x_lo) / dx)), 0, nx - 1);
        return (*masks)[static_cast<std::size_t>(k) * nx + j];
    };
}

}  // namespace speq
