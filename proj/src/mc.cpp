#include "speq/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "speq/clearing.hpp"
#include "speq/rng.hpp"

namespace speq {

namespace {

struct McPlan {
    long long nsteps = 0;
    double dt = 0.0;
    double lo = 0.0, hi = 0.0;  // coefficient-lookup interval
};

McPlan plan_for(const MarketSpec& spec, const SimConfig& cfg) {
    McPlan p;
    double dt0 = cfg.dt > 0.0 ? cfg.dt : spec.horizon / 1000.0;
    p.nsteps = std::max(1ll, std::llround(spec.horizon / dt0));
    if (std::abs(p.nsteps * dt0 - spec.horizon) > 1e-9 * std::max(1.0, spec.horizon))
        throw std::invalid_argument("mc: dt must divide the horizon");
    p.dt = spec.horizon / static_cast<double>(p.nsteps);
    if (cfg.clamp_lo == 0.0 && cfg.clamp_hi == 0.0) {
        GridSpec g = make_grid(spec);
        p.lo = g.x_lo;
        p.hi = g.x_hi;
    } else {
        if (!(cfg.clamp_lo < cfg.clamp_hi))
            throw std::invalid_argument("mc: clamp interval is empty");
        p.lo = cfg.clamp_lo;
        p.hi = cfg.clamp_hi;
    }
    return p;
}

double reflect(double x, const McPlan& p, bool& clamped) {
    if (x >= p.lo && x <= p.hi) return x;
    clamped = true;
    double y = x < p.lo ? p.lo + (p.lo - x) : p.hi - (x - p.hi);
    return std::clamp(y, p.lo, p.hi);
}

// Runs per_path(stream_index, z_sign, clamped_flag) over all paths with
// deterministic ordering: values land in a per-path slot and are reduced
// serially, so thread count cannot change the estimate.
template <class PerPath>
ValueEstimate run_paths(const SimConfig& cfg, PerPath&& per_path) {
    if (cfg.n_paths < 2) throw std::invalid_argument("mc: need at least 2 paths");
    if (cfg.antithetic && (cfg.n_paths % 2) != 0)
        throw std::invalid_argument("mc: antithetic pairing needs an even path count");
    const std::int64_t n = cfg.n_paths;
    std::vector<double> vals(static_cast<std::size_t>(n));
    std::vector<unsigned char> touched(static_cast<std::size_t>(n), 0);

    auto simulate = [&](std::int64_t pth) {
        std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(pth / 2)
                                              : static_cast<std::uint64_t>(pth);
        double sign = (cfg.antithetic && (pth % 2) != 0) ? -1.0 : 1.0;
        bool clamped = false;
        vals[static_cast<std::size_t>(pth)] = per_path(stream, sign, clamped);
        touched[static_cast<std::size_t>(pth)] = clamped ? 1 : 0;
    };

    if (cfg.exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (std::int64_t pth = 0; pth < n; ++pth) simulate(pth);
#else
        for (std::int64_t pth = 0; pth < n; ++pth) simulate(pth);
#endif
    } else {
        for (std::int64_t pth = 0; pth < n; ++pth) simulate(pth);
    }

    ValueEstimate est;
    est.n_paths = n;
    for (unsigned char c : touched) est.clamped_paths += c;
    if (static_cast<double>(est.clamped_paths) > cfg.abort_clamp_fraction * static_cast<double>(n))
        throw NumericError("mc: " + std::to_string(est.clamped_paths) + " of " +
                           std::to_string(n) + " paths left the coefficient domain");

    const std::int64_t units = cfg.antithetic ? n / 2 : n;
    auto unit = [&](std::int64_t u) {
        return cfg.antithetic
                   ? 0.5 * (vals[static_cast<std::size_t>(2 * u)] +
                            vals[static_cast<std::size_t>(2 * u + 1)])
                   : vals[static_cast<std::size_t>(u)];
    };
    double sum = 0.0;
    for (std::int64_t u = 0; u < units; ++u) sum += unit(u);
    est.mean = sum / static_cast<double>(units);
    if (units > 1) {
        double ss = 0.0;
        for (std::int64_t u = 0; u < units; ++u) {
            double d = unit(u) - est.mean;
            ss += d * d;
        }
        est.std_error = std::sqrt(ss / static_cast<double>(units - 1) /
                                  static_cast<double>(units));
    }
    return est;
}

}  // namespace

ValueEstimate control_value(const MarketSpec& spec,
                            const std::function<std::uint32_t(double, double)>& assignment,
                            const SimConfig& cfg) {
    if (!assignment) throw std::invalid_argument("control_value: empty assignment");
    if (spec.costs.has_beta())
        throw std::invalid_argument("control_value: defined for quadratic costs only");
    const McPlan plan = plan_for(spec, cfg);
    const std::uint32_t full = (1u << spec.n()) - 1u;
    return run_paths(cfg, [&](std::uint64_t stream, double sign, bool& clamped) {
        double x = spec.x0;
        double cost = 0.0;
        for (long long m = 0; m < plan.nsteps; ++m) {
            double t = plan.dt * static_cast<double>(m);
            double x_look = reflect(x, plan, clamped);
            std::uint32_t mask = assignment(t, x) & full;
            SubsetCoefficients g = subset_coefficients(mask, t, x_look, spec);
            cost += g.kappa * plan.dt;
            double z = sign * rng::normal(cfg.seed, stream, static_cast<std::uint64_t>(m));
            x += g.mu * plan.dt + std::sqrt(g.sigma_sq * plan.dt) * z;
        }
        return spec.payoff(x) - cost;
    });
}

ValueEstimate strategy_payoff(const MarketSpec& spec, const PriceField& field,
                              const std::function<double(double, double)>& position,
                              int agent, const SimConfig& cfg) {
    if (!position) throw std::invalid_argument("strategy_payoff: empty position rule");
    if (agent < 0 || agent >= spec.n())
        throw std::invalid_argument("strategy_payoff: agent index out of range");
    const McPlan plan = plan_for(spec, cfg);
    const BeliefSpec& belief = spec.agents[static_cast<std::size_t>(agent)];
    return run_paths(cfg, [&](std::uint64_t stream, double sign, bool& clamped) {
        double x = spec.x0;
        double gain = 0.0;
        double p_here = field.at(0.0, x);
        for (long long m = 0; m < plan.nsteps; ++m) {
            double t = plan.dt * static_cast<double>(m);
            double x_look = reflect(x, plan, clamped);
            double pos = position(t, x);
            double b = belief.drift(t, x_look);
            double sg = belief.vol(t, x_look);
            double z = sign * rng::normal(cfg.seed, stream, static_cast<std::uint64_t>(m));
            x += b * plan.dt + sg * std::sqrt(plan.dt) * z;
            double t_next = plan.dt * static_cast<double>(m + 1);
            double p_next = field.at(t_next, x);
            gain += pos * (p_next - p_here) - spec.carry_cost(agent, pos) * plan.dt;
            p_here = p_next;
        }
        return gain;
    });
}

ValueEstimate belief_expectation(const MarketSpec& spec, int agent, const SimConfig& cfg) {
    if (agent < 0 || agent >= spec.n())
        throw std::invalid_argument("belief_expectation: agent index out of range");
    const McPlan plan = plan_for(spec, cfg);
    const BeliefSpec& belief = spec.agents[static_cast<std::size_t>(agent)];
    return run_paths(cfg, [&](std::uint64_t stream, double sign, bool& clamped) {
        double x = spec.x0;
        for (long long m = 0; m < plan.nsteps; ++m) {
            double t = plan.dt * static_cast<double>(m);
            double x_look = reflect(x, plan, clamped);
            double b = belief.drift(t, x_look);
            double sg = belief.vol(t, x_look);
            double z = sign * rng::normal(cfg.seed, stream, static_cast<std::uint64_t>(m));
            x += b * plan.dt + sg * std::sqrt(plan.dt) * z;
        }
        return spec.payoff(x);
    });
}

}  // namespace speq
