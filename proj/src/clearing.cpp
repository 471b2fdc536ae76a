#include "speq/clearing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace speq {

double demand(double z, const AgentCost& c) {
    double longs = z - c.beta_plus;
    double shorts = z + c.beta_minus;
    return c.alpha_plus * (longs > 0.0 ? longs : 0.0) +
           c.alpha_minus * (shorts < 0.0 ? shorts : 0.0);
}

namespace {

// Optional acceptance-suite fault injection: additive bias on the enumerated
// Hamiltonian. Off unless the environment variable is set.
double perturb_hamiltonian() {
    static const double eps = [] {
        const char* v = std::getenv("SPEQ_TEST_PERTURB_H");
        return v ? std::atof(v) : 0.0;
    }();
    return eps;
}

// true if mask a precedes mask b as a sorted index list.
bool lex_less(std::uint32_t a, std::uint32_t b) {
    while (a != 0 || b != 0) {
        if (a == 0) return true;
        if (b == 0) return false;
        int ia = std::countr_zero(a), ib = std::countr_zero(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return false;
}

struct Resolved {
    int n = 0;
    const MarketSpec* spec = nullptr;
    std::vector<AgentCost> cost;
    bool beta = false;

    explicit Resolved(const MarketSpec& s) : n(s.n()), spec(&s) {
        cost.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) cost.push_back(s.costs.agent(i));
        beta = s.costs.has_beta();
    }
};

std::vector<double> demands_at(const Resolved& r, std::span<const double> ell, double theta) {
    std::vector<double> d(static_cast<std::size_t>(r.n));
    for (int i = 0; i < r.n; ++i) d[static_cast<std::size_t>(i)] = demand(ell[static_cast<std::size_t>(i)] + theta, r.cost[static_cast<std::size_t>(i)]);
    return d;
}

Partition partition_at(const Resolved& r, std::span<const double> ell, double theta) {
    Partition p;
    for (int i = 0; i < r.n; ++i) {
        double z = ell[static_cast<std::size_t>(i)] + theta;
        const AgentCost& c = r.cost[static_cast<std::size_t>(i)];
        if (z < -c.beta_minus)
            p.shorts |= 1u << i;
        else if (z > c.beta_plus)
            p.longs |= 1u << i;
        else if (r.beta)
            p.flat |= 1u << i;
        else
            p.longs |= 1u << i;  // zero valuation holds >= 0 by convention
    }
    return p;
}

// Best branch-consistent disjoint pair (shorts, longs) != (0, 0): each pair's
// linear clearing equation gives a candidate theta; a pair is admissible when
// every agent sits on (or within tolerance of) the branch its placement
// claims at that theta. The admissible maximum is the clearing root when the
// root is unique, and the lower endpoint of the root interval otherwise.
struct PairBest {
    double value = -std::numeric_limits<double>::infinity();
    std::uint32_t shorts = 0, longs = 0;
    bool found = false;
};

PairBest best_consistent_pair(const Resolved& r, const LocalValuations& vals) {
    double scale = 1.0 + std::abs(vals.supply);
    for (int i = 0; i < r.n; ++i) {
        scale = std::max(scale, std::abs(vals.ell[static_cast<std::size_t>(i)]));
        scale = std::max(scale, r.cost[static_cast<std::size_t>(i)].beta_minus);
        scale = std::max(scale, r.cost[static_cast<std::size_t>(i)].beta_plus);
    }
    const double tol = 1e-9 * scale;

    PairBest best;
    std::vector<int> place(static_cast<std::size_t>(r.n), 0);  // 0 flat, 1 short, 2 long
    const long total = static_cast<long>(std::pow(3.0, r.n) + 0.5);
    for (long code = 1; code < total; ++code) {
        long c = code;
        std::uint32_t I = 0, J = 0;
        for (int i = 0; i < r.n; ++i) {
            place[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
            c /= 3;
            if (place[static_cast<std::size_t>(i)] == 1) I |= 1u << i;
            if (place[static_cast<std::size_t>(i)] == 2) J |= 1u << i;
        }
        double num = -vals.supply, den = 0.0;
        for (int i = 0; i < r.n; ++i) {
            const AgentCost& ac = r.cost[static_cast<std::size_t>(i)];
            double e = vals.ell[static_cast<std::size_t>(i)];
            if (place[static_cast<std::size_t>(i)] == 1) {
                num += ac.alpha_minus * (e + ac.beta_minus);
                den += ac.alpha_minus;
            } else if (place[static_cast<std::size_t>(i)] == 2) {
                num += ac.alpha_plus * (e - ac.beta_plus);
                den += ac.alpha_plus;
            }
        }
        double value = num / den;
        double theta = -value;
        bool ok = true;
        for (int i = 0; i < r.n && ok; ++i) {
            const AgentCost& ac = r.cost[static_cast<std::size_t>(i)];
            double z = vals.ell[static_cast<std::size_t>(i)] + theta;
            if (place[static_cast<std::size_t>(i)] == 1)
                ok = z <= -ac.beta_minus + tol;
            else if (place[static_cast<std::size_t>(i)] == 2)
                ok = z >= ac.beta_plus - tol;
            else
                ok = z >= -ac.beta_minus - tol && z <= ac.beta_plus + tol;
        }
        if (!ok) continue;
        if (!best.found || value > best.value ||
            (value == best.value &&
             (lex_less(I, best.shorts) || (I == best.shorts && lex_less(J, best.longs))))) {
            best = {value, I, J, true};
        }
    }
    return best;
}

ClearingResult finish(const Resolved& r, const LocalValuations& vals, double t, double x,
                      double hamiltonian, bool from_pair, std::uint32_t pair_shorts,
                      std::uint32_t pair_longs) {
    ClearingResult res;
    res.hamiltonian = hamiltonian;
    res.theta = -hamiltonian;
    res.demands = demands_at(r, vals.ell, res.theta);
    if (from_pair) {
        res.optimizer = subset_pair_coefficients(pair_shorts, pair_longs, t, x, *r.spec);
    } else {
        Partition p = partition_at(r, vals.ell, res.theta);
        res.optimizer = subset_coefficients(p.shorts, t, x, *r.spec);
    }
    return res;
}

}  // namespace

SubsetCoefficients subset_coefficients(std::uint32_t shorts, double t, double x,
                                       const MarketSpec& spec) {
    const int n = spec.n();
    if (n < 1 || n > 31) throw std::invalid_argument("subset_coefficients: bad agent count");
    double num_mu = 0.0, num_sig = 0.0, den = 0.0;
    if (spec.costs.mode != CostMode::heterogeneous) {
        // Shared costs: the denominator is a pure group count expression.
        const AgentCost& c = spec.costs.shared;
        int n_short = std::popcount(shorts & ((n < 32 ? (1u << n) : 0u) - 1u));
        den = n_short * c.alpha_minus + (n - n_short) * c.alpha_plus;
        for (int i = 0; i < n; ++i) {
            double w = (shorts >> i) & 1u ? c.alpha_minus : c.alpha_plus;
            num_mu += w * spec.agents[static_cast<std::size_t>(i)].drift(t, x);
            double sg = spec.agents[static_cast<std::size_t>(i)].vol(t, x);
            num_sig += w * sg * sg;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const AgentCost& c = spec.costs.agent(i);
            double w = (shorts >> i) & 1u ? c.alpha_minus : c.alpha_plus;
            den += w;
            num_mu += w * spec.agents[static_cast<std::size_t>(i)].drift(t, x);
            double sg = spec.agents[static_cast<std::size_t>(i)].vol(t, x);
            num_sig += w * sg * sg;
        }
    }
    SubsetCoefficients sc;
    sc.mu = num_mu / den;
    sc.sigma_sq = num_sig / den;
    sc.kappa = spec.supply(t, x) / den;
    sc.shorts = shorts;
    return sc;
}

SubsetCoefficients subset_pair_coefficients(std::uint32_t shorts, std::uint32_t longs,
                                            double t, double x, const MarketSpec& spec) {
    if ((shorts & longs) != 0u)
        throw std::invalid_argument("subset_pair_coefficients: groups overlap");
    if (shorts == 0u && longs == 0u)
        throw std::invalid_argument("subset_pair_coefficients: both groups empty");
    const int n = spec.n();
    double num_mu = 0.0, num_sig = 0.0, den = 0.0, kappa_num = spec.supply(t, x);
    for (int i = 0; i < n; ++i) {
        const AgentCost& c = spec.costs.agent(i);
        bool in_s = (shorts >> i) & 1u, in_l = (longs >> i) & 1u;
        if (!in_s && !in_l) continue;
        double w = in_s ? c.alpha_minus : c.alpha_plus;
        den += w;
        num_mu += w * spec.agents[static_cast<std::size_t>(i)].drift(t, x);
        double sg = spec.agents[static_cast<std::size_t>(i)].vol(t, x);
        num_sig += w * sg * sg;
        if (in_s)
            kappa_num -= c.alpha_minus * c.beta_minus;
        else
            kappa_num += c.alpha_plus * c.beta_plus;
    }
    SubsetCoefficients sc;
    sc.mu = num_mu / den;
    sc.sigma_sq = num_sig / den;
    sc.kappa = kappa_num / den;
    sc.shorts = shorts;
    sc.longs = longs;
    return sc;
}

ClearingResult clear_enumerate(const LocalValuations& vals, double t, double x,
                               const MarketSpec& spec, int cap) {
    Resolved r(spec);
    if (static_cast<int>(vals.ell.size()) != r.n)
        throw std::invalid_argument("clear_enumerate: ell size != agent count");
    if (r.n > cap)
        throw std::invalid_argument(
            "clear_enumerate: agent count exceeds the enumeration cap, use clear_root");

    if (!r.beta) {
        double best = -std::numeric_limits<double>::infinity();
        const std::uint32_t top = 1u << r.n;
        for (std::uint32_t mask = 0; mask < top; ++mask) {
            double num = -vals.supply, den = 0.0;
            for (int i = 0; i < r.n; ++i) {
                const AgentCost& c = r.cost[static_cast<std::size_t>(i)];
                double w = (mask >> i) & 1u ? c.alpha_minus : c.alpha_plus;
                num += w * vals.ell[static_cast<std::size_t>(i)];
                den += w;
            }
            best = std::max(best, num / den);
        }
        return finish(r, vals, t, x, best + perturb_hamiltonian(), false, 0, 0);
    }

    PairBest best = best_consistent_pair(r, vals);
    if (!best.found)
        throw std::runtime_error("clear_enumerate: no branch-consistent assignment");
    return finish(r, vals, t, x, best.value + perturb_hamiltonian(), true, best.shorts,
                  best.longs);
}

ClearingResult clear_root(const LocalValuations& vals, double t, double x,
                          const MarketSpec& spec) {
    Resolved r(spec);
    if (static_cast<int>(vals.ell.size()) != r.n)
        throw std::invalid_argument("clear_root: ell size != agent count");
    if (r.n > 31) throw std::invalid_argument("clear_root: too many agents");

    // Kink locations of theta -> sum_i demand(ell_i + theta).
    std::vector<double> bp;
    bp.reserve(2 * static_cast<std::size_t>(r.n));
    for (int i = 0; i < r.n; ++i) {
        const AgentCost& c = r.cost[static_cast<std::size_t>(i)];
        double e = vals.ell[static_cast<std::size_t>(i)];
        bp.push_back(-c.beta_minus - e);
        bp.push_back(c.beta_plus - e);
    }
    std::sort(bp.begin(), bp.end());

    std::vector<double> gs(bp.size());
    for (std::size_t k = 0; k < bp.size(); ++k) {
        double g = 0.0;
        for (int i = 0; i < r.n; ++i)
            g += demand(vals.ell[static_cast<std::size_t>(i)] + bp[k], r.cost[static_cast<std::size_t>(i)]);
        gs[k] = g;
    }
    const double target = vals.supply;

    auto solved = [&](double theta) {
        ClearingResult res;
        if (r.beta) {
            // The strict sign pair gives the optimizer; it is nonempty at any
            // unique root (some agent is strictly active on the binding side).
            Partition p = partition_at(r, vals.ell, theta);
            if (p.shorts == 0u && p.longs == 0u) {
                // Every agent sits inside its closed dead zone, so the root
                // set is an interval touching theta; defer to the tie-break.
                return clear_enumerate(vals, t, x, spec);
            }
            res = finish(r, vals, t, x, -theta, true, p.shorts, p.longs);
        } else {
            res = finish(r, vals, t, x, -theta, false, 0, 0);
        }
        return res;
    };

    if (gs.front() >= target) {
        double slope = 0.0;
        for (int i = 0; i < r.n; ++i) slope += r.cost[static_cast<std::size_t>(i)].alpha_minus;
        return solved(bp.front() - (gs.front() - target) / slope);
    }

    // Rounding in the aggregate can hide a dead zone plateau sitting exactly
    // at the target, so flat segments are tested with a small absolute slack
    // before the crossing test.
    const double flat_eps = 1e-10 * (1.0 + std::abs(target));
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        if (bp[k] == bp[k + 1]) continue;
        // Active slopes on the open segment, classified exactly by kink order.
        double slope = 0.0;
        for (int i = 0; i < r.n; ++i) {
            const AgentCost& c = r.cost[static_cast<std::size_t>(i)];
            double e = vals.ell[static_cast<std::size_t>(i)];
            if (-c.beta_minus - e >= bp[k + 1]) slope += c.alpha_minus;
            if (c.beta_plus - e <= bp[k]) slope += c.alpha_plus;
        }
        if (slope == 0.0) {
            // Flat segment at the target: the root set is an interval; the
            // enumeration over consistent assignments is the tie-break.
            if (std::abs(gs[k] - target) <= flat_eps) return clear_enumerate(vals, t, x, spec);
            continue;
        }
        if (gs[k + 1] < target) continue;
        return solved(bp[k] + (target - gs[k]) / slope);
    }

    double slope = 0.0;
    for (int i = 0; i < r.n; ++i) slope += r.cost[static_cast<std::size_t>(i)].alpha_plus;
    return solved(bp.back() + (target - gs.back()) / slope);
}

Partition optimal_partition(std::span<const double> ell, double theta, const MarketSpec& spec) {
    Resolved r(spec);
    if (static_cast<int>(ell.size()) != r.n)
        throw std::invalid_argument("optimal_partition: ell size != agent count");
    return partition_at(r, ell, theta);
}

}  // namespace speq
