#include "speq/market.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace speq {

using nlohmann::json;

const AgentCost& CostStructure::agent(int i) const {
    if (mode == CostMode::heterogeneous) return per_agent.at(static_cast<std::size_t>(i));
    return shared;
}

bool CostStructure::has_beta() const {
    if (mode == CostMode::heterogeneous) {
        for (const auto& c : per_agent)
            if (c.beta_minus > 0.0 || c.beta_plus > 0.0) return true;
        return false;
    }
    return shared.beta_minus > 0.0 || shared.beta_plus > 0.0;
}

static void check_agent_cost(const AgentCost& c, const std::string& who) {
    if (!(c.alpha_minus > 0.0) || !(c.alpha_plus > 0.0))
        throw std::invalid_argument(who + ": alpha must be strictly positive");
    if (!(c.alpha_minus <= c.alpha_plus))
        throw std::invalid_argument(who + ": alpha_minus must not exceed alpha_plus");
    if (c.beta_minus < 0.0 || c.beta_plus < 0.0)
        throw std::invalid_argument(who + ": beta must be nonnegative");
    if (!std::isfinite(c.alpha_minus) || !std::isfinite(c.alpha_plus) ||
        !std::isfinite(c.beta_minus) || !std::isfinite(c.beta_plus))
        throw std::invalid_argument(who + ": non-finite cost parameter");
}

void CostStructure::check(int n_agents) const {
    switch (mode) {
        case CostMode::uniform:
            check_agent_cost(shared, "uniform costs");
            if (shared.beta_minus != 0.0 || shared.beta_plus != 0.0)
                throw std::invalid_argument("uniform costs: beta must be zero");
            break;
        case CostMode::linear_augmented:
            check_agent_cost(shared, "linear-augmented costs");
            break;
        case CostMode::heterogeneous:
            if (static_cast<int>(per_agent.size()) != n_agents)
                throw std::invalid_argument("heterogeneous costs: need one entry per agent");
            for (std::size_t i = 0; i < per_agent.size(); ++i)
                check_agent_cost(per_agent[i], "agent " + std::to_string(i) + " costs");
            break;
    }
}

double MarketSpec::carry_cost(int i, double y) const {
    const AgentCost& c = costs.agent(i);
    if (y >= 0.0) return y * y / (2.0 * c.alpha_plus) + c.beta_plus * y;
    return y * y / (2.0 * c.alpha_minus) - c.beta_minus * y;
}

ValidationReport validate(const MarketSpec& spec, double x_lo, double x_hi) {
    ValidationReport rep;
    auto fail = [&rep](std::string what, double t = 0.0, double x = 0.0) {
        rep.passed = false;
        rep.violations.push_back({std::move(what), t, x});
    };

    if (spec.n() < 1) fail("need at least one agent");
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) fail("horizon must be positive");
    if (!std::isfinite(spec.x0)) fail("x0 must be finite");
    if (!(x_lo < x_hi)) fail("empty domain");
    try {
        spec.costs.check(spec.n());
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }

    for (int i = 0; i < spec.n(); ++i) {
        auto vb = spec.agents[i].vol.bounds(spec.horizon, x_lo, x_hi);
        if (vb.lo < 0.0)
            fail("agent " + std::to_string(i) + " vol negative", vb.lo_t, vb.lo_x);
        else if (!spec.degenerate && vb.lo < kSigmaMin)
            fail("agent " + std::to_string(i) + " vol below sigma_min (flag degenerate for zero vol)",
                 vb.lo_t, vb.lo_x);
    }

    auto sb = spec.supply.bounds(spec.horizon, x_lo, x_hi);
    if (sb.lo < 0.0) fail("supply negative", sb.lo_t, sb.lo_x);

    return rep;
}

void require_valid(const MarketSpec& spec, double x_lo, double x_hi) {
    ValidationReport rep = validate(spec, x_lo, x_hi);
    if (!rep.passed) throw std::invalid_argument("invalid market spec: " + rep.violations.front().what);
}

// ---- JSON config ----

static json field_to_json(const CoefficientField& f) {
    switch (f.kind()) {
        case FieldKind::constant:
            return {{"kind", "constant"}, {"value", f.value()}};
        case FieldKind::affine:
            return {{"kind", "affine"}, {"intercept", f.intercept()}, {"slope", f.slope()}};
        case FieldKind::table:
            return {{"kind", "table"}, {"ts", f.ts()}, {"xs", f.xs()}, {"values", f.samples()}};
    }
    return {};
}

static CoefficientField field_from_json(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument(std::string(what) + ": expected a field descriptor object");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return CoefficientField::constant(j.at("value").get<double>());
    if (kind == "affine")
        return CoefficientField::affine(j.at("intercept").get<double>(), j.at("slope").get<double>());
    if (kind == "table")
        return CoefficientField::table(j.at("ts").get<std::vector<double>>(),
                                       j.at("xs").get<std::vector<double>>(),
                                       j.at("values").get<std::vector<std::vector<double>>>());
    throw std::invalid_argument(std::string(what) + ": unknown field kind '" + kind + "'");
}

static json payoff_to_json(const PayoffField& f) {
    switch (f.kind()) {
        case PayoffKind::constant:
            return {{"kind", "constant"}, {"value", f.value()}};
        case PayoffKind::quadratic:
            return {{"kind", "quadratic"}};
        case PayoffKind::affine:
            return {{"kind", "affine"}, {"intercept", f.intercept()}, {"slope", f.slope()}};
        case PayoffKind::table:
            return {{"kind", "table"}, {"xs", f.xs()}, {"values", f.samples()}};
    }
    return {};
}

static PayoffField payoff_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("payoff: expected a field descriptor object");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return PayoffField::constant(j.at("value").get<double>());
    if (kind == "quadratic") return PayoffField::quadratic();
    if (kind == "affine")
        return PayoffField::affine(j.at("intercept").get<double>(), j.at("slope").get<double>());
    if (kind == "table")
        return PayoffField::table(j.at("xs").get<std::vector<double>>(),
                                  j.at("values").get<std::vector<double>>());
    throw std::invalid_argument("payoff: unknown kind '" + kind + "'");
}

static json cost_entry_to_json(const AgentCost& c) {
    json j = {{"alpha_minus", c.alpha_minus}, {"alpha_plus", c.alpha_plus}};
    if (c.beta_minus != 0.0 || c.beta_plus != 0.0) {
        j["beta_minus"] = c.beta_minus;
        j["beta_plus"] = c.beta_plus;
    }
    return j;
}

static AgentCost cost_entry_from_json(const json& j) {
    AgentCost c;
    c.alpha_minus = j.at("alpha_minus").get<double>();
    c.alpha_plus = j.at("alpha_plus").get<double>();
    c.beta_minus = j.value("beta_minus", 0.0);
    c.beta_plus = j.value("beta_plus", 0.0);
    return c;
}

std::string spec_to_json(const MarketSpec& spec) {
    json j;
    j["agents"] = json::array();
    for (const auto& a : spec.agents)
        j["agents"].push_back({{"drift", field_to_json(a.drift)}, {"vol", field_to_json(a.vol)}});
    json costs;
    switch (spec.costs.mode) {
        case CostMode::uniform:
            costs["mode"] = "uniform";
            costs["alpha_minus"] = spec.costs.shared.alpha_minus;
            costs["alpha_plus"] = spec.costs.shared.alpha_plus;
            break;
        case CostMode::linear_augmented:
            costs["mode"] = "linear-augmented";
            costs["alpha_minus"] = spec.costs.shared.alpha_minus;
            costs["alpha_plus"] = spec.costs.shared.alpha_plus;
            costs["beta_minus"] = spec.costs.shared.beta_minus;
            costs["beta_plus"] = spec.costs.shared.beta_plus;
            break;
        case CostMode::heterogeneous:
            costs["mode"] = "heterogeneous";
            costs["agents"] = json::array();
            for (const auto& c : spec.costs.per_agent) costs["agents"].push_back(cost_entry_to_json(c));
            break;
    }
    j["costs"] = costs;
    j["supply"] = field_to_json(spec.supply);
    j["payoff"] = payoff_to_json(spec.payoff);
    j["T"] = spec.horizon;
    j["x0"] = spec.x0;
    if (spec.degenerate) j["degenerate"] = true;
    return j.dump(2);
}

MarketSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    try {
        MarketSpec spec;
        for (const auto& a : j.at("agents")) {
            BeliefSpec b;
            b.drift = field_from_json(a.at("drift"), "agent drift");
            b.vol = field_from_json(a.at("vol"), "agent vol");
            spec.agents.push_back(std::move(b));
        }
        const json& costs = j.at("costs");
        std::string mode = costs.at("mode").get<std::string>();
        if (mode == "uniform") {
            spec.costs.mode = CostMode::uniform;
            spec.costs.shared = cost_entry_from_json(costs);
        } else if (mode == "linear-augmented") {
            spec.costs.mode = CostMode::linear_augmented;
            spec.costs.shared = cost_entry_from_json(costs);
        } else if (mode == "heterogeneous") {
            spec.costs.mode = CostMode::heterogeneous;
            for (const auto& c : costs.at("agents"))
                spec.costs.per_agent.push_back(cost_entry_from_json(c));
        } else {
            throw std::invalid_argument("unknown cost mode '" + mode + "'");
        }
        spec.supply = field_from_json(j.at("supply"), "supply");
        spec.payoff = payoff_from_json(j.at("payoff"));
        spec.horizon = j.at("T").get<double>();
        spec.x0 = j.at("x0").get<double>();
        spec.degenerate = j.value("degenerate", false);
        spec.costs.check(spec.n());
        return spec;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config error: ") + e.what());
    }
}

MarketSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return spec_from_json(ss.str());
}

std::uint64_t spec_hash(const MarketSpec& spec) {
    std::string s = spec_to_json(spec);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

MarketSpec with_supply_scaled(const MarketSpec& spec, double factor) {
    MarketSpec out = spec;
    out.supply = spec.supply.scaled(factor);
    return out;
}

MarketSpec with_alpha_plus(const MarketSpec& spec, double alpha_plus) {
    MarketSpec out = spec;
    if (out.costs.mode == CostMode::heterogeneous)
        throw std::invalid_argument("alpha_plus sweep needs a shared cost structure");
    out.costs.shared.alpha_plus = alpha_plus;
    out.costs.check(out.n());
    return out;
}

MarketSpec with_alpha_minus(const MarketSpec& spec, double alpha_minus) {
    MarketSpec out = spec;
    if (out.costs.mode == CostMode::heterogeneous)
        throw std::invalid_argument("alpha_minus sweep needs a shared cost structure");
    out.costs.shared.alpha_minus = alpha_minus;
    out.costs.check(out.n());
    return out;
}

MarketSpec with_common_scale(const MarketSpec& spec, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("common scale must be positive");
    MarketSpec out = spec;
    auto scale = [lambda](AgentCost& c) {
        c.alpha_minus *= lambda;
        c.alpha_plus *= lambda;
    };
    scale(out.costs.shared);
    for (auto& c : out.costs.per_agent) scale(c);
    out.supply = spec.supply.scaled(lambda);
    return out;
}

}  // namespace speq
