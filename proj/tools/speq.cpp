#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "speq/csv.hpp"
#include "speq/equilibrium.hpp"
#include "speq/hjb.hpp"
#include "speq/mc.hpp"
#include "speq/static_market.hpp"
#include "speq/verify.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitBadConfig = 2;
constexpr int kExitCfl = 3;
constexpr int kExitNumeric = 4;

struct GridFlags {
    int nx = 801;
    int nt = 0;  // 0 = CFL choice
    double width_multiplier = 1.0;
};

struct McFlags {
    std::int64_t paths = 100000;
    double dt = 0.0;
    std::uint64_t seed = 42;
};

speq::SolveMode mode_of(const std::string& name) {
    if (name == "full" || name == "zero-vol") return speq::SolveMode::full;
    if (name == "limit-long") return speq::SolveMode::limit_long;
    if (name == "limit-short") return speq::SolveMode::limit_short;
    throw std::invalid_argument("unknown mode: " + name);
}

speq::PriceField run_solve(const speq::MarketSpec& spec, const speq::GridSpec& grid,
                           const std::string& mode_name) {
    if (mode_name == "zero-vol") return speq::solve_zero_vol(spec, grid);
    return speq::solve_hjb(spec, grid, mode_of(mode_name));
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

/// Static positions consistent with the solve mode's cost limit.
std::vector<double> static_positions(const std::vector<double>& e, double p,
                                     const speq::MarketSpec& spec,
                                     const std::string& mode_name) {
    const int n = spec.n();
    const double T = spec.horizon;
    std::vector<double> q(static_cast<std::size_t>(n), 0.0);
    if (mode_name == "full") {
        for (int i = 0; i < n; ++i)
            q[static_cast<std::size_t>(i)] =
                speq::demand(e[static_cast<std::size_t>(i)] - p, spec.costs.agent(i)) / T;
    } else if (mode_name == "limit-short" || mode_name == "zero-vol") {
        for (int i = 0; i < n; ++i)
            q[static_cast<std::size_t>(i)] =
                spec.costs.agent(i).alpha_plus *
                std::max(e[static_cast<std::size_t>(i)] - p, 0.0) / T;
    } else {  // limit-long: shorts pay alpha_minus, the top agents absorb the rest
        double top = *std::max_element(e.begin(), e.end());
        double shorted = 0.0;
        int n_top = 0;
        for (int i = 0; i < n; ++i) {
            if (e[static_cast<std::size_t>(i)] == top) {
                ++n_top;
                continue;
            }
            q[static_cast<std::size_t>(i)] =
                spec.costs.agent(i).alpha_minus * (e[static_cast<std::size_t>(i)] - p) / T;
            shorted += q[static_cast<std::size_t>(i)];
        }
        double share = (spec.supply(0.0, spec.x0) - shorted) / n_top;
        for (int i = 0; i < n; ++i)
            if (e[static_cast<std::size_t>(i)] == top) q[static_cast<std::size_t>(i)] = share;
    }
    return q;
}

double static_price_for_mode(const std::vector<double>& e, const speq::MarketSpec& spec,
                             const std::string& mode_name) {
    if (mode_name == "full") return speq::static_price(e, spec).p_sta;
    speq::StaticLimits lim = speq::static_limits(e, spec);
    if (mode_name == "limit-long") return lim.p_limit_long;
    return lim.p_limit_short;  // limit-short and zero-vol
}

void write_summary(const std::filesystem::path& dir, const json& summary) {
    {
        std::ofstream out(dir / "summary.json", std::ios::binary);
        out << summary.dump(2) << "\n";
    }
    // The CSV twin carries every result number but no timings, so reruns with
    // identical inputs produce byte-identical artifacts.
    speq::CsvWriter csv((dir / "summary.csv").string());
    std::vector<std::string> head = {"metric", "value"};
    csv.header(head);
    for (const auto& [key, value] : summary.items()) {
        if (key == "timings" || key == "warnings" || key == "command") continue;
        if (value.is_number()) {
            std::vector<std::string> cells = {
                key, speq::format_double(value.get<double>())};
            csv.line(cells);
        } else if (value.is_string()) {
            std::vector<std::string> cells = {key, value.get<std::string>()};
            csv.line(cells);
        }
    }
}

int cmd_solve(const std::string& config, const GridFlags& gf, const std::string& mode_name,
              bool with_static, bool mc_check, const McFlags& mf, const std::string& out_dir) {
    speq::MarketSpec spec = speq::load_spec(config);
    speq::GridSpec grid = speq::make_grid(spec, gf.nx, gf.width_multiplier, 0.9, gf.nt);

    auto t0 = Clock::now();
    speq::PriceField field = run_solve(spec, grid, mode_name);
    double solve_s = std::chrono::duration<double>(Clock::now() - t0).count();
    speq::PortfolioField pf = speq::portfolios(field, spec);
    double residual = speq::clearing_residual(pf, spec);

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    {
        speq::CsvWriter csv((dir / "solve.csv").string());
        std::vector<std::string> head = {"t", "x", "v", "theta"};
        for (int i = 0; i < spec.n(); ++i) head.push_back("phi_" + std::to_string(i));
        csv.header(head);
        std::vector<double> row(head.size());
        for (int k = 0; k < grid.nt; ++k) {
            for (int j = 0; j < grid.nx; ++j) {
                row[0] = field.t(k);
                row[1] = grid.x(j);
                row[2] = field.v(k, j);
                row[3] = field.th(k, j);
                for (int i = 0; i < spec.n(); ++i) row[4 + static_cast<std::size_t>(i)] = pf.at(i, k, j);
                csv.row(row);
            }
        }
    }

    json summary;
    summary["command"] = "solve";
    summary["spec_hash"] = hash_hex(speq::spec_hash(spec));
    summary["mode"] = mode_name;
    summary["grid_nx"] = grid.nx;
    summary["grid_nt"] = grid.nt;
    summary["x_lo"] = grid.x_lo;
    summary["x_hi"] = grid.x_hi;
    summary["p_dyn"] = field.price(spec.x0);
    summary["residual"] = residual;
    summary["timings"] = {{"solve_s", solve_s}};
    summary["warnings"] = json::array();
    if (pf.tie_nodes > 0)
        summary["warnings"].push_back("limit-long ties split pro rata at " +
                                      std::to_string(pf.tie_nodes) + " nodes");

    if (with_static) {
        std::vector<double> e = speq::expectations(spec, grid);
        double p_sta = static_price_for_mode(e, spec, mode_name);
        std::vector<double> q = static_positions(e, p_sta, spec, mode_name);
        summary["p_sta"] = p_sta;
        summary["gap"] = p_sta - summary["p_dyn"].get<double>();
        speq::CsvWriter csv((dir / "static.csv").string());
        std::vector<std::string> head = {"agent", "e", "q"};
        csv.header(head);
        for (int i = 0; i < spec.n(); ++i) {
            std::vector<double> row = {static_cast<double>(i), e[static_cast<std::size_t>(i)],
                                       q[static_cast<std::size_t>(i)]};
            csv.row(row);
        }
    }

    if (mc_check) {
        if (mode_name != "full")
            throw std::invalid_argument("--mc-check needs --mode full (planner replay)");
        speq::SimConfig cfg;
        cfg.n_paths = mf.paths;
        cfg.dt = mf.dt;
        cfg.seed = mf.seed;
        auto t1 = Clock::now();
        speq::ValueEstimate est =
            speq::control_value(spec, speq::optimal_assignment(field), cfg);
        summary["timings"]["mc_s"] = std::chrono::duration<double>(Clock::now() - t1).count();
        summary["mc_value"] = est.mean;
        summary["mc_se"] = est.std_error;
        summary["mc_gap"] = std::abs(est.mean - summary["p_dyn"].get<double>());
    }

    write_summary(dir, summary);
    std::cout << "p_dyn " << speq::format_double(summary["p_dyn"].get<double>());
    if (with_static)
        std::cout << "  p_sta " << speq::format_double(summary["p_sta"].get<double>())
                  << "  gap " << speq::format_double(summary["gap"].get<double>());
    std::cout << "\n";
    return 0;
}

int cmd_sweep(const std::string& config, const GridFlags& gf, const std::string& mode_name,
              const std::string& param, const std::vector<double>& values,
              const std::string& out_dir) {
    speq::MarketSpec base = speq::load_spec(config);
    speq::GridSpec grid = speq::make_grid(base, gf.nx, gf.width_multiplier, 0.9, gf.nt);

    auto modified = [&](double v) -> speq::MarketSpec {
        if (param == "s-scale") return speq::with_supply_scaled(base, v);
        if (param == "alpha-plus") return speq::with_alpha_plus(base, v);
        if (param == "alpha-minus") return speq::with_alpha_minus(base, v);
        if (param == "common-scale") return speq::with_common_scale(base, v);
        throw std::invalid_argument("unknown sweep parameter: " + param);
    };

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    speq::CsvWriter csv((dir / "sweep.csv").string());
    std::vector<std::string> head = {"param", "p_dyn", "p_sta", "gap"};
    csv.header(head);

    auto t0 = Clock::now();
    json rows = json::array();
    for (double v : values) {
        speq::MarketSpec spec = modified(v);
        speq::PriceField field = run_solve(spec, grid, mode_name);
        double p_dyn = field.price(spec.x0);
        std::vector<double> e = speq::expectations(spec, grid);
        double p_sta = static_price_for_mode(e, spec, mode_name);
        std::vector<double> row = {v, p_dyn, p_sta, p_sta - p_dyn};
        csv.row(row);
        rows.push_back({{"param", v}, {"p_dyn", p_dyn}, {"p_sta", p_sta}});
    }

    json summary;
    summary["command"] = "sweep";
    summary["spec_hash"] = hash_hex(speq::spec_hash(base));
    summary["mode"] = mode_name;
    summary["parameter"] = param;
    summary["points"] = rows;
    summary["timings"] = {{"sweep_s", std::chrono::duration<double>(Clock::now() - t0).count()}};
    {
        std::ofstream out(dir / "summary.json", std::ios::binary);
        out << summary.dump(2) << "\n";
    }
    std::cout << "sweep " << param << ": " << values.size() << " points\n";
    return 0;
}

int cmd_verify(const std::vector<int>& only) {
    speq::VerifyOptions opts;
    opts.only = only;
    std::vector<speq::CriterionResult> results = speq::run_acceptance(opts);
    int failures = speq::print_report(results, std::cout);
    return failures > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium prices for a speculative market with costly positions"};
    app.require_subcommand(1);

    GridFlags gf;
    McFlags mf;
    std::string mode_name = "full";
    std::string out_dir = "out";
    std::string config;
    bool with_static = false;
    bool mc_check = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("config", config, "market config (JSON)")->required();
        cmd->add_option("--grid-nx", gf.nx, "spatial nodes");
        cmd->add_option("--grid-nt", gf.nt, "time steps (0 = CFL rule)");
        cmd->add_option("--domain-width-multiplier", gf.width_multiplier,
                        "scale on the default domain half-width");
        cmd->add_option("--mode", mode_name,
                        "full | limit-long | limit-short | zero-vol");
        cmd->add_option("--out-dir", out_dir, "artifact directory");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the dynamic equilibrium PDE");
    add_common(solve, true);
    solve->add_flag("--static", with_static, "also compute the buy-and-hold equilibrium");
    solve->add_flag("--mc-check", mc_check, "Monte Carlo cross-check of the solved value");
    solve->add_option("--paths", mf.paths, "simulation paths");
    solve->add_option("--dt", mf.dt, "simulation step (0 = T/1000)");
    solve->add_option("--seed", mf.seed, "simulation seed");

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep of p_dyn / p_sta");
    add_common(sweep, true);
    std::string param;
    std::vector<double> values;
    sweep->add_option("--param", param, "s-scale | alpha-plus | alpha-minus | common-scale")
        ->required();
    sweep->add_option("--values", values, "sweep values")->required()->delimiter(',');

    CLI::App* verify = app.add_subcommand("verify", "run the acceptance checklist");
    std::vector<int> only;
    verify->add_option("--only", only, "criterion ids to run")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(config, gf, mode_name, with_static, mc_check, mf, out_dir);
        if (sweep->parsed()) return cmd_sweep(config, gf, mode_name, param, values, out_dir);
        return cmd_verify(only);
    } catch (const speq::CflError& e) {
        std::cerr << "CFL violation: " << e.what() << "\n";
        return kExitCfl;
    } catch (const speq::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
