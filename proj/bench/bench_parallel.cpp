// Timing comparison: serial reference sweep vs the OpenMP node loop.
// Both paths must produce bitwise-identical surfaces; this binary reports
// wall time and verifies the match before printing speedup.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "speq/hjb.hpp"
#include "speq/market.hpp"

using Clock = std::chrono::steady_clock;

namespace {

speq::MarketSpec bench_spec() {
    speq::MarketSpec spec;
    spec.agents = {
        {speq::CoefficientField::constant(1.0), speq::CoefficientField::constant(1.0)},
        {speq::CoefficientField::constant(0.5), speq::CoefficientField::constant(0.8)},
        {speq::CoefficientField::constant(-0.5), speq::CoefficientField::constant(1.2)},
        {speq::CoefficientField::constant(0.0), speq::CoefficientField::constant(1.0)},
    };
    spec.costs.mode = speq::CostMode::heterogeneous;
    spec.costs.per_agent = {
        {0.5, 1.0, 0.0, 0.0},
        {0.8, 1.2, 0.0, 0.0},
        {1.0, 2.0, 0.0, 0.0},
        {0.6, 0.9, 0.0, 0.0},
    };
    spec.supply = speq::CoefficientField::constant(1.0);
    spec.payoff = speq::PayoffField::quadratic();
    spec.horizon = 1.0;
    spec.x0 = 0.0;
    return spec;
}

double time_solve(const speq::MarketSpec& spec, const speq::GridSpec& grid,
                  speq::Exec exec, speq::PriceField& out) {
    auto t0 = Clock::now();
    out = speq::solve_hjb(spec, grid, speq::SolveMode::full, exec);
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int nx = 601;
    if (argc > 1) nx = std::atoi(argv[1]);

    speq::MarketSpec spec = bench_spec();
    speq::GridSpec grid = speq::make_grid(spec, nx);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("grid %d x %d, 4 agents (16 subsets per node), %d thread(s)\n",
                grid.nx, grid.nt, threads);

    speq::PriceField serial, parallel;
    // Warm-up pass so first-touch page faults do not bias the serial number.
    time_solve(spec, grid, speq::Exec::serial, serial);

    double ts = time_solve(spec, grid, speq::Exec::serial, serial);
    double tp = time_solve(spec, grid, speq::Exec::parallel, parallel);

    bool match = serial.values == parallel.values && serial.theta == parallel.theta;
    std::printf("serial   %.3f s\n", ts);
    std::printf("parallel %.3f s\n", tp);
    std::printf("bitwise match: %s\n", match ? "yes" : "NO");
    if (!match) return 1;
    std::printf("speedup: %.2fx\n", ts / tp);
    if (threads == 1)
        std::printf("note: single hardware thread available; speedup ~1.0 expected\n");
    return 0;
}
