#include "hmp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "hmp/planner.hpp"

namespace hmp {

Scenario bench_scenario(int p, int grid, PrimitiveMode mode) {
    Scenario s;
    s.outputs_per_vehicle = p;
    s.vehicles = 1;
    s.extent.assign(static_cast<std::size_t>(p), grid);
    s.box_lengths.assign(static_cast<std::size_t>(p), 1.0);
    s.u_max.assign(static_cast<std::size_t>(p), 1.0);
    s.goals = {{std::vector<int>(static_cast<std::size_t>(p), grid - 1)}};
    s.primitive_mode = mode;
    fill_defaults(s);
    validate(s);
    return s;
}

BenchRecord run_bench_config(int p, int grid, PrimitiveMode mode, double timeout_s, int repeat) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    const Scenario s = bench_scenario(p, grid, mode);
    BenchRecord r{p, grid, mode};
    constexpr double kInf = std::numeric_limits<double>::infinity();
    r.t_ots = r.t_ma = r.t_pa = r.t_solve = kInf;
    const auto start = clock::now();
    for (int rep = 0; rep < std::max(repeat, 1); ++rep) {
        // Each stage is checked against the budget before the next one starts.
        const auto t0 = clock::now();
        const Ots ots = build_ots(s);
        const auto t1 = clock::now();
        r.t_ots = std::min(r.t_ots, seconds(t0, t1));
        if (seconds(start, t1) > timeout_s) {
            r.timeout = true;
            break;
        }
        const ManeuverAutomaton ma = compose(p, mode);
        const auto t2 = clock::now();
        r.t_ma = std::min(r.t_ma, seconds(t1, t2));
        if (seconds(start, t2) > timeout_s) {
            r.timeout = true;
            break;
        }
        const ProductAutomaton pa = build_pa(ots, ma, s.costs, s.final_any_primitive);
        const auto t3 = clock::now();
        r.t_pa = std::min(r.t_pa, seconds(t2, t3));
        if (seconds(start, t3) > timeout_s) {
            r.timeout = true;
            break;
        }
        const Solution sol = solve(pa);
        const auto t4 = clock::now();
        r.t_solve = std::min(r.t_solve, seconds(t3, t4));
        r.ots_locations = ots.num_locations();
        r.ma_primitives = ma.size();
        r.ma_edges = ma.num_edges();
        r.pa_states = pa.num_states();
        r.pa_edges = pa.num_edges();
        if (seconds(start, t4) > timeout_s) {
            r.timeout = true;
            break;
        }
    }
    for (double* t : {&r.t_ots, &r.t_ma, &r.t_pa, &r.t_solve})
        if (*t == kInf) *t = 0.0;
    return r;
}

std::vector<BenchRecord> run_bench(const BenchOptions& options) {
    struct Config {
        int p, grid;
        PrimitiveMode mode;
    };
    std::vector<Config> configs;
    for (int p : options.p_list)
        for (int g : options.grid_list)
            for (PrimitiveMode m : options.modes) configs.push_back({p, g, m});
    std::vector<BenchRecord> rows(configs.size());
    const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic) if (options.concurrent)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Config& c = configs[static_cast<std::size_t>(i)];
        rows[static_cast<std::size_t>(i)] = run_bench_config(c.p, c.grid, c.mode, options.timeout_s, options.repeat);
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
    out << "p,grid,mode,ots_locations,ma_primitives,ma_edges,pa_states,pa_edges,t_ots,t_ma,t_pa,t_solve,t_total,"
           "timeout\n";
    for (const BenchRecord& r : rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.p, r.grid,
                           r.mode == PrimitiveMode::NonDeterministic ? "ND" : "D", r.ots_locations, r.ma_primitives,
                           r.ma_edges, r.pa_states, r.pa_edges, r.t_ots, r.t_ma, r.t_pa, r.t_solve, r.t_total(),
                           r.timeout ? 1 : 0);
    }
}

}  // namespace hmp
