#pragma once

#include <iosfwd>
#include <vector>

#include "hmp/scenario.hpp"

namespace hmp {

struct BenchRecord {
    int p = 0;
    int grid = 0;
    PrimitiveMode mode = PrimitiveMode::NonDeterministic;
    std::size_t ots_locations = 0;
    std::size_t ma_primitives = 0;
    std::size_t ma_edges = 0;
    std::size_t pa_states = 0;
    std::size_t pa_edges = 0;
    double t_ots = 0.0;
    double t_ma = 0.0;
    double t_pa = 0.0;
    double t_solve = 0.0;
    bool timeout = false;

    double t_total() const { return t_ots + t_ma + t_pa + t_solve; }
};

struct BenchOptions {
    std::vector<int> p_list{1, 2};
    std::vector<int> grid_list{4};
    std::vector<PrimitiveMode> modes{PrimitiveMode::NonDeterministic, PrimitiveMode::Deterministic};
    double timeout_s = 600.0;
    int repeat = 1;           // stage times are the minimum over repeats
    bool concurrent = false;  // run configurations on separate threads
};

/// One vehicle with p outputs of g unit boxes each, no obstacles and a single
/// goal in the far corner.
Scenario bench_scenario(int p, int grid, PrimitiveMode mode);

BenchRecord run_bench_config(int p, int grid, PrimitiveMode mode, double timeout_s, int repeat);
std::vector<BenchRecord> run_bench(const BenchOptions& options);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows);

}  // namespace hmp
