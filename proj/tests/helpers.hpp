#pragma once

#include <algorithm>
#include <random>
#include <string>

#include "hmp/planner.hpp"
#include "hmp/scenario.hpp"

namespace hmp::test {

inline std::string scenario_path(const char* name) { return std::string(HMP_SCENARIO_DIR) + "/" + name; }

inline Scenario single(std::vector<int> extent, std::vector<std::vector<int>> obstacles,
                       std::vector<std::vector<int>> goal) {
    Scenario s;
    s.outputs_per_vehicle = static_cast<int>(extent.size());
    s.vehicles = 1;
    s.box_lengths.assign(extent.size(), 1.0);
    s.u_max.assign(extent.size(), 1.0);
    s.extent = std::move(extent);
    std::sort(obstacles.begin(), obstacles.end());
    s.obstacles = std::move(obstacles);
    s.goals = {std::move(goal)};
    fill_defaults(s);
    validate(s);
    return s;
}

inline Scenario fig3() { return single({4, 4}, {{2, 2}}, {{3, 3}}); }

/// Single vehicle, p <= 3, extent <= 4 per output, obstacle density <= 30%,
/// one goal cell that is free. May be unsolvable.
inline Scenario random_scenario(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pd(1, 3);
    const int p = pd(rng);
    std::uniform_int_distribution<int> gd(2, 4);
    std::vector<int> extent;
    for (int i = 0; i < p; ++i) extent.push_back(gd(rng));
    std::uniform_real_distribution<double> density(0.0, 0.3);
    const double rho = density(rng);
    std::bernoulli_distribution obstacle(rho);
    GridIndex grid(extent);
    std::vector<std::vector<int>> obstacles;
    std::vector<std::vector<int>> free;
    for (std::int64_t c = 0; c < grid.size(); ++c) (obstacle(rng) ? obstacles : free).push_back(grid.cell(c));
    if (free.size() < 2) {
        free.push_back(obstacles.back());
        obstacles.pop_back();
    }
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const auto goal = free[pick(rng)];
    Scenario s = single(extent, obstacles, {goal});
    s.primitive_mode = std::bernoulli_distribution(0.3)(rng) ? PrimitiveMode::Deterministic
                                                              : PrimitiveMode::NonDeterministic;
    return s;
}

/// Random scenario for which make_plan succeeds.
inline Plan random_plan(std::mt19937_64& rng) {
    while (true) {
        try {
            return make_plan(random_scenario(rng));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UnreachableGoal && e.kind() != ErrorKind::EmptyWorkspace) throw;
        }
    }
}

}  // namespace hmp::test
