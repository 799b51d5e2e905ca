#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmp/maneuver.hpp"
#include "hmp/product.hpp"
#include "hmp/scenario.hpp"
#include "hmp/workspace.hpp"

namespace hmp {

/// Value of states from which reaching a final state cannot be guaranteed.
/// IEEE infinity absorbs additions, so it never overflows into a finite cost.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline bool reachable(double v) { return v != kUnreachable; }

/// Marks a policy choice that does not name any product state.
inline constexpr StateId kInvalidState = std::numeric_limits<StateId>::max();

inline constexpr const char* kSolverVersion = "hmp-nd-dijkstra/1";

struct PolicyEntry {
    FaceLabel label;
    StateId target = kInvalidState;
    friend bool operator==(const PolicyEntry&, const PolicyEntry&) = default;
};

/// Memoryless discrete feedback: for each planned state and each face it may
/// reach, the successor product state.
class Policy {
public:
    Policy() = default;
    /// rows[q] holds the choices of state q; dispatch has one entry per location.
    Policy(const std::vector<std::vector<PolicyEntry>>& rows, std::vector<std::int32_t> dispatch);

    std::span<const PolicyEntry> entries(StateId q) const {
        return {entries_.data() + offset_[q], offset_[q + 1] - offset_[q]};
    }
    std::span<PolicyEntry> mutable_entries(StateId q) {
        return {entries_.data() + offset_[q], offset_[q + 1] - offset_[q]};
    }
    bool planned(StateId q) const { return offset_[q + 1] > offset_[q]; }
    std::optional<StateId> choose(StateId q, FaceLabel sigma) const;

    /// Best primitive index per location, -1 where none has a finite value.
    std::int32_t dispatch(Location l) const { return dispatch_[static_cast<std::size_t>(l)]; }
    void set_dispatch(Location l, std::int32_t prim) { dispatch_[static_cast<std::size_t>(l)] = prim; }

    std::size_t num_states() const { return offset_.empty() ? 0 : offset_.size() - 1; }
    std::size_t num_entries() const { return entries_.size(); }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::vector<std::uint64_t> offset_;
    std::vector<PolicyEntry> entries_;
    std::vector<std::int32_t> dispatch_;
};

struct Solution {
    std::vector<double> value;
    Policy policy;
};

/// Worst-case shortest path by label setting: a state is settled once every
/// outcome label has an edge into a settled state; its value is the worst
/// label's best edge. Requires every edge cost > 0.
Solution solve(const ProductAutomaton& pa);

/// Max-min Bellman fixpoint by synchronous sweeps (parallel over states).
std::vector<double> value_iteration(const ProductAutomaton& pa);
/// Single-threaded sweeps; same iterates as value_iteration.
std::vector<double> value_iteration_serial(const ProductAutomaton& pa);

/// One Bellman backup of state q against `value`.
double bellman(const ProductAutomaton& pa, const std::vector<double>& value, StateId q);

/// Argmin edge per (state, label), ties to the smallest target state, plus the
/// initial dispatch table.
Policy extract_policy(const ProductAutomaton& pa, const std::vector<double>& value);

struct CheckReport {
    bool certified = false;
    std::size_t states_checked = 0;
    std::size_t max_run_length = 0;
    /// Counterexample path; when `cycle_start` is set, trace[cycle_start..]
    /// repeats forever.
    std::vector<StateId> trace;
    std::optional<std::size_t> cycle_start;
    std::string reason;
};

/// Explores the closed loop (adversary picks the face, policy picks the edge)
/// from every planned state and every dispatch state.
CheckReport check_policy(const ProductAutomaton& pa, const Policy& policy);

/// Everything needed to execute or check a plan.
struct Plan {
    Scenario scenario;
    Ots ots;
    ManeuverAutomaton ma;
    ProductAutomaton pa;
    Solution solution;
};

struct PlanTimings {
    double ots = 0.0;
    double ma = 0.0;
    double pa = 0.0;
    double solve = 0.0;
};

/// Runs the full offline pipeline. Throws UnreachableGoal when no non-goal
/// location can guarantee reaching the goal.
Plan make_plan(const Scenario& s, PlanTimings* timings = nullptr);

std::string serialize_policy(const Plan& plan);
/// Rebuilds the automata from `s` and loads values and choices from the
/// document. Throws HashMismatch when the file was planned for another scenario.
Plan load_plan(const Scenario& s, std::string_view policy_text);

std::string describe_state(const Plan& plan, StateId q);

}  // namespace hmp
