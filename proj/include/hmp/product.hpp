#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmp/maneuver.hpp"
#include "hmp/scenario.hpp"
#include "hmp/workspace.hpp"

namespace hmp {

using StateId = std::uint32_t;

struct PaGroup {
    FaceLabel label;
    std::uint64_t begin = 0;  // into the edge arrays
    std::uint64_t end = 0;
    friend bool operator==(const PaGroup&, const PaGroup&) = default;
};

/// Synchronous product of the OTS and the discrete maneuver automaton.
/// State id = location * |primitives| + primitive index. Inadmissible states
/// are kept but have no edges.
class ProductAutomaton {
public:
    int p() const { return p_; }
    std::size_t num_states() const { return admissible_.size(); }
    std::size_t num_edges() const { return edge_target_.size(); }
    std::size_t num_primitives() const { return num_primitives_; }

    StateId state(Location l, std::size_t prim_index) const {
        return static_cast<StateId>(static_cast<std::size_t>(l) * num_primitives_ + prim_index);
    }
    Location location(StateId q) const { return static_cast<Location>(q / num_primitives_); }
    std::size_t primitive_index(StateId q) const { return q % num_primitives_; }

    bool admissible(StateId q) const { return admissible_[q] != 0; }
    bool is_final(StateId q) const { return final_[q] != 0; }
    const std::vector<StateId>& finals() const { return finals_; }
    double terminal_cost(StateId) const { return terminal_cost_; }

    /// One group per outcome label of the state's primitive (empty when inadmissible).
    std::span<const PaGroup> groups(StateId q) const {
        return {groups_.data() + group_offset_[q], group_offset_[q + 1] - group_offset_[q]};
    }
    /// Global index of the first group of q; groups are numbered in state order.
    std::uint64_t group_index(StateId q) const { return group_offset_[q]; }
    std::size_t num_groups() const { return groups_.size(); }
    StateId edge_target(std::uint64_t e) const { return edge_target_[e]; }
    double edge_cost(std::uint64_t e) const { return edge_cost_[e]; }

    std::size_t count_admissible() const;

    friend bool operator==(const ProductAutomaton&, const ProductAutomaton&) = default;
    friend ProductAutomaton build_pa(const Ots&, const ManeuverAutomaton&, const CostSettings&, bool);
    friend ProductAutomaton build_pa_serial(const Ots&, const ManeuverAutomaton&, const CostSettings&, bool);

private:
    int p_ = 0;
    std::size_t num_primitives_ = 0;
    double terminal_cost_ = 0.0;
    std::vector<std::uint8_t> admissible_;
    std::vector<std::uint8_t> final_;
    std::vector<StateId> finals_;
    std::vector<std::uint64_t> group_offset_;
    std::vector<PaGroup> groups_;
    std::vector<StateId> edge_target_;
    std::vector<double> edge_cost_;
};

/// Parallel construction. Final states are all-Hold states on goal locations,
/// or any primitive on a goal location when `final_any_primitive` is set.
ProductAutomaton build_pa(const Ots& ots, const ManeuverAutomaton& ma, const CostSettings& costs,
                          bool final_any_primitive = false);
/// Single-threaded reference; produces an identical automaton.
ProductAutomaton build_pa_serial(const Ots& ots, const ManeuverAutomaton& ma, const CostSettings& costs,
                                 bool final_any_primitive = false);

/// Final states; throws UnreachableGoal when there are none.
const std::vector<StateId>& finals(const ProductAutomaton& pa);

/// Cost of leaving a state with primitive m.
double step_cost(const CostSettings& costs, CompositePrimitive m, int p);

}  // namespace hmp
