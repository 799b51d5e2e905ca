#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hmp/types.hpp"

namespace hmp {

/// One-output transition structure: for each source tag and face sign, the
/// set of admissible successor tags as a bitmask over Tag values.
struct AtomicEdgeTable {
    std::array<std::array<std::uint8_t, 3>, 3> successors{};

    bool contains(Tag from, Sign sigma, Tag to) const {
        return (successors[static_cast<std::size_t>(from)][static_cast<std::size_t>(sigma)] >>
                static_cast<unsigned>(to)) & 1u;
    }
};

/// F -> {H,F} on +, B -> {H,B} on -, and on 0: H -> {H,F,B}, F -> {F}, B -> {B}.
AtomicEdgeTable atomic_edges();

/// Face labels reachable by `m`: every nonempty subset of its moving outputs,
/// signed by direction, in increasing code order.
std::vector<FaceLabel> outcomes(CompositePrimitive m, int p);
bool is_outcome(CompositePrimitive m, FaceLabel sigma, int p);

/// Cartesian product of the per-output atomic successors. Throws Contract
/// when sigma is not an outcome of m.
std::vector<CompositePrimitive> successors(CompositePrimitive m, FaceLabel sigma, int p,
                                           const AtomicEdgeTable& table = atomic_edges());

struct MaGroup {
    FaceLabel label;
    std::uint32_t begin = 0;  // into the target list
    std::uint32_t end = 0;
};

/// Discrete part of the parallel-composed maneuver automaton.
class ManeuverAutomaton {
public:
    int p() const { return p_; }
    PrimitiveMode mode() const { return mode_; }
    std::size_t size() const { return primitives_.size(); }
    std::size_t num_edges() const { return targets_.size(); }

    /// Primitives by decreasing number of moving outputs, then by code; the
    /// last one is all-Hold.
    const std::vector<CompositePrimitive>& primitives() const { return primitives_; }
    std::size_t hold_index() const { return primitives_.size() - 1; }
    CompositePrimitive primitive(std::size_t i) const { return primitives_[i]; }
    /// -1 when the primitive was pruned.
    std::int32_t index_of(CompositePrimitive m) const;

    /// Outcome groups of primitive i, in outcome order.
    std::span<const MaGroup> groups(std::size_t i) const;
    /// Target primitive indices of a group, ascending.
    std::span<const std::uint32_t> targets(const MaGroup& g) const;

    friend ManeuverAutomaton compose(int p, PrimitiveMode mode, const AtomicEdgeTable& table);

private:
    int p_ = 0;
    PrimitiveMode mode_ = PrimitiveMode::NonDeterministic;
    std::vector<CompositePrimitive> primitives_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> by_code_;  // (code, index), sorted
    std::vector<std::size_t> group_offset_;
    std::vector<MaGroup> groups_;
    std::vector<std::uint32_t> targets_;
};

/// All 3^p primitives in ND mode; in D mode only those with at most one
/// moving output (singleton outcome sets).
ManeuverAutomaton compose(int p, PrimitiveMode mode, const AtomicEdgeTable& table = atomic_edges());

}  // namespace hmp
