#include "hmp/product.hpp"

#include <algorithm>

namespace hmp {

namespace {

bool admissible_pair(const Ots& ots, const ManeuverAutomaton& ma, Location l, std::size_t mi) {
    for (const MaGroup& g : ma.groups(mi))
        if (neighbor(ots, l, g.label).kind != NeighborKind::Free) return false;
    return true;
}

bool final_pair(const Ots& ots, const ManeuverAutomaton& ma, Location l, std::size_t mi, bool any_primitive) {
    return ots.is_goal(l) && (any_primitive || ma.primitive(mi).all_hold());
}

}  // namespace

double step_cost(const CostSettings& costs, CompositePrimitive m, int p) {
    if (costs.variant == CostVariant::MovingCoords) return static_cast<double>(m.moving(p));
    return costs.edge_cost;
}

std::size_t ProductAutomaton::count_admissible() const {
    return static_cast<std::size_t>(std::count(admissible_.begin(), admissible_.end(), std::uint8_t{1}));
}

ProductAutomaton build_pa(const Ots& ots, const ManeuverAutomaton& ma, const CostSettings& costs,
                          bool final_any_primitive) {
    if (ots.p() != ma.p()) throw Error(ErrorKind::Contract, "OTS and MA disagree on the number of outputs");
    ProductAutomaton pa;
    pa.p_ = ma.p();
    pa.num_primitives_ = ma.size();
    pa.terminal_cost_ = costs.terminal_cost;
    const std::size_t nm = ma.size();
    const auto n = static_cast<std::int64_t>(ots.num_locations() * nm);
    pa.admissible_.assign(static_cast<std::size_t>(n), 0);
    pa.final_.assign(static_cast<std::size_t>(n), 0);

#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < n; ++q) {
        const auto l = static_cast<Location>(static_cast<std::size_t>(q) / nm);
        const std::size_t mi = static_cast<std::size_t>(q) % nm;
        pa.admissible_[static_cast<std::size_t>(q)] = admissible_pair(ots, ma, l, mi);
        pa.final_[static_cast<std::size_t>(q)] = final_pair(ots, ma, l, mi, final_any_primitive);
    }

    std::vector<std::uint64_t> group_count(static_cast<std::size_t>(n), 0);
    std::vector<std::uint64_t> edge_count(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t q = 0; q < n; ++q) {
        const auto uq = static_cast<std::size_t>(q);
        if (!pa.admissible_[uq]) continue;
        const auto l = static_cast<Location>(uq / nm);
        const std::size_t mi = uq % nm;
        std::uint64_t edges = 0;
        const auto groups = ma.groups(mi);
        for (const MaGroup& g : groups) {
            const Location target = neighbor(ots, l, g.label).location;
            for (std::uint32_t t : ma.targets(g)) edges += pa.admissible_[pa.state(target, t)];
        }
        group_count[uq] = groups.size();
        edge_count[uq] = edges;
    }

    pa.group_offset_.assign(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::uint64_t> edge_offset(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t q = 0; q < static_cast<std::size_t>(n); ++q) {
        pa.group_offset_[q + 1] = pa.group_offset_[q] + group_count[q];
        edge_offset[q + 1] = edge_offset[q] + edge_count[q];
    }
    pa.groups_.resize(pa.group_offset_.back());
    pa.edge_target_.resize(edge_offset.back());
    pa.edge_cost_.resize(edge_offset.back());

#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t q = 0; q < n; ++q) {
        const auto uq = static_cast<std::size_t>(q);
        if (!pa.admissible_[uq]) continue;
        const auto l = static_cast<Location>(uq / nm);
        const std::size_t mi = uq % nm;
        const double cost = step_cost(costs, ma.primitive(mi), pa.p_);
        std::uint64_t gi = pa.group_offset_[uq];
        std::uint64_t e = edge_offset[uq];
        for (const MaGroup& g : ma.groups(mi)) {
            const Location target = neighbor(ots, l, g.label).location;
            PaGroup& out = pa.groups_[gi++];
            out.label = g.label;
            out.begin = e;
            for (std::uint32_t t : ma.targets(g)) {
                const StateId qt = pa.state(target, t);
                if (!pa.admissible_[qt]) continue;
                pa.edge_target_[e] = qt;
                pa.edge_cost_[e] = cost;
                ++e;
            }
            out.end = e;
        }
    }

    for (std::size_t q = 0; q < static_cast<std::size_t>(n); ++q)
        if (pa.final_[q]) pa.finals_.push_back(static_cast<StateId>(q));
    return pa;
}

ProductAutomaton build_pa_serial(const Ots& ots, const ManeuverAutomaton& ma, const CostSettings& costs,
                                 bool final_any_primitive) {
    if (ots.p() != ma.p()) throw Error(ErrorKind::Contract, "OTS and MA disagree on the number of outputs");
    ProductAutomaton pa;
    pa.p_ = ma.p();
    pa.num_primitives_ = ma.size();
    pa.terminal_cost_ = costs.terminal_cost;
    const std::size_t n = ots.num_locations() * ma.size();
    for (std::size_t q = 0; q < n; ++q) {
        const auto l = static_cast<Location>(q / ma.size());
        const std::size_t mi = q % ma.size();
        pa.admissible_.push_back(admissible_pair(ots, ma, l, mi));
        pa.final_.push_back(final_pair(ots, ma, l, mi, final_any_primitive));
    }
    pa.group_offset_.push_back(0);
    for (std::size_t q = 0; q < n; ++q) {
        if (pa.admissible_[q]) {
            const auto l = static_cast<Location>(q / ma.size());
            const std::size_t mi = q % ma.size();
            const double cost = step_cost(costs, ma.primitive(mi), pa.p_);
            for (const MaGroup& g : ma.groups(mi)) {
                const Location target = neighbor(ots, l, g.label).location;
                PaGroup out{g.label, pa.edge_target_.size(), 0};
                for (std::uint32_t t : ma.targets(g)) {
                    const StateId qt = pa.state(target, t);
                    if (!pa.admissible_[qt]) continue;
                    pa.edge_target_.push_back(qt);
                    pa.edge_cost_.push_back(cost);
                }
                out.end = pa.edge_target_.size();
                pa.groups_.push_back(out);
            }
        }
        pa.group_offset_.push_back(pa.groups_.size());
        if (pa.final_[q]) pa.finals_.push_back(static_cast<StateId>(q));
    }
    return pa;
}

const std::vector<StateId>& finals(const ProductAutomaton& pa) {
    if (pa.finals().empty()) throw Error(ErrorKind::UnreachableGoal, "the product automaton has no final state");
    return pa.finals();
}

}  // namespace hmp
