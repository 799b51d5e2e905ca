#include "hmp/workspace.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hmp {

namespace {

// Linear index of the neighbor across face `sigma`, -1 when it leaves the grid.
std::int64_t offset_cell(const GridIndex& g, std::int64_t cell, FaceLabel sigma) {
    std::int64_t out = cell;
    for (int i = 0; i < g.dims(); ++i) {
        const Sign s = sigma[i];
        if (s == Sign::Zero) continue;
        const int c = g.coordinate(cell, i);
        if (s == Sign::Plus) {
            if (c + 1 >= g.extent(i)) return -1;
            out += g.stride(i);
        } else {
            if (c == 0) return -1;
            out -= g.stride(i);
        }
    }
    return out;
}

void label_locations(const JointLabeler& lab, const std::vector<std::uint8_t>& obstacle,
                     GridIndex& grid, std::vector<Location>& loc_of, std::vector<std::int64_t>& cell_of,
                     std::vector<std::uint8_t>& goal, std::vector<Location>& goal_locations) {
    grid = lab.joint_grid();
    loc_of.assign(obstacle.size(), kNoLocation);
    cell_of.clear();
    for (std::size_t c = 0; c < obstacle.size(); ++c) {
        if (obstacle[c]) continue;
        loc_of[c] = static_cast<Location>(cell_of.size());
        cell_of.push_back(static_cast<std::int64_t>(c));
    }
    if (cell_of.empty()) throw Error(ErrorKind::EmptyWorkspace, "no free cells in the joint workspace");
    goal.assign(cell_of.size(), 0);
    goal_locations.clear();
    for (std::size_t l = 0; l < cell_of.size(); ++l) {
        if (lab.goal(cell_of[l])) {
            goal[l] = 1;
            goal_locations.push_back(static_cast<Location>(l));
        }
    }
    if (goal_locations.empty())
        throw Error(ErrorKind::UnreachableGoal, "no free joint cell is labelled as a goal");
}

}  // namespace

std::vector<FaceLabel> nonzero_labels(int p) {
    std::vector<FaceLabel> out;
    out.reserve(pow3(p) - 1);
    for (std::uint32_t c = 1; c < pow3(p); ++c) out.emplace_back(c);
    return out;
}

Location Ots::location_of(const JointCell& c) const {
    if (!grid_.contains(c)) return kNoLocation;
    return loc_of_[static_cast<std::size_t>(grid_.linear(c))];
}

std::span<const OtsEdge> Ots::edges(Location l) const {
    const auto i = static_cast<std::size_t>(l);
    return {edges_.data() + edge_offset_[i], edge_offset_[i + 1] - edge_offset_[i]};
}

Neighbor neighbor(const Ots& o, Location l, FaceLabel sigma) {
    const std::int64_t target = offset_cell(o.grid(), o.cell_index(l), sigma);
    if (target < 0) return {NeighborKind::OutOfBounds, kNoLocation};
    const Location t = o.location_of(target);
    if (t == kNoLocation) return {NeighborKind::Obstacle, kNoLocation};
    return {NeighborKind::Free, t};
}

Ots build_ots(const Scenario& s) {
    Ots o;
    const JointLabeler lab(s);
    label_locations(lab, lab.label_all(), o.grid_, o.loc_of_, o.cell_of_, o.goal_, o.goal_locations_);

    const auto labels = nonzero_labels(s.p());
    const auto n = static_cast<std::int64_t>(o.cell_of_.size());
    std::vector<std::size_t> count(o.cell_of_.size(), 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < n; ++l) {
        std::size_t c = 0;
        for (FaceLabel sigma : labels) c += neighbor(o, static_cast<Location>(l), sigma).kind == NeighborKind::Free;
        count[static_cast<std::size_t>(l)] = c;
    }
    o.edge_offset_.assign(o.cell_of_.size() + 1, 0);
    for (std::size_t l = 0; l < count.size(); ++l) o.edge_offset_[l + 1] = o.edge_offset_[l] + count[l];
    o.edges_.resize(o.edge_offset_.back());
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < n; ++l) {
        std::size_t at = o.edge_offset_[static_cast<std::size_t>(l)];
        for (FaceLabel sigma : labels) {
            const Neighbor nb = neighbor(o, static_cast<Location>(l), sigma);
            if (nb.kind == NeighborKind::Free) o.edges_[at++] = {sigma, nb.location};
        }
    }
    return o;
}

Ots build_ots_serial(const Scenario& s) {
    Ots o;
    const JointLabeler lab(s);
    label_locations(lab, lab.label_all_serial(), o.grid_, o.loc_of_, o.cell_of_, o.goal_, o.goal_locations_);
    const auto labels = nonzero_labels(s.p());
    o.edge_offset_.push_back(0);
    for (std::size_t l = 0; l < o.cell_of_.size(); ++l) {
        for (FaceLabel sigma : labels) {
            const Neighbor nb = neighbor(o, static_cast<Location>(l), sigma);
            if (nb.kind == NeighborKind::Free) o.edges_.push_back({sigma, nb.location});
        }
        o.edge_offset_.push_back(o.edges_.size());
    }
    return o;
}

CellPoint global_to_cell(const Scenario& s, std::span<const double> y) {
    const int p = s.p();
    if (static_cast<int>(y.size()) != p)
        throw Error(ErrorKind::Semantic, fmt::format("point has {} outputs, expected {}", y.size(), p));
    CellPoint out;
    out.cell.resize(static_cast<std::size_t>(p));
    out.local.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
        const double d = s.joint_box_length(i);
        const int n = s.joint_extent(i);
        const double yi = y[static_cast<std::size_t>(i)];
        if (!(yi >= 0.0) || !(yi <= n * d))
            throw Error(ErrorKind::Semantic, fmt::format("output {} = {} is outside the workspace [0, {}]", i, yi, n * d));
        int idx = static_cast<int>(std::floor(yi / d));
        if (idx >= n) idx = n - 1;
        // Lower cell owns the shared face.
        if (idx > 0 && idx * d >= yi) --idx;
        if (idx + 1 < n && yi - idx * d > d) ++idx;
        out.cell[static_cast<std::size_t>(i)] = idx;
        out.local[static_cast<std::size_t>(i)] = yi - idx * d;
    }
    return out;
}

}  // namespace hmp
