#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmp/scenario.hpp"
#include "hmp/types.hpp"

namespace hmp {

using Location = std::int32_t;
inline constexpr Location kNoLocation = -1;

struct OtsEdge {
    FaceLabel label;
    Location target = kNoLocation;
    friend bool operator==(const OtsEdge&, const OtsEdge&) = default;
};

enum class NeighborKind : std::uint8_t { Free, OutOfBounds, Obstacle };

struct Neighbor {
    NeighborKind kind = NeighborKind::OutOfBounds;
    Location location = kNoLocation;
};

/// Output transition system over the free joint cells. Locations are numbered
/// in increasing joint-cell order; edges of a location are sorted by label code.
class Ots {
public:
    int p() const { return grid_.dims(); }
    const GridIndex& grid() const { return grid_; }
    std::size_t num_locations() const { return cell_of_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    std::int64_t cell_index(Location l) const { return cell_of_[static_cast<std::size_t>(l)]; }
    JointCell cell(Location l) const { return grid_.cell(cell_index(l)); }
    /// kNoLocation for obstacle cells.
    Location location_of(std::int64_t cell_index) const { return loc_of_[static_cast<std::size_t>(cell_index)]; }
    Location location_of(const JointCell& c) const;

    bool is_goal(Location l) const { return goal_[static_cast<std::size_t>(l)] != 0; }
    const std::vector<Location>& goal_locations() const { return goal_locations_; }

    std::span<const OtsEdge> edges(Location l) const;

    friend Ots build_ots(const Scenario& s);
    friend Ots build_ots_serial(const Scenario& s);

private:
    GridIndex grid_;
    std::vector<Location> loc_of_;
    std::vector<std::int64_t> cell_of_;
    std::vector<std::uint8_t> goal_;
    std::vector<Location> goal_locations_;
    std::vector<std::size_t> edge_offset_;
    std::vector<OtsEdge> edges_;
};

/// Parallel construction; throws EmptyWorkspace / UnreachableGoal.
Ots build_ots(const Scenario& s);
/// Single-threaded reference construction with identical output.
Ots build_ots_serial(const Scenario& s);

Neighbor neighbor(const Ots& o, Location l, FaceLabel sigma);

/// Face labels with at least one non-zero component, in increasing code order.
std::vector<FaceLabel> nonzero_labels(int p);

struct CellPoint {
    JointCell cell;
    std::vector<double> local;  // xi_i in [0, d_i]
};

/// Locates a global output point. Points on a shared face belong to the
/// lower-index cell with xi_i = d_i. Throws Semantic for points outside.
CellPoint global_to_cell(const Scenario& s, std::span<const double> y);

}  // namespace hmp
