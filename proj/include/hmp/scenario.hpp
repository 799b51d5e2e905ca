#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hmp/types.hpp"

namespace hmp {

enum class CostVariant : std::uint8_t { Uniform, MovingCoords };

struct CostSettings {
    double edge_cost = 1.0;
    double terminal_cost = 0.0;
    CostVariant variant = CostVariant::Uniform;
    friend bool operator==(const CostSettings&, const CostSettings&) = default;
};

struct Numerics {
    double step = 0.0;             // integration step h [s]
    double event_tolerance = 0.0;  // position tolerance for crossing refinement [m]
    std::optional<double> t_max;   // absent: derived from the start state's value
    std::optional<double> u_clip;  // symmetric clipping of the commanded acceleration
    friend bool operator==(const Numerics&, const Numerics&) = default;
};

/// Validated, normalized problem description. Grid geometry is given per
/// vehicle output and replicated for every vehicle in the joint space.
struct Scenario {
    int outputs_per_vehicle = 2;
    int vehicles = 1;
    std::vector<int> extent;           // per vehicle output
    std::vector<double> box_lengths;   // per vehicle output [m]
    std::vector<double> u_max;         // per vehicle output [m/s^2]
    std::vector<std::vector<int>> obstacles;           // per-vehicle cells, sorted, unique
    std::vector<std::vector<std::vector<int>>> goals;  // goals[v] = cells of vehicle v
    std::vector<JointCell> joint_goals;                // overrides the product of goals
    int collision_margin = 0;
    CostSettings costs;
    PrimitiveMode primitive_mode = PrimitiveMode::NonDeterministic;
    bool final_any_primitive = false;
    Numerics numerics;

    int p() const { return outputs_per_vehicle * vehicles; }
    int joint_extent(int i) const { return extent[static_cast<std::size_t>(i % outputs_per_vehicle)]; }
    double joint_box_length(int i) const {
        return box_lengths[static_cast<std::size_t>(i % outputs_per_vehicle)];
    }
    double joint_u_max(int i) const { return u_max[static_cast<std::size_t>(i % outputs_per_vehicle)]; }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Row-major indexing of a box grid, output 0 varying fastest.
class GridIndex {
public:
    GridIndex() = default;
    explicit GridIndex(std::vector<int> extent);

    int dims() const { return static_cast<int>(extent_.size()); }
    int extent(int i) const { return extent_[static_cast<std::size_t>(i)]; }
    std::int64_t stride(int i) const { return stride_[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return size_; }

    bool contains(const std::vector<int>& cell) const;
    std::int64_t linear(const std::vector<int>& cell) const;
    std::vector<int> cell(std::int64_t linear) const;
    int coordinate(std::int64_t linear, int i) const {
        return static_cast<int>((linear / stride(i)) % extent(i));
    }

private:
    std::vector<int> extent_;
    std::vector<std::int64_t> stride_;
    std::int64_t size_ = 0;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);

/// Stable 64-bit digest of the planning-relevant part of a scenario
/// (everything except numerics), as 16 hex digits.
std::string scenario_hash(const Scenario& s);

/// Throws Error(Semantic) on the first violated invariant.
void validate(const Scenario& s);

/// Fills numerics defaults derived from the grid constants.
void fill_defaults(Scenario& s);

/// Smallest box length and the slowest time constant sqrt(d/u*) over outputs.
double min_box_length(const Scenario& s);
double max_time_constant(const Scenario& s);

enum class CellLabel : std::uint8_t { Free, Obstacle };

CellLabel joint_obstacle_label(const Scenario& s, const JointCell& c);
bool joint_goal_label(const Scenario& s, const JointCell& c);

/// Precomputed masks for bulk labeling of the joint grid.
class JointLabeler {
public:
    explicit JointLabeler(const Scenario& s);

    const GridIndex& joint_grid() const { return joint_; }
    const GridIndex& vehicle_grid() const { return vehicle_; }

    CellLabel obstacle(std::int64_t joint_linear) const;
    bool goal(std::int64_t joint_linear) const;

    /// Obstacle/free label of every joint cell.
    std::vector<std::uint8_t> label_all() const;
    std::vector<std::uint8_t> label_all_serial() const;

private:
    std::int64_t vehicle_cell(std::int64_t joint_linear, int v) const;

    int k_ = 0;
    int n_ = 0;
    int margin_ = 0;
    GridIndex joint_;
    GridIndex vehicle_;
    std::vector<std::uint8_t> obstacle_mask_;
    std::vector<std::vector<std::uint8_t>> goal_mask_;
    std::vector<std::int64_t> joint_goals_;  // sorted linear indices
};

}  // namespace hmp
