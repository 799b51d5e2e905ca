#pragma once

#include <string>

#include "hmp/runtime.hpp"
#include "hmp/scenario.hpp"

namespace hmp {

/// Axis selector for render: a joint output index, or time when `time` is set.
struct RenderAxis {
    bool time = false;
    int output = 0;
};

/// Parses "t" or a non-negative output index.
RenderAxis parse_axis(std::string_view text);

/// SVG projection of a trajectory onto two axes: grid lines, shaded obstacle
/// and goal cells, one polyline per vehicle and a marker at each box change.
/// Throws Semantic for an empty trajectory or an axis out of range.
std::string render_svg(const Scenario& s, const TrajectoryTable& traj, RenderAxis x, RenderAxis y);

}  // namespace hmp
