#include "hmp/render.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace hmp {

namespace {

constexpr double kCanvas = 600.0;
constexpr double kMargin = 30.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

// The output index the axis shows for vehicle v: the same per-vehicle output
// as the requested index, shifted into v's block.
int vehicle_output(const Scenario& s, RenderAxis a, int v) {
    return v * s.outputs_per_vehicle + a.output % s.outputs_per_vehicle;
}

}  // namespace

RenderAxis parse_axis(std::string_view text) {
    if (text == "t") return {true, 0};
    try {
        std::size_t used = 0;
        const int i = std::stoi(std::string(text), &used);
        if (used != text.size() || i < 0) throw std::invalid_argument("axis");
        return {false, i};
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::Parse, "axis must be 't' or an output index, got '" + std::string(text) + "'");
    }
}

std::string render_svg(const Scenario& s, const TrajectoryTable& traj, RenderAxis x, RenderAxis y) {
    if (traj.t.empty()) throw Error(ErrorKind::Semantic, "empty trajectory");
    if (traj.p != s.p())
        throw Error(ErrorKind::Semantic,
                    fmt::format("trajectory has {} outputs, scenario has {}", traj.p, s.p()));
    for (RenderAxis a : {x, y})
        if (!a.time && a.output >= s.p())
            throw Error(ErrorKind::Semantic, fmt::format("axis {} out of range (p = {})", a.output, s.p()));
    if (x.time && y.time) throw Error(ErrorKind::Semantic, "at most one axis can be time");

    const bool same_vehicle = !x.time && !y.time &&
                              x.output / s.outputs_per_vehicle == y.output / s.outputs_per_vehicle;
    // Two spatial axes of one vehicle draw every vehicle in that plane.
    const int lanes = (same_vehicle || x.time || y.time) ? s.vehicles : 1;

    auto range_of = [&](RenderAxis a) {
        if (a.time) return Range{traj.t.front(), std::max(traj.t.back(), traj.t.front() + 1e-9)};
        return Range{0.0, s.joint_extent(a.output) * s.joint_box_length(a.output)};
    };
    const Range rx = range_of(x);
    const Range ry = range_of(y);
    const double span = kCanvas - 2 * kMargin;
    auto px = [&](double v) { return kMargin + (v - rx.lo) / (rx.hi - rx.lo) * span; };
    auto py = [&](double v) { return kCanvas - kMargin - (v - ry.lo) / (ry.hi - ry.lo) * span; };
    auto value = [&](RenderAxis a, std::size_t row, int v) {
        if (a.time) return traj.t[row];
        const int out = lanes > 1 ? vehicle_output(s, a, v) : a.output;
        return traj.y[row][static_cast<std::size_t>(out)];
    };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kCanvas);

    // Cells shaded only when both axes are spatial outputs of the per-vehicle grid.
    if (!x.time && !y.time && same_vehicle) {
        const int k = s.outputs_per_vehicle;
        const int ax = x.output % k;
        const int ay = y.output % k;
        const double dx = s.box_lengths[static_cast<std::size_t>(ax)];
        const double dy = s.box_lengths[static_cast<std::size_t>(ay)];
        auto shade = [&](int cx, int cy, const char* fill) {
            svg += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"{}\"/>\n",
                               px(cx * dx), py((cy + 1) * dy), px((cx + 1) * dx) - px(cx * dx),
                               py(cy * dy) - py((cy + 1) * dy), fill);
        };
        std::set<std::pair<int, int>> seen;
        for (const auto& c : s.obstacles)
            if (seen.insert({c[static_cast<std::size_t>(ax)], c[static_cast<std::size_t>(ay)]}).second)
                shade(c[static_cast<std::size_t>(ax)], c[static_cast<std::size_t>(ay)], "#888888");
        std::set<std::pair<int, int>> goal_seen;
        for (const auto& per_vehicle : s.goals)
            for (const auto& c : per_vehicle)
                if (goal_seen.insert({c[static_cast<std::size_t>(ax)], c[static_cast<std::size_t>(ay)]}).second)
                    shade(c[static_cast<std::size_t>(ax)], c[static_cast<std::size_t>(ay)], "#b6e3b6");
        for (const JointCell& jc : s.joint_goals)
            for (int v = 0; v < s.vehicles; ++v) {
                const int gx = jc[static_cast<std::size_t>(v * k + ax)];
                const int gy = jc[static_cast<std::size_t>(v * k + ay)];
                if (goal_seen.insert({gx, gy}).second) shade(gx, gy, "#b6e3b6");
            }
    }

    // Grid lines along spatial axes.
    for (int which = 0; which < 2; ++which) {
        const RenderAxis a = which == 0 ? x : y;
        if (a.time) continue;
        const double d = s.joint_box_length(a.output);
        for (int i = 0; i <= s.joint_extent(a.output); ++i) {
            const double g = i * d;
            if (which == 0)
                svg += fmt::format("<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{0:.3f}\" y2=\"{2:.3f}\" stroke=\"#cccccc\"/>\n",
                                   px(g), py(ry.lo), py(ry.hi));
            else
                svg += fmt::format("<line x1=\"{1:.3f}\" y1=\"{0:.3f}\" x2=\"{2:.3f}\" y2=\"{0:.3f}\" stroke=\"#cccccc\"/>\n",
                                   py(g), px(rx.lo), px(rx.hi));
        }
    }
    svg += fmt::format("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{1}\" fill=\"none\" stroke=\"black\"/>\n",
                       kMargin, span);

    for (int v = 0; v < lanes; ++v) {
        const char* color = kColors[static_cast<std::size_t>(v) % std::size(kColors)];
        svg += fmt::format("<polyline class=\"vehicle{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", v,
                           color);
        for (std::size_t r = 0; r < traj.t.size(); ++r)
            svg += fmt::format("{}{:.3f},{:.3f}", r ? " " : "", px(value(x, r, v)), py(value(y, r, v)));
        svg += "\"/>\n";
    }
    for (std::size_t r = 1; r < traj.t.size(); ++r) {
        if (traj.box[r] == traj.box[r - 1]) continue;
        for (int v = 0; v < lanes; ++v)
            svg += fmt::format("<circle class=\"event\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\" fill=\"black\"/>\n",
                               px(value(x, r, v)), py(value(y, r, v)));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace hmp
