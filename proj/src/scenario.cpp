#include "hmp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace hmp {

using nlohmann::json;

namespace {

[[noreturn]] void semantic(const std::string& msg) { throw Error(ErrorKind::Semantic, msg); }

void expect_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) semantic(fmt::format("'{}' must be an object", where));
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            semantic(fmt::format("unknown key '{}' in '{}'", key, where));
    }
}

const json& require(const json& obj, std::string_view where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) semantic(fmt::format("missing key '{}' in '{}'", key, where));
    return *it;
}

double as_number(const json& j, std::string_view where) {
    if (!j.is_number()) semantic(fmt::format("'{}' must be a number", where));
    return j.get<double>();
}

int as_int(const json& j, std::string_view where) {
    if (!j.is_number_integer()) semantic(fmt::format("'{}' must be an integer", where));
    return j.get<int>();
}

std::vector<int> as_int_vector(const json& j, std::string_view where) {
    if (!j.is_array()) semantic(fmt::format("'{}' must be an array", where));
    std::vector<int> out;
    for (const auto& e : j) out.push_back(as_int(e, where));
    return out;
}

std::vector<double> as_number_vector(const json& j, std::string_view where) {
    if (!j.is_array()) semantic(fmt::format("'{}' must be an array", where));
    std::vector<double> out;
    for (const auto& e : j) out.push_back(as_number(e, where));
    return out;
}

std::vector<std::vector<int>> as_cell_list(const json& j, std::string_view where) {
    if (!j.is_array()) semantic(fmt::format("'{}' must be an array of cells", where));
    std::vector<std::vector<int>> out;
    for (const auto& c : j) out.push_back(as_int_vector(c, where));
    return out;
}

void normalize_cells(std::vector<std::vector<int>>& cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

std::string cell_str(const std::vector<int>& c) {
    return fmt::format("({})", fmt::join(c, ","));
}

bool in_range(const std::vector<int>& cell, const std::vector<int>& extent) {
    if (cell.size() != extent.size()) return false;
    for (std::size_t i = 0; i < cell.size(); ++i)
        if (cell[i] < 0 || cell[i] >= extent[i]) return false;
    return true;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json to_json(const Scenario& s, bool with_numerics) {
    json j;
    j["grid"] = {{"extent", s.extent}, {"box_lengths", s.box_lengths}, {"u_max", s.u_max}};
    j["vehicles"] = {{"count", s.vehicles},
                     {"outputs_per_vehicle", s.outputs_per_vehicle},
                     {"collision_margin", s.collision_margin}};
    j["obstacles"] = s.obstacles;
    j["goals"] = {{"per_vehicle", s.goals}, {"joint", s.joint_goals}};
    j["costs"] = {{"edge_cost", s.costs.edge_cost},
                  {"terminal_cost", s.costs.terminal_cost},
                  {"variant", s.costs.variant == CostVariant::Uniform ? "uniform" : "moving_coords"}};
    j["primitive_mode"] = s.primitive_mode == PrimitiveMode::NonDeterministic ? "ND" : "D";
    j["final_any_primitive"] = s.final_any_primitive;
    if (with_numerics) {
        json n = {{"step", s.numerics.step}, {"event_tolerance", s.numerics.event_tolerance}};
        if (s.numerics.t_max) n["t_max"] = *s.numerics.t_max;
        if (s.numerics.u_clip) n["u_clip"] = *s.numerics.u_clip;
        j["numerics"] = n;
    }
    return j;
}

}  // namespace

GridIndex::GridIndex(std::vector<int> extent) : extent_(std::move(extent)) {
    stride_.resize(extent_.size());
    std::int64_t s = 1;
    for (std::size_t i = 0; i < extent_.size(); ++i) {
        stride_[i] = s;
        s *= extent_[i];
    }
    size_ = s;
}

bool GridIndex::contains(const std::vector<int>& cell) const { return in_range(cell, extent_); }

std::int64_t GridIndex::linear(const std::vector<int>& cell) const {
    std::int64_t l = 0;
    for (std::size_t i = 0; i < extent_.size(); ++i) l += cell[i] * stride_[i];
    return l;
}

std::vector<int> GridIndex::cell(std::int64_t linear) const {
    std::vector<int> c(extent_.size());
    for (std::size_t i = 0; i < extent_.size(); ++i) {
        c[i] = static_cast<int>(linear % extent_[i]);
        linear /= extent_[i];
    }
    return c;
}

double min_box_length(const Scenario& s) {
    return *std::min_element(s.box_lengths.begin(), s.box_lengths.end());
}

double max_time_constant(const Scenario& s) {
    double tau = 0.0;
    for (std::size_t i = 0; i < s.box_lengths.size(); ++i)
        tau = std::max(tau, std::sqrt(s.box_lengths[i] / s.u_max[i]));
    return tau;
}

void fill_defaults(Scenario& s) {
    // Step is a fraction of the fastest time constant sqrt(d_min / u*_max).
    const double d_min = min_box_length(s);
    const double u_top = *std::max_element(s.u_max.begin(), s.u_max.end());
    if (s.numerics.step <= 0.0) s.numerics.step = 0.005 * std::sqrt(d_min / u_top);
    if (s.numerics.event_tolerance <= 0.0) s.numerics.event_tolerance = 1e-6 * d_min;
}

void validate(const Scenario& s) {
    const auto k = static_cast<std::size_t>(s.outputs_per_vehicle);
    if (s.outputs_per_vehicle < 1) semantic("outputs_per_vehicle must be positive");
    if (s.vehicles < 1) semantic("vehicle count must be positive");
    if (s.p() > kMaxOutputs) semantic(fmt::format("at most {} joint outputs are supported", kMaxOutputs));
    if (s.extent.size() != k || s.box_lengths.size() != k || s.u_max.size() != k)
        semantic(fmt::format("grid arrays must have outputs_per_vehicle = {} entries", k));
    for (std::size_t i = 0; i < k; ++i) {
        if (s.extent[i] < 1) semantic(fmt::format("grid extent of output {} must be positive", i));
        if (!(s.box_lengths[i] > 0.0) || !std::isfinite(s.box_lengths[i]))
            semantic(fmt::format("box length of output {} must be positive", i));
        if (!(s.u_max[i] > 0.0) || !std::isfinite(s.u_max[i]))
            semantic(fmt::format("u_max of output {} must be positive", i));
        const double v_star = std::sqrt(s.box_lengths[i] * s.u_max[i]);
        if (!(v_star > 0.0) || !std::isfinite(v_star))
            semantic(fmt::format("derived speed of output {} is not finite and positive", i));
    }
    if (s.collision_margin < 0) semantic("collision_margin must be nonnegative");
    for (const auto& c : s.obstacles)
        if (!in_range(c, s.extent)) semantic("obstacle cell " + cell_str(c) + " is outside the grid");
    if (static_cast<int>(s.goals.size()) != s.vehicles)
        semantic(fmt::format("goals.per_vehicle must list {} vehicles", s.vehicles));
    const std::set<std::vector<int>> obstacle_set(s.obstacles.begin(), s.obstacles.end());
    for (std::size_t v = 0; v < s.goals.size(); ++v) {
        if (s.goals[v].empty() && s.joint_goals.empty())
            semantic(fmt::format("goal set of vehicle {} is empty", v));
        for (const auto& c : s.goals[v]) {
            if (!in_range(c, s.extent)) semantic("goal cell " + cell_str(c) + " is outside the grid");
            if (obstacle_set.count(c)) semantic("goal cell " + cell_str(c) + " is an obstacle");
        }
    }
    std::vector<int> joint_extent;
    for (int i = 0; i < s.p(); ++i) joint_extent.push_back(s.joint_extent(i));
    for (const auto& c : s.joint_goals) {
        if (!in_range(c, joint_extent)) semantic("joint goal " + cell_str(c) + " is outside the grid");
        if (joint_obstacle_label(s, c) == CellLabel::Obstacle)
            semantic("joint goal " + cell_str(c) + " is an obstacle or a collision");
    }
    if (!(s.costs.edge_cost >= 0.0) || !std::isfinite(s.costs.edge_cost)) semantic("edge_cost must be nonnegative");
    if (!(s.costs.terminal_cost >= 0.0) || !std::isfinite(s.costs.terminal_cost))
        semantic("terminal_cost must be nonnegative");
    if (!(s.numerics.step > 0.0)) semantic("numerics.step must be positive");
    if (!(s.numerics.event_tolerance > 0.0)) semantic("numerics.event_tolerance must be positive");
    if (s.numerics.t_max && !(*s.numerics.t_max > 0.0)) semantic("numerics.t_max must be positive");
    if (s.numerics.u_clip && !(*s.numerics.u_clip > 0.0)) semantic("numerics.u_clip must be positive");
}

Scenario parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorKind::Parse, fmt::format("syntax error at line {}, column {}: {}", line, col, e.what()));
    }
    expect_keys(root, "scenario",
                {"grid", "vehicles", "obstacles", "goals", "costs", "numerics", "primitive_mode",
                 "final_any_primitive"});

    Scenario s;
    const json& grid = require(root, "scenario", "grid");
    expect_keys(grid, "grid", {"extent", "box_lengths", "u_max"});
    s.extent = as_int_vector(require(grid, "grid", "extent"), "grid.extent");
    s.box_lengths = as_number_vector(require(grid, "grid", "box_lengths"), "grid.box_lengths");
    s.u_max = as_number_vector(require(grid, "grid", "u_max"), "grid.u_max");

    const json& veh = require(root, "scenario", "vehicles");
    expect_keys(veh, "vehicles", {"count", "outputs_per_vehicle", "collision_margin"});
    s.vehicles = veh.contains("count") ? as_int(veh["count"], "vehicles.count") : 1;
    s.outputs_per_vehicle = veh.contains("outputs_per_vehicle")
                                ? as_int(veh["outputs_per_vehicle"], "vehicles.outputs_per_vehicle")
                                : static_cast<int>(s.extent.size());
    s.collision_margin = veh.contains("collision_margin")
                             ? as_int(veh["collision_margin"], "vehicles.collision_margin")
                             : 0;

    if (root.contains("obstacles")) s.obstacles = as_cell_list(root["obstacles"], "obstacles");
    normalize_cells(s.obstacles);

    const json& goals = require(root, "scenario", "goals");
    expect_keys(goals, "goals", {"per_vehicle", "joint"});
    if (goals.contains("per_vehicle")) {
        if (!goals["per_vehicle"].is_array()) semantic("'goals.per_vehicle' must be an array");
        for (const auto& g : goals["per_vehicle"]) {
            s.goals.push_back(as_cell_list(g, "goals.per_vehicle"));
            normalize_cells(s.goals.back());
        }
    } else {
        s.goals.assign(static_cast<std::size_t>(std::max(s.vehicles, 0)), {});
    }
    if (goals.contains("joint")) {
        s.joint_goals = as_cell_list(goals["joint"], "goals.joint");
        normalize_cells(s.joint_goals);
    }

    if (root.contains("costs")) {
        const json& c = root["costs"];
        expect_keys(c, "costs", {"edge_cost", "terminal_cost", "variant"});
        if (c.contains("edge_cost")) s.costs.edge_cost = as_number(c["edge_cost"], "costs.edge_cost");
        if (c.contains("terminal_cost")) s.costs.terminal_cost = as_number(c["terminal_cost"], "costs.terminal_cost");
        if (c.contains("variant")) {
            const auto v = c["variant"].is_string() ? c["variant"].get<std::string>() : std::string();
            if (v == "uniform") s.costs.variant = CostVariant::Uniform;
            else if (v == "moving_coords") s.costs.variant = CostVariant::MovingCoords;
            else semantic("costs.variant must be 'uniform' or 'moving_coords'");
        }
    }

    if (root.contains("primitive_mode")) {
        const auto m = root["primitive_mode"].is_string() ? root["primitive_mode"].get<std::string>() : std::string();
        if (m == "ND") s.primitive_mode = PrimitiveMode::NonDeterministic;
        else if (m == "D") s.primitive_mode = PrimitiveMode::Deterministic;
        else semantic("primitive_mode must be 'ND' or 'D'");
    }
    if (root.contains("final_any_primitive")) {
        if (!root["final_any_primitive"].is_boolean()) semantic("'final_any_primitive' must be a boolean");
        s.final_any_primitive = root["final_any_primitive"].get<bool>();
    }

    if (root.contains("numerics")) {
        const json& n = root["numerics"];
        expect_keys(n, "numerics", {"step", "event_tolerance", "t_max", "u_clip"});
        if (n.contains("step")) s.numerics.step = as_number(n["step"], "numerics.step");
        if (n.contains("event_tolerance"))
            s.numerics.event_tolerance = as_number(n["event_tolerance"], "numerics.event_tolerance");
        if (n.contains("t_max") && !n["t_max"].is_null()) s.numerics.t_max = as_number(n["t_max"], "numerics.t_max");
        if (n.contains("u_clip") && !n["u_clip"].is_null())
            s.numerics.u_clip = as_number(n["u_clip"], "numerics.u_clip");
        if (n.contains("step") && !(s.numerics.step > 0.0)) semantic("numerics.step must be positive");
        if (n.contains("event_tolerance") && !(s.numerics.event_tolerance > 0.0))
            semantic("numerics.event_tolerance must be positive");
    }

    // Geometry must be sane before deriving the default step from it.
    if (s.extent.size() == s.box_lengths.size() && s.extent.size() == s.u_max.size() && !s.extent.empty()) {
        bool positive = true;
        for (std::size_t i = 0; i < s.extent.size(); ++i)
            positive = positive && s.box_lengths[i] > 0.0 && s.u_max[i] > 0.0;
        if (positive) fill_defaults(s);
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) { return to_json(s, true).dump(2) + "\n"; }

std::string scenario_hash(const Scenario& s) {
    // FNV-1a over the canonical dump; nlohmann orders object keys.
    const std::string canon = to_json(s, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

CellLabel joint_obstacle_label(const Scenario& s, const JointCell& c) {
    const auto k = static_cast<std::size_t>(s.outputs_per_vehicle);
    const auto n = static_cast<std::size_t>(s.vehicles);
    auto sub = [&](std::size_t v) { return std::vector<int>(c.begin() + v * k, c.begin() + (v + 1) * k); };
    for (std::size_t v = 0; v < n; ++v) {
        if (std::binary_search(s.obstacles.begin(), s.obstacles.end(), sub(v))) return CellLabel::Obstacle;
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            int dist = 0;
            for (std::size_t i = 0; i < k; ++i) dist = std::max(dist, std::abs(c[a * k + i] - c[b * k + i]));
            if (dist <= s.collision_margin) return CellLabel::Obstacle;
        }
    }
    return CellLabel::Free;
}

bool joint_goal_label(const Scenario& s, const JointCell& c) {
    if (!s.joint_goals.empty()) return std::binary_search(s.joint_goals.begin(), s.joint_goals.end(), c);
    const auto k = static_cast<std::size_t>(s.outputs_per_vehicle);
    for (std::size_t v = 0; v < static_cast<std::size_t>(s.vehicles); ++v) {
        const std::vector<int> sub(c.begin() + v * k, c.begin() + (v + 1) * k);
        if (!std::binary_search(s.goals[v].begin(), s.goals[v].end(), sub)) return false;
    }
    return true;
}

JointLabeler::JointLabeler(const Scenario& s)
    : k_(s.outputs_per_vehicle), n_(s.vehicles), margin_(s.collision_margin), vehicle_(s.extent) {
    std::vector<int> joint_extent;
    for (int i = 0; i < s.p(); ++i) joint_extent.push_back(s.joint_extent(i));
    joint_ = GridIndex(joint_extent);
    obstacle_mask_.assign(static_cast<std::size_t>(vehicle_.size()), 0);
    for (const auto& c : s.obstacles) obstacle_mask_[static_cast<std::size_t>(vehicle_.linear(c))] = 1;
    goal_mask_.resize(static_cast<std::size_t>(n_));
    for (std::size_t v = 0; v < goal_mask_.size(); ++v) {
        goal_mask_[v].assign(static_cast<std::size_t>(vehicle_.size()), 0);
        for (const auto& c : s.goals[v]) goal_mask_[v][static_cast<std::size_t>(vehicle_.linear(c))] = 1;
    }
    for (const auto& c : s.joint_goals) joint_goals_.push_back(joint_.linear(c));
    std::sort(joint_goals_.begin(), joint_goals_.end());
}

std::int64_t JointLabeler::vehicle_cell(std::int64_t joint_linear, int v) const {
    return (joint_linear / joint_.stride(v * k_)) % vehicle_.size();
}

CellLabel JointLabeler::obstacle(std::int64_t joint_linear) const {
    for (int v = 0; v < n_; ++v)
        if (obstacle_mask_[static_cast<std::size_t>(vehicle_cell(joint_linear, v))]) return CellLabel::Obstacle;
    for (int a = 0; a < n_; ++a) {
        const std::int64_t ca = vehicle_cell(joint_linear, a);
        for (int b = a + 1; b < n_; ++b) {
            const std::int64_t cb = vehicle_cell(joint_linear, b);
            int dist = 0;
            for (int i = 0; i < k_; ++i)
                dist = std::max(dist, std::abs(vehicle_.coordinate(ca, i) - vehicle_.coordinate(cb, i)));
            if (dist <= margin_) return CellLabel::Obstacle;
        }
    }
    return CellLabel::Free;
}

bool JointLabeler::goal(std::int64_t joint_linear) const {
    if (!joint_goals_.empty()) return std::binary_search(joint_goals_.begin(), joint_goals_.end(), joint_linear);
    for (int v = 0; v < n_; ++v)
        if (!goal_mask_[static_cast<std::size_t>(v)][static_cast<std::size_t>(vehicle_cell(joint_linear, v))])
            return false;
    return true;
}

std::vector<std::uint8_t> JointLabeler::label_all() const {
    const std::int64_t n = joint_.size();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < n; ++c) out[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(obstacle(c));
    return out;
}

std::vector<std::uint8_t> JointLabeler::label_all_serial() const {
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(joint_.size()));
    for (std::int64_t c = 0; c < joint_.size(); ++c) out.push_back(static_cast<std::uint8_t>(obstacle(c)));
    return out;
}

}  // namespace hmp
