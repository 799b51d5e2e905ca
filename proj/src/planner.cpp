#include "hmp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <queue>

#include <fmt/format.h>
#include <json.hpp>

namespace hmp {

using nlohmann::json;

Policy::Policy(const std::vector<std::vector<PolicyEntry>>& rows, std::vector<std::int32_t> dispatch)
    : dispatch_(std::move(dispatch)) {
    offset_.reserve(rows.size() + 1);
    offset_.push_back(0);
    for (const auto& row : rows) {
        entries_.insert(entries_.end(), row.begin(), row.end());
        offset_.push_back(entries_.size());
    }
}

std::optional<StateId> Policy::choose(StateId q, FaceLabel sigma) const {
    if (q >= num_states()) return std::nullopt;
    for (const PolicyEntry& e : entries(q))
        if (e.label == sigma) return e.target;
    return std::nullopt;
}

double bellman(const ProductAutomaton& pa, const std::vector<double>& value, StateId q) {
    if (pa.is_final(q)) return pa.terminal_cost(q);
    const auto groups = pa.groups(q);
    if (groups.empty()) return kUnreachable;
    double worst = 0.0;
    for (const PaGroup& g : groups) {
        double best = kUnreachable;
        for (std::uint64_t e = g.begin; e < g.end; ++e)
            best = std::min(best, pa.edge_cost(e) + value[pa.edge_target(e)]);
        worst = std::max(worst, best);
    }
    return worst;
}

namespace {

std::vector<double> initial_values(const ProductAutomaton& pa) {
    std::vector<double> v(pa.num_states(), kUnreachable);
    for (StateId q : pa.finals()) v[q] = pa.terminal_cost(q);
    return v;
}

}  // namespace

Solution solve(const ProductAutomaton& pa) {
    finals(pa);
    const std::size_t n = pa.num_states();
    for (std::uint64_t e = 0; e < pa.num_edges(); ++e)
        if (!(pa.edge_cost(e) > 0.0))
            throw Error(ErrorKind::Contract, "label-setting solve requires strictly positive edge costs");

    // Reverse adjacency: incoming edges of each state, identified by edge index.
    std::vector<std::uint64_t> edge_group(pa.num_edges());
    std::vector<StateId> group_source;
    std::vector<std::uint64_t> in_offset(n + 1, 0);
    for (StateId q = 0; q < n; ++q) {
        for (const PaGroup& g : pa.groups(q)) {
            for (std::uint64_t e = g.begin; e < g.end; ++e) {
                edge_group[e] = group_source.size();
                ++in_offset[pa.edge_target(e) + 1];
            }
            group_source.push_back(q);
        }
    }
    for (std::size_t q = 0; q < n; ++q) in_offset[q + 1] += in_offset[q];
    std::vector<std::uint64_t> incoming(pa.num_edges());
    {
        std::vector<std::uint64_t> fill(in_offset.begin(), in_offset.end() - 1);
        for (std::uint64_t e = 0; e < pa.num_edges(); ++e) incoming[fill[pa.edge_target(e)]++] = e;
    }

    std::vector<double> value(n, kUnreachable);
    std::vector<double> tentative(n, kUnreachable);
    std::vector<double> group_best(group_source.size(), kUnreachable);
    std::vector<std::uint32_t> open_groups(n, 0);
    std::vector<std::uint8_t> settled(n, 0);
    for (StateId q = 0; q < n; ++q) open_groups[q] = static_cast<std::uint32_t>(pa.groups(q).size());

    using Item = std::pair<double, StateId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (StateId q : pa.finals()) {
        tentative[q] = pa.terminal_cost(q);
        heap.emplace(tentative[q], q);
    }

    while (!heap.empty()) {
        const auto [v, q] = heap.top();
        heap.pop();
        if (settled[q] || v != tentative[q]) continue;
        settled[q] = 1;
        value[q] = v;
        for (std::uint64_t k = in_offset[q]; k < in_offset[q + 1]; ++k) {
            const std::uint64_t e = incoming[k];
            const std::uint64_t gid = edge_group[e];
            const StateId src = group_source[gid];
            if (settled[src] || pa.is_final(src)) continue;
            const double cand = pa.edge_cost(e) + v;
            if (!(cand < group_best[gid])) continue;
            if (!reachable(group_best[gid])) --open_groups[src];
            group_best[gid] = cand;
            if (open_groups[src] != 0) continue;
            double worst = 0.0;
            const std::uint64_t first = pa.group_index(src);
            for (std::uint64_t g = first; g < pa.group_index(src + 1); ++g) worst = std::max(worst, group_best[g]);
            if (worst < tentative[src]) {
                tentative[src] = worst;
                heap.emplace(worst, src);
            }
        }
    }

    Solution sol;
    sol.policy = extract_policy(pa, value);
    sol.value = std::move(value);
    return sol;
}

std::vector<double> value_iteration(const ProductAutomaton& pa) {
    std::vector<double> cur = initial_values(pa);
    std::vector<double> next(cur.size());
    const auto n = static_cast<std::int64_t>(cur.size());
    bool changed = true;
    while (changed) {
        changed = false;
#pragma omp parallel for schedule(dynamic, 256) reduction(|| : changed)
        for (std::int64_t q = 0; q < n; ++q) {
            const auto uq = static_cast<std::size_t>(q);
            next[uq] = bellman(pa, cur, static_cast<StateId>(q));
            changed = changed || next[uq] != cur[uq];
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<double> value_iteration_serial(const ProductAutomaton& pa) {
    std::vector<double> cur = initial_values(pa);
    std::vector<double> next(cur.size());
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId q = 0; q < cur.size(); ++q) {
            next[q] = bellman(pa, cur, q);
            changed = changed || next[q] != cur[q];
        }
        cur.swap(next);
    }
    return cur;
}

Policy extract_policy(const ProductAutomaton& pa, const std::vector<double>& value) {
    const std::size_t n = pa.num_states();
    std::vector<std::vector<PolicyEntry>> rows(n);
    for (StateId q = 0; q < n; ++q) {
        if (pa.is_final(q) || !reachable(value[q])) continue;
        for (const PaGroup& g : pa.groups(q)) {
            PolicyEntry best{g.label, kInvalidState};
            double best_cost = kUnreachable;
            for (std::uint64_t e = g.begin; e < g.end; ++e) {
                const double c = pa.edge_cost(e) + value[pa.edge_target(e)];
                const StateId t = pa.edge_target(e);
                if (c < best_cost || (c == best_cost && reachable(c) && t < best.target)) {
                    best_cost = c;
                    best.target = t;
                }
            }
            rows[q].push_back(best);
        }
    }
    const std::size_t nl = pa.num_primitives() == 0 ? 0 : n / pa.num_primitives();
    std::vector<std::int32_t> dispatch(nl, -1);
    for (std::size_t l = 0; l < nl; ++l) {
        double best = kUnreachable;
        for (std::size_t mi = 0; mi < pa.num_primitives(); ++mi) {
            const double v = value[pa.state(static_cast<Location>(l), mi)];
            if (v < best) {
                best = v;
                dispatch[l] = static_cast<std::int32_t>(mi);
            }
        }
    }
    return Policy(rows, std::move(dispatch));
}

CheckReport check_policy(const ProductAutomaton& pa, const Policy& policy) {
    const std::size_t n = pa.num_states();
    CheckReport report;
    if (policy.num_states() != n) {
        report.reason = "policy covers a different number of states";
        return report;
    }
    enum : std::uint8_t { kWhite, kGray, kBlack };
    std::vector<std::uint8_t> color(n, kWhite);
    std::vector<std::size_t> depth(n, 0);

    // Successors of q under the policy; an empty optional reports why q is a dead end.
    auto successors = [&](StateId q, std::vector<StateId>& out) -> std::string {
        out.clear();
        if (pa.is_final(q)) return {};
        const auto groups = pa.groups(q);
        if (groups.empty()) return "state has no outgoing edges and is not final";
        for (const PaGroup& g : groups) {
            const auto choice = policy.choose(q, g.label);
            if (!choice) return "no policy choice for reachable face " + to_string(g.label, pa.p());
            bool valid = false;
            for (std::uint64_t e = g.begin; e < g.end && !valid; ++e) valid = pa.edge_target(e) == *choice;
            if (!valid) return "policy choice for face " + to_string(g.label, pa.p()) + " is not an edge";
            out.push_back(*choice);
        }
        return {};
    };

    std::vector<StateId> roots;
    for (StateId q = 0; q < n; ++q)
        if (policy.planned(q)) roots.push_back(q);
    for (std::size_t l = 0; l * pa.num_primitives() < n; ++l) {
        const std::int32_t mi = policy.dispatch(static_cast<Location>(l));
        if (mi >= 0) roots.push_back(pa.state(static_cast<Location>(l), static_cast<std::size_t>(mi)));
    }

    struct Frame {
        StateId q;
        std::vector<StateId> next;
        std::size_t at = 0;
    };
    std::vector<Frame> stack;
    std::vector<StateId> scratch;
    for (StateId root : roots) {
        if (color[root] != kWhite) continue;
        auto enter = [&](StateId q) -> bool {
            const std::string why = successors(q, scratch);
            if (!why.empty()) {
                for (const Frame& f : stack) report.trace.push_back(f.q);
                report.trace.push_back(q);
                report.reason = why;
                return false;
            }
            color[q] = kGray;
            ++report.states_checked;
            stack.push_back({q, scratch, 0});
            return true;
        };
        if (!enter(root)) return report;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.at == f.next.size()) {
                std::size_t d = 0;
                for (StateId t : f.next) d = std::max(d, depth[t] + 1);
                depth[f.q] = d;
                report.max_run_length = std::max(report.max_run_length, d);
                color[f.q] = kBlack;
                stack.pop_back();
                continue;
            }
            const StateId t = f.next[f.at++];
            if (color[t] == kBlack) continue;
            if (color[t] == kGray) {
                for (std::size_t i = 0; i < stack.size(); ++i) {
                    if (stack[i].q == t) report.cycle_start = report.trace.size();
                    report.trace.push_back(stack[i].q);
                }
                report.reason = "closed loop contains a cycle";
                return report;
            }
            if (!enter(t)) return report;
        }
    }
    report.certified = report.max_run_length <= n;
    if (!report.certified) report.reason = "run length exceeds the number of states";
    return report;
}

Plan make_plan(const Scenario& s, PlanTimings* timings) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    const auto t0 = clock::now();
    Ots ots = build_ots(s);
    const auto t1 = clock::now();
    ManeuverAutomaton ma = compose(s.p(), s.primitive_mode);
    const auto t2 = clock::now();
    ProductAutomaton pa = build_pa(ots, ma, s.costs, s.final_any_primitive);
    const auto t3 = clock::now();
    Solution sol = solve(pa);
    const auto t4 = clock::now();
    if (timings) *timings = {seconds(t0, t1), seconds(t1, t2), seconds(t2, t3), seconds(t3, t4)};

    bool any_start = false;
    bool any_non_goal = false;
    for (Location l = 0; static_cast<std::size_t>(l) < ots.num_locations(); ++l) {
        if (ots.is_goal(l)) continue;
        any_non_goal = true;
        any_start = any_start || sol.policy.dispatch(l) >= 0;
    }
    if (any_non_goal && !any_start)
        throw Error(ErrorKind::UnreachableGoal, "no location outside the goal can guarantee reaching it");
    return Plan{s, std::move(ots), std::move(ma), std::move(pa), std::move(sol)};
}

std::string describe_state(const Plan& plan, StateId q) {
    const Location l = plan.pa.location(q);
    const CompositePrimitive m = plan.ma.primitive(plan.pa.primitive_index(q));
    return fmt::format("q={} cell=({}) prim={}", q, fmt::join(plan.ots.cell(l), ","), to_string(m, plan.pa.p()));
}

namespace {

const char* mode_name(PrimitiveMode m) { return m == PrimitiveMode::NonDeterministic ? "ND" : "D"; }

}  // namespace

std::string serialize_policy(const Plan& plan) {
    const int p = plan.pa.p();
    const auto& value = plan.solution.value;
    const auto& policy = plan.solution.policy;
    json states = json::array();
    for (StateId q = 0; q < plan.pa.num_states(); ++q) {
        if (!reachable(value[q])) continue;
        json choices = json::object();
        for (const PolicyEntry& e : policy.entries(q)) {
            choices[to_string(e.label, p)] =
                e.target == kInvalidState
                    ? std::string("?")
                    : to_string(plan.ma.primitive(plan.pa.primitive_index(e.target)), p);
        }
        states.push_back({{"q", q},
                          {"cell", plan.ots.cell(plan.pa.location(q))},
                          {"prim", to_string(plan.ma.primitive(plan.pa.primitive_index(q)), p)},
                          {"value", value[q]},
                          {"choices", choices}});
    }
    json dispatch = json::array();
    for (Location l = 0; static_cast<std::size_t>(l) < plan.ots.num_locations(); ++l) {
        const std::int32_t mi = policy.dispatch(l);
        if (mi < 0) continue;
        dispatch.push_back({{"location", l},
                            {"cell", plan.ots.cell(l)},
                            {"prim", to_string(plan.ma.primitive(static_cast<std::size_t>(mi)), p)}});
    }
    const Scenario& s = plan.scenario;
    json doc = {
        {"format", "hmp-policy"},
        {"version", 1},
        {"solver", kSolverVersion},
        {"scenario_hash", scenario_hash(s)},
        {"primitive_mode", mode_name(s.primitive_mode)},
        {"final_any_primitive", s.final_any_primitive},
        {"costs",
         {{"edge_cost", s.costs.edge_cost},
          {"terminal_cost", s.costs.terminal_cost},
          {"variant", s.costs.variant == CostVariant::Uniform ? "uniform" : "moving_coords"}}},
        {"num_locations", plan.ots.num_locations()},
        {"num_primitives", plan.ma.size()},
        {"num_states", plan.pa.num_states()},
        {"states", states},
        {"dispatch", dispatch},
    };
    return doc.dump(1) + "\n";
}

Plan load_plan(const Scenario& s, std::string_view policy_text) {
    json doc;
    try {
        doc = json::parse(policy_text.begin(), policy_text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("policy file: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "hmp-policy")
        throw Error(ErrorKind::Parse, "not a policy document");
    const std::string hash = doc.value("scenario_hash", "");
    if (hash != scenario_hash(s))
        throw Error(ErrorKind::HashMismatch,
                    fmt::format("policy was planned for scenario {}, not {}", hash, scenario_hash(s)));

    Plan plan{s, build_ots(s), compose(s.p(), s.primitive_mode), {}, {}};
    plan.pa = build_pa(plan.ots, plan.ma, s.costs, s.final_any_primitive);
    const int p = s.p();
    const std::size_t n = plan.pa.num_states();
    if (doc.value("num_states", std::size_t{0}) != n)
        throw Error(ErrorKind::Parse, "policy state count does not match the scenario");

    std::vector<double> value(n, kUnreachable);
    std::vector<std::vector<PolicyEntry>> rows(n);
    try {
        for (const json& st : doc.at("states")) {
            const auto q = st.at("q").get<StateId>();
            if (q >= n) throw Error(ErrorKind::Parse, fmt::format("policy state {} out of range", q));
            value[q] = st.at("value").get<double>();
            const Location l = plan.pa.location(q);
            for (const auto& [label_text, prim_text] : st.at("choices").items()) {
                PolicyEntry entry{parse_label(label_text), kInvalidState};
                const std::string prim = prim_text.get<std::string>();
                if (prim.size() == static_cast<std::size_t>(p) && prim.find_first_not_of("HFB") == std::string::npos) {
                    const Neighbor nb = neighbor(plan.ots, l, entry.label);
                    const std::int32_t mi = plan.ma.index_of(parse_primitive(prim));
                    if (nb.kind == NeighborKind::Free && mi >= 0)
                        entry.target = plan.pa.state(nb.location, static_cast<std::size_t>(mi));
                }
                rows[q].push_back(entry);
            }
            std::sort(rows[q].begin(), rows[q].end(),
                      [](const PolicyEntry& a, const PolicyEntry& b) { return a.label < b.label; });
        }
        std::vector<std::int32_t> dispatch(plan.ots.num_locations(), -1);
        for (const json& d : doc.at("dispatch")) {
            const auto l = d.at("location").get<Location>();
            if (l < 0 || static_cast<std::size_t>(l) >= dispatch.size())
                throw Error(ErrorKind::Parse, "dispatch location out of range");
            dispatch[static_cast<std::size_t>(l)] = plan.ma.index_of(parse_primitive(d.at("prim").get<std::string>()));
        }
        plan.solution.policy = Policy(rows, std::move(dispatch));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("policy file: ") + e.what());
    }
    plan.solution.value = std::move(value);
    return plan;
}

}  // namespace hmp
