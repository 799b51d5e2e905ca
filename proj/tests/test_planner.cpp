#include <doctest.h>

#include <deque>
#include <random>

#include "helpers.hpp"
#include "hmp/planner.hpp"

using namespace hmp;

namespace {

// Independent acyclicity oracle: build the closed-loop graph from the same
// roots and run Kahn's algorithm. True iff every run reaches a final state.
bool kahn_certifies(const ProductAutomaton& pa, const Policy& policy) {
    const std::size_t n = pa.num_states();
    std::vector<StateId> roots;
    for (StateId q = 0; q < n; ++q)
        if (policy.planned(q)) roots.push_back(q);
    for (std::size_t l = 0; l * pa.num_primitives() < n; ++l)
        if (policy.dispatch(static_cast<Location>(l)) >= 0)
            roots.push_back(pa.state(static_cast<Location>(l), static_cast<std::size_t>(policy.dispatch(static_cast<Location>(l)))));
    std::vector<std::vector<StateId>> succ(n);
    std::vector<char> seen(n, 0);
    std::deque<StateId> work(roots.begin(), roots.end());
    for (StateId r : roots) seen[r] = 1;
    while (!work.empty()) {
        const StateId q = work.front();
        work.pop_front();
        if (pa.is_final(q)) continue;
        if (pa.groups(q).empty()) return false;
        for (const PaGroup& g : pa.groups(q)) {
            const auto c = policy.choose(q, g.label);
            if (!c) return false;
            bool edge = false;
            for (auto e = g.begin; e < g.end; ++e) edge = edge || pa.edge_target(e) == *c;
            if (!edge) return false;
            succ[q].push_back(*c);
            if (!seen[*c]) {
                seen[*c] = 1;
                work.push_back(*c);
            }
        }
    }
    std::vector<int> indeg(n, 0);
    std::size_t nodes = 0;
    for (StateId q = 0; q < n; ++q) {
        nodes += seen[q];
        for (StateId t : succ[q]) ++indeg[t];
    }
    std::deque<StateId> ready;
    for (StateId q = 0; q < n; ++q)
        if (seen[q] && indeg[q] == 0) ready.push_back(q);
    std::size_t removed = 0;
    while (!ready.empty()) {
        const StateId q = ready.front();
        ready.pop_front();
        ++removed;
        for (StateId t : succ[q])
            if (--indeg[t] == 0) ready.push_back(t);
    }
    return removed == nodes;
}

// Naive worst-case fixpoint in Gauss-Seidel order, written against the PA only.
std::vector<double> naive_values(const ProductAutomaton& pa) {
    std::vector<double> v(pa.num_states(), kUnreachable);
    for (StateId q : pa.finals()) v[q] = pa.terminal_cost(q);
    for (bool changed = true; changed;) {
        changed = false;
        for (StateId q = 0; q < pa.num_states(); ++q) {
            if (pa.is_final(q) || pa.groups(q).empty()) continue;
            double worst = -1.0;
            for (const PaGroup& g : pa.groups(q)) {
                double best = kUnreachable;
                for (auto e = g.begin; e < g.end; ++e) best = std::min(best, pa.edge_cost(e) + v[pa.edge_target(e)]);
                worst = std::max(worst, best);
            }
            if (worst < v[q]) {
                v[q] = worst;
                changed = true;
            }
        }
    }
    return v;
}

}  // namespace

TEST_CASE("corridor values count box traversals") {
    const Plan plan = make_plan(test::single({3}, {}, {{2}}));
    const auto& pa = plan.pa;
    const std::size_t f = static_cast<std::size_t>(plan.ma.index_of(parse_primitive("F")));
    const std::size_t b = static_cast<std::size_t>(plan.ma.index_of(parse_primitive("B")));
    const std::size_t h = plan.ma.hold_index();
    CHECK(plan.solution.value[pa.state(0, f)] == 2.0);
    CHECK(plan.solution.value[pa.state(1, f)] == 1.0);
    CHECK(plan.solution.value[pa.state(2, h)] == 0.0);
    CHECK_FALSE(reachable(plan.solution.value[pa.state(0, h)]));
    CHECK_FALSE(reachable(plan.solution.value[pa.state(0, b)]));
    CHECK(plan.solution.policy.dispatch(0) == static_cast<std::int32_t>(f));
    CHECK(plan.solution.policy.dispatch(2) == static_cast<std::int32_t>(h));
    CHECK(plan.solution.policy.choose(pa.state(1, f), parse_label("+")) == pa.state(2, h));
}

TEST_CASE("fig3 plan certifies") {
    const Plan plan = make_plan(test::fig3());
    const CheckReport r = check_policy(plan.pa, plan.solution.policy);
    CHECK(r.certified);
    CHECK(r.max_run_length >= 3);
    CHECK(kahn_certifies(plan.pa, plan.solution.policy));
    // Diagonal start: (0,0) to (3,3) needs at least 3 boxes.
    const std::int32_t mi = plan.solution.policy.dispatch(0);
    REQUIRE(mi >= 0);
    CHECK(plan.solution.value[plan.pa.state(0, static_cast<std::size_t>(mi))] >= 3.0);
}

TEST_CASE("label setting equals value iteration and a naive fixpoint") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const Plan plan = test::random_plan(rng);
        const auto vi = value_iteration(plan.pa);
        CHECK(vi == plan.solution.value);
        CHECK(value_iteration_serial(plan.pa) == vi);
        CHECK(naive_values(plan.pa) == vi);
        CHECK(extract_policy(plan.pa, vi) == plan.solution.policy);
    }
}

TEST_CASE("values satisfy the Bellman equation") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Plan plan = test::random_plan(rng);
        for (StateId q = 0; q < plan.pa.num_states(); ++q)
            CHECK(bellman(plan.pa, plan.solution.value, q) == plan.solution.value[q]);
    }
}

TEST_CASE("scaling edge costs scales values") {
    Scenario s = test::fig3();
    const Plan a = make_plan(s);
    s.costs.edge_cost = 3.0;
    const Plan b = make_plan(s);
    for (std::size_t q = 0; q < a.solution.value.size(); ++q) CHECK(b.solution.value[q] == 3.0 * a.solution.value[q]);
    CHECK(a.solution.policy == b.solution.policy);
}

TEST_CASE("adding an obstacle never lowers a value") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const Plan base = test::random_plan(rng);
        Scenario s = base.scenario;
        std::vector<int> extra;
        for (Location l = 0; static_cast<std::size_t>(l) < base.ots.num_locations(); ++l)
            if (!base.ots.is_goal(l)) {
                extra = base.ots.cell(l);
                break;
            }
        if (extra.empty()) continue;
        s.obstacles.push_back(extra);
        std::sort(s.obstacles.begin(), s.obstacles.end());
        try {
            const Plan more = make_plan(s);
            for (Location l = 0; static_cast<std::size_t>(l) < more.ots.num_locations(); ++l) {
                const Location lb = base.ots.location_of(more.ots.cell(l));
                for (std::size_t m = 0; m < more.ma.size(); ++m)
                    CHECK(more.solution.value[more.pa.state(l, m)] >= base.solution.value[base.pa.state(lb, m)]);
            }
        } catch (const Error& e) {
            CHECK((e.kind() == ErrorKind::UnreachableGoal || e.kind() == ErrorKind::EmptyWorkspace));
        }
    }
}

TEST_CASE("D-mode values are never below ND-mode values") {
    Scenario s = test::fig3();
    const Plan nd = make_plan(s);
    s.primitive_mode = PrimitiveMode::Deterministic;
    const Plan d = make_plan(s);
    for (Location l = 0; l < 15; ++l)
        for (std::size_t m = 0; m < d.ma.size(); ++m) {
            const auto mi = static_cast<std::size_t>(nd.ma.index_of(d.ma.primitive(m)));
            CHECK(d.solution.value[d.pa.state(l, m)] >= nd.solution.value[nd.pa.state(l, mi)]);
        }
}

TEST_CASE("unreachable goal") {
    // Goal boxed in by obstacles: no edge leads into it.
    try {
        (void)make_plan(test::single({3, 3}, {{1, 0}, {0, 1}, {1, 1}}, {{0, 0}}));
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnreachableGoal);
    }
}

TEST_CASE("non-positive edge costs are rejected by label setting") {
    Scenario s = test::fig3();
    s.costs.edge_cost = 0.0;
    const Ots ots = build_ots(s);
    const auto ma = compose(2, s.primitive_mode);
    CHECK_THROWS_AS((void)solve(build_pa(ots, ma, s.costs)), Error);
}

TEST_CASE("random solvable plans certify") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Plan plan = test::random_plan(rng);
        const CheckReport r = check_policy(plan.pa, plan.solution.policy);
        CHECK(r.certified);
        CHECK(kahn_certifies(plan.pa, plan.solution.policy));
    }
}

TEST_CASE("mutated policies: checker agrees with the Kahn oracle") {
    std::mt19937_64 rng(37);
    Plan plan = make_plan(test::fig3());
    int caught = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Policy mutated = plan.solution.policy;
        std::vector<StateId> planned;
        for (StateId q = 0; q < mutated.num_states(); ++q)
            if (mutated.planned(q)) planned.push_back(q);
        const StateId q = planned[std::uniform_int_distribution<std::size_t>(0, planned.size() - 1)(rng)];
        auto entries = mutated.mutable_entries(q);
        auto& e = entries[std::uniform_int_distribution<std::size_t>(0, entries.size() - 1)(rng)];
        // Half the trials stay within the PA's edge set, half pick any state.
        if (trial % 2 == 0) {
            for (const PaGroup& g : plan.pa.groups(q))
                if (g.label == e.label)
                    e.target = plan.pa.edge_target(std::uniform_int_distribution<std::uint64_t>(g.begin, g.end - 1)(rng));
        } else {
            e.target = static_cast<StateId>(std::uniform_int_distribution<std::size_t>(0, plan.pa.num_states() - 1)(rng));
        }
        const CheckReport r = check_policy(plan.pa, mutated);
        CHECK(r.certified == kahn_certifies(plan.pa, mutated));
        if (!r.certified) {
            ++caught;
            CHECK_FALSE(r.trace.empty());
            CHECK_FALSE(r.reason.empty());
            if (r.cycle_start) CHECK(*r.cycle_start < r.trace.size());
        }
    }
    CHECK(caught > 0);
}

TEST_CASE("a choice outside the edge set is a dead end") {
    const Plan plan = make_plan(test::single({3}, {}, {{2}}));
    Policy p = plan.solution.policy;
    // (2,F) would leave the corridor, so it is no edge target.
    const std::size_t f = static_cast<std::size_t>(plan.ma.index_of(parse_primitive("F")));
    for (PolicyEntry& e : p.mutable_entries(plan.pa.state(1, f))) e.target = plan.pa.state(2, f);
    const CheckReport r = check_policy(plan.pa, p);
    CHECK_FALSE(r.certified);
    CHECK_FALSE(r.cycle_start.has_value());
    CHECK(r.trace.back() == plan.pa.state(1, f));
    CHECK_FALSE(kahn_certifies(plan.pa, p));
}

TEST_CASE("a four-box loop is reported as a lasso") {
    const Plan plan = make_plan(test::fig3());
    const auto& pa = plan.pa;
    auto q = [&](Location l, const char* m) { return pa.state(l, static_cast<std::size_t>(plan.ma.index_of(parse_primitive(m)))); };
    // (0,0) FH -> (1,0) HF -> (1,1) BH -> (0,1) HB -> (0,0) FH
    const StateId ring[] = {q(0, "FH"), q(1, "HF"), q(5, "BH"), q(4, "HB")};
    Policy p = plan.solution.policy;
    for (int i = 0; i < 4; ++i) {
        REQUIRE(p.planned(ring[i]));
        auto entries = p.mutable_entries(ring[i]);
        REQUIRE(entries.size() == 1);
        entries[0].target = ring[(i + 1) % 4];
    }
    const CheckReport r = check_policy(pa, p);
    CHECK_FALSE(r.certified);
    REQUIRE(r.cycle_start.has_value());
    CHECK(r.trace.size() - *r.cycle_start == 4);
    CHECK_FALSE(kahn_certifies(pa, p));
}

TEST_CASE("policy file round-trip and hash mismatch") {
    const Plan plan = make_plan(test::fig3());
    const std::string text = serialize_policy(plan);
    const Plan loaded = load_plan(plan.scenario, text);
    CHECK(loaded.solution.policy == plan.solution.policy);
    CHECK(loaded.solution.value == plan.solution.value);
    CHECK(serialize_policy(loaded) == text);
    CHECK(serialize_policy(make_plan(test::fig3())) == text);

    Scenario edited = plan.scenario;
    edited.obstacles.push_back({0, 3});
    try {
        (void)load_plan(edited, text);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::HashMismatch);
    }
    CHECK_THROWS_AS((void)load_plan(plan.scenario, "{not json"), Error);
}
