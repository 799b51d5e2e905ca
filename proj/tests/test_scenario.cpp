#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "hmp/scenario.hpp"

using namespace hmp;

namespace {

ErrorKind kind_of(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;  // sentinel: no error
}

// Independent collision oracle: per-vehicle Chebyshev distance.
bool collides(const JointCell& c, int k, int vehicles, int margin) {
    for (int a = 0; a < vehicles; ++a)
        for (int b = a + 1; b < vehicles; ++b) {
            int dist = 0;
            for (int i = 0; i < k; ++i)
                dist = std::max(dist, std::abs(c[static_cast<std::size_t>(a * k + i)] - c[static_cast<std::size_t>(b * k + i)]));
            if (dist <= margin) return true;
        }
    return false;
}

}  // namespace

TEST_CASE("the shipped scenarios parse") {
    const Scenario f = load_scenario(test::scenario_path("fig3.json"));
    CHECK(f.p() == 2);
    CHECK(f.obstacles == std::vector<std::vector<int>>{{2, 2}});
    const Scenario s = load_scenario(test::scenario_path("swap.json"));
    CHECK(s.p() == 4);
    CHECK(s.vehicles == 2);
    CHECK(s.joint_extent(3) == 6);
    CHECK(s.joint_box_length(2) == 1.0);
}

TEST_CASE("defaults derive from the grid constants") {
    const Scenario s = load_scenario(test::scenario_path("swap.json"));
    CHECK(s.numerics.step == doctest::Approx(0.005 * std::sqrt(0.75)));
    CHECK(s.numerics.event_tolerance == doctest::Approx(0.75e-6));
    CHECK(max_time_constant(s) == doctest::Approx(1.0));
    CHECK(min_box_length(s) == 0.75);
}

TEST_CASE("serialize then parse is the identity") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        Scenario s = test::random_scenario(rng);
        s.numerics.t_max = 12.5;
        s.costs.variant = CostVariant::MovingCoords;
        CHECK(parse_scenario(serialize_scenario(s)) == s);
    }
}

TEST_CASE("hash ignores numerics but not geometry") {
    Scenario a = test::fig3();
    Scenario b = a;
    b.numerics.step *= 0.5;
    CHECK(scenario_hash(a) == scenario_hash(b));
    CHECK(scenario_hash(a).size() == 16);
    b.obstacles.push_back({0, 3});
    CHECK(scenario_hash(a) != scenario_hash(b));
}

TEST_CASE("syntax errors report line and column") {
    try {
        (void)parse_scenario("{\n  \"grid\": {\n   ,\n}");
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("semantic errors") {
    const std::string base_grid = R"("grid": {"extent": [3], "box_lengths": [1], "u_max": [1]}, "vehicles": {"count": 1})";
    CHECK(kind_of("{" + base_grid + R"(, "goals": {"per_vehicle": [[[2]]]}})") == ErrorKind::Io);
    CHECK(kind_of("{" + base_grid + R"(, "goals": {"per_vehicle": [[[2]]]}, "bogus": 1})") == ErrorKind::Semantic);
    CHECK(kind_of("{" + base_grid + R"(, "goals": {"per_vehicle": [[[7]]]}})") == ErrorKind::Semantic);
    CHECK(kind_of(R"({"grid": {"extent": [3], "box_lengths": [-1], "u_max": [1]}, "vehicles": {}, "goals": {"per_vehicle": [[[2]]]}})") ==
          ErrorKind::Semantic);
    CHECK(kind_of("{" + base_grid + R"(, "goals": {"per_vehicle": [[[2]]]}, "primitive_mode": "X"})") ==
          ErrorKind::Semantic);
    CHECK(kind_of("{" + base_grid + R"(, "goals": {"per_vehicle": [[[2]]]}, "numerics": {"step": 0}})") ==
          ErrorKind::Semantic);
    CHECK(kind_of(R"({"grid": {"extent": [3], "box_lengths": [1], "u_max": [1]}, "goals": {"per_vehicle": [[[2]]]}})") ==
          ErrorKind::Semantic);
    CHECK(kind_of("{" + base_grid + R"(, "obstacles": [[2]], "goals": {"per_vehicle": [[[2]]]}})") ==
          ErrorKind::Semantic);
}

TEST_CASE("grid index: output 0 varies fastest") {
    GridIndex g({4, 3});
    CHECK(g.size() == 12);
    CHECK(g.linear({1, 0}) == 1);
    CHECK(g.linear({0, 1}) == 4);
    CHECK(g.cell(7) == std::vector<int>{3, 1});
    CHECK(g.coordinate(7, 1) == 1);
    CHECK_FALSE(g.contains({4, 0}));
    CHECK_FALSE(g.contains({0, -1}));
}

TEST_CASE("joint labeling matches a brute-force collision oracle") {
    Scenario s = load_scenario(test::scenario_path("swap.json"));
    for (int margin : {0, 1}) {
        s.collision_margin = margin;
        const JointLabeler lab(s);
        const auto labels = lab.label_all();
        CHECK(labels == lab.label_all_serial());
        const GridIndex& g = lab.joint_grid();
        CHECK(g.size() == 900);
        for (std::int64_t c = 0; c < g.size(); ++c) {
            const JointCell cell = g.cell(c);
            bool expect = collides(cell, 2, 2, margin);
            for (int v = 0; v < 2; ++v) {
                const std::vector<int> sub{cell[static_cast<std::size_t>(2 * v)], cell[static_cast<std::size_t>(2 * v + 1)]};
                expect = expect || std::binary_search(s.obstacles.begin(), s.obstacles.end(), sub);
            }
            CHECK((labels[static_cast<std::size_t>(c)] != 0) == expect);
            CHECK((joint_obstacle_label(s, cell) == CellLabel::Obstacle) == expect);
        }
    }
}

TEST_CASE("joint goals are the product of per-vehicle goals unless given") {
    Scenario s = load_scenario(test::scenario_path("swap.json"));
    CHECK(joint_goal_label(s, {4, 3, 0, 3}));
    CHECK_FALSE(joint_goal_label(s, {0, 3, 4, 3}));
    s.joint_goals = {{0, 3, 4, 3}};
    CHECK(joint_goal_label(s, {0, 3, 4, 3}));
    CHECK_FALSE(joint_goal_label(s, {4, 3, 0, 3}));
}
