#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "hmp/bench.hpp"
#include "hmp/render.hpp"

using namespace hmp;

namespace {

TrajectoryTable fig3_table() {
    const Plan plan = make_plan(test::fig3());
    const Simulator sim(plan);
    const std::vector<double> y0{0.5, 0.5}, v0{0.0, 0.0};
    std::ostringstream out;
    write_trajectory_csv(out, sim.run(y0, v0, {}));
    std::istringstream in(out.str());
    return read_trajectory_csv(in);
}

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("svg has shaded cells, one polyline and event markers") {
    const TrajectoryTable t = fig3_table();
    const std::string svg = render_svg(test::fig3(), t, parse_axis("0"), parse_axis("1"));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "<polyline") == 1);
    CHECK(count(svg, "fill=\"#888888\"") == 1);
    CHECK(count(svg, "fill=\"#b6e3b6\"") == 1);
    CHECK(count(svg, "class=\"event\"") >= 3);
}

TEST_CASE("position against time") {
    const TrajectoryTable t = fig3_table();
    const std::string svg = render_svg(test::fig3(), t, parse_axis("t"), parse_axis("0"));
    CHECK(count(svg, "<polyline") == 1);
}

TEST_CASE("render errors") {
    const TrajectoryTable t = fig3_table();
    CHECK_THROWS_AS((void)render_svg(test::fig3(), t, parse_axis("0"), parse_axis("2")), Error);
    CHECK_THROWS_AS((void)render_svg(test::fig3(), TrajectoryTable{2, {}, {}, {}, {}}, parse_axis("0"), parse_axis("1")),
                    Error);
    CHECK_THROWS_AS((void)parse_axis("x"), Error);
}

TEST_CASE("bench counts follow the closed forms") {
    for (int g : {3, 4}) {
        const BenchRecord nd = run_bench_config(2, g, PrimitiveMode::NonDeterministic, 600, 1);
        CHECK(nd.ots_locations == static_cast<std::size_t>(g * g));
        CHECK(nd.ma_primitives == 9);
        CHECK(nd.pa_states == static_cast<std::size_t>(g * g * 9));
        const BenchRecord d = run_bench_config(2, g, PrimitiveMode::Deterministic, 600, 1);
        CHECK(d.ma_primitives == 5);
        CHECK(d.pa_edges < nd.pa_edges);
        CHECK_FALSE(nd.timeout);
    }
    const BenchRecord three = run_bench_config(3, 3, PrimitiveMode::NonDeterministic, 600, 1);
    CHECK(three.pa_states == 27u * 27u);
}

TEST_CASE("bench csv layout") {
    BenchOptions o;
    o.p_list = {1};
    o.grid_list = {3, 4};
    const auto rows = run_bench(o);
    CHECK(rows.size() == 4);
    std::ostringstream out;
    write_bench_csv(out, rows);
    const std::string text = out.str();
    CHECK(text.rfind("p,grid,mode,ots_locations,ma_primitives,ma_edges,pa_states,pa_edges,t_ots,t_ma,t_pa,t_solve,"
                     "t_total,timeout\n",
                     0) == 0);
    CHECK(count(text, "\n") == 5);
}

TEST_CASE("a zero budget flags a timeout") {
    const BenchRecord r = run_bench_config(2, 4, PrimitiveMode::NonDeterministic, 0.0, 1);
    CHECK(r.timeout);
}
