#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "hmp/bench.hpp"
#include "hmp/planner.hpp"
#include "hmp/render.hpp"
#include "hmp/runtime.hpp"

namespace {

using namespace hmp;

constexpr const char* kVersion = "hmp 0.1.0";

struct Globals {
    std::uint64_t seed = 1;
    bool quiet = false;
};

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnreachableGoal: return 2;
        case ErrorKind::Safety: return 3;
        case ErrorKind::NumericFailure:
        case ErrorKind::Stuck:
        case ErrorKind::HashMismatch: return 4;
        default: return 1;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
}

PrimitiveMode parse_mode(const std::string& m) {
    if (m == "ND") return PrimitiveMode::NonDeterministic;
    if (m == "D") return PrimitiveMode::Deterministic;
    throw Error(ErrorKind::Parse, "primitive mode must be ND or D, got '" + m + "'");
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, "bad number '" + item + "'");
        }
    }
    return out;
}

// Plans written with --primitives/--final-any carry those settings; apply them
// to the scenario so the hash comparison covers everything else.
Plan load_policy(Scenario s, const std::string& policy_path) {
    const std::string text = read_file(policy_path);
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_object()) {
        if (doc.contains("primitive_mode") && doc["primitive_mode"].is_string())
            s.primitive_mode = parse_mode(doc["primitive_mode"].get<std::string>());
        if (doc.contains("final_any_primitive") && doc["final_any_primitive"].is_boolean())
            s.final_any_primitive = doc["final_any_primitive"].get<bool>();
    }
    return load_plan(s, text);
}

int cmd_plan(const Globals& g, const std::string& scenario_path, const std::string& out_path,
             const std::string& mode, bool final_any) {
    Scenario s = load_scenario(scenario_path);
    if (!mode.empty()) s.primitive_mode = parse_mode(mode);
    if (final_any) s.final_any_primitive = true;
    PlanTimings t;
    const Plan plan = make_plan(s, &t);
    write_file(out_path, serialize_policy(plan));
    if (!g.quiet) {
        std::size_t planned = 0;
        for (double v : plan.solution.value) planned += reachable(v);
        fmt::print("locations {}\nprimitives {}\nma_edges {}\npa_states {}\npa_edges {}\nplanned_states {}\n",
                   plan.ots.num_locations(), plan.ma.size(), plan.ma.num_edges(), plan.pa.num_states(),
                   plan.pa.num_edges(), planned);
        fmt::print("t_ots {:.6f}\nt_ma {:.6f}\nt_pa {:.6f}\nt_solve {:.6f}\n", t.ots, t.ma, t.pa, t.solve);
    }
    return 0;
}

int cmd_check(const Globals& g, const std::string& scenario_path, const std::string& policy_path) {
    const Plan plan = load_policy(load_scenario(scenario_path), policy_path);
    const CheckReport r = check_policy(plan.pa, plan.solution.policy);
    if (r.certified) {
        if (!g.quiet)
            fmt::print("certified: {} states checked, every run reaches a final state within {} steps\n",
                       r.states_checked, r.max_run_length);
        return 0;
    }
    fmt::print("counterexample: {}\n", r.reason);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const bool loop = r.cycle_start && i == *r.cycle_start;
        fmt::print("  {}{}\n", loop ? "loop> " : "", describe_state(plan, r.trace[i]));
    }
    return 1;
}

struct SimulateArgs {
    std::string scenario, policy, out_dir = ".", prefix = "run", x0, v0;
    int random_starts = 0;
    std::vector<std::string> disturbances;
    double t_max = 0.0;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    const Plan plan = load_policy(load_scenario(a.scenario), a.policy);
    const Simulator sim(plan);
    std::vector<Disturbance> w;
    for (const auto& d : a.disturbances) {
        w.push_back(parse_disturbance(d));
        if (w.back().output < 0 || w.back().output >= plan.scenario.p())
            throw Error(ErrorKind::Semantic, fmt::format("disturbance output {} out of range", w.back().output));
    }

    std::vector<Start> starts;
    if (a.random_starts > 0) {
        std::mt19937_64 rng(g.seed);
        for (int i = 0; i < a.random_starts; ++i) starts.push_back(sample_start(sim, rng));
    } else {
        if (a.x0.empty()) throw Error(ErrorKind::Parse, "simulate needs --x0 or --random-starts");
        Start st{parse_vector(a.x0), a.v0.empty() ? std::vector<double>(plan.scenario.p(), 0.0) : parse_vector(a.v0)};
        starts.push_back(std::move(st));
    }
    RunOptions opt;
    if (a.t_max > 0) opt.t_max = a.t_max;

    std::filesystem::create_directories(a.out_dir);
    std::vector<RunResult> results(starts.size());
    std::vector<std::string> errors(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
    // Runs are independent; each writes its own files.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const TrajectoryLog log = sim.run(starts[ui].y, starts[ui].v, w, opt);
        results[ui] = log.result;
        const std::string base = fmt::format("{}/{}_{:03d}", a.out_dir, a.prefix, i);
        std::ofstream csv(base + ".csv", std::ios::binary);
        std::ofstream ev(base + ".events.jsonl", std::ios::binary);
        if (!csv || !ev) {
            errors[ui] = "cannot write " + base;
            continue;
        }
        write_trajectory_csv(csv, log);
        write_events_jsonl(ev, log);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(ErrorKind::Io, e);

    std::size_t reached = 0;
    bool any_violation = false, any_failure = false, any_missed = false;
    if (!g.quiet) fmt::print("run,status,t_reach,recoveries,violations\n");
    for (std::size_t i = 0; i < results.size(); ++i) {
        const RunResult& r = results[i];
        reached += r.status == RunStatus::Reached;
        any_violation = any_violation || r.status == RunStatus::SafetyViolation;
        any_failure = any_failure || r.status == RunStatus::Failure;
        any_missed = any_missed || r.status == RunStatus::NotReached;
        if (!g.quiet)
            fmt::print("{},{},{},{},{}\n", i, to_string(r.status),
                       r.status == RunStatus::Reached ? format_number(r.t_reach) : "", r.recoveries,
                       r.violations.size());
        if (!r.message.empty() && r.status != RunStatus::Reached) fmt::print(stderr, "run {}: {}\n", i, r.message);
    }
    if (!g.quiet) fmt::print("reached {}/{}\n", reached, results.size());
    if (any_violation) return 3;
    if (any_failure) return 4;
    if (any_missed) return 2;
    return 0;
}

int cmd_render(const std::string& traj_path, const std::string& scenario_path, const std::string& out,
               const std::vector<std::string>& axes) {
    const Scenario s = load_scenario(scenario_path);
    std::ifstream in(traj_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + traj_path);
    const TrajectoryTable t = read_trajectory_csv(in);
    write_file(out, render_svg(s, t, parse_axis(axes.at(0)), parse_axis(axes.at(1))));
    return 0;
}

int cmd_ots_dump(const std::string& scenario_path) {
    const Scenario s = load_scenario(scenario_path);
    const Ots ots = build_ots(s);
    const int p = s.p();
    for (Location l = 0; static_cast<std::size_t>(l) < ots.num_locations(); ++l) {
        const std::string cell = fmt::format("({})", fmt::join(ots.cell(l), ","));
        fmt::print("location {} {}{}\n", l, cell, ots.is_goal(l) ? " goal" : "");
        for (const OtsEdge& e : ots.edges(l)) fmt::print("edge {} {} {} {}\n", l, cell, to_string(e.label, p), e.target);
    }
    return 0;
}

int cmd_ma_dump(const std::string& scenario_path, const std::string& mode) {
    Scenario s = load_scenario(scenario_path);
    if (!mode.empty()) s.primitive_mode = parse_mode(mode);
    const ManeuverAutomaton ma = compose(s.p(), s.primitive_mode);
    const int p = s.p();
    for (std::size_t i = 0; i < ma.size(); ++i) {
        const std::string src = to_string(ma.primitive(i), p);
        for (const MaGroup& grp : ma.groups(i))
            for (std::uint32_t t : ma.targets(grp))
                fmt::print("{} {} {}\n", src, to_string(grp.label, p), to_string(ma.primitive(t), p));
    }
    return 0;
}

int cmd_pa_stats(const std::string& scenario_path, const std::string& mode) {
    Scenario s = load_scenario(scenario_path);
    if (!mode.empty()) s.primitive_mode = parse_mode(mode);
    const Ots ots = build_ots(s);
    const ManeuverAutomaton ma = compose(s.p(), s.primitive_mode);
    const auto t0 = std::chrono::steady_clock::now();
    const ProductAutomaton pa = build_pa(ots, ma, s.costs, s.final_any_primitive);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("states {}\nedges {}\nadmissible {}\nfinals {}\nbuild_time_s {:.6f}\n", pa.num_states(),
               pa.num_edges(), pa.count_admissible(), pa.finals().size(), dt);
    return 0;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_vector(text)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid motion planning on gridded workspaces with motion primitives"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Seed for random starts");
    app.add_flag("--quiet", g.quiet, "Suppress summaries");

    std::string scenario, policy, out, mode;
    bool final_any = false;
    auto* plan = app.add_subcommand("plan", "Synthesize a policy");
    plan->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    plan->add_option("-o,--out", out, "Policy file")->required();
    plan->add_option("--primitives", mode, "ND or D");
    plan->add_flag("--final-any", final_any, "Accept any primitive on a goal box as final");

    auto* check = app.add_subcommand("check", "Certify a policy");
    check->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    check->add_option("policy", policy)->required()->check(CLI::ExistingFile);

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Run the closed loop");
    simulate->add_option("scenario", sa.scenario)->required()->check(CLI::ExistingFile);
    simulate->add_option("policy", sa.policy)->required()->check(CLI::ExistingFile);
    simulate->add_option("--x0", sa.x0, "Initial positions y_1,..,y_p");
    simulate->add_option("--v0", sa.v0, "Initial velocities (default rest)");
    simulate->add_option("--random-starts", sa.random_starts, "Number of sampled starts");
    simulate->add_option("--disturbance", sa.disturbances, "t_start,t_end,output,accel (repeatable)");
    simulate->add_option("--out-dir", sa.out_dir, "Directory for trajectory and event files");
    simulate->add_option("--prefix", sa.prefix, "File name prefix");
    simulate->add_option("--t-max", sa.t_max, "Time limit [s]");

    std::string traj;
    std::vector<std::string> axes{"0", "1"};
    auto* render = app.add_subcommand("render", "Render a trajectory to SVG");
    render->add_option("trajectory", traj)->required()->check(CLI::ExistingFile);
    render->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    render->add_option("-o,--out", out, "SVG file")->required();
    render->add_option("--axes", axes, "Two axes: output index or t")->expected(2);

    auto* ots = app.add_subcommand("ots", "Output transition system tools");
    auto* ots_dump = ots->add_subcommand("dump", "Print locations and edges");
    ots_dump->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    ots->require_subcommand(1);

    auto* ma = app.add_subcommand("ma", "Maneuver automaton tools");
    auto* ma_dump = ma->add_subcommand("dump", "Print the composed edge table");
    ma_dump->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    ma_dump->add_option("--primitives", mode, "ND or D");
    ma->require_subcommand(1);

    auto* pa = app.add_subcommand("pa", "Product automaton tools");
    auto* pa_stats = pa->add_subcommand("stats", "Print product automaton sizes");
    pa_stats->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
    pa_stats->add_option("--primitives", mode, "ND or D");
    pa->require_subcommand(1);

    std::string p_list = "1,2", grid_list = "4", modes = "ND,D";
    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "Time the offline stages");
    bench->add_option("--p-list", p_list);
    bench->add_option("--grid-list", grid_list);
    bench->add_option("--modes", modes);
    bench->add_option("--timeout", bo.timeout_s, "Per-configuration budget [s]");
    bench->add_option("--repeat", bo.repeat, "Repetitions; the minimum stage time is reported");
    bench->add_flag("--concurrent", bo.concurrent, "Run configurations concurrently");
    bench->add_option("-o,--out", out, "CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan) return cmd_plan(g, scenario, out, mode, final_any);
        if (*check) return cmd_check(g, scenario, policy);
        if (*simulate) return cmd_simulate(g, sa);
        if (*render) return cmd_render(traj, scenario, out, axes);
        if (*ots_dump) return cmd_ots_dump(scenario);
        if (*ma_dump) return cmd_ma_dump(scenario, mode);
        if (*pa_stats) return cmd_pa_stats(scenario, mode);
        if (*bench) {
            bo.p_list = parse_int_list(p_list);
            bo.grid_list = parse_int_list(grid_list);
            bo.modes.clear();
            std::stringstream ss(modes);
            for (std::string m; std::getline(ss, m, ',');) bo.modes.push_back(parse_mode(m));
            const auto rows = run_bench(bo);
            if (out.empty()) {
                write_bench_csv(std::cout, rows);
            } else {
                std::ofstream f(out);
                if (!f) throw Error(ErrorKind::Io, "cannot write " + out);
                write_bench_csv(f, rows);
            }
            return 0;
        }
    } catch (const Error& e) {
        fmt::print(stderr, "hmp: {}: {}\n", to_string(e.kind()), e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        fmt::print(stderr, "hmp: {}\n", e.what());
        return 1;
    }
    return 0;
}
