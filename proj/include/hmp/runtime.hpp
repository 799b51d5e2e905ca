#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hmp/planner.hpp"
#include "hmp/primitives.hpp"

namespace hmp {

/// Piecewise-constant acceleration offset on one joint output over [t_start, t_end).
struct Disturbance {
    double t_start = 0.0;
    double t_end = 0.0;
    int output = 0;
    double accel = 0.0;
};

/// Parses "t_start,t_end,output,accel".
Disturbance parse_disturbance(std::string_view text);

/// Engaged outputs run their commanded atomic law; deferred ones run Hold
/// until the commanded law's invariant admits the local state.
struct Engagement {
    bool deferred = false;
    Tag target = Tag::Hold;
    friend bool operator==(const Engagement&, const Engagement&) = default;
};

struct HybridState {
    double t = 0.0;
    std::vector<double> y;  // global output positions [m]
    std::vector<double> v;  // velocities [m/s]
    JointCell box;
    std::size_t prim_index = 0;
    CompositePrimitive prim;
    std::vector<Engagement> engagement;
};

struct Sample {
    double t = 0.0;
    std::vector<double> y, v;
    JointCell box;
    CompositePrimitive prim;
    std::vector<double> u;
};

struct Event {
    double t = 0.0;
    FaceLabel label;
    JointCell box_from, box_to;
    CompositePrimitive prim_from, prim_to;
    std::vector<bool> deferred;
    std::string violation;  // empty when the crossing matched the abstraction
};

enum class RunStatus { Reached, NotReached, SafetyViolation, Failure };

/// Process exit code for a run outcome: 0, 2, 3, 4.
int exit_code(RunStatus s);
std::string_view to_string(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::NotReached;
    double t_reach = 0.0;
    double t_max = 0.0;
    std::vector<std::string> violations;
    std::string message;
    std::size_t recoveries = 0;
};

struct TrajectoryLog {
    int p = 0;
    std::vector<Sample> samples;
    std::vector<Event> events;
    RunResult result;

    /// Sequence of distinct joint boxes visited.
    std::vector<JointCell> box_sequence() const;
};

struct RunOptions {
    std::optional<double> t_max;  // overrides the scenario and the value-based default
    bool record_samples = true;
};

struct Crossing {
    HybridState state;  // first refined state past the face
    FaceLabel label;
};

/// Closed-loop executor of a plan: integrates the double-integrator outputs
/// under the current composite primitive and switches at face crossings.
class Simulator {
public:
    explicit Simulator(const Plan& plan);

    const Plan& plan() const { return plan_; }
    const AtomicParams& params(int i) const { return params_[static_cast<std::size_t>(i)]; }

    /// Local coordinates of output i relative to the current box.
    LocalState local(const HybridState& s, int i) const;
    /// Commanded acceleration of output i, without disturbance.
    double control(const HybridState& s, int i) const;

    /// One classical RK4 step of every output.
    HybridState integrate_step(const HybridState& s, std::span<const Disturbance> w, double h) const;

    /// Label formed by the outputs of `next` that left `prev`'s box, or none.
    std::optional<FaceLabel> detect_event(const HybridState& prev, const HybridState& next) const;

    /// Bisects the step from `prev` down to the event tolerance.
    Crossing refine(const HybridState& prev, std::span<const Disturbance> w, double h) const;

    /// Moves to the neighbor box and switches primitive per the policy. Returns
    /// nullopt when the policy has no entry for this situation.
    std::optional<HybridState> transition(const HybridState& s, FaceLabel label) const;

    /// Re-localizes from the global position and picks the best finite-value
    /// primitive, preferring ones that engage immediately. Throws Safety when
    /// the position is in an obstacle box or outside, Stuck when no primitive
    /// has a finite value.
    HybridState recover(const HybridState& s) const;

    /// State at rest-or-moving position y0/v0 with the initial primitive chosen
    /// like recover().
    HybridState initial_state(std::span<const double> y0, std::span<const double> v0) const;

    bool reached(const HybridState& s) const;
    double value(const HybridState& s) const;

    TrajectoryLog run(std::span<const double> y0, std::span<const double> v0, std::span<const Disturbance> w,
                      const RunOptions& options = {}) const;

private:
    Location location(const JointCell& box) const;
    std::vector<Engagement> engage(const HybridState& s, CompositePrimitive prim) const;
    bool engages_now(const HybridState& s, CompositePrimitive prim) const;
    HybridState with_primitive(HybridState s, std::size_t prim_index) const;

    const Plan& plan_;
    std::vector<AtomicParams> params_;
    std::vector<std::array<AtomicLaw, 3>> laws_;
    double rho_ = 0.0;
    double tau_ = 0.0;
};

/// Random start: a non-goal location with a finite dispatch value and a local
/// state drawn uniformly from the dispatched primitive's invariants.
struct Start {
    std::vector<double> y, v;
};
Start sample_start(const Simulator& sim, std::mt19937_64& rng);

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
void write_events_jsonl(std::ostream& out, const TrajectoryLog& log);
std::string format_number(double x);

/// Rows of a trajectory file, as needed for rendering.
struct TrajectoryTable {
    int p = 0;
    std::vector<double> t;
    std::vector<std::vector<double>> y;      // per row
    std::vector<std::vector<int>> box;       // per row
    std::vector<std::string> primitive;      // per row
};
TrajectoryTable read_trajectory_csv(std::istream& in);

}  // namespace hmp
