#include "hmp/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace hmp {

namespace {

constexpr int kMaxBisections = 60;

double disturbance_at(std::span<const Disturbance> w, int output, double t) {
    double a = 0.0;
    for (const Disturbance& d : w)
        if (d.output == output && t >= d.t_start && t < d.t_end) a += d.accel;
    return a;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Disturbance parse_disturbance(std::string_view text) {
    const auto parts = split(text, ',');
    if (parts.size() != 4) throw Error(ErrorKind::Parse, "disturbance must be 't_start,t_end,output,accel'");
    try {
        Disturbance d{std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]), std::stod(parts[3])};
        if (!(d.t_start < d.t_end)) throw Error(ErrorKind::Semantic, "disturbance needs t_start < t_end");
        return d;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::Parse, "bad number in disturbance '" + std::string(text) + "'");
    }
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::Reached: return 0;
        case RunStatus::NotReached: return 2;
        case RunStatus::SafetyViolation: return 3;
        case RunStatus::Failure: return 4;
    }
    return 4;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Reached: return "reached";
        case RunStatus::NotReached: return "not-reached";
        case RunStatus::SafetyViolation: return "safety-violation";
        case RunStatus::Failure: return "failure";
    }
    return "failure";
}

std::vector<JointCell> TrajectoryLog::box_sequence() const {
    std::vector<JointCell> seq;
    for (const Sample& s : samples)
        if (seq.empty() || seq.back() != s.box) seq.push_back(s.box);
    return seq;
}

Simulator::Simulator(const Plan& plan) : plan_(plan) {
    const Scenario& s = plan.scenario;
    for (int i = 0; i < s.p(); ++i) {
        params_.push_back(AtomicParams::make(s.joint_box_length(i), s.joint_u_max(i)));
        laws_.push_back({atomic_law(Tag::Hold, params_.back()), atomic_law(Tag::Forward, params_.back()),
                         atomic_law(Tag::Backward, params_.back())});
    }
    rho_ = 0.05 * min_box_length(s);
    tau_ = max_time_constant(s);
}

Location Simulator::location(const JointCell& box) const { return plan_.ots.location_of(box); }

LocalState Simulator::local(const HybridState& s, int i) const {
    const auto ui = static_cast<std::size_t>(i);
    return {s.y[ui] - s.box[ui] * params_[ui].d, s.v[ui]};
}

double Simulator::control(const HybridState& s, int i) const {
    const auto ui = static_cast<std::size_t>(i);
    const Tag tag = s.engagement[ui].deferred ? Tag::Hold : s.prim[i];
    double u = hmp::control(laws_[ui][static_cast<std::size_t>(tag)], local(s, i));
    if (const auto& clip = plan_.scenario.numerics.u_clip) u = std::clamp(u, -*clip, *clip);
    return u;
}

HybridState Simulator::integrate_step(const HybridState& s, std::span<const Disturbance> w, double h) const {
    HybridState n = s;
    const auto& clip = plan_.scenario.numerics.u_clip;
    for (int i = 0; i < static_cast<int>(s.y.size()); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Tag tag = s.engagement[ui].deferred ? Tag::Hold : s.prim[i];
        const AtomicLaw& law = laws_[ui][static_cast<std::size_t>(tag)];
        const double lower = s.box[ui] * params_[ui].d;
        auto accel = [&](double t, double y, double v) {
            double u = hmp::control(law, {y - lower, v});
            if (clip) u = std::clamp(u, -*clip, *clip);
            return u + disturbance_at(w, i, t);
        };
        const double t = s.t;
        const double y = s.y[ui];
        const double v = s.v[ui];
        const double k1y = v;
        const double k1v = accel(t, y, v);
        const double k2y = v + 0.5 * h * k1v;
        const double k2v = accel(t + 0.5 * h, y + 0.5 * h * k1y, k2y);
        const double k3y = v + 0.5 * h * k2v;
        const double k3v = accel(t + 0.5 * h, y + 0.5 * h * k2y, k3y);
        const double k4y = v + h * k3v;
        const double k4v = accel(t + h, y + h * k3y, k4y);
        n.y[ui] = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        n.v[ui] = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(n.y[ui]) || !std::isfinite(n.v[ui]))
            throw Error(ErrorKind::NumericFailure, fmt::format("non-finite state on output {} at t={}", i, s.t));
    }
    n.t = s.t + h;
    return n;
}

std::optional<FaceLabel> Simulator::detect_event(const HybridState& prev, const HybridState& next) const {
    FaceLabel label;
    for (int i = 0; i < static_cast<int>(prev.y.size()); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double d = params_[ui].d;
        if (next.y[ui] > (prev.box[ui] + 1) * d) label.set(i, Sign::Plus);
        else if (next.y[ui] < prev.box[ui] * d) label.set(i, Sign::Minus);
    }
    if (label.is_zero()) return std::nullopt;
    return label;
}

Crossing Simulator::refine(const HybridState& prev, std::span<const Disturbance> w, double h) const {
    const double eps = plan_.scenario.numerics.event_tolerance;
    double lo = 0.0;
    double hi = 1.0;
    HybridState at_hi = integrate_step(prev, w, h);
    auto overshoot = [&](const HybridState& s) {
        double worst = 0.0;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double d = params_[i].d;
            const double upper = (prev.box[i] + 1) * d;
            const double lower = prev.box[i] * d;
            if (s.y[i] > upper) worst = std::max(worst, s.y[i] - upper);
            if (s.y[i] < lower) worst = std::max(worst, lower - s.y[i]);
        }
        return worst;
    };
    for (int it = 0; it < kMaxBisections && overshoot(at_hi) > eps; ++it) {
        const double mid = 0.5 * (lo + hi);
        HybridState s = integrate_step(prev, w, mid * h);
        if (detect_event(prev, s)) {
            hi = mid;
            at_hi = std::move(s);
        } else {
            lo = mid;
        }
    }
    const auto label = detect_event(prev, at_hi);
    return {std::move(at_hi), label.value_or(FaceLabel{})};
}

std::vector<Engagement> Simulator::engage(const HybridState& s, CompositePrimitive prim) const {
    std::vector<Engagement> out(s.y.size());
    for (int i = 0; i < static_cast<int>(s.y.size()); ++i) {
        const Tag tag = prim[i];
        const bool now = tag == Tag::Hold || in_invariant(tag, params_[static_cast<std::size_t>(i)], local(s, i));
        out[static_cast<std::size_t>(i)] = {!now, tag};
    }
    return out;
}

bool Simulator::engages_now(const HybridState& s, CompositePrimitive prim) const {
    for (const Engagement& e : engage(s, prim))
        if (e.deferred) return false;
    return true;
}

HybridState Simulator::with_primitive(HybridState s, std::size_t prim_index) const {
    s.prim_index = prim_index;
    s.prim = plan_.ma.primitive(prim_index);
    s.engagement = engage(s, s.prim);
    return s;
}

std::optional<HybridState> Simulator::transition(const HybridState& s, FaceLabel label) const {
    const Location l = location(s.box);
    if (l == kNoLocation) return std::nullopt;
    const StateId q = plan_.pa.state(l, s.prim_index);
    const auto choice = plan_.solution.policy.choose(q, label);
    if (!choice || *choice == kInvalidState) return std::nullopt;

    HybridState n = s;
    for (int i = 0; i < static_cast<int>(s.box.size()); ++i) {
        if (label[i] == Sign::Plus) ++n.box[static_cast<std::size_t>(i)];
        if (label[i] == Sign::Minus) --n.box[static_cast<std::size_t>(i)];
    }
    const Location l2 = location(n.box);
    if (l2 == kNoLocation || plan_.pa.location(*choice) != l2) return std::nullopt;

    // A final state switches to all-Hold to stay in the goal.
    std::size_t next_index = plan_.pa.primitive_index(*choice);
    if (plan_.pa.is_final(*choice)) next_index = plan_.ma.hold_index();
    const CompositePrimitive next = plan_.ma.primitive(next_index);
    const std::vector<Engagement> fresh = engage(n, next);
    for (int i = 0; i < static_cast<int>(s.box.size()); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const bool keep = label[i] == Sign::Zero && next[i] == s.prim[i];
        n.engagement[ui] = keep ? s.engagement[ui] : fresh[ui];
    }
    n.prim_index = next_index;
    n.prim = next;
    return n;
}

HybridState Simulator::recover(const HybridState& s) const {
    CellPoint cp;
    try {
        cp = global_to_cell(plan_.scenario, s.y);
    } catch (const Error& e) {
        throw Error(ErrorKind::Safety, fmt::format("t={}: {}", s.t, e.what()));
    }
    const Location l = location(cp.cell);
    if (l == kNoLocation)
        throw Error(ErrorKind::Safety, fmt::format("t={}: joint box ({}) is an obstacle or a collision", s.t,
                                                   fmt::join(cp.cell, ",")));
    HybridState base = s;
    base.box = cp.cell;
    std::optional<std::size_t> engaged_best;
    std::optional<std::size_t> any_best;
    double engaged_v = kUnreachable;
    double any_v = kUnreachable;
    for (std::size_t mi = 0; mi < plan_.ma.size(); ++mi) {
        const double v = plan_.solution.value[plan_.pa.state(l, mi)];
        if (!reachable(v)) continue;
        if (v < any_v) {
            any_v = v;
            any_best = mi;
        }
        if (v < engaged_v && engages_now(base, plan_.ma.primitive(mi))) {
            engaged_v = v;
            engaged_best = mi;
        }
    }
    if (!any_best)
        throw Error(ErrorKind::Stuck, fmt::format("t={}: no primitive with a finite value at box ({})", s.t,
                                                  fmt::join(cp.cell, ",")));
    return with_primitive(std::move(base), engaged_best ? *engaged_best : *any_best);
}

HybridState Simulator::initial_state(std::span<const double> y0, std::span<const double> v0) const {
    const auto p = static_cast<std::size_t>(plan_.scenario.p());
    if (y0.size() != p || v0.size() != p)
        throw Error(ErrorKind::Semantic, fmt::format("initial state needs {} positions and velocities", p));
    HybridState s;
    s.y.assign(y0.begin(), y0.end());
    s.v.assign(v0.begin(), v0.end());
    s.box.assign(p, 0);
    s.engagement.assign(p, {});
    return recover(s);
}

double Simulator::value(const HybridState& s) const {
    const Location l = location(s.box);
    if (l == kNoLocation) return kUnreachable;
    return plan_.solution.value[plan_.pa.state(l, s.prim_index)];
}

bool Simulator::reached(const HybridState& s) const {
    if (!s.prim.all_hold()) return false;
    const Location l = location(s.box);
    if (l == kNoLocation || !plan_.ots.is_goal(l)) return false;
    double pos = 0.0;
    double vel = 0.0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
        const LocalState x = local(s, static_cast<int>(i));
        pos += (x.xi - 0.5 * params_[i].d) * (x.xi - 0.5 * params_[i].d);
        vel += x.nu * x.nu;
    }
    return std::sqrt(pos) <= rho_ && std::sqrt(vel) * tau_ <= rho_;
}

TrajectoryLog Simulator::run(std::span<const double> y0, std::span<const double> v0, std::span<const Disturbance> w,
                             const RunOptions& options) const {
    const Scenario& sc = plan_.scenario;
    const int p = sc.p();
    const double h = sc.numerics.step;
    const double eps = sc.numerics.event_tolerance;
    TrajectoryLog log;
    log.p = p;

    auto record = [&](const HybridState& s) {
        if (!options.record_samples) return;
        Sample smp{s.t, s.y, s.v, s.box, s.prim, {}};
        for (int i = 0; i < p; ++i) smp.u.push_back(control(s, i));
        log.samples.push_back(std::move(smp));
    };
    auto fail = [&](const Error& e) {
        log.result.status = e.kind() == ErrorKind::Safety ? RunStatus::SafetyViolation : RunStatus::Failure;
        log.result.message = e.what();
        if (e.kind() == ErrorKind::Safety) log.result.violations.push_back(e.what());
    };

    HybridState s;
    try {
        s = initial_state(y0, v0);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Semantic) fail(Error(ErrorKind::Safety, e.what()));
        else fail(e);
        return log;
    }
    const double t_max = options.t_max     ? *options.t_max
                         : sc.numerics.t_max ? *sc.numerics.t_max
                                             : 20.0 * tau_ * (value(s) + 1.0);
    log.result.t_max = t_max;
    record(s);

    try {
        while (true) {
            if (reached(s)) {
                log.result.status = RunStatus::Reached;
                log.result.t_reach = s.t;
                break;
            }
            if (s.t >= t_max) {
                log.result.status = RunStatus::NotReached;
                log.result.message = fmt::format("goal not reached within t_max={}", t_max);
                break;
            }
            for (int i = 0; i < p; ++i) {
                Engagement& e = s.engagement[static_cast<std::size_t>(i)];
                if (e.deferred && in_invariant(e.target, params_[static_cast<std::size_t>(i)], local(s, i)))
                    e.deferred = false;
            }
            HybridState next = integrate_step(s, w, h);
            if (detect_event(s, next)) {
                Crossing c = refine(s, w, h);
                Event ev{c.state.t, c.label, s.box, {}, s.prim, {}, {}, {}};
                for (int i = 0; i < p; ++i) {
                    if (c.label[i] == Sign::Zero) continue;
                    const auto ui = static_cast<std::size_t>(i);
                    if (s.prim[i] == Tag::Hold || s.engagement[ui].deferred) {
                        ev.violation = fmt::format("output {} crossed while holding", i);
                    }
                }
                std::optional<HybridState> after;
                if (is_outcome(s.prim, c.label, p)) {
                    after = transition(c.state, c.label);
                    if (!after) ev.violation += (ev.violation.empty() ? "" : "; ") + std::string("no policy entry");
                } else {
                    ev.violation += (ev.violation.empty() ? "" : "; ") +
                                    fmt::format("label {} is not an outcome of {}", to_string(c.label, p),
                                                to_string(s.prim, p));
                }
                if (!after) {
                    ++log.result.recoveries;
                    after = recover(c.state);
                }
                ev.box_to = after->box;
                ev.prim_to = after->prim;
                for (const Engagement& e : after->engagement) ev.deferred.push_back(e.deferred);
                if (!ev.violation.empty())
                    log.result.violations.push_back(fmt::format("t={}: {}", ev.t, ev.violation));
                log.events.push_back(std::move(ev));
                s = std::move(*after);
            } else {
                s = std::move(next);
            }

            // Avoid, checked at sample resolution.
            if (location(s.box) == kNoLocation)
                throw Error(ErrorKind::Safety, fmt::format("t={}: current box is an obstacle", s.t));
            for (int i = 0; i < p; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const double lower = s.box[ui] * params_[ui].d;
                if (s.y[ui] < lower - eps || s.y[ui] > lower + params_[ui].d + eps)
                    throw Error(ErrorKind::Safety, fmt::format("t={}: output {} left its box unnoticed", s.t, i));
            }
            record(s);
        }
    } catch (const Error& e) {
        fail(e);
    }
    if (options.record_samples && !log.samples.empty() && log.samples.back().t != s.t) record(s);
    return log;
}

Start sample_start(const Simulator& sim, std::mt19937_64& rng) {
    const Plan& plan = sim.plan();
    std::vector<Location> candidates;
    std::vector<Location> goals;
    for (Location l = 0; static_cast<std::size_t>(l) < plan.ots.num_locations(); ++l) {
        if (plan.solution.policy.dispatch(l) < 0) continue;
        (plan.ots.is_goal(l) ? goals : candidates).push_back(l);
    }
    if (candidates.empty()) candidates = goals;
    if (candidates.empty()) throw Error(ErrorKind::Stuck, "no location has a finite value");
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const Location l = candidates[pick(rng)];
    const CompositePrimitive prim =
        plan.ma.primitive(static_cast<std::size_t>(plan.solution.policy.dispatch(l)));
    const JointCell cell = plan.ots.cell(l);
    Start st;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < plan.scenario.p(); ++i) {
        const AtomicParams& a = sim.params(i);
        LocalState x;
        do {
            x = {unit(rng) * a.d, (2.0 * unit(rng) - 1.0) * a.v_star};
        } while (x.xi <= 0.0 || x.xi >= a.d || !in_invariant(prim[i], a, x, 0.0));
        st.y.push_back(cell[static_cast<std::size_t>(i)] * a.d + x.xi);
        st.v.push_back(x.nu);
    }
    return st;
}

std::string format_number(double x) { return fmt::format("{:.9g}", x); }

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
    const int p = log.p;
    out << "t";
    for (const char* name : {"y", "v", "box"})
        for (int i = 1; i <= p; ++i) out << ',' << name << '_' << i;
    out << ",primitive";
    for (int i = 1; i <= p; ++i) out << ",u_" << i;
    out << '\n';
    for (const Sample& s : log.samples) {
        out << format_number(s.t);
        for (double y : s.y) out << ',' << format_number(y);
        for (double v : s.v) out << ',' << format_number(v);
        for (int b : s.box) out << ',' << b;
        out << ',' << to_string(s.prim, p);
        for (double u : s.u) out << ',' << format_number(u);
        out << '\n';
    }
}

void write_events_jsonl(std::ostream& out, const TrajectoryLog& log) {
    for (const Event& e : log.events) {
        nlohmann::ordered_json j;
        j["t"] = e.t;
        j["label"] = to_string(e.label, log.p);
        j["box_from"] = e.box_from;
        j["box_to"] = e.box_to;
        j["prim_from"] = to_string(e.prim_from, log.p);
        j["prim_to"] = to_string(e.prim_to, log.p);
        j["deferred"] = e.deferred;
        if (e.violation.empty()) j["violation"] = nullptr;
        else j["violation"] = e.violation;
        out << j.dump() << '\n';
    }
}

TrajectoryTable read_trajectory_csv(std::istream& in) {
    TrajectoryTable table;
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw Error(ErrorKind::Parse, "empty trajectory file");
    const auto header = split(line, ',');
    if (header.size() < 6 || (header.size() - 2) % 4 != 0 || header[0] != "t")
        throw Error(ErrorKind::Parse, "unrecognized trajectory header");
    const int p = static_cast<int>((header.size() - 2) / 4);
    if (header[static_cast<std::size_t>(3 * p + 1)] != "primitive")
        throw Error(ErrorKind::Parse, "unrecognized trajectory header");
    table.p = p;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != header.size())
            throw Error(ErrorKind::Parse, fmt::format("trajectory row {} has {} fields", row, f.size()));
        try {
            table.t.push_back(std::stod(f[0]));
            std::vector<double> y;
            std::vector<int> box;
            for (int i = 0; i < p; ++i) y.push_back(std::stod(f[static_cast<std::size_t>(1 + i)]));
            for (int i = 0; i < p; ++i) box.push_back(std::stoi(f[static_cast<std::size_t>(1 + 2 * p + i)]));
            table.y.push_back(std::move(y));
            table.box.push_back(std::move(box));
            table.primitive.push_back(f[static_cast<std::size_t>(3 * p + 1)]);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, fmt::format("bad number in trajectory row {}", row));
        }
    }
    if (table.t.empty()) throw Error(ErrorKind::Parse, "trajectory file has no rows");
    return table;
}

}  // namespace hmp
