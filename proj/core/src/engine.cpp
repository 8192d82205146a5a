#include "starnav/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace starnav {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

struct Deriv {
    Vec2 dx;
    double dpsi = 0.0;
};

// Raised when an RK4 stage lands outside the mapped freespace, where the
// field is undefined; the caller reacts by halving dt.
struct StageOutsideFreespace : Error {
    StageOutsideFreespace() : Error("integration stage left the mapped freespace") {}
};

// The command field for one frozen sensing snapshot.
struct FieldContext {
    const World& world;
    const SemanticMap& map;
    ModelLayer model;
    std::vector<Fragment> sensed;  // raw hit fragments, baseline only
    RobotType robot;
    bool baseline;
    ControlParams cparams;

    // Clearance the robot can infer from its own knowledge: discovered stars,
    // the known workspace boundary and the current fragments.
    double known_clearance(Vec2 x) const {
        double clear = distance_to_polygon_boundary(x, world.boundary.vertices);
        if (!world.boundary.contains(x)) clear = -clear;
        for (const PlacedObstacle& star : map.stars) {
            clear = std::min(clear, star.value(x));
        }
        for (const Fragment& frag : model.fragments) {
            for (Vec2 p : frag.points) clear = std::min(clear, distance(x, p));
        }
        for (const Fragment& frag : sensed) {
            for (Vec2 p : frag.points) clear = std::min(clear, distance(x, p));
        }
        return clear;
    }

    // Stage points must stay in the mapped freespace; the field has no
    // meaning inside a discovered star or beyond the boundary.
    void guard_stage(Vec2 x) const {
        if (!world.boundary.contains(x, 1e-7)) throw StageOutsideFreespace();
        for (const PlacedObstacle& star : map.stars) {
            if (star.value(x) < 0.0) throw StageOutsideFreespace();
        }
    }

    // Integration motion must not cross the sensed obstacle boundary.
    void guard_motion(Vec2 from, Vec2 to) const {
        auto crosses = [&](const std::vector<Fragment>& frags) {
            for (const Fragment& frag : frags) {
                for (size_t i = 0; i + 1 < frag.points.size(); ++i) {
                    if (segments_intersect(from, to, frag.points[i], frag.points[i + 1])) {
                        return true;
                    }
                }
            }
            return false;
        };
        if (crosses(model.fragments) || crosses(sensed)) throw StageOutsideFreespace();
    }

    Deriv operator()(Vec2 x, double psi) const {
        if (!baseline) guard_stage(x);
        if (baseline) {
            if (robot == RobotType::kFullyActuated) {
                Vec2 u = baseline_u(x, sensed, world.boundary, world.goal, cparams);
                return {u, 0.0};
            }
            DiffDriveCommand c =
                baseline_diffdrive_u(x, psi, sensed, world.boundary, world.goal, cparams);
            return {Vec2{c.v * std::cos(psi), c.v * std::sin(psi)}, c.omega};
        }
        if (robot == RobotType::kFullyActuated) {
            Vec2 u = fully_actuated_u(x, map, model, world.boundary, world.goal, cparams);
            return {u, 0.0};
        }
        DiffDriveCommand c = diffdrive_u(x, psi, map, model, world.boundary, world.goal, cparams);
        return {Vec2{c.v * std::cos(psi), c.v * std::sin(psi)}, c.omega};
    }

    // Raw command pair for logging: (ux, uy) or (v, omega).
    std::pair<double, double> command(Vec2 x, double psi) const {
        if (robot == RobotType::kFullyActuated) {
            Vec2 u = baseline ? baseline_u(x, sensed, world.boundary, world.goal, cparams)
                              : fully_actuated_u(x, map, model, world.boundary, world.goal, cparams);
            return {u.x, u.y};
        }
        DiffDriveCommand c =
            baseline ? baseline_diffdrive_u(x, psi, sensed, world.boundary, world.goal, cparams)
                     : diffdrive_u(x, psi, map, model, world.boundary, world.goal, cparams);
        return {c.v, c.omega};
    }
};

FieldContext make_context(Vec2 x, const World& world, SemanticMap& map, const SimParams& params,
                          RobotType robot, bool baseline) {
    std::vector<SenseHit> hits = sense(x, world, params.n_rays);
    FieldContext ctx{world, map, {}, {}, robot, baseline,
                     ControlParams{params.k, params.r_virt_factor * world.sensor_range}};
    if (baseline) {
        ctx.sensed = group_hits(hits, params.n_rays, true);
    } else {
        update_map(map, hits, world);
        ctx.model = model_layer(map);
    }
    return ctx;
}

double lyapunov_value(Vec2 x, const SemanticMap& map, Vec2 goal, bool baseline) {
    if (baseline) return (x - goal).squared_norm();
    return (evaluate_diffeo(x, map).y - goal).squared_norm();
}

}  // namespace

StepOutcome step(const SimState& state, const World& world, SemanticMap& map,
                 const SimParams& params, RobotType robot, bool baseline) {
    FieldContext ctx = make_context(state.x, world, map, params, robot, baseline);

    StepOutcome out;
    out.state = state;
    double cmd1 = 0.0, cmd2 = 0.0, v_now = 0.0;
    try {
        std::tie(cmd1, cmd2) = ctx.command(state.x, state.psi);
        v_now = lyapunov_value(state.x, map, world.goal, baseline);
    } catch (const Error& e) {
        out.fault = true;
        out.fault_reason = e.what();
        out.row = LogRow{state.t, state.x, state.psi, 0, 0, 0, world.min_beta(state.x),
                         static_cast<int>(map.stars.size())};
        return out;
    }
    double cmd_norm = std::hypot(cmd1, cmd2);
    double speed = robot == RobotType::kFullyActuated ? cmd_norm : std::abs(cmd1);

    out.row = LogRow{state.t,
                     state.x,
                     state.psi,
                     cmd1,
                     cmd2,
                     v_now,
                     world.min_beta(state.x),
                     static_cast<int>(map.stars.size())};

    // Command is re-evaluated at the RK4 stage points against the frozen map.
    // dt adapts twice: to the command magnitude (bounded motion per step) and
    // to the robot's own clearance estimate so stage points cannot jump
    // across an obstacle band.
    double dt = std::min(params.dt_max, 0.1 / std::max(cmd_norm, 1e-9));
    double clearance = ctx.known_clearance(state.x);
    if (clearance < 0.4 && speed > 1e-9) {
        // The baseline has no implicit-surface guard, so its per-step motion
        // shrinks all the way with clearance and contact becomes a stall
        // instead of a floating-point collision.
        double floor = baseline ? 1e-9 : 2e-3;
        dt = std::min(dt, std::max(0.25 * clearance, floor) / speed);
        dt = std::max(dt, 1e-9);
    }
    for (int attempt = 0;; ++attempt) {
        try {
            Deriv k1 = ctx(state.x, state.psi);
            Vec2 x2 = state.x + (0.5 * dt) * k1.dx;
            ctx.guard_motion(state.x, x2);
            Deriv k2 = ctx(x2, state.psi + 0.5 * dt * k1.dpsi);
            Vec2 x3 = state.x + (0.5 * dt) * k2.dx;
            ctx.guard_motion(state.x, x3);
            Deriv k3 = ctx(x3, state.psi + 0.5 * dt * k2.dpsi);
            Vec2 x4 = state.x + dt * k3.dx;
            ctx.guard_motion(state.x, x4);
            Deriv k4 = ctx(x4, state.psi + dt * k3.dpsi);
            out.state.x = state.x + (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
            ctx.guard_motion(state.x, out.state.x);
            out.state.psi =
                wrap_angle(state.psi + (dt / 6.0) * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi));
            out.state.t = state.t + dt;
            return out;
        } catch (const NearVertex& e) {
            if (attempt >= 6) {
                out.fault = true;
                out.fault_reason = e.what();
                return out;
            }
            dt *= 0.5;
        } catch (const AtStarCenter& e) {
            if (attempt >= 6) {
                out.fault = true;
                out.fault_reason = e.what();
                return out;
            }
            dt *= 0.5;
        } catch (const StageOutsideFreespace& e) {
            if (attempt >= 6) {
                out.fault = true;
                out.fault_reason = e.what();
                return out;
            }
            dt *= 0.5;
        } catch (const Error& e) {
            out.fault = true;
            out.fault_reason = e.what();
            return out;
        }
    }
}

RunOutput run(const World& world, SimState start, RobotType robot, bool baseline,
              const SimParams& params, bool validate_first) {
    if (validate_first) {
        ValidationReport report = validate_assumptions(world);
        if (!report.all_pass()) throw ValidationFailed(report.to_string());
    }
    if (!world.in_freespace(start.x)) {
        throw ValidationFailed("start position is not in the freespace");
    }

    auto t0 = std::chrono::steady_clock::now();
    RunOutput out;
    RunResult& res = out.result;
    res.min_beta = std::numeric_limits<double>::infinity();
    res.min_clearance = std::numeric_limits<double>::infinity();
    res.min_discovery_margin = std::numeric_limits<double>::infinity();

    SemanticMap& map = out.final_map;
    SimState state = start;
    double stall_time = 0.0;
    Vec2 anchor_x = start.x;       // trailing-displacement stall detection
    double anchor_t = start.t;
    double prev_v = std::numeric_limits<double>::infinity();
    size_t prev_stars = 0;
    bool first_step = true;

    auto track = [&](const LogRow& row) {
        res.min_beta = std::min(res.min_beta, row.min_beta);
        res.min_clearance = std::min(res.min_clearance,
                                     std::min(world.unknown_clearance(row.x),
                                              world.boundary_clearance(row.x)));
        if (row.V > prev_v + 1e-9) {
            ++res.lyapunov_violations;
            res.max_v_increase = std::max(res.max_v_increase, row.V - prev_v);
        }
        prev_v = row.V;
    };

    RunStatus status = RunStatus::kMaxTime;
    std::string fault_reason;
    while (true) {
        if (distance(state.x, world.goal) <= params.goal_tol) {
            status = RunStatus::kConverged;
            break;
        }
        if (state.t >= params.t_max) {
            status = RunStatus::kMaxTime;
            break;
        }
        StepOutcome so = step(state, world, map, params, robot, baseline);

        // Mid-run discoveries must happen far outside the band.
        if (!first_step && map.stars.size() > prev_stars) {
            for (size_t j = prev_stars; j < map.stars.size(); ++j) {
                res.min_discovery_margin =
                    std::min(res.min_discovery_margin,
                             map.stars[j].value(state.x) - map.stars[j].epsilon);
            }
        }
        prev_stars = map.stars.size();
        first_step = false;

        out.log.rows.push_back(so.row);
        track(so.row);
        if (so.fault) {
            status = RunStatus::kFault;
            fault_reason = so.fault_reason;
            break;
        }
        res.path_length += distance(so.state.x, state.x);
        double cmd_norm = std::hypot(so.row.cmd1, so.row.cmd2);
        res.final_cmd_norm = cmd_norm;
        // Stall detection, both views of "no translational progress for a
        // second": commanded speed stays below threshold, or the trailing
        // average speed over a one-second window drops below it (a pinned
        // robot that still spins or creeps at floating-point contact scale).
        constexpr double kStallSpeed = 1e-6;  // m/s
        double speed = robot == RobotType::kFullyActuated ? cmd_norm : std::abs(so.row.cmd1);
        if (speed < kStallSpeed) {
            stall_time += so.state.t - state.t;
        } else {
            stall_time = 0.0;
        }
        bool window_stall = false;
        if (so.state.t - anchor_t >= 1.0) {
            window_stall = distance(so.state.x, anchor_x) < kStallSpeed * (so.state.t - anchor_t);
            anchor_x = so.state.x;
            anchor_t = so.state.t;
        }
        if (stall_time >= 1.0 || window_stall) {
            state = so.state;
            status = RunStatus::kStalled;
            break;
        }
        state = so.state;
    }

    // Terminal row for the final state.
    {
        FieldContext ctx = make_context(state.x, world, map, params, robot, baseline);
        double v1 = 0.0, v2 = 0.0;
        try {
            std::tie(v1, v2) = ctx.command(state.x, state.psi);
        } catch (const Error&) {
            // keep zeros if the terminal state is unevaluable
        }
        LogRow last{state.t, state.x, state.psi, v1, v2,
                    lyapunov_value(state.x, map, world.goal, baseline),
                    world.min_beta(state.x), static_cast<int>(map.stars.size())};
        if (out.log.rows.empty() || last.t > out.log.rows.back().t) {
            out.log.rows.push_back(last);
            track(last);
        }
        res.final_cmd_norm = std::hypot(v1, v2);
    }

    res.status = status;
    res.fault_reason = fault_reason;
    res.final_position = state.x;
    res.final_psi = state.psi;
    res.final_goal_distance = distance(state.x, world.goal);
    res.sim_time = state.t;
    res.n_discovered = static_cast<int>(map.stars.size());
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ---------------------------------------------------------------------------
// Output formatting
// ---------------------------------------------------------------------------

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::kConverged: return "Converged";
        case RunStatus::kStalled: return "Stalled";
        case RunStatus::kMaxTime: return "MaxTime";
        case RunStatus::kFault: return "Fault";
    }
    return "?";
}

void TrajectoryLog::write_csv(std::ostream& os) const {
    os << "t,x,y,psi,cmd1,cmd2,V,min_beta,n_stars\n";
    char buf[256];
    for (const LogRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.x.x, r.x.y,
                      r.psi, r.cmd1, r.cmd2, r.V, r.min_beta, r.n_stars);
        os << buf;
    }
}

std::string RunResult::to_string() const {
    std::ostringstream os;
    os << "status: " << starnav::to_string(status) << "\n";
    os << "final_position: (" << final_position.x << ", " << final_position.y << ")\n";
    os << "final_goal_distance: " << final_goal_distance << "\n";
    os << "final_cmd_norm: " << final_cmd_norm << "\n";
    os << "path_length: " << path_length << "\n";
    os << "sim_time: " << sim_time << "\n";
    os << "min_beta: " << min_beta << "\n";
    os << "min_clearance: " << min_clearance << "\n";
    os << "stars_discovered: " << n_discovered << "\n";
    os << "lyapunov_violations: " << lyapunov_violations << "\n";
    os << "wall_time_s: " << wall_time_s << "\n";
    if (!fault_reason.empty()) os << "fault_reason: " << fault_reason << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Grid experiments
// ---------------------------------------------------------------------------

GridSummary grid_experiment(const World& world, const SimParams& params, int n_starts,
                            unsigned long long seed) {
    if (n_starts <= 0) throw DegenerateInput("grid experiment needs n_starts > 0");
    ValidationReport report = validate_assumptions(world);
    if (!report.all_pass()) throw ValidationFailed(report.to_string());

    GridSummary summary;
    summary.seed = seed;
    summary.n_starts = n_starts;

    // Sample all starts up front so concurrency cannot perturb the sequence.
    std::mt19937_64 rng(seed);
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (Vec2 v : world.boundary.vertices) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    std::uniform_real_distribution<double> ux(min_x, max_x), uy(min_y, max_y);
    std::uniform_real_distribution<double> upsi(-M_PI, M_PI);
    constexpr double kStartClearance = 0.05;
    std::vector<SimState> starts;
    starts.reserve(static_cast<size_t>(n_starts));
    long long guard = 0;
    while (starts.size() < static_cast<size_t>(n_starts)) {
        if (++guard > 1000000LL) throw NoConvergence("could not sample freespace starts");
        Vec2 c{ux(rng), uy(rng)};
        if (!world.in_freespace(c, kStartClearance)) continue;
        starts.push_back(SimState{c, upsi(rng), 0.0});
    }

    auto run_type = [&](RobotType robot) {
        GridTypeSummary ts;
        ts.n = n_starts;
        ts.min_beta = std::numeric_limits<double>::infinity();
        ts.min_clearance = std::numeric_limits<double>::infinity();
        ts.results.resize(static_cast<size_t>(n_starts));

        std::atomic<size_t> next{0};
        unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
        auto worker = [&]() {
            for (size_t i = next.fetch_add(1); i < starts.size(); i = next.fetch_add(1)) {
                RunOutput ro = run(world, starts[i], robot, false, params, false);
                GridStartResult r;
                r.start = starts[i].x;
                r.psi = starts[i].psi;
                r.status = ro.result.status;
                r.final_goal_distance = ro.result.final_goal_distance;
                r.final_cmd_norm = ro.result.final_cmd_norm;
                r.path_length = ro.result.path_length;
                r.min_beta = ro.result.min_beta;
                r.min_clearance = ro.result.min_clearance;
                r.sim_time = ro.result.sim_time;
                r.lyapunov_violations = ro.result.lyapunov_violations;
                ts.results[i] = r;
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        for (const GridStartResult& r : ts.results) {
            switch (r.status) {
                case RunStatus::kConverged: ++ts.converged; break;
                case RunStatus::kStalled: ++ts.stalled; break;
                case RunStatus::kMaxTime: ++ts.maxtime; break;
                case RunStatus::kFault: ++ts.fault; break;
            }
            ts.min_beta = std::min(ts.min_beta, r.min_beta);
            ts.min_clearance = std::min(ts.min_clearance, r.min_clearance);
        }
        ts.success_rate = static_cast<double>(ts.converged) / ts.n;
        return ts;
    };

    summary.fully_actuated = run_type(RobotType::kFullyActuated);
    summary.diffdrive = run_type(RobotType::kDiffDrive);
    return summary;
}

}  // namespace starnav
