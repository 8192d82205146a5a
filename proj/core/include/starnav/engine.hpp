#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "starnav/control.hpp"

namespace starnav {

enum class RobotType { kFullyActuated, kDiffDrive };

struct SimParams {
    double k = 0.4;            // control gain
    int p = 20;                // R-function exponent used at catalogue build
    double dt_max = 0.1;       // s
    double t_max = 300.0;      // s
    double goal_tol = 0.05;    // m
    int n_rays = 360;
    double r_virt_factor = 0.8;  // virtual range as a fraction of sensor range
    std::string integrator = "rk4";
};

struct SimState {
    Vec2 x;
    double psi = 0.0;
    double t = 0.0;
};

struct LogRow {
    double t = 0.0;
    Vec2 x;
    double psi = 0.0;
    double cmd1 = 0.0, cmd2 = 0.0;
    double V = 0.0;        // |h(x) - goal|^2
    double min_beta = 0.0;  // ground-truth minimum over familiar obstacles
    int n_stars = 0;
};

struct TrajectoryLog {
    std::vector<LogRow> rows;

    /// Columns exactly: t,x,y,psi,cmd1,cmd2,V,min_beta,n_stars
    void write_csv(std::ostream& os) const;
};

enum class RunStatus { kConverged, kStalled, kMaxTime, kFault };
const char* to_string(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::kFault;
    Vec2 final_position;
    double final_psi = 0.0;
    double final_goal_distance = 0.0;
    double final_cmd_norm = 0.0;
    double path_length = 0.0;
    double min_beta = 0.0;
    double min_clearance = 0.0;  // min of unknown-obstacle and boundary clearance
    double sim_time = 0.0;
    double wall_time_s = 0.0;
    int n_discovered = 0;
    int lyapunov_violations = 0;     // steps where V grew by more than the slack
    double max_v_increase = 0.0;     // largest observed step-to-step V increase
    double min_discovery_margin = 0.0;  // min over mid-run discoveries of beta - epsilon
    std::string fault_reason;

    std::string to_string() const;
};

struct StepOutcome {
    SimState state;
    LogRow row;
    bool fault = false;
    std::string fault_reason;
};

/// One sense / update / control / integrate cycle. The semantic map is
/// updated from sensing at the step start and frozen for the RK4 stage
/// evaluations; dt adapts to the command magnitude and halves (up to 6
/// times) when a stage lands in a derivative guard region.
StepOutcome step(const SimState& state, const World& world, SemanticMap& map,
                 const SimParams& params, RobotType robot, bool baseline);

struct RunOutput {
    RunResult result;
    TrajectoryLog log;
    SemanticMap final_map;
};

/// Runs the closed loop until the goal tolerance, t_max, or a 1 s stretch
/// with command norm below 1e-7 (stall). With validate_first set, refuses
/// worlds that fail the preflight checks by throwing ValidationFailed.
RunOutput run(const World& world, SimState start, RobotType robot, bool baseline,
              const SimParams& params, bool validate_first = true);

struct GridStartResult {
    Vec2 start;
    double psi = 0.0;
    RunStatus status = RunStatus::kFault;
    double final_goal_distance = 0.0;
    double final_cmd_norm = 0.0;
    double path_length = 0.0;
    double min_beta = 0.0;
    double min_clearance = 0.0;
    double sim_time = 0.0;
    int lyapunov_violations = 0;
};

struct GridTypeSummary {
    int n = 0, converged = 0, stalled = 0, maxtime = 0, fault = 0;
    double success_rate = 0.0;
    double min_beta = 0.0;
    double min_clearance = 0.0;
    std::vector<GridStartResult> results;
};

struct GridSummary {
    unsigned long long seed = 0;
    int n_starts = 0;
    GridTypeSummary fully_actuated;
    GridTypeSummary diffdrive;
};

/// Samples n_starts collision-free poses (clearance >= 0.05 m) with a seeded
/// RNG and runs both robot types from each. Runs execute concurrently;
/// results are aggregated in start order so equal seeds give identical
/// summaries.
GridSummary grid_experiment(const World& world, const SimParams& params, int n_starts,
                            unsigned long long seed);

}  // namespace starnav
