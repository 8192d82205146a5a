// starnav — scenario validation, single runs and grid experiments for the
// star-world reactive navigation library.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "starnav/engine.hpp"
#include "starnav/scenario.hpp"
#include "starnav/svg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

using nlohmann::json;

int cmd_validate(const std::string& path) {
    starnav::Scenario scenario = starnav::load_scenario(path);
    starnav::World world = starnav::build_world(scenario);
    starnav::ValidationReport report = starnav::validate_assumptions(world);
    std::cout << report.to_string();
    std::cout << (report.all_pass() ? "all checks passed" : "validation FAILED") << std::endl;
    return report.all_pass() ? kExitOk : kExitDomain;
}

int cmd_run(const std::string& path, const std::string& robot_flag, bool baseline,
            const std::string& csv_out, const std::string& svg_out) {
    starnav::Scenario scenario = starnav::load_scenario(path);
    starnav::World world = starnav::build_world(scenario);

    starnav::RobotType robot = scenario.robot.type;
    if (robot_flag == "full") robot = starnav::RobotType::kFullyActuated;
    if (robot_flag == "diffdrive") robot = starnav::RobotType::kDiffDrive;

    starnav::RunOutput out =
        starnav::run(world, scenario.start_state(), robot, baseline, scenario.params);
    std::cout << out.result.to_string();

    if (!csv_out.empty()) {
        std::ofstream os(csv_out);
        if (!os) throw starnav::Error("cannot write " + csv_out);
        out.log.write_csv(os);
    }
    if (!svg_out.empty()) {
        std::ofstream os(svg_out);
        if (!os) throw starnav::Error("cannot write " + svg_out);
        starnav::write_run_svg(os, scenario, world, out.final_map, out.log);
    }
    return out.result.status == starnav::RunStatus::kFault ? kExitDomain : kExitOk;
}

json type_summary_json(const starnav::GridTypeSummary& ts) {
    json per_start = json::array();
    for (const starnav::GridStartResult& r : ts.results) {
        per_start.push_back({{"start", {r.start.x, r.start.y}},
                             {"psi", r.psi},
                             {"status", starnav::to_string(r.status)},
                             {"final_goal_distance", r.final_goal_distance},
                             {"final_cmd_norm", r.final_cmd_norm},
                             {"path_length", r.path_length},
                             {"min_beta", r.min_beta},
                             {"min_clearance", r.min_clearance},
                             {"sim_time", r.sim_time},
                             {"lyapunov_violations", r.lyapunov_violations}});
    }
    return json{{"n", ts.n},
                {"converged", ts.converged},
                {"stalled", ts.stalled},
                {"maxtime", ts.maxtime},
                {"fault", ts.fault},
                {"success_rate", ts.success_rate},
                {"min_beta", ts.min_beta},
                {"min_clearance", ts.min_clearance},
                {"results", std::move(per_start)}};
}

int cmd_grid(const std::string& path, int n, unsigned long long seed, const std::string& json_out) {
    starnav::Scenario scenario = starnav::load_scenario(path);
    starnav::World world = starnav::build_world(scenario);
    starnav::GridSummary summary = starnav::grid_experiment(world, scenario.params, n, seed);

    auto print_type = [](const char* name, const starnav::GridTypeSummary& ts) {
        std::cout << name << ": " << ts.converged << "/" << ts.n << " converged (rate "
                  << ts.success_rate << "), " << ts.stalled << " stalled, " << ts.maxtime
                  << " maxtime, " << ts.fault << " fault; min_beta " << ts.min_beta
                  << ", min_clearance " << ts.min_clearance << "\n";
    };
    print_type("fully_actuated", summary.fully_actuated);
    print_type("diffdrive", summary.diffdrive);

    if (!json_out.empty()) {
        json doc{{"scenario", path},
                 {"seed", summary.seed},
                 {"n_starts", summary.n_starts},
                 {"fully_actuated", type_summary_json(summary.fully_actuated)},
                 {"diffdrive", type_summary_json(summary.diffdrive)}};
        std::ofstream os(json_out);
        if (!os) throw starnav::Error("cannot write " + json_out);
        os << doc.dump(2) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"star-world reactive navigation scenario driver"};
    app.require_subcommand(1);

    std::string path;
    std::string robot_flag;
    bool baseline = false;
    std::string csv_out, svg_out, json_out;
    int grid_n = 100;
    unsigned long long seed = 0;

    CLI::App* validate = app.add_subcommand("validate", "preflight-check a scenario");
    validate->add_option("scenario", path, "scenario file")->required();

    CLI::App* run = app.add_subcommand("run", "run one scenario");
    run->add_option("scenario", path, "scenario file")->required();
    run->add_option("--robot", robot_flag, "robot type: full|diffdrive")
        ->check(CLI::IsMember({"full", "diffdrive"}));
    run->add_flag("--baseline", baseline, "use the identity-map baseline law");
    run->add_option("--csv", csv_out, "write the trajectory log as CSV");
    run->add_option("--svg", svg_out, "write a three-layer figure as SVG");
    run->add_option("--seed", seed, "reserved; single runs are deterministic");

    CLI::App* grid = app.add_subcommand("grid", "convergence experiment over random starts");
    grid->add_option("scenario", path, "scenario file")->required();
    grid->add_option("--n", grid_n, "number of start poses")->check(CLI::PositiveNumber);
    grid->add_option("--seed", seed, "RNG seed");
    grid->add_option("--json", json_out, "write the machine-readable summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints usage/help
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(path);
        if (run->parsed()) return cmd_run(path, robot_flag, baseline, csv_out, svg_out);
        if (grid->parsed()) return cmd_grid(path, grid_n, seed, json_out);
    } catch (const starnav::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const starnav::ValidationFailed& e) {
        std::cerr << e.report_text << "refused: " << e.what() << "\n";
        return kExitDomain;
    } catch (const starnav::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
