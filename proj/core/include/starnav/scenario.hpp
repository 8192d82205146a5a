#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "starnav/engine.hpp"

namespace starnav {

// Declarative scenario description, one-to-one with the .scn text format.
// Geometry is authored undilated; angles are degrees in the file and radians
// everywhere else.

struct ShapeSpec {
    std::string name;
    std::vector<Vec2> vertices;  // CCW, body frame
    Vec2 star_center;            // body frame
    double epsilon = 0.3;
};

struct PlacementSpec {
    std::string shape;
    Vec2 center;  // world position of the star center
    double angle_deg = 0.0;
};

struct UnknownSpec {
    bool is_disk = true;
    Vec2 center;
    double radius = 0.0;
    std::vector<Vec2> vertices;  // convex CCW when !is_disk
};

struct RobotSpec {
    double radius = 0.2;
    RobotType type = RobotType::kFullyActuated;
    Vec2 start;
    double heading_deg = 0.0;
};

struct Scenario {
    std::vector<Vec2> workspace;  // convex CCW
    RobotSpec robot;
    Vec2 goal;
    double sensor_range = 10.0;
    SimParams params;
    std::vector<ShapeSpec> shapes;
    std::vector<PlacementSpec> placements;
    std::vector<UnknownSpec> unknown;

    SimState start_state() const;
};

/// Parses the .scn text format; throws ParseError with a line number.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

/// Canonical text form; reparsing it reproduces the scenario exactly.
std::string serialize_scenario(const Scenario& s);

/// Instantiates the ground-truth world: dilates obstacles by the robot
/// radius, erodes the workspace, builds catalogue trees and places familiar
/// obstacles. Throws on malformed geometry; does not run the preflight
/// validator.
World build_world(const Scenario& s);

}  // namespace starnav
