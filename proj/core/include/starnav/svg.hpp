#pragma once

#include <iosfwd>

#include "starnav/scenario.hpp"

namespace starnav {

/// Renders a finished run as one SVG with three panels: the physical layer
/// (authored obstacles, robot disk, trajectory), the mapped layer (discovered
/// dilated stars and sensed fragments) and the model layer (disks and the
/// trajectory pushed through the final diffeomorphism).
void write_run_svg(std::ostream& os, const Scenario& scenario, const World& world,
                   const SemanticMap& final_map, const TrajectoryLog& log);

}  // namespace starnav
