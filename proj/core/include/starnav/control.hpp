#pragma once

#include "starnav/diffeo.hpp"
#include "starnav/world.hpp"

namespace starnav {

struct ControlParams {
    double k = 0.4;       // proportional gain
    double r_virt = 8.0;  // virtual sensor range in the model layer
};

/// Convex polygon of guaranteed-free model space around y: a half-range disk
/// clipped by the midpoint separating hyperplane of every nearby sensed
/// model-layer point and by the workspace boundary.
struct LocalFreespace {
    ConvexPolygon polygon;
};

LocalFreespace local_freespace(Vec2 y, const ModelLayer& model, const ConvexPolygon& bounds,
                               double r_virt);

/// Variant over raw sensed fragments (used by the baseline law, which treats
/// every obstacle as unknown).
LocalFreespace local_freespace_points(Vec2 y, std::span<const Fragment> sensed,
                                      const ConvexPolygon& bounds, double r_virt);

/// Projection of `target` onto the chord LF ∩ {line through y with direction
/// dir}. Falls back to y when the chord is numerically degenerate; throws
/// DegenerateLine when the line misses LF entirely.
Vec2 project_onto_lf_line(const LocalFreespace& lf, Vec2 y, Vec2 dir, Vec2 target);

/// Fully actuated pullback law: u = J^{-1} * ( -k (h(x) - Pi_LF(goal)) ).
Vec2 fully_actuated_u(Vec2 x, const SemanticMap& map, const ModelLayer& model,
                      const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params);

/// Reference unicycle inputs computed in the model layer.
struct DiffDriveRefs {
    double v_hat = 0.0;
    double omega_hat = 0.0;
    bool atan_limit = false;  // heading was perpendicular to the guide vector
};
DiffDriveRefs diffdrive_refs(Vec2 y, double phi, const ModelLayer& model,
                             const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params);

/// Actual unicycle inputs obtained by pulling the reference inputs back
/// through the SE(2) lift.
struct DiffDriveCommand {
    double v = 0.0;
    double omega = 0.0;
    bool atan_limit = false;
};
DiffDriveCommand diffdrive_u(Vec2 x, double psi, const SemanticMap& map, const ModelLayer& model,
                             const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params);

/// Comparison baseline: the same laws with the identity map and every sensed
/// obstacle treated as an unknown fragment.
Vec2 baseline_u(Vec2 x, std::span<const Fragment> sensed, const ConvexPolygon& bounds, Vec2 goal,
                const ControlParams& params);
DiffDriveCommand baseline_diffdrive_u(Vec2 x, double psi, std::span<const Fragment> sensed,
                                      const ConvexPolygon& bounds, Vec2 goal,
                                      const ControlParams& params);

}  // namespace starnav
