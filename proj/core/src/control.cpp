#include "starnav/control.hpp"

#include <algorithm>
#include <cmath>

namespace starnav {

namespace {

// Midpoint separating hyperplane between y and an obstacle point at signed
// separation `sep` along unit direction `toward` (from y to the obstacle).
HalfPlane midpoint_plane(Vec2 y, Vec2 toward, double sep) {
    return HalfPlane(y + (0.5 * sep) * toward, -toward);
}

LocalFreespace clip_lf(Vec2 y, std::vector<HalfPlane> planes, const ConvexPolygon& bounds,
                       double r_virt) {
    // Keep the local freespace inside the workspace: exact edge lines plus
    // the bisector of the closest point per nearby edge.
    for (size_t i = 0, n = bounds.vertices.size(); i < n; ++i) {
        Vec2 a = bounds.vertices[i], b = bounds.vertices[(i + 1) % n];
        planes.emplace_back(a, (b - a).perp());
        Vec2 p = project_segment(y, a, b);
        double d = distance(y, p);
        if (d >= 0.5 * r_virt || d < kGeomEps) continue;
        planes.push_back(midpoint_plane(y, (p - y) / d, d));
    }
    try {
        return LocalFreespace{intersect_halfplanes(planes, regular_ngon(y, 0.5 * r_virt, 64))};
    } catch (const EmptyIntersection&) {
        throw EmptyLocalFreespace();
    }
}

// Separating hyperplanes for one sensed fragment, two complementary parts:
//
//  1. Point bisectors, thinned to a spacing proportional to the fragment's
//     closest distance. Raw hits cluster arbitrarily tightly near contact,
//     and their unthinned bisectors collapse the local freespace into
//     microscopic facets that destroy the tangential escape along a convex
//     obstacle; thinning keeps the facet scale proportional to the standoff.
//  2. A midpoint plane at every local minimum of the distance to the
//     fragment polyline. Consecutive hits are adjacent on the obstacle
//     boundary, so for a convex obstacle the polyline lies inside it and the
//     plane of its metric projection separates the whole body; this plane
//     carries the surface orientation all the way to contact, where the
//     point bisectors degenerate.
void append_fragment_planes(std::vector<HalfPlane>& planes, Vec2 y,
                            std::span<const Fragment> fragments, double r_virt) {
    std::vector<double> seg_d2;
    std::vector<Vec2> seg_p;
    for (const Fragment& frag : fragments) {
        if (frag.points.empty()) continue;
        size_t n_seg = frag.points.size() > 1 ? frag.points.size() - 1 : 1;
        seg_d2.assign(n_seg, 0.0);
        seg_p.assign(n_seg, frag.points.front());
        if (frag.points.size() == 1) {
            seg_d2[0] = (y - frag.points[0]).squared_norm();
        } else {
            for (size_t i = 0; i + 1 < frag.points.size(); ++i) {
                seg_p[i] = project_segment(y, frag.points[i], frag.points[i + 1]);
                seg_d2[i] = (y - seg_p[i]).squared_norm();
            }
        }
        // Barrier of one face line (unclamped foot). Guarded against
        // segments seen nearly edge-on, whose line passes close to y.
        auto face_line_plane = [&](size_t seg, double d_foot) {
            Vec2 a = frag.points[seg], b = frag.points[seg + 1];
            Vec2 e = b - a;
            double len2 = e.squared_norm();
            if (len2 < kGeomEps * kGeomEps) return;
            Vec2 f = a + ((y - a).dot(e) / len2) * e;
            double d_line = distance(y, f);
            if (d_line < std::max(1e-7, 0.2 * d_foot) || d_line >= r_virt) return;
            planes.push_back(midpoint_plane(y, (f - y) / d_line, d_line));
        };

        Vec2 last_foot{1e300, 1e300};
        for (size_t i = 0; i < n_seg; ++i) {
            bool local_min = (i == 0 || seg_d2[i] <= seg_d2[i - 1]) &&
                             (i + 1 == n_seg || seg_d2[i] <= seg_d2[i + 1]);
            if (!local_min) continue;
            if (distance(seg_p[i], last_foot) <= 1e-6) continue;  // duplicate foot
            double d = std::sqrt(seg_d2[i]);
            if (d >= r_virt) continue;
            if (d >= 1e-7) {
                planes.push_back(midpoint_plane(y, (seg_p[i] - y) / d, d));
            } else if (frag.points.size() > 1) {
                // Contact: the bisector direction degenerates, but the ray
                // sweep orders the polyline with material on its right, so
                // the local walk direction still orients a tangent barrier.
                // The tangent is averaged over a small window so that contact
                // at a corner blocks the apex cone between the two faces.
                size_t lo = i >= 1 ? i - 1 : 0;
                size_t hi = std::min(i + 2, frag.points.size() - 1);
                Vec2 e = frag.points[hi] - frag.points[lo];
                if (e.squared_norm() < kGeomEps * kGeomEps) e = frag.points[i + 1] - frag.points[i];
                if (e.squared_norm() < kGeomEps * kGeomEps) continue;
                Vec2 into_material = -e.perp().normalized();
                planes.push_back(midpoint_plane(y, into_material, d));
            } else {
                continue;
            }
            last_foot = seg_p[i];
            if (frag.points.size() == 1) continue;
            // A foot clamped to a polyline vertex means y sits in the
            // vertex's normal cone. At a material-reflex corner the vertex
            // bisector alone does not wall off the incident faces, so add
            // their line barriers.
            bool at_start = distance(seg_p[i], frag.points[i]) < 1e-9;
            bool at_end = distance(seg_p[i], frag.points[i + 1]) < 1e-9;
            if (at_start || at_end) {
                face_line_plane(i, d);
                if (at_start && i > 0) face_line_plane(i - 1, d);
                if (at_end && i + 1 < n_seg) face_line_plane(i + 1, d);
            }
        }

        // Thinned point bisectors.
        double d_min = std::sqrt(*std::min_element(seg_d2.begin(), seg_d2.end()));
        double spacing = std::max(2.0 * d_min, 0.02);
        Vec2 last_kept{1e300, 1e300};
        for (Vec2 p : frag.points) {
            if (distance(p, last_kept) < spacing) continue;
            double d = distance(y, p);
            if (d >= r_virt || d < 1e-7) continue;
            planes.push_back(midpoint_plane(y, (p - y) / d, d));
            last_kept = p;
        }
    }
}

DiffDriveRefs refs_from_lf(const LocalFreespace& lf, Vec2 y, double phi, Vec2 goal, double k) {
    DiffDriveRefs refs;
    Vec2 t_hat{std::cos(phi), std::sin(phi)};
    Vec2 n_hat{-t_hat.y, t_hat.x};

    Vec2 proj_parallel = project_onto_lf_line(lf, y, t_hat, goal);
    refs.v_hat = -k * t_hat.dot(y - proj_parallel);

    Vec2 to_goal = goal - y;
    double goal_dist = to_goal.norm();
    if (goal_dist < kGeomEps) {
        refs.omega_hat = 0.0;  // at the goal; heading is free
        return refs;
    }
    Vec2 proj_goal_line = project_onto_lf_line(lf, y, to_goal / goal_dist, goal);
    Vec2 proj_lf = project_convex(goal, lf.polygon);
    Vec2 guide = y - 0.5 * (proj_goal_line + proj_lf);

    double num = n_hat.dot(guide);
    double den = t_hat.dot(guide);
    if (guide.norm() < 1e-9) {
        refs.omega_hat = 0.0;  // y coincides with the steering target
    } else if (std::abs(den) < 1e-12) {
        // atan argument blows up; pass the +-pi/2 limit and flag the event
        refs.omega_hat = num == 0.0 ? 0.0 : k * std::copysign(M_PI / 2.0, num);
        refs.atan_limit = num != 0.0;
    } else {
        refs.omega_hat = k * std::atan(num / den);
    }
    return refs;
}

}  // namespace

LocalFreespace local_freespace(Vec2 y, const ModelLayer& model, const ConvexPolygon& bounds,
                               double r_virt) {
    std::vector<HalfPlane> planes;
    for (const Disk& disk : model.disks) {
        Vec2 to_center = disk.center - y;
        double dist = to_center.norm();
        double sep = dist - disk.radius;
        if (sep >= r_virt || dist < kGeomEps) continue;
        planes.push_back(midpoint_plane(y, to_center / dist, sep));
    }
    append_fragment_planes(planes, y, model.fragments, r_virt);
    return clip_lf(y, std::move(planes), bounds, r_virt);
}

LocalFreespace local_freespace_points(Vec2 y, std::span<const Fragment> sensed,
                                      const ConvexPolygon& bounds, double r_virt) {
    std::vector<HalfPlane> planes;
    append_fragment_planes(planes, y, sensed, r_virt);
    return clip_lf(y, std::move(planes), bounds, r_virt);
}

Vec2 project_onto_lf_line(const LocalFreespace& lf, Vec2 y, Vec2 dir, Vec2 target) {
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    for (const HalfPlane& hp : lf.polygon.edge_halfplanes()) {
        double nd = hp.normal.dot(dir);
        double rhs = hp.normal.dot(hp.anchor - y);
        if (std::abs(nd) < 1e-15) {
            if (rhs > kGeomEps) throw DegenerateLine();
            continue;
        }
        double t = rhs / nd;
        if (nd > 0.0) {
            t_min = std::max(t_min, t);
        } else {
            t_max = std::min(t_max, t);
        }
    }
    if (t_min > t_max + kGeomEps) {
        // y belongs to LF by construction; an empty chord can only come from
        // floating-point pinch when y grazes the LF boundary. Tolerate that
        // case, signal anything grosser.
        double violation = 0.0;
        for (const HalfPlane& hp : lf.polygon.edge_halfplanes()) {
            violation = std::max(violation, -hp.signed_distance(y));
        }
        if (violation <= 1e-7) return y;
        throw DegenerateLine();
    }
    Vec2 a = y + t_min * dir;
    Vec2 b = y + t_max * dir;
    if (distance(a, b) < kGeomEps) return y;  // degenerate chord
    return project_segment(target, a, b);
}

Vec2 fully_actuated_u(Vec2 x, const SemanticMap& map, const ModelLayer& model,
                      const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params) {
    DiffeoEval d = evaluate_diffeo(x, map);
    LocalFreespace lf = local_freespace(d.y, model, bounds, params.r_virt);
    Vec2 v = -params.k * (d.y - project_convex(goal, lf.polygon));
    return d.J.solve(v);
}

DiffDriveRefs diffdrive_refs(Vec2 y, double phi, const ModelLayer& model,
                             const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params) {
    LocalFreespace lf = local_freespace(y, model, bounds, params.r_virt);
    return refs_from_lf(lf, y, phi, goal, params.k);
}

DiffDriveCommand diffdrive_u(Vec2 x, double psi, const SemanticMap& map, const ModelLayer& model,
                             const ConvexPolygon& bounds, Vec2 goal, const ControlParams& params) {
    SE2Eval se2 = evaluate_se2(x, psi, map);
    DiffDriveRefs refs = diffdrive_refs(se2.base.y, se2.xi, model, bounds, goal, params);
    DiffDriveCommand cmd;
    cmd.v = refs.v_hat / se2.e.norm();
    cmd.omega = (refs.omega_hat - cmd.v * se2.dxi_heading) / se2.dxi_dpsi;
    cmd.atan_limit = refs.atan_limit;
    return cmd;
}

Vec2 baseline_u(Vec2 x, std::span<const Fragment> sensed, const ConvexPolygon& bounds, Vec2 goal,
                const ControlParams& params) {
    LocalFreespace lf = local_freespace_points(x, sensed, bounds, params.r_virt);
    return -params.k * (x - project_convex(goal, lf.polygon));
}

DiffDriveCommand baseline_diffdrive_u(Vec2 x, double psi, std::span<const Fragment> sensed,
                                      const ConvexPolygon& bounds, Vec2 goal,
                                      const ControlParams& params) {
    LocalFreespace lf = local_freespace_points(x, sensed, bounds, params.r_virt);
    DiffDriveRefs refs = refs_from_lf(lf, x, psi, goal, params.k);
    return DiffDriveCommand{refs.v_hat, refs.omega_hat, refs.atan_limit};
}

}  // namespace starnav
