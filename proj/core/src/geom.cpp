#include "starnav/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace starnav {

double signed_area(std::span<const Vec2> v) {
    double a = 0.0;
    for (size_t i = 0, n = v.size(); i < n; ++i) {
        Vec2 p = v[i], q = v[(i + 1) % n];
        a += p.cross(q);
    }
    return 0.5 * a;
}

double ConvexPolygon::area() const { return signed_area(vertices); }

bool ConvexPolygon::contains(Vec2 q, double tol) const {
    size_t n = vertices.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = vertices[i], b = vertices[(i + 1) % n];
        if ((b - a).cross(q - a) < -tol * (b - a).norm()) return false;
    }
    return true;
}

std::vector<HalfPlane> ConvexPolygon::edge_halfplanes() const {
    std::vector<HalfPlane> planes;
    planes.reserve(vertices.size());
    for (size_t i = 0, n = vertices.size(); i < n; ++i) {
        Vec2 a = vertices[i], b = vertices[(i + 1) % n];
        planes.emplace_back(a, (b - a).perp());  // inward for CCW
    }
    return planes;
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

Vec2 project_segment(Vec2 q, Vec2 a, Vec2 b) {
    Vec2 e = b - a;
    double len2 = e.squared_norm();
    if (len2 <= kGeomEps * kGeomEps) return a;
    double t = std::clamp((q - a).dot(e) / len2, 0.0, 1.0);
    return a + t * e;
}

Vec2 project_convex(Vec2 q, const ConvexPolygon& poly) {
    if (poly.contains(q)) return q;
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_p = q;
    for (size_t i = 0, n = poly.vertices.size(); i < n; ++i) {
        Vec2 p = project_segment(q, poly.vertices[i], poly.vertices[(i + 1) % n]);
        double d = (q - p).squared_norm();
        if (d < best) {
            best = d;
            best_p = p;
        }
    }
    return best_p;
}

Vec2 project_convex(Vec2 q, const Disk& disk) {
    Vec2 d = q - disk.center;
    double n = d.norm();
    if (n <= disk.radius) return q;
    return disk.center + d * (disk.radius / n);
}

Vec2 project_convex(Vec2 q, const ConvexObstacle& obs) {
    if (const Disk* d = std::get_if<Disk>(&obs.shape)) return project_convex(q, *d);
    return project_convex(q, std::get<ConvexPolygon>(obs.shape));
}

// ---------------------------------------------------------------------------
// Clipping and hulls
// ---------------------------------------------------------------------------

namespace {

std::vector<Vec2> clip_against(const std::vector<Vec2>& poly, const HalfPlane& hp) {
    std::vector<Vec2> out;
    size_t n = poly.size();
    out.reserve(n + 1);
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        double da = hp.signed_distance(a);
        double db = hp.signed_distance(b);
        if (da >= -kGeomEps) out.push_back(a);
        if ((da > kGeomEps && db < -kGeomEps) || (da < -kGeomEps && db > kGeomEps)) {
            double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    // Drop duplicates introduced by vertices lying on the clip line.
    std::vector<Vec2> dedup;
    dedup.reserve(out.size());
    for (Vec2 p : out) {
        if (dedup.empty() || distance(dedup.back(), p) > kGeomEps) dedup.push_back(p);
    }
    while (dedup.size() > 1 && distance(dedup.front(), dedup.back()) <= kGeomEps) dedup.pop_back();
    return dedup;
}

}  // namespace

ConvexPolygon intersect_halfplanes(std::span<const HalfPlane> planes, const ConvexPolygon& seed) {
    std::vector<Vec2> poly = seed.vertices;
    for (const HalfPlane& hp : planes) {
        poly = clip_against(poly, hp);
        if (poly.size() < 3) throw EmptyIntersection();
    }
    return ConvexPolygon{std::move(poly)};
}

ConvexPolygon convex_hull(std::span<const Vec2> points) {
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return distance(a, b) <= kGeomEps; }),
              pts.end());
    if (pts.size() < 3) throw DegenerateInput("convex hull needs >= 3 distinct points");
    auto build = [&](auto begin, auto end) {
        std::vector<Vec2> chain;
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   (chain[chain.size() - 1] - chain[chain.size() - 2])
                           .cross(*it - chain[chain.size() - 2]) <= kGeomEps)
                chain.pop_back();
            chain.push_back(*it);
        }
        return chain;
    };
    std::vector<Vec2> lower = build(pts.begin(), pts.end());
    std::vector<Vec2> upper = build(pts.rbegin(), pts.rend());
    lower.pop_back();
    upper.pop_back();
    lower.insert(lower.end(), upper.begin(), upper.end());
    if (lower.size() < 3) throw DegenerateInput("input points are collinear");
    return ConvexPolygon{std::move(lower)};
}

namespace {

std::optional<Vec2> line_intersection(Vec2 p1, Vec2 d1, Vec2 p2, Vec2 d2) {
    double denom = d1.cross(d2);
    if (std::abs(denom) <= 1e-12 * d1.norm() * d2.norm()) return std::nullopt;
    double t = (p2 - p1).cross(d2) / denom;
    return p1 + t * d1;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        double v = (q - p).cross(r - p);
        if (v > kGeomEps) return 1;
        if (v < -kGeomEps) return -1;
        return 0;
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

std::vector<Vec2> merge_collinear_vertices(std::span<const Vec2> v) {
    std::vector<Vec2> out;
    size_t n = v.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 prev = v[(i + n - 1) % n], cur = v[i], next = v[(i + 1) % n];
        Vec2 e1 = cur - prev, e2 = next - cur;
        if (std::abs(e1.cross(e2)) <= kGeomEps * e1.norm() * e2.norm() && e1.dot(e2) > 0.0) continue;
        out.push_back(cur);
    }
    return out;
}

bool is_simple_polygon(std::span<const Vec2> v) {
    size_t n = v.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
        }
    }
    return true;
}

std::vector<Vec2> dilate_polygon(std::span<const Vec2> vertices, double r) {
    if (r < 0.0) throw DegenerateInput("dilation radius must be >= 0");
    if (r == 0.0) return {vertices.begin(), vertices.end()};
    std::vector<Vec2> v = merge_collinear_vertices(vertices);
    size_t n = v.size();
    if (n < 3) throw DegenerateInput("polygon needs >= 3 vertices");
    if (signed_area(v) <= 0.0) throw DegenerateInput("polygon must be CCW");
    std::vector<Vec2> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Vec2 prev = v[(i + n - 1) % n], cur = v[i], next = v[(i + 1) % n];
        Vec2 d1 = cur - prev, d2 = next - cur;
        Vec2 m1 = -d1.perp().normalized();  // outward for CCW
        Vec2 m2 = -d2.perp().normalized();
        auto hit = line_intersection(prev + r * m1, d1, cur + r * m2, d2);
        out.push_back(hit ? *hit : cur + r * m1);
    }
    // An offset edge that reverses direction means the mitre points crossed
    // (a throat narrower than 2r closed up).
    for (size_t i = 0; i < n; ++i) {
        Vec2 old_dir = v[(i + 1) % n] - v[i];
        Vec2 new_dir = out[(i + 1) % n] - out[i];
        if (old_dir.dot(new_dir) <= 0.0) throw SelfIntersection();
    }
    if (!is_simple_polygon(out)) throw SelfIntersection();
    return out;
}

ConvexPolygon erode_convex(const ConvexPolygon& poly, double r) {
    std::vector<HalfPlane> planes;
    for (size_t i = 0, n = poly.vertices.size(); i < n; ++i) {
        Vec2 a = poly.vertices[i], b = poly.vertices[(i + 1) % n];
        Vec2 n_in = (b - a).perp().normalized();
        planes.emplace_back(a + r * n_in, n_in);
    }
    return intersect_halfplanes(planes, poly);
}

ConvexPolygon regular_ngon(Vec2 center, double radius, int n) {
    std::vector<Vec2> v;
    v.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        v.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
    }
    return ConvexPolygon{std::move(v)};
}

// ---------------------------------------------------------------------------
// Ray casting
// ---------------------------------------------------------------------------

std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
    Vec2 e = b - a;
    double denom = dir.cross(e);
    if (std::abs(denom) <= 1e-15 * e.norm()) return std::nullopt;  // parallel
    double t = (a - origin).cross(e) / denom;
    double s = (a - origin).cross(dir) / denom;
    if (t < 0.0 || s < -kGeomEps || s > 1.0 + kGeomEps) return std::nullopt;
    return t;
}

std::optional<double> ray_disk(Vec2 origin, Vec2 dir, const Disk& disk) {
    Vec2 oc = origin - disk.center;
    double b = dir.dot(oc);
    double c = oc.squared_norm() - disk.radius * disk.radius;
    double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    double s = std::sqrt(disc);
    double t0 = -b - s, t1 = -b + s;
    if (t0 >= 0.0) return t0;
    if (t1 >= 0.0) return t1;
    return std::nullopt;
}

std::optional<double> ray_polygon(Vec2 origin, Vec2 dir, std::span<const Vec2> vertices) {
    std::optional<double> best;
    size_t n = vertices.size();
    for (size_t i = 0; i < n; ++i) {
        if (auto t = ray_segment(origin, dir, vertices[i], vertices[(i + 1) % n])) {
            if (!best || *t < *best) best = t;
        }
    }
    return best;
}

std::optional<RayHit> ray_cast(Vec2 origin, Vec2 dir, std::span<const ConvexObstacle> obstacles,
                               double max_range) {
    std::optional<double> best;
    for (const ConvexObstacle& obs : obstacles) {
        std::optional<double> t;
        if (const Disk* d = std::get_if<Disk>(&obs.shape)) {
            t = ray_disk(origin, dir, *d);
        } else {
            t = ray_polygon(origin, dir, std::get<ConvexPolygon>(obs.shape).vertices);
        }
        if (t && *t <= max_range && (!best || *t < *best)) best = t;
    }
    if (!best) return std::nullopt;
    return RayHit{origin + (*best) * dir, *best};
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

bool point_in_polygon(Vec2 q, std::span<const Vec2> v) {
    bool inside = false;
    size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        bool straddles = (v[i].y > q.y) != (v[j].y > q.y);
        if (straddles) {
            double x_cross = v[j].x + (v[i].x - v[j].x) * (q.y - v[j].y) / (v[i].y - v[j].y);
            if (q.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double distance_to_polygon_boundary(Vec2 q, std::span<const Vec2> v) {
    double best = std::numeric_limits<double>::infinity();
    size_t n = v.size();
    for (size_t i = 0; i < n; ++i) {
        best = std::min(best, distance(q, project_segment(q, v[i], v[(i + 1) % n])));
    }
    return best;
}

}  // namespace starnav
