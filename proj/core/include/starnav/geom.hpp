#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "starnav/errors.hpp"

namespace starnav {

// Global geometric tolerance (meters). Scenario scale is meters with
// features >= 0.01 m, so one epsilon serves all degeneracy tests.
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }
    Vec2& operator+=(Vec2 r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(Vec2 r) { x -= r.x; y -= r.y; return *this; }

    constexpr double dot(Vec2 r) const { return x * r.x + y * r.y; }
    constexpr double cross(Vec2 r) const { return x * r.y - y * r.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
    /// Counterclockwise quarter turn.
    constexpr Vec2 perp() const { return {-y, x}; }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Row-major 2x2 matrix.
struct Mat2 {
    double a11 = 1.0, a12 = 0.0;
    double a21 = 0.0, a22 = 1.0;

    static constexpr Mat2 identity() { return {}; }
    static Mat2 rotation(double angle_rad) {
        double c = std::cos(angle_rad), s = std::sin(angle_rad);
        return {c, -s, s, c};
    }
    /// Outer product a * b^T.
    static constexpr Mat2 outer(Vec2 a, Vec2 b) {
        return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
    }

    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double trace() const { return a11 + a22; }
    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
    constexpr Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    constexpr Mat2 operator*(Mat2 m) const {
        return {a11 * m.a11 + a12 * m.a21, a11 * m.a12 + a12 * m.a22,
                a21 * m.a11 + a22 * m.a21, a21 * m.a12 + a22 * m.a22};
    }
    constexpr Mat2 operator+(Mat2 m) const { return {a11 + m.a11, a12 + m.a12, a21 + m.a21, a22 + m.a22}; }
    constexpr Mat2 operator-(Mat2 m) const { return {a11 - m.a11, a12 - m.a12, a21 - m.a21, a22 - m.a22}; }
    constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    friend constexpr Mat2 operator*(double s, Mat2 m) { return m * s; }
    Mat2 inverse() const {
        double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    /// Solves A x = b without forming the inverse.
    Vec2 solve(Vec2 b) const {
        double d = det();
        return {(a22 * b.x - a12 * b.y) / d, (a11 * b.y - a21 * b.x) / d};
    }
};

/// Oriented half-plane; `normal` is unit length and points into the kept side.
struct HalfPlane {
    Vec2 anchor;
    Vec2 normal;

    HalfPlane() = default;
    HalfPlane(Vec2 anchor_, Vec2 normal_) : anchor(anchor_), normal(normal_.normalized()) {}

    /// Signed distance of q to the boundary line; >= 0 on the kept side.
    double signed_distance(Vec2 q) const { return normal.dot(q - anchor); }
    bool contains(Vec2 q, double tol = kGeomEps) const { return signed_distance(q) >= -tol; }
};

/// Convex polygon, counterclockwise vertex order, no repeated vertices.
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    ConvexPolygon() = default;
    explicit ConvexPolygon(std::vector<Vec2> v) : vertices(std::move(v)) {}

    bool empty() const { return vertices.size() < 3; }
    double area() const;
    bool contains(Vec2 q, double tol = kGeomEps) const;
    /// Edge half-planes with inward normals, one per edge.
    std::vector<HalfPlane> edge_halfplanes() const;
};

struct Disk {
    Vec2 center;
    double radius = 0.0;
};

/// An unknown (uncatalogued) obstacle: disk or convex polygon.
struct ConvexObstacle {
    std::variant<Disk, ConvexPolygon> shape;

    static ConvexObstacle disk(Vec2 c, double r) { return {Disk{c, r}}; }
    static ConvexObstacle polygon(std::vector<Vec2> v) { return {ConvexPolygon{std::move(v)}}; }
    bool is_disk() const { return std::holds_alternative<Disk>(shape); }
};

// ---------------------------------------------------------------------------
// Metric projections
// ---------------------------------------------------------------------------

/// Closest point of segment [a,b] to q.
Vec2 project_segment(Vec2 q, Vec2 a, Vec2 b);

/// Metric projection of q onto a convex polygon (q itself if inside).
Vec2 project_convex(Vec2 q, const ConvexPolygon& poly);
Vec2 project_convex(Vec2 q, const Disk& disk);
Vec2 project_convex(Vec2 q, const ConvexObstacle& obs);

// ---------------------------------------------------------------------------
// Polygon construction
// ---------------------------------------------------------------------------

/// Intersects `seed` with every half-plane by sequential clipping.
/// Throws EmptyIntersection when the result has no interior.
ConvexPolygon intersect_halfplanes(std::span<const HalfPlane> planes, const ConvexPolygon& seed);

/// Strict convex hull (collinear points dropped), CCW, vertices are a subset
/// of the input. Throws DegenerateInput for fewer than 3 distinct
/// non-collinear points.
ConvexPolygon convex_hull(std::span<const Vec2> points);

/// Mitred outward offset of a simple CCW polygon: every edge is translated by
/// r along its outward normal and adjacent offset edges are re-intersected.
/// Throws SelfIntersection if the offset boundary crosses itself.
std::vector<Vec2> dilate_polygon(std::span<const Vec2> vertices, double r);

/// Inward offset of a convex CCW polygon by r (clips the polygon against its
/// own inward-shifted edges). Throws EmptyIntersection if nothing remains.
ConvexPolygon erode_convex(const ConvexPolygon& poly, double r);

/// Regular n-gon inscribed in the circle (center, radius).
ConvexPolygon regular_ngon(Vec2 center, double radius, int n);

// ---------------------------------------------------------------------------
// Ray casting
// ---------------------------------------------------------------------------

struct RayHit {
    Vec2 point;
    double distance = 0.0;
};

/// Ray/segment intersection; returns the ray parameter t >= 0 or nothing.
std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);
/// Ray/circle intersection (nearest t >= 0), treating the disk as solid.
std::optional<double> ray_disk(Vec2 origin, Vec2 dir, const Disk& disk);
/// Nearest t >= 0 against a closed polygon boundary.
std::optional<double> ray_polygon(Vec2 origin, Vec2 dir, std::span<const Vec2> vertices);

/// Nearest intersection within max_range over a list of obstacles.
std::optional<RayHit> ray_cast(Vec2 origin, Vec2 dir, std::span<const ConvexObstacle> obstacles,
                               double max_range);

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

/// Even-odd test for arbitrary simple polygons.
bool point_in_polygon(Vec2 q, std::span<const Vec2> vertices);

/// Distance from q to the boundary of a simple polygon.
double distance_to_polygon_boundary(Vec2 q, std::span<const Vec2> vertices);

/// True if the open segments (a,b) and (c,d) properly cross.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// True if the closed polyline is free of self-crossings.
bool is_simple_polygon(std::span<const Vec2> vertices);

/// Signed area (positive for CCW).
double signed_area(std::span<const Vec2> vertices);

/// Drops vertices that continue the previous edge in a straight line.
std::vector<Vec2> merge_collinear_vertices(std::span<const Vec2> vertices);

}  // namespace starnav
