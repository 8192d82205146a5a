#pragma once

#include <memory>
#include <span>
#include <vector>

#include "starnav/geom.hpp"

namespace starnav {

// R-function composition of half-plane primitives. Each operation preserves
// the Boolean sign semantics of its arguments: the conjunction is positive iff
// both arguments are positive, the disjunction iff at least one is. The
// exponent p must be even so that (w1^p + w2^p)^(1/p) stays real and smooth
// for negative arguments.
double r_conjunction(double w1, double w2, int p);
double r_disjunction(double w1, double w2, int p);
inline double r_negation(double w) { return -w; }

/// Value, gradient and Hessian of a composed implicit function at a point.
struct ImplicitJet {
    double value = 0.0;
    Vec2 gradient;
    Mat2 hessian{0.0, 0.0, 0.0, 0.0};
};

/// Node of the AND-OR composition tree. Leaves hold one unit-normal edge
/// half-plane (normal pointing into the polygon); internal nodes combine two
/// or more children with one R-function.
struct TreeNode {
    enum class Op { kLeaf, kAnd, kOr };

    Op op = Op::kLeaf;
    HalfPlane plane;                  // leaf payload
    std::vector<TreeNode> children;   // internal payload, size >= 2

    bool is_leaf() const { return op == Op::kLeaf; }
};

/// Implicit representation of one star-shaped polygon in its body frame.
/// The stored obstacle function is negative strictly inside the polygon,
/// zero on its boundary and positive outside, and is analytic away from the
/// polygon vertices.
class ObstacleTree {
  public:
    ObstacleTree() = default;
    ObstacleTree(TreeNode root, int p, std::vector<Vec2> vertices, Vec2 star_center_body);

    /// Obstacle function at a body-frame point (defined everywhere).
    double value(Vec2 body_point) const;

    /// Obstacle function with first and second derivatives. Throws NearVertex
    /// when body_point is within the guard radius of a polygon vertex, where
    /// the composition loses analyticity.
    ImplicitJet jet(Vec2 body_point) const;

    const TreeNode& root() const { return root_; }
    int exponent() const { return p_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    Vec2 star_center_body() const { return star_center_body_; }
    /// Largest body-frame distance from the star center to a vertex.
    double circumradius() const { return circumradius_; }
    double vertex_guard() const { return vertex_guard_; }

  private:
    TreeNode root_;
    int p_ = 2;
    std::vector<Vec2> vertices_;
    Vec2 star_center_body_;
    double circumradius_ = 0.0;
    double vertex_guard_ = 1e-7;
};

/// Builds the AND-OR tree of a simple star-shaped CCW polygon: the polygon is
/// the conjunction of the polygonal chains meeting at its convex hull, each
/// chain splits recursively at the vertices of its own hull, and subchains
/// join by disjunction at concave vertices of the original polygon and by
/// conjunction otherwise. Collinear vertices are merged first.
ObstacleTree build_tree(std::span<const Vec2> vertices, int p, Vec2 star_center_body = {});

/// 0.9 times the exact minimum distance from the star center to the polygon
/// boundary; guarantees the closed disk of that radius stays strictly inside.
/// Throws CenterOutside when the center is not interior.
double choose_rho(std::span<const Vec2> vertices, Vec2 star_center);

/// One catalogued star placed in the world: body-frame tree plus pose, band
/// width epsilon, model disk radius rho and the measured band margin delta.
struct PlacedObstacle {
    std::shared_ptr<const ObstacleTree> tree;
    Mat2 rotation = Mat2::identity();  // body -> world
    Vec2 center;                       // world position of the star center
    double epsilon = 0.0;
    double rho = 0.0;
    double delta = 0.0;
    std::vector<Vec2> world_vertices;  // cached pose-transformed polygon

    PlacedObstacle() = default;
    PlacedObstacle(std::shared_ptr<const ObstacleTree> tree_, Mat2 rotation_, Vec2 center_,
                   double epsilon_, double rho_, double delta_ = 0.0);

    Vec2 to_body(Vec2 world) const {
        return tree->star_center_body() + rotation.transpose() * (world - center);
    }
    Vec2 to_world(Vec2 body) const {
        return center + rotation * (body - tree->star_center_body());
    }

    double value(Vec2 x) const { return tree->value(to_body(x)); }
    Vec2 gradient(Vec2 x) const;
    Mat2 hessian(Vec2 x) const;
    /// Value plus world-frame derivatives in one pass.
    ImplicitJet jet(Vec2 x) const;

    /// Conservative radius around `center` certain to contain the set
    /// {beta <= epsilon}; used to prune inactive stars.
    double band_radius_bound() const;
};

}  // namespace starnav
