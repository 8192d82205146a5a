#include "starnav/implicit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace starnav {

namespace {

// w^p for even p via squaring; exact for the small integer exponents we use.
double ipow(double w, int p) {
    double r = 1.0, b = w;
    int e = p;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

// (w1^p + w2^p)^(1/p), scaled by max(|w1|,|w2|) so intermediates stay in
// [1, 2] regardless of argument magnitude.
double lp_blend(double w1, double w2, int p) {
    double m = std::max(std::abs(w1), std::abs(w2));
    if (m == 0.0) return 0.0;
    double s = ipow(w1 / m, p) + ipow(w2 / m, p);
    return m * std::pow(s, 1.0 / p);
}

struct BlendDerivs {
    double a = 0.0;                      // (w1^p + w2^p)^(1/p)
    double a1 = 0.0, a2 = 0.0;           // first partials
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;  // second partials
};

BlendDerivs lp_blend_derivs(double w1, double w2, int p) {
    double m = std::max(std::abs(w1), std::abs(w2));
    if (m <= 1e-300) throw NearVertex("implicit composition is singular where both child values vanish");
    double u1 = w1 / m, u2 = w2 / m;
    double u1p = ipow(u1, p), u2p = ipow(u2, p);
    double s = u1p + u2p;  // in [1, 2]
    BlendDerivs d;
    double s_pow = std::pow(s, 1.0 / p - 1.0);
    d.a = m * s * s_pow;  // m * s^(1/p)
    d.a1 = ipow(u1, p - 1) * s_pow;
    d.a2 = ipow(u2, p - 1) * s_pow;
    double c = (p - 1) / m * std::pow(s, 1.0 / p - 2.0);
    d.a11 = c * ipow(u1, p - 2) * u2p;
    d.a22 = c * ipow(u2, p - 2) * u1p;
    d.a12 = -c * ipow(u1, p - 1) * ipow(u2, p - 1);
    return d;
}

double combine_value(double w1, double w2, bool conjunction, int p) {
    double a = lp_blend(w1, w2, p);
    return conjunction ? w1 + w2 - a : w1 + w2 + a;
}

ImplicitJet combine_jet(const ImplicitJet& j1, const ImplicitJet& j2, bool conjunction, int p) {
    BlendDerivs d = lp_blend_derivs(j1.value, j2.value, p);
    double s = conjunction ? -1.0 : 1.0;
    ImplicitJet out;
    out.value = j1.value + j2.value + s * d.a;
    double c1 = 1.0 + s * d.a1;
    double c2 = 1.0 + s * d.a2;
    out.gradient = c1 * j1.gradient + c2 * j2.gradient;
    out.hessian = c1 * j1.hessian + c2 * j2.hessian +
                  s * (d.a11 * Mat2::outer(j1.gradient, j1.gradient) +
                       d.a12 * (Mat2::outer(j1.gradient, j2.gradient) +
                                Mat2::outer(j2.gradient, j1.gradient)) +
                       d.a22 * Mat2::outer(j2.gradient, j2.gradient));
    return out;
}

double eval_value(const TreeNode& node, Vec2 x, int p) {
    if (node.is_leaf()) return node.plane.signed_distance(x);
    bool conj = node.op == TreeNode::Op::kAnd;
    double acc = eval_value(node.children[0], x, p);
    for (size_t i = 1; i < node.children.size(); ++i) {
        acc = combine_value(acc, eval_value(node.children[i], x, p), conj, p);
    }
    return acc;
}

ImplicitJet eval_jet(const TreeNode& node, Vec2 x, int p) {
    if (node.is_leaf()) {
        return ImplicitJet{node.plane.signed_distance(x), node.plane.normal, {0, 0, 0, 0}};
    }
    bool conj = node.op == TreeNode::Op::kAnd;
    ImplicitJet acc = eval_jet(node.children[0], x, p);
    for (size_t i = 1; i < node.children.size(); ++i) {
        acc = combine_jet(acc, eval_jet(node.children[i], x, p), conj, p);
    }
    return acc;
}

}  // namespace

double r_conjunction(double w1, double w2, int p) { return combine_value(w1, w2, true, p); }
double r_disjunction(double w1, double w2, int p) { return combine_value(w1, w2, false, p); }

// ---------------------------------------------------------------------------
// Tree construction
// ---------------------------------------------------------------------------

namespace {

// Indices of the strict convex hull among `pts`, in CCW order.
std::vector<size_t> hull_indices(const std::vector<Vec2>& pts) {
    std::vector<size_t> idx(pts.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
    });
    auto build = [&](auto begin, auto end) {
        std::vector<size_t> chain;
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   (pts[chain[chain.size() - 1]] - pts[chain[chain.size() - 2]])
                           .cross(pts[*it] - pts[chain[chain.size() - 2]]) <= kGeomEps)
                chain.pop_back();
            chain.push_back(*it);
        }
        return chain;
    };
    std::vector<size_t> lower = build(idx.begin(), idx.end());
    std::vector<size_t> upper = build(idx.rbegin(), idx.rend());
    lower.pop_back();
    upper.pop_back();
    lower.insert(lower.end(), upper.begin(), upper.end());
    return lower;
}

struct TreeBuilder {
    const std::vector<Vec2>& verts;
    const std::vector<bool>& concave;  // per original polygon vertex
    int p;

    HalfPlane edge_plane(size_t i) const {
        Vec2 a = verts[i], b = verts[(i + 1) % verts.size()];
        return HalfPlane(a, (b - a).perp());  // unit inward normal for CCW
    }

    TreeNode leaf(size_t i) const {
        TreeNode n;
        n.op = TreeNode::Op::kLeaf;
        n.plane = edge_plane(i);
        return n;
    }

    static TreeNode combine(TreeNode a, TreeNode b, TreeNode::Op op) {
        if (a.op == op) {
            a.children.push_back(std::move(b));
            return a;
        }
        TreeNode n;
        n.op = op;
        n.children.push_back(std::move(a));
        n.children.push_back(std::move(b));
        return n;
    }

    // chain: polygon vertex indices along the boundary, >= 2 entries. The
    // chain's endpoints are always extreme points of its own vertex set, so
    // splitting at the interior hull vertices terminates.
    TreeNode make_chain(const std::vector<size_t>& chain) const {
        if (chain.size() == 2) return leaf(chain[0]);
        std::vector<Vec2> pts(chain.size());
        for (size_t i = 0; i < chain.size(); ++i) pts[i] = verts[chain[i]];
        std::vector<size_t> hull = hull_indices(pts);  // positions within `chain`
        std::vector<bool> on_hull(chain.size(), false);
        for (size_t h : hull) on_hull[h] = true;
        std::vector<size_t> splits;
        for (size_t i = 1; i + 1 < chain.size(); ++i) {
            if (on_hull[i]) splits.push_back(i);
        }
        if (splits.empty()) throw NotSimplePolygon("chain recursion failed to find a split vertex");

        std::vector<std::vector<size_t>> segments;
        size_t start = 0;
        for (size_t s : splits) {
            segments.emplace_back(chain.begin() + start, chain.begin() + s + 1);
            start = s;
        }
        segments.emplace_back(chain.begin() + start, chain.end());

        TreeNode node = make_chain(segments[0]);
        for (size_t k = 1; k < segments.size(); ++k) {
            size_t split_vertex = chain[splits[k - 1]];
            TreeNode::Op op = concave[split_vertex] ? TreeNode::Op::kOr : TreeNode::Op::kAnd;
            node = combine(std::move(node), make_chain(segments[k]), op);
        }
        return node;
    }
};

}  // namespace

ObstacleTree build_tree(std::span<const Vec2> vertices, int p, Vec2 star_center_body) {
    if (p < 2 || p % 2 != 0) throw DegenerateInput("R-function exponent p must be even and >= 2");
    std::vector<Vec2> verts = merge_collinear_vertices(vertices);
    if (verts.size() < 3) throw DegenerateInput("polygon needs >= 3 non-collinear vertices");
    if (signed_area(verts) <= 0.0) throw NotSimplePolygon("polygon vertices must be CCW");
    if (!is_simple_polygon(verts)) throw NotSimplePolygon();

    size_t n = verts.size();
    std::vector<bool> concave(n, false);
    for (size_t i = 0; i < n; ++i) {
        Vec2 e1 = verts[i] - verts[(i + n - 1) % n];
        Vec2 e2 = verts[(i + 1) % n] - verts[i];
        concave[i] = e1.cross(e2) < 0.0;
    }

    TreeBuilder builder{verts, concave, p};
    std::vector<size_t> hull = hull_indices(verts);
    std::sort(hull.begin(), hull.end());  // hull order equals polygon order for a simple CCW polygon

    TreeNode root;
    bool first = true;
    for (size_t t = 0; t < hull.size(); ++t) {
        size_t a = hull[t], b = hull[(t + 1) % hull.size()];
        std::vector<size_t> chain;
        for (size_t i = a;; i = (i + 1) % n) {
            chain.push_back(i);
            if (i == b && chain.size() > 1) break;
        }
        TreeNode node = builder.make_chain(chain);
        root = first ? std::move(node) : TreeBuilder::combine(std::move(root), std::move(node), TreeNode::Op::kAnd);
        first = false;
    }
    return ObstacleTree(std::move(root), p, std::move(verts), star_center_body);
}

ObstacleTree::ObstacleTree(TreeNode root, int p, std::vector<Vec2> vertices, Vec2 star_center_body)
    : root_(std::move(root)), p_(p), vertices_(std::move(vertices)), star_center_body_(star_center_body) {
    for (Vec2 v : vertices_) circumradius_ = std::max(circumradius_, distance(v, star_center_body_));
}

double ObstacleTree::value(Vec2 body_point) const {
    return -eval_value(root_, body_point, p_);  // negate: positive outside
}

ImplicitJet ObstacleTree::jet(Vec2 body_point) const {
    for (Vec2 v : vertices_) {
        if (distance(body_point, v) < vertex_guard_)
            throw NearVertex("derivative query within guard radius of a polygon vertex");
    }
    ImplicitJet j = eval_jet(root_, body_point, p_);
    return ImplicitJet{-j.value, -j.gradient, -1.0 * j.hessian};
}

double choose_rho(std::span<const Vec2> vertices, Vec2 star_center) {
    if (!point_in_polygon(star_center, vertices)) throw CenterOutside();
    double d = distance_to_polygon_boundary(star_center, vertices);
    if (d <= kGeomEps) throw CenterOutside("star center lies on the polygon boundary");
    return 0.9 * d;
}

// ---------------------------------------------------------------------------
// PlacedObstacle
// ---------------------------------------------------------------------------

PlacedObstacle::PlacedObstacle(std::shared_ptr<const ObstacleTree> tree_, Mat2 rotation_, Vec2 center_,
                               double epsilon_, double rho_, double delta_)
    : tree(std::move(tree_)), rotation(rotation_), center(center_), epsilon(epsilon_), rho(rho_),
      delta(delta_) {
    world_vertices.reserve(tree->vertices().size());
    for (Vec2 v : tree->vertices()) world_vertices.push_back(to_world(v));
}

Vec2 PlacedObstacle::gradient(Vec2 x) const {
    return rotation * tree->jet(to_body(x)).gradient;
}

Mat2 PlacedObstacle::hessian(Vec2 x) const {
    return rotation * tree->jet(to_body(x)).hessian * rotation.transpose();
}

ImplicitJet PlacedObstacle::jet(Vec2 x) const {
    ImplicitJet body = tree->jet(to_body(x));
    return ImplicitJet{body.value, rotation * body.gradient,
                       rotation * body.hessian * rotation.transpose()};
}

double PlacedObstacle::band_radius_bound() const {
    // The obstacle function approximates distance only near the boundary, so
    // pad the circumradius by a wide multiple of epsilon; pruned stars are
    // still gated exactly by the smooth cutoff downstream.
    return tree->circumradius() + std::max(10.0 * epsilon, 1.0);
}

}  // namespace starnav
