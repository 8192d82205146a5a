#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "starnav/control.hpp"
#include "starnav/diffeo.hpp"

using namespace starnav;

namespace {

ConvexPolygon big_bounds(double half = 50.0) {
    return ConvexPolygon{{{-half, -half}, {half, -half}, {half, half}, {-half, half}}};
}

std::vector<Vec2> star10() {
    std::vector<Vec2> v;
    for (int k = 0; k < 5; ++k) {
        double at = M_PI / 2 + 2 * M_PI * k / 5;
        double av = at + M_PI / 5;
        v.push_back({1.5 * std::cos(at), 1.5 * std::sin(at)});
        v.push_back({0.6 * std::cos(av), 0.6 * std::sin(av)});
    }
    return v;
}

SemanticMap one_star_map(Vec2 center) {
    auto tree = std::make_shared<const ObstacleTree>(build_tree(star10(), 20, Vec2{0, 0}));
    double rho = choose_rho(tree->vertices(), {0, 0});
    SemanticMap map;
    map.stars.push_back(PlacedObstacle(tree, Mat2::identity(), center, 0.3, rho));
    map.star_sources.push_back(0);
    return map;
}

// Distance from y to the local-freespace boundary along a direction.
double lf_extent(const LocalFreespace& lf, Vec2 y, Vec2 dir) {
    double t_max = 1e300;
    for (const HalfPlane& hp : lf.polygon.edge_halfplanes()) {
        double nd = hp.normal.dot(dir);
        if (nd >= -1e-15) continue;
        t_max = std::min(t_max, hp.normal.dot(hp.anchor - y) / nd);
    }
    return t_max;
}

}  // namespace

TEST_CASE("local freespace with nothing in range is the half-range disk") {
    ModelLayer empty;
    LocalFreespace lf = local_freespace({1, 2}, empty, big_bounds(), 8.0);
    CHECK(lf.polygon.vertices.size() == 64);
    for (Vec2 v : lf.polygon.vertices) {
        CHECK(distance(v, {1, 2}) == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("one sensed point clips at the midpoint") {
    Vec2 y{0, 0};
    ModelLayer ml;
    ml.fragments.push_back(Fragment{0, {{2.0, 0.0}}});
    LocalFreespace lf = local_freespace(y, ml, big_bounds(), 8.0);
    CHECK(lf_extent(lf, y, {1, 0}) == doctest::Approx(1.0).epsilon(1e-9));
    // behind the robot the seed disk is untouched
    CHECK(lf_extent(lf, y, {-1, 0}) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("the freespace boundary toward a model disk sits at half the separation") {
    Vec2 y{0, 0};
    for (double d : {0.6, 1.5, 3.0}) {
        ModelLayer ml;
        ml.disks.push_back(Disk{{d + 1.0, 0.0}, 1.0});  // separation d along +x
        LocalFreespace lf = local_freespace(y, ml, big_bounds(), 8.0);
        CHECK(std::abs(lf_extent(lf, y, {1, 0}) - d / 2) < 1e-6);
    }
}

TEST_CASE("local freespace excludes every construction point") {
    oracles::Rng rng(5);
    for (int it = 0; it < 20; ++it) {
        Vec2 y = rng.point(-2, 2);
        ModelLayer ml;
        Fragment frag{0, {}};
        Vec2 base = y + Vec2{rng.uniform(1.0, 3.0), rng.uniform(-1.0, 1.0)};
        for (int k = 0; k < 12; ++k) frag.points.push_back(base + Vec2{0.05 * k, 0.02 * k * k});
        ml.fragments.push_back(frag);
        ml.disks.push_back(Disk{y + Vec2{-3.0, rng.uniform(-1, 1)}, 0.7});
        LocalFreespace lf = local_freespace(y, ml, big_bounds(), 8.0);
        CHECK(lf.polygon.contains(y));
        for (Vec2 p : frag.points) CHECK(!lf.polygon.contains(p, -1e-9));
        CHECK(!lf.polygon.contains(ml.disks[0].center, -1e-9));
    }
}

TEST_CASE("fully actuated pullback law") {
    SemanticMap empty_map;
    ModelLayer empty_model;
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();

    Vec2 u = fully_actuated_u({1, 0}, empty_map, empty_model, bounds, {0, 0}, params);
    CHECK(distance(u, {-0.4, 0.0}) < 1e-12);

    Vec2 at_goal = fully_actuated_u({0, 0}, empty_map, empty_model, bounds, {0, 0}, params);
    CHECK(at_goal.norm() == 0.0);
}

TEST_CASE("the stationary point behind a star is where the disk saddle pulls back") {
    Vec2 center{0.5, -0.25};
    SemanticMap map = one_star_map(center);
    const PlacedObstacle& star = map.stars[0];
    ModelLayer model = model_layer(map);
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();
    Vec2 goal{4.0, 1.0};

    Vec2 g_dir = (goal - center).normalized();
    Vec2 saddle_model = center - star.rho * g_dir;
    auto t_boundary = ray_polygon(center, -1.0 * g_dir, star.world_vertices);
    REQUIRE(t_boundary.has_value());
    Vec2 x0 = center - (*t_boundary + 0.01) * g_dir;
    Vec2 x_saddle = invert_diffeo(saddle_model, map, x0);

    Vec2 u = fully_actuated_u(x_saddle, map, model, bounds, goal, params);
    CHECK(u.norm() < 1e-6);

    // numerical linearization there has one stable and one unstable direction
    Mat2 A = oracles::fd_jacobian(
        [&](Vec2 q) { return fully_actuated_u(q, map, model, bounds, goal, params); }, x_saddle,
        1e-5);
    CHECK(A.det() < 0.0);  // real eigenvalues of opposite sign
}

TEST_CASE("reference inputs for the differential drive") {
    ModelLayer empty_model;
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();

    // goal straight ahead at distance 2
    DiffDriveRefs ahead = diffdrive_refs({0, 0}, 0.0, empty_model, bounds, {2, 0}, params);
    CHECK(ahead.v_hat == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(ahead.omega_hat == doctest::Approx(0.0));

    // aligned heading: the steering vanishes
    DiffDriveRefs aligned = diffdrive_refs({1, 1}, M_PI / 4, empty_model, bounds,
                                           {1 + std::sqrt(2.0), 1 + std::sqrt(2.0)}, params);
    CHECK(std::abs(aligned.omega_hat) < 1e-9);

    // goal behind the heading: the reference speed reverses
    DiffDriveRefs behind = diffdrive_refs({0, 0}, M_PI, empty_model, bounds, {1.5, 0}, params);
    CHECK(behind.v_hat == doctest::Approx(-0.4 * 1.5).epsilon(1e-9));
}

TEST_CASE("actual inputs equal reference inputs in the identity region") {
    SemanticMap empty_map;
    ModelLayer empty_model;
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();
    Vec2 goal{3, 1};

    oracles::Rng rng(9);
    for (int i = 0; i < 25; ++i) {
        Vec2 x = rng.point(-2, 2);
        double psi = rng.uniform(-M_PI, M_PI);
        DiffDriveCommand cmd = diffdrive_u(x, psi, empty_map, empty_model, bounds, goal, params);
        DiffDriveRefs refs = diffdrive_refs(x, psi, empty_model, bounds, goal, params);
        CHECK(cmd.v == doctest::Approx(refs.v_hat).epsilon(1e-12));
        CHECK(cmd.omega == doctest::Approx(refs.omega_hat).epsilon(1e-12));
    }

    // zero reference inputs map to zero actual inputs
    DiffDriveCommand at_goal = diffdrive_u(goal, 0.3, empty_map, empty_model, bounds, goal, params);
    CHECK(at_goal.v == 0.0);
    CHECK(at_goal.omega == 0.0);
}

TEST_CASE("the lifted dynamics push forward to the reference dynamics") {
    Vec2 center{0.0, 0.0};
    SemanticMap map = one_star_map(center);
    ModelLayer model = model_layer(map);
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();
    Vec2 goal{5.0, 0.5};

    oracles::Rng rng(13);
    int checked = 0;
    while (checked < 25) {
        Vec2 x = rng.point(-4, 4);
        double beta = map.stars[0].value(x);
        if (beta < 0.02) continue;  // stay clearly in the freespace
        bool near_vertex = false;
        for (Vec2 v : map.stars[0].world_vertices) near_vertex |= distance(x, v) < 0.02;
        if (near_vertex) continue;
        ++checked;
        double psi = rng.uniform(-M_PI, M_PI);

        SE2Eval se2 = evaluate_se2(x, psi, map);
        DiffDriveCommand cmd = diffdrive_u(x, psi, map, model, bounds, goal, params);
        DiffDriveRefs refs = diffdrive_refs(se2.base.y, se2.xi, model, bounds, goal, params);

        // flow (x, psi) for a short time along the actual inputs and compare
        // the model-layer velocity with B(phi) * (v_hat, omega_hat)
        double tau = 1e-6;
        auto lifted = [&](double s) {
            Vec2 xs = x + s * cmd.v * Vec2{std::cos(psi), std::sin(psi)};
            double psis = psi + s * cmd.omega;
            SE2Eval e = evaluate_se2(xs, psis, map);
            return std::tuple<Vec2, double>(e.base.y, e.xi);
        };
        auto [y_p, phi_p] = lifted(tau);
        auto [y_m, phi_m] = lifted(-tau);
        Vec2 y_dot = (y_p - y_m) / (2 * tau);
        double phi_dot = std::remainder(phi_p - phi_m, 2 * M_PI) / (2 * tau);

        Vec2 want_y_dot = refs.v_hat * Vec2{std::cos(se2.xi), std::sin(se2.xi)};
        CHECK(distance(y_dot, want_y_dot) < 1e-5 * std::max(1.0, want_y_dot.norm()));
        CHECK(std::abs(phi_dot - refs.omega_hat) < 1e-5 * std::max(1.0, std::abs(refs.omega_hat)));
    }
}

TEST_CASE("baseline law equals the pullback law wherever the map is the identity") {
    SemanticMap empty_map;  // nothing discovered: h = id everywhere
    ControlParams params{0.4, 8.0};
    ConvexPolygon bounds = big_bounds();
    Vec2 goal{4, 2};

    oracles::Rng rng(15);
    for (int it = 0; it < 20; ++it) {
        // sensed fragments of a convex blob
        Fragment frag{0, {}};
        Vec2 c = rng.point(-1, 1) + Vec2{2.5, 0.0};
        for (int k = -8; k <= 8; ++k) {
            double a = M_PI + 0.08 * k;
            frag.points.push_back(c + 0.8 * Vec2{std::cos(a), std::sin(a)});
        }
        std::vector<Fragment> sensed{frag};
        ModelLayer model;
        model.fragments = sensed;

        Vec2 x = rng.point(-1, 1);
        Vec2 u_full = fully_actuated_u(x, empty_map, model, bounds, goal, params);
        Vec2 u_base = baseline_u(x, sensed, bounds, goal, params);
        CHECK(distance(u_full, u_base) < 1e-12);

        double psi = rng.uniform(-M_PI, M_PI);
        DiffDriveCommand full = diffdrive_u(x, psi, empty_map, model, bounds, goal, params);
        DiffDriveCommand base = baseline_diffdrive_u(x, psi, sensed, bounds, goal, params);
        CHECK(full.v == doctest::Approx(base.v).epsilon(1e-12));
        CHECK(full.omega == doctest::Approx(base.omega).epsilon(1e-12));
    }
}

TEST_CASE("projection onto a line chord falls back to the point for missing chords") {
    ModelLayer empty;
    LocalFreespace lf = local_freespace({0, 0}, empty, big_bounds(), 8.0);
    Vec2 p = project_onto_lf_line(lf, {0, 0}, {0, 1}, {0, 10});
    CHECK(distance(p, {0.0, 4.0}) < 1e-6);  // chord end of the 64-gon
    Vec2 q = project_onto_lf_line(lf, {0, 0}, {1, 0}, {-10, 0});
    CHECK(distance(q, {-4.0, 0.0}) < 1e-6);
}
