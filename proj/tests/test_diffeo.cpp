#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "starnav/diffeo.hpp"

using namespace starnav;

namespace {

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

PlacedObstacle make_star(Vec2 center, double angle = 0.0, double epsilon = 0.3, int p = 20) {
    auto tree = std::make_shared<const ObstacleTree>(build_tree(star10(), p, Vec2{0, 0}));
    double rho = choose_rho(tree->vertices(), {0, 0});
    return PlacedObstacle(tree, Mat2::rotation(angle), center, epsilon, rho);
}

SemanticMap one_star_map(Vec2 center = {0, 0}) {
    SemanticMap map;
    map.stars.push_back(make_star(center));
    map.star_sources.push_back(0);
    return map;
}

// Samples a point in the band 0 < beta < epsilon, away from vertices.
Vec2 band_point(const PlacedObstacle& star, oracles::Rng& rng) {
    for (;;) {
        Vec2 x = star.center + rng.point(-2.5, 2.5);
        double beta = star.value(x);
        if (beta <= 1e-3 || beta >= star.epsilon - 1e-3) continue;
        bool near_vertex = false;
        for (Vec2 v : star.world_vertices) near_vertex = near_vertex || distance(x, v) < 5e-3;
        if (near_vertex) continue;
        return x;
    }
}

}  // namespace

TEST_CASE("smooth cutoff and its derivatives") {
    CHECK(cutoff(-1.0) == 0.0);
    CHECK(cutoff_d1(-1.0) == 0.0);
    CHECK(cutoff_d2(-1.0) == 0.0);
    CHECK(cutoff(0.0) == 0.0);
    CHECK(cutoff(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(cutoff_d1(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    // note: the second derivative vanishes exactly at chi = 1/2, so the
    // comparison blends absolute and relative error
    for (double chi : {0.2, 0.5, 1.5, 3.0}) {
        double fd1 = oracles::fd_derivative([](double c) { return cutoff(c); }, chi);
        CHECK(std::abs(cutoff_d1(chi) - fd1) < 1e-6 * std::max(1.0, std::abs(fd1)));
        double fd2 = oracles::fd_derivative([](double c) { return cutoff_d1(c); }, chi);
        CHECK(std::abs(cutoff_d2(chi) - fd2) < 1e-6 * std::max(1.0, std::abs(fd2)));
    }
}

TEST_CASE("switches form a partition of unity and vanish off the band") {
    SemanticMap map = one_star_map();
    const PlacedObstacle& star = map.stars[0];

    // far away every switch is zero with zero derivatives
    SwitchEval far = switches({10, 10}, map);
    CHECK(far.sigma[0] == 0.0);
    CHECK(far.sigma_d == 1.0);
    CHECK(far.grads[0].norm() == 0.0);

    // on the obstacle boundary the switch saturates at one
    Vec2 xb{0.0, 1.5 - 1e-12};  // boundary point on the top tip axis
    // walk down the +y axis until beta is essentially zero
    Vec2 x_axis{0.0, 0.9};
    double beta = star.value(x_axis);
    CHECK(beta < 0.0);  // inside along the axis between valley circle and tip
    Vec2 x_edge{0.35, 0.6};
    (void)xb;
    (void)x_edge;

    oracles::Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        Vec2 x = rng.point(-4, 4);
        if (star.value(x) < 0) continue;
        SwitchEval sw = switches(x, map);
        double total = sw.sigma_d;
        for (double s : sw.sigma) total += s;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(sw.sigma[0] >= 0.0);
        CHECK(sw.sigma[0] <= 1.0 + 1e-12);
    }
}

TEST_CASE("switch value and derivatives against finite differences") {
    SemanticMap map = one_star_map();
    oracles::Rng rng(17);
    auto sigma_of = [&](Vec2 q) { return switches(q, map).sigma[0]; };
    for (int i = 0; i < 40; ++i) {
        Vec2 x = band_point(map.stars[0], rng);
        SwitchEval sw = switches(x, map);
        Vec2 fd = oracles::fd_gradient(sigma_of, x);
        CHECK(distance(sw.grads[0], fd) / std::max(1.0, fd.norm()) < 1e-5);
    }
    // boundary value: eta(0) = 1, probed at an edge midpoint
    const std::vector<Vec2>& poly = map.stars[0].tree->vertices();
    Vec2 a = poly[0], b = poly[1];
    Vec2 outward = -(b - a).perp().normalized();
    Vec2 near_edge = 0.5 * (a + b) + 1e-9 * outward;
    double beta = map.stars[0].value(near_edge);
    CHECK(std::abs(beta) < 1e-6);
    CHECK(switches(near_edge, map).sigma[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("deforming factor and its derivatives") {
    PlacedObstacle star = make_star({0, 0});
    const double rho = star.rho;

    PlacedObstacle unit = star;
    unit.rho = 1.0;
    DeformEval nu = deforming_factor({2, 0}, unit);
    CHECK(nu.value == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(distance(nu.gradient, {-0.25, 0.0}) < 1e-14);

    DeformEval on_disk = deforming_factor({rho, 0}, star);
    CHECK(on_disk.value == doctest::Approx(1.0).epsilon(1e-14));

    oracles::Rng rng(19);
    auto nu_val = [&](Vec2 q) { return deforming_factor(q, star).value; };
    auto nu_grad = [&](Vec2 q) { return deforming_factor(q, star).gradient; };
    for (int i = 0; i < 30; ++i) {
        Vec2 x = rng.point(-3, 3);
        if (distance(x, star.center) < 0.3) continue;
        DeformEval d = deforming_factor(x, star);
        CHECK(distance(d.gradient, oracles::fd_gradient(nu_val, x)) < 1e-6);
        Mat2 fdh = oracles::fd_jacobian(nu_grad, x);
        CHECK(std::abs(d.hessian.a11 - fdh.a11) < 1e-6);
        CHECK(std::abs(d.hessian.a12 - fdh.a12) < 1e-6);
        CHECK(std::abs(d.hessian.a22 - fdh.a22) < 1e-6);
    }
    CHECK_THROWS_AS(deforming_factor(star.center, star), AtStarCenter);
}

TEST_CASE("the map is the identity away from bands and fixes nothing else there") {
    SemanticMap map = one_star_map();
    oracles::Rng rng(29);
    for (int i = 0; i < 200; ++i) {
        Vec2 x = rng.point(-6, 6);
        if (map.stars[0].value(x) <= map.stars[0].epsilon) continue;
        DiffeoEval d = evaluate_diffeo(x, map);
        CHECK(d.y.x == x.x);  // bitwise identity
        CHECK(d.y.y == x.y);
        CHECK(d.J.a11 == 1.0);
        CHECK(d.J.a12 == 0.0);
        CHECK(d.J.a21 == 0.0);
        CHECK(d.J.a22 == 1.0);
        CHECK(d.dJ11_dx == 0.0);
        CHECK(d.dJ22_dy == 0.0);
    }
}

TEST_CASE("boundary points land on the model disk") {
    SemanticMap map = one_star_map({1.0, -0.5});
    const PlacedObstacle& star = map.stars[0];
    const std::vector<Vec2>& poly = star.tree->vertices();
    int checked = 0;
    for (size_t e = 0; e < poly.size(); ++e) {
        Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
        for (int k = 1; k < 72; ++k) {
            Vec2 body = a + (k / 72.0) * (b - a);
            Vec2 xw = star.to_world(body);
            DiffeoEval d = evaluate_diffeo(xw, map);
            CHECK(std::abs(distance(d.y, star.center) - star.rho) < 1e-8);
            ++checked;
        }
    }
    CHECK(checked >= 700);
}

TEST_CASE("Jacobian and its derivatives match finite differences in the band") {
    SemanticMap map = one_star_map({0.5, 0.25});
    const PlacedObstacle& star = map.stars[0];
    oracles::Rng rng(31);
    auto h_of = [&](Vec2 q) { return evaluate_diffeo(q, map).y; };

    for (int i = 0; i < 120; ++i) {
        Vec2 x = band_point(star, rng);
        DiffeoEval d = evaluate_diffeo(x, map);

        Mat2 fdJ = oracles::fd_jacobian(h_of, x);
        double scale = std::max(1.0, std::abs(fdJ.a11));
        CHECK(std::abs(d.J.a11 - fdJ.a11) / scale < 1e-6);
        CHECK(std::abs(d.J.a12 - fdJ.a12) / scale < 1e-6);
        CHECK(std::abs(d.J.a21 - fdJ.a21) / scale < 1e-6);
        CHECK(std::abs(d.J.a22 - fdJ.a22) / scale < 1e-6);

        auto entry = [&](Vec2 q, int which) {
            DiffeoEval e = evaluate_diffeo(q, map);
            switch (which) {
                case 0: return e.J.a11;
                case 1: return e.J.a12;
                case 2: return e.J.a21;
                default: return e.J.a22;
            }
        };
        double got[8] = {d.dJ11_dx, d.dJ11_dy, d.dJ12_dx, d.dJ12_dy,
                         d.dJ21_dx, d.dJ21_dy, d.dJ22_dx, d.dJ22_dy};
        int idx = 0;
        for (int which = 0; which < 4; ++which) {
            Vec2 fd = oracles::fd_gradient([&](Vec2 q) { return entry(q, which); }, x);
            double fl = std::max({1.0, std::abs(fd.x), std::abs(fd.y)});
            CHECK(std::abs(got[idx++] - fd.x) / fl < 1e-5);
            CHECK(std::abs(got[idx++] - fd.y) / fl < 1e-5);
        }
    }
}

TEST_CASE("map differential has positive trace and determinant over the band") {
    SemanticMap map = one_star_map({-0.4, 0.8});
    oracles::Rng rng(37);
    for (int i = 0; i < 2000; ++i) {
        Vec2 x = band_point(map.stars[0], rng);
        DiffeoEval d = evaluate_diffeo(x, map);
        CHECK(d.J.det() > 0.0);
        CHECK(d.J.trace() > 0.0);
    }
}

TEST_CASE("pulled-back boundary normals stay radial") {
    SemanticMap map = one_star_map();
    const PlacedObstacle& star = map.stars[0];
    const std::vector<Vec2>& poly = star.tree->vertices();
    for (size_t e = 0; e < poly.size(); ++e) {
        Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
        for (int k = 1; k < 8; ++k) {
            Vec2 xc = star.to_world(a + (k / 8.0) * (b - a));
            DiffeoEval d = evaluate_diffeo(xc, map);
            Vec2 grad = star.gradient(xc);
            Vec2 pulled = d.J.inverse().transpose() * grad;
            Vec2 radial = (xc - star.center).normalized();
            double coeff = pulled.dot(radial);
            CHECK(coeff > 0.0);
            double angle = std::atan2(pulled.cross(radial), pulled.dot(radial));
            CHECK(std::abs(angle) < 1e-6);
        }
    }
}

TEST_CASE("SE(2) lift in the identity region") {
    SemanticMap map;  // empty: J = I everywhere
    SE2Eval se2 = evaluate_se2({2, 3}, M_PI / 2, map);
    CHECK(distance(se2.e, {0, 1}) < 1e-15);
    CHECK(se2.xi == doctest::Approx(M_PI / 2));
    CHECK(se2.dxi_dpsi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(se2.dxi_dx.norm() == 0.0);
    CHECK(se2.dxi_heading == 0.0);
}

TEST_CASE("SE(2) derivatives match finite differences") {
    SemanticMap map = one_star_map({0.2, -0.6});
    oracles::Rng rng(41);
    for (int i = 0; i < 80; ++i) {
        Vec2 x = band_point(map.stars[0], rng);
        double psi = rng.uniform(-M_PI, M_PI);
        SE2Eval se2 = evaluate_se2(x, psi, map);

        // heading derivative of xi
        double h = 1e-6;
        double xi_p = evaluate_se2(x, psi + h, map).xi;
        double xi_m = evaluate_se2(x, psi - h, map).xi;
        double fd_psi = std::remainder(xi_p - xi_m, 2 * M_PI) / (2 * h);
        CHECK(oracles::rel_err(se2.dxi_dpsi, fd_psi, 1e-6) < 1e-5);

        // directional derivative of xi along the heading
        Vec2 dir{std::cos(psi), std::sin(psi)};
        double hs = 1e-5;
        double xi_f = evaluate_se2(x + hs * dir, psi, map).xi;
        double xi_b = evaluate_se2(x - hs * dir, psi, map).xi;
        double fd_dir = std::remainder(xi_f - xi_b, 2 * M_PI) / (2 * hs);
        CHECK(oracles::rel_err(se2.dxi_heading, fd_dir, 1e-6) < 1e-4);

        // the assembled heading derivative agrees with the full row
        CHECK(se2.dxi_heading == doctest::Approx(se2.dxi_dx.dot(dir)).epsilon(1e-9));

        // full row against finite differences
        Vec2 fd_row{std::remainder(evaluate_se2({x.x + hs, x.y}, psi, map).xi -
                                       evaluate_se2({x.x - hs, x.y}, psi, map).xi,
                                   2 * M_PI) /
                        (2 * hs),
                    std::remainder(evaluate_se2({x.x, x.y + hs}, psi, map).xi -
                                       evaluate_se2({x.x, x.y - hs}, psi, map).xi,
                                   2 * M_PI) /
                        (2 * hs)};
        CHECK(distance(se2.dxi_dx, fd_row) / std::max(1.0, fd_row.norm()) < 1e-4);
    }
}

TEST_CASE("map inversion") {
    SemanticMap map = one_star_map({1.5, 0.5});
    const PlacedObstacle& star = map.stars[0];

    // identity region: converges immediately to y itself
    Vec2 far{6.0, -4.0};
    Vec2 inv = invert_diffeo(far, map, far);
    CHECK(inv.x == far.x);
    CHECK(inv.y == far.y);

    // round trip through band points
    oracles::Rng rng(43);
    for (int i = 0; i < 40; ++i) {
        Vec2 x = band_point(star, rng);
        Vec2 y = evaluate_diffeo(x, map).y;
        Vec2 back = invert_diffeo(y, map, x + Vec2{0.01, -0.01});
        CHECK(distance(back, x) < 1e-8);
    }

    // A point on the model disk boundary pulls back to the obstacle
    // boundary. The guess must start near the freespace-side preimage: the
    // map also fixes the rho-circle inside the obstacle, so a guess that
    // crosses the body can converge to that spurious preimage instead.
    Vec2 dir = Vec2{0.3, 1.0}.normalized();
    Vec2 y_disk = star.center + star.rho * dir;
    auto t_boundary = ray_polygon(star.center, dir, star.world_vertices);
    REQUIRE(t_boundary.has_value());
    Vec2 x0 = star.center + (*t_boundary + 0.02) * dir;
    Vec2 xb = invert_diffeo(y_disk, map, x0);
    CHECK(std::abs(star.value(xb)) < 1e-6);
}

TEST_CASE("the goal set by validated worlds stays fixed and discovery is seamless") {
    SemanticMap map = one_star_map({-2.0, 1.0});
    Vec2 goal{3.0, -2.0};  // far outside the band
    DiffeoEval d = evaluate_diffeo(goal, map);
    CHECK(d.y.x == goal.x);
    CHECK(d.y.y == goal.y);

    // adding a second star whose band excludes x leaves everything bitwise
    // unchanged at x
    oracles::Rng rng(47);
    for (int i = 0; i < 50; ++i) {
        Vec2 x = band_point(map.stars[0], rng);
        DiffeoEval before = evaluate_diffeo(x, map);
        SE2Eval se2_before = evaluate_se2(x, 0.7, map);

        SemanticMap grown = map;
        grown.stars.push_back(make_star({7.0, 6.0}));
        grown.star_sources.push_back(1);
        REQUIRE(grown.stars[1].value(x) > grown.stars[1].epsilon);

        DiffeoEval after = evaluate_diffeo(x, grown);
        CHECK(before.y.x == after.y.x);
        CHECK(before.y.y == after.y.y);
        CHECK(before.J.a11 == after.J.a11);
        CHECK(before.J.a12 == after.J.a12);
        CHECK(before.J.a21 == after.J.a21);
        CHECK(before.J.a22 == after.J.a22);
        CHECK(before.dJ11_dx == after.dJ11_dx);
        CHECK(before.dJ12_dy == after.dJ12_dy);
        CHECK(before.dJ21_dx == after.dJ21_dx);
        CHECK(before.dJ22_dy == after.dJ22_dy);
        SE2Eval se2_after = evaluate_se2(x, 0.7, grown);
        CHECK(se2_before.xi == se2_after.xi);
        CHECK(se2_before.dxi_dpsi == se2_after.dxi_dpsi);
    }
}
