#include "starnav/diffeo.hpp"

#include <cmath>

namespace starnav {

// Beyond 1/chi ~ 700 the value underflows double range; returning exact zero
// there keeps sigma and its derivatives consistent with each other.
double cutoff(double chi) {
    if (chi <= 0.0) return 0.0;
    double t = 1.0 / chi;
    return t > 700.0 ? 0.0 : std::exp(-t);
}

double cutoff_d1(double chi) {
    if (chi <= 0.0) return 0.0;
    double z = cutoff(chi);
    return z == 0.0 ? 0.0 : z / (chi * chi);
}

double cutoff_d2(double chi) {
    if (chi <= 0.0) return 0.0;
    double z = cutoff(chi);
    if (z == 0.0) return 0.0;
    double c2 = chi * chi;
    return z * (1.0 / (c2 * c2) - 2.0 / (c2 * chi));
}

namespace {

// Switch value and scalar derivatives through eta(chi) = zeta(eps-chi)/zeta(eps).
struct EtaEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

EtaEval eta(double beta, double epsilon) {
    double denom = cutoff(epsilon);
    EtaEval e;
    e.value = cutoff(epsilon - beta) / denom;
    e.d1 = -cutoff_d1(epsilon - beta) / denom;
    e.d2 = cutoff_d2(epsilon - beta) / denom;
    return e;
}

// Per-star switch data, computed only when the star can be active.
struct StarSwitch {
    double sigma = 0.0;
    Vec2 grad;
    Mat2 hess{0, 0, 0, 0};
    bool active = false;
};

StarSwitch star_switch(Vec2 x, const PlacedObstacle& star) {
    StarSwitch s;
    if (distance(x, star.center) > star.band_radius_bound()) return s;
    double beta = star.value(x);
    if (beta >= star.epsilon) return s;  // cutoff is exactly zero from here on
    ImplicitJet jet = star.jet(x);
    EtaEval e = eta(jet.value, star.epsilon);
    s.sigma = e.value;
    s.grad = e.d1 * jet.gradient;
    s.hess = e.d2 * Mat2::outer(jet.gradient, jet.gradient) + e.d1 * jet.hessian;
    s.active = true;
    return s;
}

}  // namespace

SwitchEval switches(Vec2 x, const SemanticMap& map) {
    SwitchEval out;
    size_t m = map.stars.size();
    out.sigma.assign(m, 0.0);
    out.grads.assign(m, Vec2{});
    out.hessians.assign(m, Mat2{0, 0, 0, 0});
    double total = 0.0;
    for (size_t j = 0; j < m; ++j) {
        StarSwitch s = star_switch(x, map.stars[j]);
        out.sigma[j] = s.sigma;
        out.grads[j] = s.grad;
        out.hessians[j] = s.hess;
        total += s.sigma;
    }
    out.sigma_d = 1.0 - total;
    return out;
}

DeformEval deforming_factor(Vec2 x, const PlacedObstacle& star) {
    Vec2 d = x - star.center;
    double n = d.norm();
    if (n < kGeomEps) throw AtStarCenter();
    double n3 = n * n * n;
    DeformEval out;
    out.value = star.rho / n;
    out.gradient = -(star.rho / n3) * d;
    out.hessian = (3.0 * star.rho / (n3 * n * n)) * Mat2::outer(d, d) -
                  (star.rho / n3) * Mat2::identity();
    return out;
}

DiffeoEval evaluate_diffeo(Vec2 x, const SemanticMap& map) {
    DiffeoEval out;
    out.y = x;
    for (const PlacedObstacle& star : map.stars) {
        StarSwitch sw = star_switch(x, star);
        if (!sw.active) continue;

        DeformEval nu = deforming_factor(x, star);
        Vec2 d = x - star.center;
        double s = sw.sigma;
        double nv = nu.value;
        Vec2 sg = sw.grad;

        out.y += s * (nv - 1.0) * d;
        out.J = out.J + s * (nv - 1.0) * Mat2::identity() +
                Mat2::outer(d, s * nu.gradient + (nv - 1.0) * sg);

        double dx = d.x, dy = d.y;
        double gx = sg.x, gy = sg.y;
        double nx = nu.gradient.x, ny = nu.gradient.y;
        double sxx = sw.hess.a11, sxy = sw.hess.a12, syy = sw.hess.a22;
        double nxx = nu.hessian.a11, nxy = nu.hessian.a12, nyy = nu.hessian.a22;

        out.dJ11_dx += 2.0 * s * nx + 2.0 * (nv - 1.0) * gx + 2.0 * dx * gx * nx +
                       dx * s * nxx + dx * (nv - 1.0) * sxx;
        out.dJ11_dy += s * ny + (nv - 1.0) * gy + dx * gy * nx + dx * s * nxy +
                       dx * gx * ny + dx * (nv - 1.0) * sxy;
        out.dJ12_dx += s * ny + dx * gx * ny + dx * s * nxy + (nv - 1.0) * gy +
                       dx * gy * nx + dx * (nv - 1.0) * sxy;
        out.dJ12_dy += 2.0 * dx * gy * ny + dx * s * nyy + dx * (nv - 1.0) * syy;
        out.dJ21_dx += 2.0 * dy * gx * nx + dy * s * nxx + dy * (nv - 1.0) * sxx;
        out.dJ21_dy += s * nx + dy * gy * nx + dy * s * nxy + (nv - 1.0) * gx +
                       dy * gx * ny + dy * (nv - 1.0) * sxy;
        out.dJ22_dx += s * nx + (nv - 1.0) * gx + dy * gx * ny + dy * s * nxy +
                       dy * gy * nx + dy * (nv - 1.0) * sxy;
        out.dJ22_dy += 2.0 * s * ny + 2.0 * (nv - 1.0) * gy + 2.0 * dy * gy * ny +
                       s * dy * nyy + dy * (nv - 1.0) * syy;
    }
    return out;
}

SE2Eval evaluate_se2(Vec2 x, double psi, const SemanticMap& map) {
    SE2Eval out;
    out.base = evaluate_diffeo(x, map);
    double c = std::cos(psi), s = std::sin(psi);
    const Mat2& J = out.base.J;
    out.e = J * Vec2{c, s};
    double e2 = out.e.squared_norm();
    out.xi = std::atan2(out.e.y, out.e.x);
    out.dxi_dpsi = J.det() / e2;

    const DiffeoEval& d = out.base;
    double de1_dx = d.dJ11_dx * c + d.dJ12_dx * s;
    double de2_dx = d.dJ21_dx * c + d.dJ22_dx * s;
    double de1_dy = d.dJ11_dy * c + d.dJ12_dy * s;
    double de2_dy = d.dJ21_dy * c + d.dJ22_dy * s;
    out.dxi_dx = {(out.e.x * de2_dx - out.e.y * de1_dx) / e2,
                  (out.e.x * de2_dy - out.e.y * de1_dy) / e2};

    // Heading derivative assembled from the alpha/beta decomposition of the
    // second-derivative scalars.
    double alpha1 = -(J.a21 * c + J.a22 * s);
    double alpha2 = J.a11 * c + J.a12 * s;
    double beta1 = d.dJ11_dx * c * c + (d.dJ11_dy + d.dJ12_dx) * s * c + d.dJ12_dy * s * s;
    double beta2 = d.dJ21_dx * c * c + (d.dJ21_dy + d.dJ22_dx) * s * c + d.dJ22_dy * s * s;
    out.dxi_heading = (alpha1 * beta1 + alpha2 * beta2) / e2;
    return out;
}

Vec2 invert_diffeo(Vec2 y, const SemanticMap& map, Vec2 x0) {
    constexpr double kTol = 1e-10;
    Vec2 x = x0;
    DiffeoEval cur = evaluate_diffeo(x, map);
    double res = distance(cur.y, y);
    for (int it = 0; it < 100; ++it) {
        if (res < kTol) return x;
        Vec2 step = cur.J.solve(cur.y - y);
        double scale = 1.0;
        for (int halving = 0; halving < 40; ++halving) {
            Vec2 trial = x - scale * step;
            try {
                DiffeoEval trial_eval = evaluate_diffeo(trial, map);
                double trial_res = distance(trial_eval.y, y);
                if (trial_res < res) {
                    x = trial;
                    cur = trial_eval;
                    res = trial_res;
                    break;
                }
            } catch (const Error&) {
                // step left the evaluable region; damp and retry
            }
            scale *= 0.5;
            if (halving == 39) throw NoConvergence("diffeomorphism inversion stalled");
        }
    }
    if (res < kTol) return x;
    throw NoConvergence("diffeomorphism inversion exceeded 100 iterations");
}

}  // namespace starnav
