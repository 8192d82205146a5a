#pragma once

#include "starnav/world.hpp"

namespace starnav {

// One-sided C-infinity cutoff: exp(-1/chi) for chi > 0 and identically zero
// otherwise, with its first two derivatives. All derivatives vanish together
// with the value, which is what makes star discovery seamless.
double cutoff(double chi);
double cutoff_d1(double chi);
double cutoff_d2(double chi);

/// Switch data for every star in the map at one point. The switches form a
/// partition of unity with sigma_d, and in a validated world at most one
/// sigma_j is nonzero at any freespace point.
struct SwitchEval {
    std::vector<double> sigma;
    double sigma_d = 1.0;
    std::vector<Vec2> grads;
    std::vector<Mat2> hessians;
};
SwitchEval switches(Vec2 x, const SemanticMap& map);

/// Radial deforming factor rho_j / |x - center_j| with derivatives.
struct DeformEval {
    double value = 0.0;
    Vec2 gradient;
    Mat2 hessian{0, 0, 0, 0};
};
DeformEval deforming_factor(Vec2 x, const PlacedObstacle& star);

/// The mapped-to-model change of coordinates at a point: image y = h(x), the
/// Jacobian J = D_x h, and the eight second-derivative scalars
/// d[J_ab]/d x_c used by the differential-drive lift.
struct DiffeoEval {
    Vec2 y;
    Mat2 J = Mat2::identity();
    double dJ11_dx = 0, dJ11_dy = 0;
    double dJ12_dx = 0, dJ12_dy = 0;
    double dJ21_dx = 0, dJ21_dy = 0;
    double dJ22_dx = 0, dJ22_dy = 0;
};
DiffeoEval evaluate_diffeo(Vec2 x, const SemanticMap& map);

/// SE(2) lift of the diffeomorphism at (x, psi): the pushed-forward heading
/// vector e = J [cos psi, sin psi]^T, the model heading xi = atan2(e2, e1),
/// and the xi derivatives needed to convert reference inputs into actual
/// unicycle inputs.
struct SE2Eval {
    DiffeoEval base;
    Vec2 e;
    double xi = 0.0;
    double dxi_dpsi = 1.0;   // det(J) / |e|^2
    Vec2 dxi_dx;             // row D_x xi
    double dxi_heading = 0.0;  // D_x xi . [cos psi, sin psi]^T
};
SE2Eval evaluate_se2(Vec2 x, double psi, const SemanticMap& map);

/// Damped Newton inversion of h. Converges to |h(x) - y| < 1e-10 or throws
/// NoConvergence after 100 iterations.
Vec2 invert_diffeo(Vec2 y, const SemanticMap& map, Vec2 x0);

}  // namespace starnav
