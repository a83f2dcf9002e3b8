#pragma once

#include "akglue/chartcalc.hpp"

#include <complex>

namespace akg {

// Radial profile of the resolved model in spherical coordinates, s > sqrt(2).
double ale_w(double s);

// Asymptotically Euclidean model metric/structure of the resolution, in
// spherical coordinates y with s = |y|.  Scale normalization: the two-form is
// (eps/sqrt(2)) [ (s/W) alpha_3 ^ ds + s^2 W alpha_2 ^ alpha_1 ], so that the
// flat-chart radius below satisfies r^2/s^2 -> eps/sqrt(2).
StructureTriple ale_spherical_triple(double eps);

// The same structure pushed to coordinates z in which the two-form is the
// constant omega0 (flat symplectic chart).  Closed form; valid for
// |z| > darboux_rmin(eps).
StructureTriple ale_darboux_triple(double eps);

// Potential factor of the flat-chart metric: V = sqrt(1 + 2 eps^2 / r^4).
double ale_v(double r, double eps);

// Radial chart transition: r^2 = 2 f_eps(s) with the profile
// f_eps(s) = sqrt(2) eps (s^2/4) sqrt(1 - 4/s^4); equivalently
// r^4 = (eps^2/2)(s^4 - 4).
double darboux_radius(double s, double eps);
double darboux_radius_drds(double s, double eps);  // dr/ds for chain rules
double spherical_radius(double r, double eps);
double darboux_rmin(double eps, double margin = 1e-6);

Vec4 darboux_from_spherical_point(const Vec4& y, double eps);
Vec4 spherical_from_darboux_point(const Vec4& z, double eps);
Mat4 radial_map_jacobian(const Vec4& y, double eps);  // of y -> z

// Structure obtained by pushing the spherical triple through the radial map;
// used to cross-check the closed forms above.
StructureTriple ale_darboux_via_pushforward(double eps);

// Potential profile of the smoothing model on C^3, tau = |z|^2 restricted to
// the quadric sum_a z_a^2 = eps^2 (so tau >= eps^2).
double stenzel_f(double tau, double eps);
double stenzel_fp(double tau, double eps);
double stenzel_fpp(double tau, double eps);
// tau f'^2 + f'' f' (tau^2 - eps^4) - 1/8; vanishes identically for stenzel_f.
double ma_residual(double tau, double eps);

// Embedding of the cotangent model of S^2 onto the quadric:
// z = eps cosh|xi| x + i eps sinh|xi|/|xi| xi, with x.x = 1, x.xi = 0.
Eigen::Vector3cd psi_embedding(const Vec3& x, const Vec3& xi, double eps);

// Fits sup_{|z|=r} |J(z) - J_limit| against r on a log grid; slope should be
// the decay order (negative).
FitResult decay_order_fit(const EndoField& J, const Mat4& J_limit, double r_lo, double r_hi,
                          int n_radii, int n_dirs, Rng& rng);

}  // namespace akg
