#pragma once

#include "akglue/chartcalc.hpp"

namespace akg {

// Quaternion multiplication operators on R^4 = H with basis (1, i, j, k).
// Lq is left multiplication by q, Rq is right multiplication.
Mat4 Li();
Mat4 Lj();
Mat4 Lk();
Mat4 Ri();
Mat4 Rj();
Mat4 Rk();

// The reference structure at the chart origin: J0 = -Lk, g0 = id,
// omega0 = g0(J0 ., .).
Mat4 J0_mat();
Mat4 omega0_mat();

// Rotation vector fields V_m(x) = L_{e_m} x and dual coframe
// alpha_m = <V_m, dx> / |x|^2 with alpha_m(V_n) = delta_{mn} and
// d alpha_1 = 2 alpha_2 ^ alpha_3 cyclically.
Vec4 euler_field(int m, const Vec4& x);
Vec4 euler_coform(int m, const Vec4& x);

StructureTriple flat_triple();

// S^2(1) x R^2 in stereographic coordinates (u, v, p, q): an integrable
// compatible triple with scalar curvature identically 2.  Valid on |x| < inf,
// conformal factor 4 / (1 + u^2 + v^2)^2 on the sphere block.
StructureTriple product_sphere_triple();

// Flat torus-periodic almost complex structure: J0 conjugated by
// exp(sin-profile endomorphism); integrable=false, all fields 2*pi-periodic.
// Used for integral invariance checks on [0, 2*pi)^4.
StructureTriple periodic_test_triple(double amplitude);

}  // namespace akg
