#pragma once

#include "akglue/chartcalc.hpp"

namespace akg {

// Matrix exponential (Pade 6 with scaling and squaring) and the principal
// logarithm of a g-symmetric positive definite endomorphism.
Mat4 matrix_exp(const Mat4& a);
Mat4 spd_log(const Mat4& p);  // p symmetric positive definite in the Euclidean sense

// Infinitesimal deformations of J inside the omega-compatible space are
// parametrized by endomorphisms that anticommute with J and are symmetric for
// the induced metric.  For the reference structure (g0 = id, J0) this space
// is 6-dimensional; basis() returns it (Euclidean-symmetric matrices).
const std::array<Mat4, 6>& anticommuting_symmetric_basis();

// Largest deviation of `a` from that tangent space at (g, J):
// max(|aJ + Ja|, |g a - (g a)^T|) componentwise.
double tangent_space_defect(const Mat4& g, const Mat4& J, const Mat4& a);

// beta = d(J df) split under beta^-(X,Y) = (1/2)(beta(X,Y) - beta(JX,JY)):
// the anti-invariant part vanishes exactly where J is integrable.  Returns
// beta^- and its max component.  One-form convention (J alpha)(Y) = -alpha(JY).
struct AntiInvariantPart {
  Mat4 beta_minus;
  double norm;
};
AntiInvariantPart anti_invariance_defect(const EndoField& J, const ScalarField& f,
                                         const Vec4& x, const StencilConfig& c);

// Connecting endomorphism between two structures compatible with the same
// symplectic form: the unique a with J2 = exp(-a) J1 exp(a), a in the tangent
// space at J1.  Throws NonPositiveTransfer when -J1 J2 has nonpositive
// spectrum (structures too far apart).
Mat4 connecting_endo(const Mat4& g1, const Mat4& J1, const Mat4& J2);

// Path t -> exp(-t a) J exp(t a); velocity at t = 0 is -2 a J = 2 J a.
Mat4 conjugate_structure(const Mat4& J, const Mat4& a, double t = 1.0);

// Hamiltonian vector field X_f with omega(X_f, .) = df, i.e. X_f = -J grad f
// for the compatible metric.
Vec4 hamiltonian_field(const Mat4& omega, const Vec4& df);

// Lie derivative (L_X J)^a_b at x by finite differences of X and J.
Mat4 lie_derivative_J(const VectorField& X, const EndoField& J, const Vec4& x,
                      const StencilConfig& c);

// a_f = (1/2) L_{X_f} J, the tangent vector generated by a Hamiltonian f.
Mat4 hamiltonian_deformation(const TwoFormField& omega, const EndoField& J,
                             const ScalarField& f, const Vec4& x, const StencilConfig& c);

// Field version of the deformed structure exp(-t a(x)) J(x) exp(t a(x)).
EndoField deformed_structure(const EndoField& J, const EndoField& a, double t);

// Metric recovered from (omega, J): g_ab = (omega J)_ab; throws when the
// result is not symmetric positive definite.
Mat4 metric_from_pair(const Mat4& omega, const Mat4& J);

}  // namespace akg
