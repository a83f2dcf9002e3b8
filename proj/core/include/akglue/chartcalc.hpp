#pragma once

#include "akglue/base.hpp"
#include "akglue/stencil.hpp"

#include <array>

namespace akg {

// A metric, almost complex structure and two-form over one chart, with the
// compatibility convention g(X, Y) = omega(X, J Y), omega(X, Y) = g(J X, Y).
struct StructureTriple {
  MetricField g;
  EndoField J;
  TwoFormField omega;
};

struct Christoffel {
  std::array<Mat4, 4> G;  // G[k](i,j) = Gamma^k_{ij}
};

struct CurvatureTensors {
  std::array<std::array<Mat4, 4>, 4> R;  // R[a][b](c,d) = R^a_{bcd}
  Mat4 ricci;                            // Ric_{bd} = R^c_{bcd}
  double scalar = 0.0;
};

// DJ[c](a,b) = (D_c J)^a_b, the Levi-Civita covariant derivative of J.
struct CovariantDJ {
  std::array<Mat4, 4> DJ;
};

Christoffel christoffel(const MetricField& g, const Vec4& x, const StencilConfig& c);
CurvatureTensors riemann_ricci_scalar(const MetricField& g, const Vec4& x,
                                      const StencilConfig& c);

// Nijenhuis tensor via coordinate brackets of J-rotated frames; independent of
// any metric.  N[k](i,j) = N^k_{ij} with the 1/4 normalization.
std::array<Mat4, 4> nijenhuis_bracket(const EndoField& J, const Vec4& x,
                                      const StencilConfig& c);
// Same tensor computed from the Levi-Civita derivative of J;
// N(X,Y) = (1/2) J((D_Y J)X - (D_X J)Y) for the integrable-direction check.
std::array<Mat4, 4> nijenhuis_covariant(const MetricField& g, const EndoField& J, const Vec4& x,
                                        const StencilConfig& c);

CovariantDJ covariant_dJ(const MetricField& g, const EndoField& J, const Vec4& x,
                         const StencilConfig& c);

double max_abs(const std::array<Mat4, 4>& t);

// Pointwise norms with respect to g.  nijenhuis_norm_sq is
// (1/4) sum_{jk} |N(e_j, e_k)|^2 over a g-orthonormal frame, so that
// |DJ|^2 = 8 |N|^2 holds in this normalization.
double dj_norm_sq(const Mat4& g, const CovariantDJ& dj);
double nijenhuis_norm_sq(const Mat4& g, const std::array<Mat4, 4>& N);

// Frame columns are g-orthonormal; deterministic (Cholesky of g).
Mat4 orthonormal_frame(const Mat4& g);
// Columns (e, Je, f, Jf); requires J g-orthogonal up to tol.
Mat4 adapted_frame(const Mat4& g, const Mat4& J);

Vec4 sharp(const Mat4& g, const Vec4& alpha);            // index raise
Vec4 flat(const Mat4& g, const Vec4& v);                 // index lower
double laplacian(const MetricField& g, const ScalarField& f, const Vec4& x,
                 const StencilConfig& c);                // geometer sign: flat Delta(x^2) < 0... see docs
double codifferential(const MetricField& g, const OneFormField& a, const Vec4& x,
                      const StencilConfig& c);
Mat4 hessian_covariant(const MetricField& g, const ScalarField& f, const Vec4& x,
                       const StencilConfig& c);

// Exterior derivative of a two-form; component [m] is (d beta)(e_a, e_b, e_c)
// for the ascending axes {a,b,c} complementary to m.
std::array<double, 4> exterior_d(const TwoFormField& beta, const Vec4& x,
                                 const StencilConfig& c);

// (1/2) beta_{ab} omega^{ab} where omega^{ab} = g^{ac} g^{bd} omega_{cd}.
double lambda_contract(const Mat4& g, const Mat4& omega, const Mat4& beta);

// Largest violation of g(J.,J.) = g, J^2 = -1, omega(.,.) = g(J.,.),
// antisymmetry of omega; throws NotCompatible above tol when check=true.
struct TripleDefect {
  double j_square = 0.0;
  double metric_invariance = 0.0;
  double omega_consistency = 0.0;
  double omega_antisymmetry = 0.0;
  double max() const;
};
TripleDefect compatibility_defect(const Mat4& g, const Mat4& J, const Mat4& omega);
void require_compatible(const Mat4& g, const Mat4& J, const Mat4& omega, double tol = 1e-9);

double max_metric_derivative(const MetricField& g, const Vec4& x, const StencilConfig& c);

}  // namespace akg
