#pragma once

#include "akglue/acspace.hpp"
#include "akglue/alemodel.hpp"
#include "akglue/chart.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace akg {

// Parameters of the connected-sum construction.  The neck radius r_eps = eps^beta
// and its model-scale counterpart R_eps = eps^{beta-1} are always derived.
struct GluingParams {
  double eps = 1e-2;
  double beta = 0.45;
  double beta_minus = 0.4;
  double beta_plus = 0.55;
  double eta = 0.1;    // cutoff leeway inside the transition intervals
  double delta = 0.3;  // weight exponent used by defect norms

  double r_eps() const;
  double R_eps() const;
  // Enforces 0 < beta_minus < beta < beta_plus < 1, beta < 4/5, eta in (0, 1/2),
  // delta in (0, 1), and 4 r_eps below the annulus ceiling.
  void validate() const;
};

// C-infinity step: 0 for t <= 0, 1 for t >= 1, all derivatives matching.
double smoothstep(double t);
double smoothstep_d1(double t);
double smoothstep_d2(double t);

// Neck cutoffs in units t = rho / r_eps.
// chi_inner: 1 for t <= 1, 0 for t >= 2 - eta.
// chi_outer: 0 for t <= 2 + eta, 1 for t >= 4.
double chi_inner(double t, double eta);
double chi_outer(double t, double eta);

enum class CutoffKind { Inner, Outer };

// Recorded sup |chi^(k)| over the transition interval, k = 0..4, eta = 0.1.
double cutoff_derivative_bound(CutoffKind kind, int k);

// Ceiling for the outer gluing radius 4 r_eps: keeps the neck inside the part
// of the chart where the quadratic term of A dominates its quartic tail.
inline constexpr double kAnnulusCeiling = 0.55;

// Radius below which centered differences cannot certify a vanishing bracket
// to 1e-10 in double precision: the rounding part of the derivative estimate
// scales like eps_mach / (relative step * rho), so zero is indistinguishable
// from noise once rho drops under roughly 2e-3.  Off-annulus support sampling
// starts here.
inline constexpr double kStencilTrustRadius = 2e-3;

// Quadratic-leading-order deviation of the ambient structure at the gluing
// site, realized as the pullback of the standard Kaehler structure under an
// exact symplectomorphism: a shear with a seeded, even quartic generating
// function, conjugated by a fixed unitary rotation so the deviation mixes all
// coordinates.  The pullback J is a degree-4 polynomial in x, so fourth-order
// centered stencils differentiate it exactly and every measured bracket is
// rounding-limited at any radius.  Consequences, all exact:
//   - J is integrable and omega0-compatible everywhere, g = DPhi^T DPhi;
//   - the metric is a flat pullback, so the structure has scalar curvature 0;
//   - A(x) = (1/2) log g(x) is symmetric, anticommutes with J0, O(|x|^2), even.
class SyntheticOrbifold {
 public:
  SyntheticOrbifold(std::uint64_t seed, double amplitude);
  static SyntheticOrbifold zero();

  bool trivial() const { return trivial_; }

  // Exact connecting endomorphism of the structure: J(x) = exp(-A) J0 exp(A).
  Mat4 A(const Vec4& x) const;
  // Leading coefficient matrices of A(x) = sum_{a<=b} x_a x_b C^{(ab)} + O(|x|^4).
  Mat4 quadratic_coeff(int a, int b) const;

  Mat4 J(const Vec4& x) const;
  Mat4 g(const Vec4& x) const;
  StructureTriple structure() const;

  // Generating symplectomorphism and its jacobian (exposed for tests).
  Vec4 map(const Vec4& x) const;
  Mat4 map_jacobian(const Vec4& x) const;

 private:
  SyntheticOrbifold() = default;
  bool trivial_ = true;
  // Quartic coefficients of the generating function, monomial order
  // u^4, u^3 v, u^2 v^2, u v^3, v^4 in the rotated base-plane coordinates.
  std::array<double, 5> fq_{};
  Mat4 rot_ = Mat4::Identity();  // unitary conjugation, commutes with J0
};

struct RadiusRegion {
  double rho;
  RegionTag region;
};

// Glued radius and region bookkeeping; regions split at r_eps, 2 r_eps, 4 r_eps.
RadiusRegion rho_eps(const ChartPoint& p, const GluingParams& prm);
RegionTag region_of(double rho, const GluingParams& prm);

// Ambient-side interpolation exp(-chi1 A) J0 exp(chi1 A): J0 for rho <= 2 r_eps,
// the full ambient structure for rho >= 4 r_eps.
Mat4 orbifold_interp_J(const Vec4& x, const SyntheticOrbifold& synth,
                       const GluingParams& prm);

// Model-side interpolation at unit model scale w: the resolved structure for
// r <= R_eps, J0 for r >= 2 R_eps; connecting endomorphism taken pointwise.
Mat4 ale_interp_J(const Vec4& w, const GluingParams& prm);

struct GluedStructure {
  GluingParams prm;
  SyntheticOrbifold synth = SyntheticOrbifold::zero();
  StructureTriple triple;    // fields of z on the glued chart
  double floor_radius = 0.0; // chart floor of the core model
};

// The glued almost-Kaehler structure: omega = omega0 identically,
// J = exp(-M) J0 exp(M) with M(z) = chi_inner(rho/r_eps) B(z)
// + chi_outer(rho/r_eps) A(z); B is the connecting endomorphism of the
// eps-rescaled resolved model (core parameter eps^2).  Inside the core and the
// far field the side structures are returned directly, so region identity is
// exact.  The two cutoff supports are disjoint: near 2 r_eps both vanish and
// the structure is standard.
GluedStructure glued_structure(const SyntheticOrbifold& synth,
                               const GluingParams& prm);

// Largest |branch difference| of the two interpolation formulas on the circle
// rho = 2 r_eps; throws SeamMismatch above 1e-10.
double seam_consistency(const GluedStructure& gs, int n_dirs = 16);

// Stencil scaled to the local radius; glued-chart derivatives must resolve
// the neck scale even when rho is far below the chart size.
StencilConfig stencil_for_rho(double rho);

// Sup of max |N^k_ij| over an annulus, sampled on n_r log radii times n_dir
// fixed directions; the stencil is chosen per radius (default stencil_for_rho).
double sup_nijenhuis_annulus(const EndoField& J, double rho_lo, double rho_hi,
                             int n_r, int n_dir, Rng& rng);
double sup_nijenhuis_annulus(const EndoField& J, double rho_lo, double rho_hi,
                             int n_r, int n_dir, Rng& rng,
                             const std::function<StencilConfig(double)>& stencil_of);

struct AnnulusSweepRow {
  double eps;
  double beta;
  RegionTag region;
  double sup_N;
};

struct NijenhuisSweepResult {
  std::vector<AnnulusSweepRow> rows;
  FitResult inner_fit;  // expected slope 4 - 5 beta
  FitResult outer_fit;  // expected slope beta
  double max_outside;   // sup |N| sampled outside [r_eps, 4 r_eps]
};

// Decay sweep of the glued Nijenhuis tensor over eps_list (>= 1.5 decades).
NijenhuisSweepResult nijenhuis_sweep(const std::vector<double>& eps_list,
                                     const SyntheticOrbifold& synth,
                                     GluingParams prm,
                                     std::uint64_t sample_seed = 1234);

}  // namespace akg
