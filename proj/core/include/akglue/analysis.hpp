#pragma once

#include "akglue/curvature.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace akg {

// ---------------------------------------------------------------------------
// Weighted Hoelder norms
// ---------------------------------------------------------------------------

enum class NormSpace { Orbifold, Ale, Glued };

// C^{k,alpha}_delta sampling spec.  Weight conventions per space:
//  - Orbifold: weight rho^{i-delta} refined toward the puncture; finite iff
//    the growth exponent gamma at the puncture satisfies gamma >= delta.
//  - Ale: weight r^{i-delta} refined toward infinity; finite iff gamma <= delta.
//  - Glued: one-chart collapse of the two-piece eps-norm.  The chi-split sum
//    with the eps^{-delta} model prefactor is, for scalar fields, equivalent
//    (up to fixed constants) to a single weighted sup with the smoothed radius
//    rho_eps = hypot(rho, eps); see the conventions document.
struct WeightedNormSpec {
  int k = 0;
  double alpha = 0.5;
  double delta = 0.3;
  NormSpace space = NormSpace::Glued;
  double eps = 1e-2;  // glued space only
  void validate() const;
};

// `stages` nested refinements toward the critical end (factor 2 per stage);
// each stage scans `radial` log-spaced radii times `directions` random unit
// directions, with the same directions reused for derivative sampling.
struct NormSampling {
  double r_lo = 2e-2;
  double r_hi = 0.9;
  int radial = 24;
  int directions = 5;
  int stages = 4;
  std::uint64_t seed = 101;
};

struct WeightedNormReport {
  double value = 0.0;                // sum of sup parts and the Hoelder part
  std::array<double, 5> sup_part{};  // weighted sup per derivative order
  double holder_part = 0.0;
  std::vector<double> stage_value;   // cumulative norm per refinement stage
  double stage_slope = 0.0;  // d log(value) / d log(refinement factor)
  bool diverged = false;     // detector: positive slope beyond tolerance
};

WeightedNormReport weighted_norm(const ScalarField& f, const WeightedNormSpec& spec,
                                 const NormSampling& sampling);

// ||f||_{delta'} <= ||f||_delta for delta' <= delta and
// ||f||_{delta'} <= eps^{delta-delta'} ||f||_delta otherwise (glued space).
struct EmbeddingReport {
  double norm_target = 0.0;  // delta' norm
  double norm_source = 0.0;  // delta norm
  double bound = 0.0;        // right-hand side of the inequality
  double ratio = 0.0;        // norm_target / bound
  bool pass = false;         // ratio <= 1.1
};
EmbeddingReport norm_embedding_check(const ScalarField& f, double delta,
                                     double delta_prime, double eps,
                                     const NormSampling& sampling, int k = 2);

// C = ||f g||_{k,delta+delta'} / (||f||_{k,delta} ||g||_{k,delta'}).
struct ProductRuleReport {
  double norm_fg = 0.0;
  double norm_f = 0.0;
  double norm_g = 0.0;
  double constant = 0.0;
};
ProductRuleReport product_rule_check(const ScalarField& f, const ScalarField& g,
                                     double delta, double delta_prime, double eps,
                                     const NormSampling& sampling, int k = 2);

// ---------------------------------------------------------------------------
// Radial reduction of the fourth-order operators
// ---------------------------------------------------------------------------

enum class RadialOperatorKind { BilaplacianFlat, LichnerowiczAle, LEpsGlued };

enum class RadialBc { Free, PunctureDecay, EvenCore, AleDecay, Clamped };

struct RadialProfile {
  VecX grid;  // strictly increasing radii, uniform in log
  VecX values;
  RadialBc bc_lo = RadialBc::Free;
  RadialBc bc_hi = RadialBc::Free;
  void validate() const;
};

// a4 u'''' + a3 u''' + a2 u'' + a1 u' + a0 u with per-node coefficient
// profiles; `augmented` marks the orbifold-model kind whose solve carries the
// (lambda, nu) bookkeeping.
struct RadialOperator {
  RadialOperatorKind kind = RadialOperatorKind::BilaplacianFlat;
  VecX grid;
  std::array<VecX, 5> a;  // a[i] multiplies u^(i)
  bool augmented = false;
};

// Closed-form coefficients of the flat radial bilaplacian
// u'''' + 6 u'''/rho + 3 u''/rho^2 - 3 u'/rho^3 (oracle for the reduce).
std::array<double, 5> flat_bilaplacian_coeffs(double rho);

// Reduces the 4D operator to its radial ODE by probing with the radial
// polynomials u = rho^{2m}, m = 0..4, and solving the scaled generalized
// Vandermonde system per node.  Even powers keep every probe polynomial in
// the chart coordinates, so the stencil error cascades cancel and the flat
// coefficients come out at rounding level; odd powers of rho would cap the
// accuracy near 1e-7.  The glued kind reduces the gluing of the flat ambient
// structure (the radial instance of the family).  `probe_nodes` > 0 evaluates
// the probes on a coarse log sub-grid and fills the rest by cubic
// interpolation in log rho; for the glued kind nodes outside the deformed
// neck take the exact flat coefficients.
RadialOperator radial_reduce(RadialOperatorKind kind, const VecX& grid,
                             const GluingParams& prm = {}, int probe_nodes = 0);

// Applies the reduced ODE to nodal values by centered differences in
// t = log rho (order 4 inside, order 2 at the first interior node on each
// side); the outermost two nodes per side have no stencil and return 0.
VecX radial_apply(const RadialOperator& op, const VecX& values);

// ---------------------------------------------------------------------------
// Indicial exponents
// ---------------------------------------------------------------------------

struct IndicialReport {
  std::array<double, 4> exponents{};  // ascending growth exponents
  bool log_branch = false;  // repeated exponent => Jordan pair carrying log
  double min_gap = 0.0;     // smallest exponent spacing (repeat detector)
};

// Integrates a full solution basis inward from rho_hi and fits each
// re-orthonormalized direction's growth against log rho (coefficients
// interpolated from the reduced operator, clamped to end values beyond its
// grid, which freezes the asymptotic operator).  A repeated exponent marks a
// two-dimensional Jordan block; its companion solution carries the logarithm,
// so the pair is flagged as the log branch.  The Jordan pair's polynomial
// growth reads as a spurious rate ~ log(T)/T over a window of log-width T, so
// callers size the window until that bias is below the classification
// tolerance.
IndicialReport indicial_probe(const RadialOperator& op, double rho_lo, double rho_hi);

// ---------------------------------------------------------------------------
// Desk-scale right inverse of the linearized operator
// ---------------------------------------------------------------------------

// Dense collocation data shared by every right-hand side at one eps.  All
// solves live on one master log grid over the glued chart: the orbifold-model
// window is the sub-grid above eps^{beta+}/2 and the model-scale window is the
// whole grid shifted by -log eps, so branch values transfer by index and the
// measured residual is collocation-exact wherever no cutoff varies.
struct RightInverseModel {
  GluingParams prm;
  VecX grid;               // master radii (glued chart)
  RadialOperator op_glued; // reduced linearized operator on the master grid
  int m_lo = 0;            // first master index of the orbifold-model window
  VecX nu_weight;          // nu(psi) = nu_weight . psi (mean of gamma1 psi)
  VecX gamma1, zeta1, zeta2, xi;  // cutoffs at master nodes
  MatX m_matrix;           // orbifold-model collocation (unknowns: u, nu)
  MatX x_matrix;           // model-scale collocation (unknowns: u)
  VecX m_row_scale;        // row equilibration, applied to right-hand sides
  VecX x_row_scale;
  Eigen::PartialPivLU<MatX> m_lu, x_lu;
};

RightInverseModel build_right_inverse(const GluingParams& prm, int nodes = 400);

struct RightInverseApplication {
  RadialProfile f;      // glued candidate on the master grid
  double nu = 0.0;      // constant component of the solved pair
  double lambda = 0.0;  // near-puncture constant (V-coefficient)
  double psi_norm = 0.0;       // weighted C0_{delta-4} sup of psi
  double residual_norm = 0.0;  // same norm of L f + nu - psi
  double ratio = 0.0;
  // Backward-relative residual sup |r - nu (1 - zeta1)| / (row scale) over
  // nodes where no cutoff varies.  The subtracted term is the structural
  // constant carried by the core (weight-suppressed in residual_norm, not
  // spurious support); the row scale divides out the rho^-4 h^-4 stencil
  // amplification that sets the collocation rounding floor at deep-core nodes.
  double off_cutoff_residual = 0.0;
};

// Gtilde psi = zeta1 (u_M - lambda xi) + lambda xi + zeta2 u_X(rho/eps): the
// orbifold branch is cut toward its own near-puncture constant, not toward 0,
// so the cutoff commutator never acts on the constant mode.
RightInverseApplication approximate_right_inverse(const RightInverseModel& m,
                                                  const VecX& psi);

// Corrected inverse G = Gtilde (L Gtilde + nu)^{-1}: an exact discrete right
// inverse on interior rows (boundary rows pass through).
struct CorrectedInverse {
  MatX t;
  Eigen::PartialPivLU<MatX> lu;
};
CorrectedInverse corrected_inverse(const RightInverseModel& m);
RightInverseApplication apply_corrected(const RightInverseModel& m,
                                        const CorrectedInverse& c, const VecX& psi);

// Operator norm estimate C4_delta <- C0_{delta-4} over smooth random probes.
double corrected_inverse_norm(const RightInverseModel& m, const CorrectedInverse& c,
                              int n_probes, std::uint64_t seed);

struct RightInverseSweepRow {
  double eps = 0.0;
  double ratio = 0.0;           // uncorrected residual ratio
  double corrected_norm = 0.0;  // operator norm of the corrected inverse
  double off_cutoff = 0.0;
  double nu = 0.0;
  double lambda = 0.0;
};
struct RightInverseSweep {
  std::vector<RightInverseSweepRow> rows;
  double eps_star = 0.0;  // largest eps with ratio <= 1/2 at it and below
  FitResult norm_fit;     // log corrected_norm against log eps
};
RightInverseSweep right_inverse_sweep(const std::vector<double>& eps_list,
                                      GluingParams base, std::uint64_t seed = 55);

// ---------------------------------------------------------------------------
// Picard fixed point for the constant-curvature potential
// ---------------------------------------------------------------------------

struct PicardTraceRow {
  int n = 0;
  double psi_norm = 0.0;  // weighted C0_{delta-4} norm of psi_n
  double gap = 0.0;       // ||psi_n - psi_{n-1}||
  double ratio = 0.0;     // gap_n / gap_{n-1}, 0 for n <= 1
  double lambda = 0.0;    // constant component of G(psi_{n-1})
};

enum class PicardStatus { Converged, NoContraction };

struct PicardReport {
  PicardStatus status = PicardStatus::NoContraction;
  RadialProfile f;  // potential of the last iterate, master grid
  double lambda = 0.0;
  std::vector<PicardTraceRow> trace;
  double contraction_max = 0.0;   // max gap ratio over n >= 2
  double residual_initial = 0.0;  // ||B(0)|| seed norm
  double residual_final = 0.0;    // last gap ||B(psi_N) - psi_N||
  double ball_constant = 0.0;     // C with ||psi_1|| = C eps^2 / 2
  bool ball_confined = false;     // every ||psi_n|| <= C eps^2
};

// Iterates psi <- B(psi) = s_M - s(J_hat) - Q(G(psi)) from psi_0 = 0 on radial
// profiles; with the corrected inverse the map collapses to
// B(psi) = psi - lambda - s(J_{G psi}), so a fixed point is a potential whose
// deformed structure has constant Hermitian scalar curvature -lambda.
// Requires a radial ambient deviation (here: the trivial instance).
// NoContraction is an in-band outcome, reported with the measured factors.
PicardReport picard_solve(const GluingParams& prm, const SyntheticOrbifold& synth,
                          int max_iter = 8, double tol = 1e-10, int nodes = 400);

}  // namespace akg
