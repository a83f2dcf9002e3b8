#include "akglue/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "akglue/acspace.hpp"
#include "akglue/alemodel.hpp"
#include "akglue/curvature.hpp"
#include "akglue/fixtures.hpp"
#include "akglue/gluing.hpp"

namespace akg {

namespace {

constexpr double kTiny = 1e-300;

double ipow(double x, int n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= x;
  return out;
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw StencilError(what);
  return v;
}

// ---------------------------------------------------------------------------
// Directional derivatives of a scalar field along a fixed unit direction.
// Orders 1-2 are fourth-order stencils, 3-4 second-order; step sizes grow
// with the order so the higher differences stay above rounding noise.

double dir_d1(const ScalarField& f, const Vec4& x, const Vec4& q, double h) {
  const double v =
      (f(x - 2 * h * q) - 8 * f(x - h * q) + 8 * f(x + h * q) - f(x + 2 * h * q)) / (12 * h);
  return finite_or_throw(v, "non-finite first difference");
}

double dir_d2(const ScalarField& f, const Vec4& x, const Vec4& q, double h) {
  const double v = (-f(x - 2 * h * q) + 16 * f(x - h * q) - 30 * f(x) + 16 * f(x + h * q) -
                    f(x + 2 * h * q)) /
                   (12 * h * h);
  return finite_or_throw(v, "non-finite second difference");
}

double dir_d3(const ScalarField& f, const Vec4& x, const Vec4& q, double h) {
  const double v =
      (f(x + 2 * h * q) - 2 * f(x + h * q) + 2 * f(x - h * q) - f(x - 2 * h * q)) / (2 * h * h * h);
  return finite_or_throw(v, "non-finite third difference");
}

double dir_d4(const ScalarField& f, const Vec4& x, const Vec4& q, double h) {
  const double v = (f(x - 2 * h * q) - 4 * f(x - h * q) + 6 * f(x) - 4 * f(x + h * q) +
                    f(x + 2 * h * q)) /
                   (h * h * h * h);
  return finite_or_throw(v, "non-finite fourth difference");
}

// ---------------------------------------------------------------------------
// Natural cubic spline on strictly increasing abscissae, Thomas solve for the
// second derivatives.  Evaluation clamps to the end values outside the grid
// (the radial reductions we interpolate are asymptotically constant).

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(VecX x, VecX y) : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    require(n >= 3 && y_.size() == n, "spline needs at least three nodes");
    m_ = VecX::Zero(n);
    VecX diag(n), rhs(n), upper(n);
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
      require(hl > 0 && hr > 0, "spline abscissae must increase");
      diag[i] = 2.0 * (hl + hr);
      upper[i] = hr;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    diag[n - 1] = 1.0;
    rhs[n - 1] = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double lower = x_[i] - x_[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
  }

  double operator()(double s) const {
    const int n = static_cast<int>(x_.size());
    if (s <= x_[0]) return y_[0];
    if (s >= x_[n - 1]) return y_[n - 1];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x_[mid] <= s ? lo : hi) = mid;
    }
    const double h = x_[lo + 1] - x_[lo];
    const double a = (x_[lo + 1] - s) / h, b = (s - x_[lo]) / h;
    return a * y_[lo] + b * y_[lo + 1] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[lo + 1]) * h * h / 6.0;
  }

 private:
  VecX x_, y_, m_;
};

// ---------------------------------------------------------------------------
// Log-radial machinery.  Radial profiles live on log-uniform grids
// t = log rho; the operator a4 u'''' + ... + a0 u turns into a fourth-order
// Euler form c4 v'''' + ... + c0 v in t via
//   u'    = vd / rho
//   u''   = (vdd - vd) / rho^2
//   u'''  = (vddd - 3 vdd + 2 vd) / rho^3
//   u'''' = (vdddd - 6 vddd + 11 vdd - 6 vd) / rho^4.

std::array<double, 5> euler_coeffs(const std::array<double, 5>& a, double rho) {
  const double r1 = rho, r2 = rho * rho, r3 = r2 * rho, r4 = r2 * r2;
  std::array<double, 5> c{};
  c[4] = a[4] / r4;
  c[3] = a[3] / r3 - 6.0 * a[4] / r4;
  c[2] = a[2] / r2 - 3.0 * a[3] / r3 + 11.0 * a[4] / r4;
  c[1] = a[1] / r1 - a[2] / r2 + 2.0 * a[3] / r3 - 6.0 * a[4] / r4;
  c[0] = a[0];
  return c;
}

// Stencil row for the Euler form at one interior node: weights on the seven
// (or five) neighbouring nodal values.  c[j] multiplies d^j v / dt^j.
struct TRow {
  int lo = 0;
  int width = 0;
  std::array<double, 7> w{};
};

TRow ode_trow(const std::array<double, 5>& c, double h, bool order4) {
  TRow row;
  const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
  if (order4) {
    row.lo = -3;
    row.width = 7;
    const double d1[7] = {0, 1, -8, 0, 8, -1, 0};
    const double d2[7] = {0, -1, 16, -30, 16, -1, 0};
    const double d3[7] = {1, -8, 13, 0, -13, 8, -1};
    const double d4[7] = {-1, 12, -39, 56, -39, 12, -1};
    for (int k = 0; k < 7; ++k)
      row.w[k] = c[4] * d4[k] / (6 * h4) + c[3] * d3[k] / (8 * h3) + c[2] * d2[k] / (12 * h2) +
                 c[1] * d1[k] / (12 * h);
    row.w[3] += c[0];
  } else {
    row.lo = -2;
    row.width = 5;
    const double d1[5] = {0, -1, 0, 1, 0};
    const double d2[5] = {0, 1, -2, 1, 0};
    const double d3[5] = {-1, 2, 0, -2, 1};
    const double d4[5] = {1, -4, 6, -4, 1};
    for (int k = 0; k < 5; ++k)
      row.w[k] = c[4] * d4[k] / h4 + c[3] * d3[k] / (2 * h3) + c[2] * d2[k] / h2 +
                 c[1] * d1[k] / (2 * h);
    row.w[2] += c[0];
  }
  return row;
}

std::array<double, 5> node_coeffs(const RadialOperator& op, int i) {
  return {op.a[0][i], op.a[1][i], op.a[2][i], op.a[3][i], op.a[4][i]};
}

double grid_spacing(const VecX& grid) {
  const int n = static_cast<int>(grid.size());
  require(n >= 7, "radial grid needs at least seven nodes");
  const double h = std::log(grid[1] / grid[0]);
  for (int i = 1; i + 1 < n; ++i) {
    const double hi = std::log(grid[i + 1] / grid[i]);
    require(std::abs(hi - h) <= 1e-9 * std::abs(h), "radial grid must be log-uniform");
  }
  return h;
}

VecX log_grid(double lo, double hi, int n) {
  VecX g(n);
  const double tl = std::log(lo), th = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(tl + (th - tl) * i / double(n - 1));
  return g;
}

// C^inf step: exactly 0 below 0, exactly 1 above 1.
double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// ---------------------------------------------------------------------------
// Weighted norm sampling helpers.

double weight_radius(NormSpace space, double r, double eps) {
  return space == NormSpace::Glued ? std::hypot(r, eps) : r;
}

struct StageSample {
  std::array<double, 5> sup{};
  double holder = 0.0;
};

StageSample sample_band(const ScalarField& f, const WeightedNormSpec& spec, double band_lo,
                        double band_hi, int radial, int directions, Rng& rng) {
  StageSample out;
  const double a = spec.alpha, delta = spec.delta;
  std::vector<Vec4> dirs(directions);
  for (auto& q : dirs) q = rng.unit_vec4();
  for (int ir = 0; ir < radial; ++ir) {
    const double r = band_lo * std::pow(band_hi / band_lo, (ir + 0.5) / radial);
    const double w = weight_radius(spec.space, r, spec.eps);
    const double hs[4] = {1e-3 * w, 1e-3 * w, 1e-2 * w, 3e-2 * w};
    for (const auto& u : dirs) {
      const Vec4 x = r * u;
      out.sup[0] = std::max(out.sup[0], std::pow(w, -delta) * std::abs(finite_or_throw(
                                             f(x), "non-finite norm sample")));
      for (const auto& q : dirs) {
        double d[4];
        d[0] = spec.k >= 1 ? dir_d1(f, x, q, hs[0]) : 0.0;
        d[1] = spec.k >= 2 ? dir_d2(f, x, q, hs[1]) : 0.0;
        d[2] = spec.k >= 3 ? dir_d3(f, x, q, hs[2]) : 0.0;
        d[3] = spec.k >= 4 ? dir_d4(f, x, q, hs[3]) : 0.0;
        for (int i = 1; i <= spec.k; ++i)
          out.sup[i] = std::max(out.sup[i], std::pow(w, i - delta) * std::abs(d[i - 1]));
        // Hoelder seminorm of the top derivative by pair sampling at
        // separations h and 4h along the same direction.
        const double hh = 0.05 * w;
        double gk0;
        switch (spec.k) {
          case 0: gk0 = f(x); break;
          case 1: gk0 = d[0]; break;
          case 2: gk0 = d[1]; break;
          case 3: gk0 = d[2]; break;
          default: gk0 = d[3]; break;
        }
        for (const double s : {hh, 4.0 * hh}) {
          const Vec4 xs = x + s * q;
          double gk1;
          switch (spec.k) {
            case 0: gk1 = finite_or_throw(f(xs), "non-finite norm sample"); break;
            case 1: gk1 = dir_d1(f, xs, q, hs[0]); break;
            case 2: gk1 = dir_d2(f, xs, q, hs[1]); break;
            case 3: gk1 = dir_d3(f, xs, q, hs[2]); break;
            default: gk1 = dir_d4(f, xs, q, hs[3]); break;
          }
          const double quot = std::abs(gk1 - gk0) / std::pow(s, a);
          out.holder = std::max(out.holder, std::pow(w, spec.k + a - delta) * quot);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Radial reduction internals.

constexpr int kProbePowers[5] = {0, 2, 4, 6, 8};
constexpr double kAleFarField = 100.0;

Eigen::Matrix<double, 5, 5> falling_matrix() {
  Eigen::Matrix<double, 5, 5> F;
  for (int m = 0; m < 5; ++m)
    for (int i = 0; i < 5; ++i) {
      double v = 1.0;
      for (int j = 0; j < i; ++j) v *= kProbePowers[m] - j;
      F(m, i) = v;
    }
  return F;
}

struct ProbeSetup {
  StructureTriple triple;
  bool flat_branch = false;  // report.bilaplacian instead of report.total
  double floor = 0.0;        // chart floor constraining stencil reach
  double h_rel = 2e-2;
};

ProbeSetup probe_setup(RadialOperatorKind kind, const GluingParams& prm) {
  ProbeSetup s;
  switch (kind) {
    case RadialOperatorKind::BilaplacianFlat:
      s.triple = flat_triple();
      s.flat_branch = true;
      break;
    case RadialOperatorKind::LichnerowiczAle:
      s.triple = ale_darboux_triple(1.0);
      s.floor = darboux_rmin(1.0);
      s.h_rel = 1e-2;
      break;
    case RadialOperatorKind::LEpsGlued: {
      GluingParams p = prm;
      p.validate();
      s.triple = glued_structure(SyntheticOrbifold::zero(), p).triple;
      s.floor = darboux_rmin(p.eps * p.eps);
      s.h_rel = 1e-2;
      break;
    }
  }
  return s;
}

// Probe stencil: Richardson on top of the order-4 stencils drops the
// truncation of the nested fourth derivatives to O(h^6), so the step can sit
// well above the rounding floor; the reach (outer step times stencil width)
// still has to clear the chart floor.  The flat kind takes a coarser step
// (pure bilaplacian, its probes are near-exact); the curved kinds need the
// finer one to resolve their first-order coefficient chains.
StencilConfig probe_stencil(double rho, const ProbeSetup& setup) {
  StencilConfig c;
  c.order = 4;
  c.richardson = true;
  c.h = std::min(setup.h_rel * rho, 0.04 * (rho - setup.floor));
  require(c.h > 0.0, "probe radius at or below the chart floor");
  return c;
}

// Scaled profiles s_i = a_i rho^{4-i} measured at one radius along one
// direction; these are O(1) and smooth in t, so they are what gets splined.
Eigen::Matrix<double, 5, 1> measure_scaled(const ProbeSetup& setup, double rho, const Vec4& dir,
                                           const Eigen::Matrix<double, 5, 5>& f_inv) {
  const Vec4 x = rho * dir;
  const StencilConfig c = probe_stencil(rho, setup);
  Eigen::Matrix<double, 5, 1> yt;
  for (int m = 0; m < 5; ++m) {
    const int e = kProbePowers[m];
    ScalarField u = [e](const Vec4& z) { return ipow(z.norm(), e); };
    const LinearizedReport rep = linearized_operator(setup.triple, u, x, c);
    const double y = setup.flat_branch ? rep.bilaplacian : rep.total;
    if (!std::isfinite(y)) throw StencilError("non-finite operator probe");
    yt[m] = y / ipow(rho, e);
  }
  Eigen::Matrix<double, 5, 1> b = f_inv * yt;  // b_i = a_i rho^{-i}
  Eigen::Matrix<double, 5, 1> s;
  const double r4 = ipow(rho, 4);
  for (int i = 0; i < 5; ++i) s[i] = b[i] * r4;
  return s;
}

// ---------------------------------------------------------------------------
// Right-inverse internals.

struct Cutoffs {
  VecX gamma1, gamma2, zeta1, zeta2, xi;
};

Cutoffs make_cutoffs(const VecX& grid, const GluingParams& prm) {
  const int n = static_cast<int>(grid.size());
  const double re = prm.r_eps();
  const double ln_eps = std::log(prm.eps);
  Cutoffs c;
  c.gamma1 = VecX(n);
  c.gamma2 = VecX(n);
  c.zeta1 = VecX(n);
  c.zeta2 = VecX(n);
  c.xi = VecX(n);
  for (int i = 0; i < n; ++i) {
    const double rho = grid[i];
    const double rho_eps = std::hypot(rho, prm.eps);
    c.gamma1[i] = smoothstep((rho_eps / re - 1.0) / 3.0);
    c.gamma2[i] = 1.0 - c.gamma1[i];
    const double s1 = std::log(rho) / ln_eps;
    c.zeta1[i] = 1.0 - smoothstep((s1 - prm.beta) / (prm.beta_plus - prm.beta));
    const double s2 = std::log(rho / 4.0) / ln_eps;
    c.zeta2[i] = smoothstep((s2 - prm.beta_minus) / (prm.beta - prm.beta_minus));
    c.xi[i] = 1.0 - smoothstep((rho - 0.125) / 0.125);
  }
  return c;
}

// Indicial annihilator rows Q(v) = vdd + s vd: roots of the symbol are
// {0, -s}, so Q kills the modes the end is allowed to carry and is nonzero
// on the forbidden pair; two rows at adjacent nodes have rank two on it.
void q_row_forward(MatX& m, int row, int col0, double h, double s) {
  const double h2 = h * h;
  m(row, col0) = 2.0 / h2 + s * (-1.5 / h);
  m(row, col0 + 1) = -5.0 / h2 + s * (2.0 / h);
  m(row, col0 + 2) = 4.0 / h2 + s * (-0.5 / h);
  m(row, col0 + 3) = -1.0 / h2;
}

void q_row_central(MatX& m, int row, int center, double h, double s) {
  const double h2 = h * h;
  m(row, center - 1) = 1.0 / h2 - s / (2.0 * h);
  m(row, center) = -2.0 / h2;
  m(row, center + 1) = 1.0 / h2 + s / (2.0 * h);
}

void check_solve(const MatX& m, const VecX& u, const VecX& rhs) {
  if (!u.allFinite()) throw ModelSolveFailure("model solve produced non-finite values");
  const VecX res = m * u - rhs;
  const double scale = (m.cwiseAbs() * u.cwiseAbs()).maxCoeff() + rhs.cwiseAbs().maxCoeff();
  if (res.cwiseAbs().maxCoeff() > 1e-6 * (scale + kTiny))
    throw ModelSolveFailure("model solve residual too large");
}

// Shared solve-and-compose path for the approximate inverse; norms are
// layered on top by the callers.
struct ComposeOut {
  VecX f;
  double nu = 0.0;
  double lambda = 0.0;
};

ComposeOut compose_inverse(const RightInverseModel& m, const VecX& psi) {
  const int n = static_cast<int>(m.grid.size());
  require(psi.size() == n, "psi must live on the model grid");
  if (!psi.allFinite()) throw DomainError("psi has non-finite entries");
  const int nm = n - m.m_lo;
  const double eps = m.prm.eps;

  ComposeOut out;

  // The ALE-side source must have vanishing rho^3- and rho^5-moments: the
  // radial bilaplacian's fundamental solution grows logarithmically in four
  // dimensions, so a mass-carrying source has no solution inside the
  // decay-matched span the outer boundary rows select, and the next moment
  // feeds a rho^-2 tail straight into the outer splice band. Both moments
  // move onto the orbifold problem via a two-parameter bump supported where
  // the model windows overlap and the splicing cutoffs are identically one;
  // the nu augmentation absorbs them there and the bump contributions cancel
  // exactly in the composed residual. The moment matrix is a Gram matrix of
  // the bump weight, hence invertible.
  const double h = grid_spacing(m.grid);
  VecX chi(n);
  double m3 = 0.0, m5 = 0.0, m7 = 0.0, p3 = 0.0, p5 = 0.0;
  for (int i = 0; i < n; ++i) {
    chi[i] = m.gamma1[i] * (1.0 - m.gamma1[i]);
    const double r2 = m.grid[i] * m.grid[i];
    const double vol = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * ipow(m.grid[i], 4);
    m3 += vol * chi[i];
    m5 += vol * r2 * chi[i];
    m7 += vol * r2 * r2 * chi[i];
    p3 += vol * (1.0 - m.gamma1[i]) * psi[i];
    p5 += vol * r2 * (1.0 - m.gamma1[i]) * psi[i];
  }
  const double det = m3 * m7 - m5 * m5;
  const double mu0 = (m7 * p3 - m5 * p5) / det;
  const double mu2 = (m3 * p5 - m5 * p3) / det;
  const auto corr = [&](int i) { return (mu0 + mu2 * m.grid[i] * m.grid[i]) * chi[i]; };
  out.nu = m.nu_weight.dot(psi) + 4.0 * h * p3;

  VecX rhs_m = VecX::Zero(nm + 1);
  for (int j = 2; j <= nm - 3; ++j) {
    const int i = m.m_lo + j;
    rhs_m[j] = ipow(m.grid[i], 4) * (m.gamma1[i] * psi[i] + corr(i));
  }
  rhs_m[nm] = out.nu;
  rhs_m = rhs_m.cwiseProduct(m.m_row_scale);
  const VecX u_aug = m.m_lu.solve(rhs_m);
  check_solve(m.m_matrix, u_aug, rhs_m);

  VecX rhs_x = VecX::Zero(n);
  const double e4 = ipow(eps, 4);
  for (int i = 2; i <= n - 3; ++i) {
    const double w = m.grid[i] / eps;
    rhs_x[i] = ipow(w, 4) * e4 * ((1.0 - m.gamma1[i]) * psi[i] - corr(i));
  }
  rhs_x = rhs_x.cwiseProduct(m.x_row_scale);
  const VecX u_x = m.x_lu.solve(rhs_x);
  check_solve(m.x_matrix, u_x, rhs_x);

  const double r0 = m.grid[m.m_lo], r1 = m.grid[m.m_lo + 1];
  out.lambda = (u_aug[0] * r1 * r1 - u_aug[1] * r0 * r0) / (r1 * r1 - r0 * r0);

  out.f = VecX(n);
  for (int i = 0; i < n; ++i) {
    const double lam_part = out.lambda * m.xi[i];
    double v = lam_part + m.zeta2[i] * u_x[i];
    if (i >= m.m_lo) v += m.zeta1[i] * (u_aug[i - m.m_lo] - lam_part);
    out.f[i] = v;
  }
  return out;
}

RightInverseApplication measure_application(const RightInverseModel& m, const ComposeOut& co,
                                            const VecX& psi) {
  const int n = static_cast<int>(m.grid.size());
  const double eps = m.prm.eps;
  const double re = m.prm.r_eps();
  const VecX lf = radial_apply(m.op_glued, co.f);

  RightInverseApplication app;
  app.nu = co.nu;
  app.lambda = co.lambda;
  app.f.grid = m.grid;
  app.f.values = co.f;
  app.f.bc_lo = RadialBc::EvenCore;
  app.f.bc_hi = RadialBc::Clamped;

  double psi_norm = 0.0, res_norm = 0.0, off = 0.0;
  const double h = grid_spacing(m.grid);
  for (int i = 2; i <= n - 3; ++i) {
    const double rho = m.grid[i];
    const double wgt = std::pow(std::hypot(rho, eps), 4.0 - m.prm.delta);
    const double r = lf[i] + co.nu - psi[i];
    psi_norm = std::max(psi_norm, wgt * std::abs(psi[i]));
    res_norm = std::max(res_norm, wgt * std::abs(r));

    const bool in_gamma = rho >= 0.97 * re && std::hypot(rho, eps) <= 4.1 * re;
    const bool in_zeta1 = rho >= 0.95 * std::pow(eps, m.prm.beta_plus) && rho <= 1.05 * re;
    const bool in_zeta2 =
        rho >= 0.95 * 4.0 * re && rho <= 1.05 * 4.0 * std::pow(eps, m.prm.beta_minus);
    const bool in_xi = rho >= 0.95 * 0.125 && rho <= 1.05 * 0.25;
    if (in_gamma || in_zeta1 || in_zeta2 || in_xi) continue;

    // Away from every cutoff the exact discrete residual is the structural
    // nu (1 - zeta1); measure the defect relative to the row scale, which
    // carries the rho^-4 h^-4 stencil amplification of the rounding floor.
    const bool order4 = i >= 3 && i <= n - 4;
    const TRow row = ode_trow(euler_coeffs(node_coeffs(m.op_glued, i), rho), h, order4);
    double row_scale = 0.0;
    for (int k = 0; k < row.width; ++k)
      row_scale += std::abs(row.w[k]) * std::abs(co.f[i + row.lo + k]);
    row_scale += std::abs(co.nu) + std::abs(psi[i]) + kTiny;
    off = std::max(off, std::abs(r - co.nu * (1.0 - m.zeta1[i])) / row_scale);
  }
  app.psi_norm = psi_norm;
  app.residual_norm = res_norm;
  app.ratio = res_norm / std::max(psi_norm, kTiny);
  app.off_cutoff_residual = off;
  return app;
}

VecX bump_field(const VecX& grid, double eps, double delta, Rng& rng) {
  const int n = static_cast<int>(grid.size());
  const double t_lo = std::log(grid[0]), t_hi = std::log(grid[n - 1]);
  VecX psi = VecX::Zero(n);
  for (int b = 0; b < 3; ++b) {
    const double c0 = rng.uniform(t_lo + 0.5, t_hi - 0.5);
    const double wth = rng.uniform(0.3, 1.2);
    const double amp = rng.uniform(0.5, 1.5) * (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    for (int i = 0; i < n; ++i) {
      const double t = std::log(grid[i]);
      psi[i] += amp * std::exp(-(t - c0) * (t - c0) / (2.0 * wth * wth));
    }
  }
  for (int i = 0; i < n; ++i)
    psi[i] *= std::pow(std::hypot(grid[i], eps), delta - 4.0);
  psi[0] = psi[1] = psi[n - 2] = psi[n - 1] = 0.0;
  return psi;
}

// Nodal t-derivatives of a radial profile, same stencil layout as
// radial_apply (order 4 inside, order 2 at the first and last interior
// nodes); the two nodes at each end are left at zero.
void nodal_t_derivs(const VecX& grid, const VecX& v, VecX d[4]) {
  const int n = static_cast<int>(grid.size());
  const double h = grid_spacing(grid);
  for (int k = 0; k < 4; ++k) d[k] = VecX::Zero(n);
  for (int i = 2; i <= n - 3; ++i) {
    const bool o4 = i >= 3 && i <= n - 4;
    std::array<double, 5> basis{};
    for (int k = 1; k <= 4; ++k) {
      basis.fill(0.0);
      basis[k] = 1.0;
      const TRow row = ode_trow(basis, h, o4);
      double acc = 0.0;
      for (int j = 0; j < row.width; ++j) acc += row.w[j] * v[i + row.lo + j];
      d[k - 1][i] = acc;
    }
  }
}

double profile_weighted_c4(const VecX& grid, const VecX& v, double eps, double delta) {
  const int n = static_cast<int>(grid.size());
  VecX d[4];
  nodal_t_derivs(grid, v, d);
  double total = 0.0;
  for (int k = 0; k <= 4; ++k) {
    double sup = 0.0;
    for (int i = 2; i <= n - 3; ++i) {
      const double rho = grid[i];
      const double u1 = d[0][i] / rho;
      const double u2 = (d[1][i] - d[0][i]) / (rho * rho);
      const double u3 = (d[2][i] - 3 * d[1][i] + 2 * d[0][i]) / ipow(rho, 3);
      const double u4 = (d[3][i] - 6 * d[2][i] + 11 * d[1][i] - 6 * d[0][i]) / ipow(rho, 4);
      double mag;
      switch (k) {
        case 0: mag = std::abs(v[i]); break;
        case 1: mag = std::abs(u1); break;
        case 2: mag = std::max(std::abs(u2), std::abs(u1) / rho); break;
        case 3: mag = std::max(std::abs(u3), std::abs(u2) / rho + std::abs(u1) / (rho * rho)); break;
        default:
          mag = std::max(std::abs(u4),
                         std::abs(u3) / rho + std::abs(u2) / (rho * rho) + std::abs(u1) / ipow(rho, 3));
          break;
      }
      sup = std::max(sup, std::pow(std::hypot(rho, eps), k - delta) * mag);
    }
    total += sup;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation.

void WeightedNormSpec::validate() const {
  require(k >= 0 && k <= 4, "weighted norm order k outside [0,4]");
  require(alpha > 0.0 && alpha < 1.0, "Hoelder exponent outside (0,1)");
  require(std::isfinite(delta), "weight exponent must be finite");
  if (space == NormSpace::Glued) require(eps > 0.0, "glued norm needs eps > 0");
}

void RadialProfile::validate() const {
  const int n = static_cast<int>(grid.size());
  require(n >= 2 && values.size() == n, "profile grid/values size mismatch");
  require(grid[0] > 0.0, "profile radii must be positive");
  for (int i = 0; i + 1 < n; ++i) require(grid[i] < grid[i + 1], "profile grid must increase");
  require(values.allFinite(), "profile values must be finite");
}

// ---------------------------------------------------------------------------
// Weighted norms.

WeightedNormReport weighted_norm(const ScalarField& f, const WeightedNormSpec& spec,
                                 const NormSampling& sampling) {
  spec.validate();
  require(sampling.r_lo > 0.0 && sampling.r_hi > sampling.r_lo, "sampling range is empty");
  require(sampling.radial >= 2 && sampling.directions >= 1 && sampling.stages >= 1,
          "sampling counts must be positive");

  WeightedNormReport rep;
  rep.stage_value.clear();
  std::array<double, 5> sup{};
  double holder = 0.0;
  const bool toward_zero = spec.space != NormSpace::Ale;
  for (int stage = 0; stage < sampling.stages; ++stage) {
    Rng rng(sampling.seed + 7919ull * (stage + 1));
    double lo, hi;
    if (stage == 0) {
      lo = sampling.r_lo;
      hi = sampling.r_hi;
    } else if (toward_zero) {
      lo = sampling.r_lo / double(1 << stage);
      hi = sampling.r_lo / double(1 << (stage - 1));
    } else {
      lo = sampling.r_hi * double(1 << (stage - 1));
      hi = sampling.r_hi * double(1 << stage);
    }
    const StageSample s =
        sample_band(f, spec, lo, hi, sampling.radial, sampling.directions, rng);
    for (int i = 0; i < 5; ++i) sup[i] = std::max(sup[i], s.sup[i]);
    holder = std::max(holder, s.holder);
    double v = holder;
    for (int i = 0; i <= spec.k; ++i) v += sup[i];
    rep.stage_value.push_back(v);
  }
  for (int i = 0; i < 5; ++i) rep.sup_part[i] = sup[i];
  rep.holder_part = holder;
  rep.value = rep.stage_value.back();

  rep.stage_slope = 0.0;
  const int ns = static_cast<int>(rep.stage_value.size());
  if (ns >= 3 && rep.stage_value.front() > 0.0) {
    std::vector<double> xs(ns), ys(ns);
    for (int m = 0; m < ns; ++m) {
      xs[m] = m * std::log(2.0);
      ys[m] = std::log(std::max(rep.stage_value[m], kTiny));
    }
    rep.stage_slope = linear_fit(xs, ys).slope;
  } else if (ns >= 2 && rep.stage_value.front() > 0.0) {
    rep.stage_slope = std::log(rep.stage_value.back() / rep.stage_value.front()) /
                      ((ns - 1) * std::log(2.0));
  }
  rep.diverged = rep.stage_slope > 0.05;
  return rep;
}

EmbeddingReport norm_embedding_check(const ScalarField& f, double delta, double delta_prime,
                                     double eps, const NormSampling& sampling, int k) {
  WeightedNormSpec src;
  src.k = k;
  src.delta = delta;
  src.space = NormSpace::Glued;
  src.eps = eps;
  WeightedNormSpec dst = src;
  dst.delta = delta_prime;

  EmbeddingReport rep;
  rep.norm_source = weighted_norm(f, src, sampling).value;
  rep.norm_target = weighted_norm(f, dst, sampling).value;
  rep.bound = delta_prime <= delta ? rep.norm_source
                                   : std::pow(eps, delta - delta_prime) * rep.norm_source;
  rep.ratio = rep.norm_target / std::max(rep.bound, kTiny);
  rep.pass = rep.ratio <= 1.1;
  return rep;
}

ProductRuleReport product_rule_check(const ScalarField& f, const ScalarField& g, double delta,
                                     double delta_prime, double eps, const NormSampling& sampling,
                                     int k) {
  WeightedNormSpec sf;
  sf.k = k;
  sf.delta = delta;
  sf.space = NormSpace::Glued;
  sf.eps = eps;
  WeightedNormSpec sg = sf;
  sg.delta = delta_prime;
  WeightedNormSpec sfg = sf;
  sfg.delta = delta + delta_prime;

  ScalarField fg = [f, g](const Vec4& x) { return f(x) * g(x); };
  ProductRuleReport rep;
  rep.norm_f = weighted_norm(f, sf, sampling).value;
  rep.norm_g = weighted_norm(g, sg, sampling).value;
  rep.norm_fg = weighted_norm(fg, sfg, sampling).value;
  rep.constant = rep.norm_fg / std::max(rep.norm_f * rep.norm_g, kTiny);
  return rep;
}

// ---------------------------------------------------------------------------
// Radial reduction.

std::array<double, 5> flat_bilaplacian_coeffs(double rho) {
  require(rho > 0.0, "flat coefficients need rho > 0");
  return {0.0, -3.0 / ipow(rho, 3), 3.0 / (rho * rho), 6.0 / rho, 1.0};
}

RadialOperator radial_reduce(RadialOperatorKind kind, const VecX& grid, const GluingParams& prm,
                             int probe_nodes) {
  const int n = static_cast<int>(grid.size());
  grid_spacing(grid);
  RadialOperator op;
  op.kind = kind;
  op.grid = grid;
  for (auto& a : op.a) a = VecX::Zero(n);
  op.augmented = false;

  const ProbeSetup setup = probe_setup(kind, prm);

  // Nodes beyond the structure's deformation take the flat closed form;
  // the measured zone covers the rest.
  double zone_hi = grid[n - 1];
  if (kind == RadialOperatorKind::LichnerowiczAle) {
    zone_hi = std::min(zone_hi, kAleFarField);
    require(grid[0] > darboux_rmin(1.0) * 1.05, "grid dips below the model chart floor");
  } else if (kind == RadialOperatorKind::LEpsGlued) {
    GluingParams p = prm;
    p.validate();
    zone_hi = std::min(zone_hi, (2.0 - p.eta) * p.r_eps() * 1.02);
    require(grid[0] > darboux_rmin(p.eps * p.eps) * 1.05, "grid dips below the glued chart floor");
  }

  int zone_end = 0;  // first index outside the measured zone
  while (zone_end < n && grid[zone_end] <= zone_hi) ++zone_end;
  for (int i = zone_end; i < n; ++i) {
    const auto a = flat_bilaplacian_coeffs(grid[i]);
    for (int j = 0; j < 5; ++j) op.a[j][i] = a[j];
  }
  if (zone_end == 0) return op;

  const Eigen::Matrix<double, 5, 5> f_inv = falling_matrix().inverse();
  const Vec4 probe_dir = Vec4(0.6, -0.3, 0.55, 0.4).normalized();
  const Vec4 cross_dir = Vec4(-0.2, 0.7, 0.1, -0.65).normalized();

  std::vector<int> anchors;
  if (probe_nodes <= 0 || probe_nodes >= zone_end) {
    anchors.resize(zone_end);
    for (int i = 0; i < zone_end; ++i) anchors[i] = i;
  } else {
    require(probe_nodes >= 4, "need at least four probe nodes to interpolate");
    for (int k = 0; k < probe_nodes; ++k)
      anchors.push_back((k * (zone_end - 1)) / (probe_nodes - 1));
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  }

  const int na = static_cast<int>(anchors.size());
  MatX scaled(na, 5);
  for (int k = 0; k < na; ++k) {
    const double rho = grid[anchors[k]];
    const auto s = measure_scaled(setup, rho, probe_dir, f_inv);
    if (s[4] <= 0.0) throw IllConditioned("reduced leading coefficient not positive");
    for (int j = 0; j < 5; ++j) scaled(k, j) = s[j];
  }

  // Invariance spot check along a second direction at three interior
  // anchors; floor-adjacent nodes are skipped because the steep coefficient
  // growth there amplifies direction-dependent truncation, while a genuinely
  // asymmetric structure deviates at every radius.
  for (const int k : {na / 4, na / 2, (3 * na) / 4}) {
    const double rho = grid[anchors[k]];
    const auto s2 = measure_scaled(setup, rho, cross_dir, f_inv);
    for (int j = 0; j < 5; ++j)
      if (std::abs(s2[j] - scaled(k, j)) > 1e-3 * (1.0 + std::abs(scaled(k, j))))
        throw DomainError("radial reduction requires a radially symmetric structure");
  }

  if (na == zone_end) {
    for (int i = 0; i < zone_end; ++i)
      for (int j = 0; j < 5; ++j) op.a[j][i] = scaled(i, j) * ipow(grid[i], j - 4);
  } else {
    VecX ts(na);
    for (int k = 0; k < na; ++k) ts[k] = std::log(grid[anchors[k]]);
    std::array<CubicSpline, 5> spl;
    for (int j = 0; j < 5; ++j) spl[j] = CubicSpline(ts, scaled.col(j));
    for (int i = 0; i < zone_end; ++i) {
      const double t = std::log(grid[i]);
      for (int j = 0; j < 5; ++j) op.a[j][i] = spl[j](t) * ipow(grid[i], j - 4);
    }
  }
  for (int i = 0; i < zone_end; ++i)
    if (op.a[4][i] <= 0.0) throw IllConditioned("reduced leading coefficient not positive");
  return op;
}

VecX radial_apply(const RadialOperator& op, const VecX& values) {
  const int n = static_cast<int>(op.grid.size());
  require(values.size() == n, "profile does not match the operator grid");
  const double h = grid_spacing(op.grid);
  VecX out = VecX::Zero(n);
  for (int i = 2; i <= n - 3; ++i) {
    const bool o4 = i >= 3 && i <= n - 4;
    const TRow row = ode_trow(euler_coeffs(node_coeffs(op, i), op.grid[i]), h, o4);
    double acc = 0.0;
    for (int k = 0; k < row.width; ++k) acc += row.w[k] * values[i + row.lo + k];
    out[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Indicial exponents.

IndicialReport indicial_probe(const RadialOperator& op, double rho_lo, double rho_hi) {
  require(rho_lo > 0.0 && rho_hi > rho_lo, "indicial window is empty");
  const int n = static_cast<int>(op.grid.size());
  require(n >= 8, "indicial probe needs a resolved operator grid");

  // Coefficient ratios of the Euler form, splined in t and clamped to the
  // end values beyond the operator grid (freezing the asymptotic operator).
  VecX ts(n);
  MatX ratios(n, 4);
  for (int i = 0; i < n; ++i) {
    ts[i] = std::log(op.grid[i]);
    const auto c = euler_coeffs(node_coeffs(op, i), op.grid[i]);
    if (!(c[4] > 0.0) || !std::isfinite(c[4]))
      throw IllConditioned("leading Euler coefficient not positive");
    for (int j = 0; j < 4; ++j) ratios(i, j) = c[j] / c[4];
  }
  std::array<CubicSpline, 4> b;
  for (int j = 0; j < 4; ++j) b[j] = CubicSpline(ts, ratios.col(j));

  const auto rhs = [&](double t, const Mat4& y) {
    Mat4 dy;
    dy.row(0) = y.row(1);
    dy.row(1) = y.row(2);
    dy.row(2) = y.row(3);
    dy.row(3) = -b[0](t) * y.row(0) - b[1](t) * y.row(1) - b[2](t) * y.row(2) - b[3](t) * y.row(3);
    return dy;
  };

  const double t_hi = std::log(rho_hi), t_lo = std::log(rho_lo);
  const int n_steps = 2000, renorm_every = 10;
  const double hs = (t_hi - t_lo) / n_steps;

  Mat4 y = Mat4::Identity();
  Eigen::Vector4d cum = Eigen::Vector4d::Zero();
  std::vector<double> taus;
  std::vector<Eigen::Vector4d> cums;
  for (int step = 0; step < n_steps; ++step) {
    const double t = t_hi - step * hs;  // integrate downward
    const Mat4 k1 = rhs(t, y);
    const Mat4 k2 = rhs(t - 0.5 * hs, y - 0.5 * hs * k1);
    const Mat4 k3 = rhs(t - 0.5 * hs, y - 0.5 * hs * k2);
    const Mat4 k4 = rhs(t - hs, y - hs * k3);
    y -= (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e12)
      throw StiffFailure("indicial integration blew up between renormalizations");
    if ((step + 1) % renorm_every == 0) {
      Eigen::HouseholderQR<Mat4> qr(y);
      Mat4 q = qr.householderQ();
      Mat4 r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < 4; ++j)
        if (r(j, j) < 0.0) {
          r.row(j) = -r.row(j);
          q.col(j) = -q.col(j);
        }
      for (int j = 0; j < 4; ++j) {
        if (!(r(j, j) > 0.0)) throw StiffFailure("degenerate basis in indicial integration");
        cum[j] += std::log(r(j, j));
      }
      y = q;
      taus.push_back((step + 1) * hs);
      cums.push_back(cum);
    }
  }

  const int nck = static_cast<int>(taus.size());
  const int burn = nck * 15 / 100;
  require(nck - burn >= 3, "too few indicial checkpoints");
  IndicialReport rep;
  std::array<double, 4> expo{};
  for (int j = 0; j < 4; ++j) {
    std::vector<double> xs, ys;
    for (int k = burn; k < nck; ++k) {
      xs.push_back(taus[k]);
      ys.push_back(cums[k][j]);
    }
    expo[j] = -linear_fit(xs, ys).slope;  // growth along decreasing rho
  }
  std::sort(expo.begin(), expo.end());
  for (int j = 0; j < 4; ++j) rep.exponents[j] = expo[j];
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < 4; ++j) rep.min_gap = std::min(rep.min_gap, expo[j + 1] - expo[j]);
  rep.log_branch = rep.min_gap < 0.15;
  return rep;
}

// ---------------------------------------------------------------------------
// Approximate right inverse.

RightInverseModel build_right_inverse(const GluingParams& prm, int nodes) {
  prm.validate();
  require(nodes >= 64, "right inverse grid too coarse");
  const double eps = prm.eps;
  const double re = prm.r_eps();
  const double r_hi = 0.98;
  require(4.0 * std::pow(eps, prm.beta_minus) < 0.95 * r_hi,
          "outer cutoff must close below the desk wall");

  RightInverseModel m;
  m.prm = prm;
  // Start the grid a fixed multiple of eps above the bolt: the radial
  // reduction degenerates there (coefficients blow up like inverse powers of
  // the distance to the bolt radius), which both defeats spline interpolation
  // of the model coefficients and inflates collocation row magnitudes past
  // what double precision can serve.
  const double floor = darboux_rmin(eps * eps);
  m.grid = log_grid(std::max(0.3 * eps, 1.2 * floor), r_hi, nodes);
  const double h = grid_spacing(m.grid);
  const int n = nodes;

  // Model operator on the unit-scale resolved chart; every glued core
  // coefficient is an exact rescaling of it, so one reduction serves both.
  VecX wgrid = m.grid / eps;
  RadialOperator op_x = radial_reduce(RadialOperatorKind::LichnerowiczAle, wgrid, prm, 64);
  op_x.a[0].setZero();  // constants lie in the kernel; drop measured noise

  m.op_glued.kind = RadialOperatorKind::LEpsGlued;
  m.op_glued.grid = m.grid;
  for (auto& a : m.op_glued.a) a = VecX::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (m.grid[i] <= re) {
      for (int j = 0; j < 5; ++j) m.op_glued.a[j][i] = ipow(eps, j - 4) * op_x.a[j][i];
    } else {
      const auto a = flat_bilaplacian_coeffs(m.grid[i]);
      for (int j = 0; j < 5; ++j) m.op_glued.a[j][i] = a[j];
    }
  }
  m.op_glued.a[0].setZero();

  const Cutoffs cut = make_cutoffs(m.grid, prm);
  m.gamma1 = cut.gamma1;
  m.zeta1 = cut.zeta1;
  m.zeta2 = cut.zeta2;
  m.xi = cut.xi;

  // nu is the mean of gamma1 psi over the unit ball: 4 int gamma1 psi rho^3.
  m.nu_weight = VecX::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double tr = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    m.nu_weight[i] = 4.0 * h * tr * ipow(m.grid[i], 4) * m.gamma1[i];
  }

  const double window_lo = 0.5 * std::pow(eps, prm.beta_plus);
  m.m_lo = 0;
  while (m.m_lo < n && m.grid[m.m_lo] < window_lo) ++m.m_lo;
  require(m.m_lo >= 1 && n - m.m_lo >= 12, "puncture window badly placed");

  const int nm = n - m.m_lo;

  // Puncture system: Euler rows scaled by rho^4 (uniform magnitude across
  // the window), Q1 = dt(dt - 2) rows at the inner end admitting {1, rho^2},
  // value and slope pinned at the desk wall, and the mean as one extra
  // unknown so constants are fixed.
  m.m_matrix = MatX::Zero(nm + 1, nm + 1);
  q_row_forward(m.m_matrix, 0, 0, h, -2.0);
  q_row_central(m.m_matrix, 1, 1, h, -2.0);
  for (int j = 2; j <= nm - 3; ++j) {
    const int i = m.m_lo + j;
    const double rho = m.grid[i];
    auto c = euler_coeffs(node_coeffs(m.op_glued, i), rho);
    for (auto& v : c) v *= ipow(rho, 4);
    const bool o4 = j >= 3 && j <= nm - 4 && (m.m_lo + j) <= n - 4;
    const TRow row = ode_trow(c, h, o4);
    for (int k = 0; k < row.width; ++k) m.m_matrix(j, j + row.lo + k) = row.w[k];
    m.m_matrix(j, nm) = ipow(rho, 4);
  }
  m.m_matrix(nm - 2, nm - 3) = -0.5 / h;  // central slope at the wall
  m.m_matrix(nm - 2, nm - 1) = 0.5 / h;
  m.m_matrix(nm - 1, nm - 1) = 1.0;
  m.m_matrix(nm, nm) = 1.0;

  // Resolved-model system on the w grid: Q1 = dt(dt - 2) rows at the chart
  // floor admitting {1, w^2} (the growing member carries any first-moment
  // load, exactly as bolt regularity would), Euler rows scaled by w^4, one
  // Q2 = dt(dt + 2) row at the outer end admitting {1, w^-2}, and the last
  // value pinned to select decay. Four boundary rows total: a fifth would
  // overdetermine the fourth-order problem and smear the mismatch across
  // the splice band as a spurious logarithmic field.
  m.x_matrix = MatX::Zero(n, n);
  q_row_forward(m.x_matrix, 0, 0, h, -2.0);
  q_row_central(m.x_matrix, 1, 1, h, -2.0);
  for (int i = 2; i <= n - 3; ++i) {
    const double w = wgrid[i];
    auto c = euler_coeffs(node_coeffs(op_x, i), w);
    for (auto& v : c) v *= ipow(w, 4);
    const bool o4 = i >= 3 && i <= n - 4;
    const TRow row = ode_trow(c, h, o4);
    for (int k = 0; k < row.width; ++k) m.x_matrix(i, i + row.lo + k) = row.w[k];
  }
  q_row_central(m.x_matrix, n - 2, n - 2, h, 2.0);
  m.x_matrix(n - 1, n - 1) = 1.0;

  // Row equilibration: coefficient growth toward the chart floor would
  // otherwise swamp the boundary rows in the factorization.
  const auto equilibrate = [](MatX& a) {
    VecX s = VecX::Ones(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
      const double rm = a.row(i).cwiseAbs().maxCoeff();
      if (rm > 0.0) {
        s[i] = 1.0 / rm;
        a.row(i) *= s[i];
      }
    }
    return s;
  };
  m.m_row_scale = equilibrate(m.m_matrix);
  m.x_row_scale = equilibrate(m.x_matrix);

  m.m_lu.compute(m.m_matrix);
  m.x_lu.compute(m.x_matrix);
  if (!m.m_lu.matrixLU().allFinite() || !m.x_lu.matrixLU().allFinite())
    throw ModelSolveFailure("model factorization failed");
  return m;
}

RightInverseApplication approximate_right_inverse(const RightInverseModel& m, const VecX& psi) {
  const ComposeOut co = compose_inverse(m, psi);
  return measure_application(m, co, psi);
}

CorrectedInverse corrected_inverse(const RightInverseModel& m) {
  const int n = static_cast<int>(m.grid.size());
  CorrectedInverse c;
  c.t = MatX::Zero(n, n);
  VecX e = VecX::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    if (j < 2 || j >= n - 2) {
      c.t(j, j) = 1.0;
    } else {
      const ComposeOut co = compose_inverse(m, e);
      const VecX lf = radial_apply(m.op_glued, co.f);
      for (int i = 2; i <= n - 3; ++i) c.t(i, j) = lf[i] + co.nu;
      c.t(0, j) = (j == 0) ? 1.0 : 0.0;
      c.t(1, j) = (j == 1) ? 1.0 : 0.0;
      c.t(n - 2, j) = (j == n - 2) ? 1.0 : 0.0;
      c.t(n - 1, j) = (j == n - 1) ? 1.0 : 0.0;
    }
    e[j] = 0.0;
  }
  if (!c.t.allFinite()) throw ModelSolveFailure("corrected inverse assembly failed");
  c.lu.compute(c.t);
  if (!c.lu.matrixLU().allFinite()) throw ModelSolveFailure("corrected factorization failed");
  return c;
}

RightInverseApplication apply_corrected(const RightInverseModel& m, const CorrectedInverse& c,
                                        const VecX& psi) {
  const int n = static_cast<int>(m.grid.size());
  require(psi.size() == n, "psi must live on the model grid");
  const VecX phi = c.lu.solve(psi);
  if (!phi.allFinite()) throw ModelSolveFailure("corrected solve produced non-finite values");
  const ComposeOut co = compose_inverse(m, phi);
  return measure_application(m, co, psi);
}

double corrected_inverse_norm(const RightInverseModel& m, const CorrectedInverse& c, int n_probes,
                              std::uint64_t seed) {
  require(n_probes >= 1, "need at least one probe");
  Rng rng(seed);
  double worst = 0.0;
  const int n = static_cast<int>(m.grid.size());
  for (int p = 0; p < n_probes; ++p) {
    const VecX psi = bump_field(m.grid, m.prm.eps, m.prm.delta, rng);
    double src = 0.0;
    for (int i = 2; i <= n - 3; ++i)
      src = std::max(src, std::pow(std::hypot(m.grid[i], m.prm.eps), 4.0 - m.prm.delta) *
                              std::abs(psi[i]));
    if (src <= 0.0) continue;
    const RightInverseApplication app = apply_corrected(m, c, psi);
    const double dst = profile_weighted_c4(m.grid, app.f.values, m.prm.eps, m.prm.delta);
    worst = std::max(worst, dst / src);
  }
  return worst;
}

RightInverseSweep right_inverse_sweep(const std::vector<double>& eps_list, GluingParams base,
                                      std::uint64_t seed) {
  require(!eps_list.empty(), "eps list is empty");
  std::vector<double> eps_sorted = eps_list;
  std::sort(eps_sorted.begin(), eps_sorted.end());

  RightInverseSweep sweep;
  for (size_t idx = 0; idx < eps_sorted.size(); ++idx) {
    GluingParams prm = base;
    prm.eps = eps_sorted[idx];
    prm.validate();
    const RightInverseModel model = build_right_inverse(prm);
    const CorrectedInverse corr = corrected_inverse(model);
    const int n = static_cast<int>(model.grid.size());
    const double re = prm.r_eps();

    RightInverseSweepRow row;
    row.eps = prm.eps;

    // Annulus-supported defect proxy plus random bump fields.
    VecX annulus = VecX::Zero(n);
    for (int i = 2; i <= n - 3; ++i) {
      const double t = std::log(model.grid[i] / (2.0 * re)) / 0.6;
      annulus[i] = std::exp(-t * t) *
                   std::pow(std::hypot(model.grid[i], prm.eps), prm.delta - 4.0);
    }
    Rng rng(seed ^ (0x9e3779b97f4a7c15ull * (idx + 1)));
    std::vector<VecX> probes;
    probes.push_back(annulus);
    for (int p = 0; p < 3; ++p) probes.push_back(bump_field(model.grid, prm.eps, prm.delta, rng));

    for (size_t p = 0; p < probes.size(); ++p) {
      const RightInverseApplication app = approximate_right_inverse(model, probes[p]);
      row.ratio = std::max(row.ratio, app.ratio);
      row.off_cutoff = std::max(row.off_cutoff, app.off_cutoff_residual);
      if (p == 0) {
        row.nu = app.nu;
        row.lambda = app.lambda;
      }
    }
    row.corrected_norm =
        corrected_inverse_norm(model, corr, 6, seed ^ (0xda942042e4dd58b5ull * (idx + 1)));
    sweep.rows.push_back(row);
  }

  sweep.eps_star = 0.0;
  for (const auto& row : sweep.rows) {
    if (row.ratio <= 0.5)
      sweep.eps_star = row.eps;
    else
      break;
  }
  if (sweep.rows.size() >= 3) {
    std::vector<double> xs, ys;
    for (const auto& row : sweep.rows) {
      xs.push_back(std::log(row.eps));
      ys.push_back(std::log(std::max(row.corrected_norm, kTiny)));
    }
    sweep.norm_fit = linear_fit(xs, ys);
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Picard iteration.

PicardReport picard_solve(const GluingParams& prm, const SyntheticOrbifold& synth, int max_iter,
                          double tol, int nodes) {
  prm.validate();
  require(max_iter >= 1 && tol > 0.0, "picard parameters out of range");
  if (!synth.trivial())
    throw DomainError("picard iteration is set up over the radial glued family");

  const RightInverseModel model = build_right_inverse(prm, nodes);
  const CorrectedInverse corr = corrected_inverse(model);
  const GluedStructure gs = glued_structure(synth, prm);
  const int n = static_cast<int>(model.grid.size());
  const double h_t = grid_spacing(model.grid);
  const Vec4 dir = Vec4(0.6, -0.3, 0.55, 0.4).normalized();

  const auto stencil_at_node = [&](int i) {
    StencilConfig c;
    c.h = h_t * model.grid[i];
    c.order = 4;
    return c;
  };

  const auto weighted_sup = [&](const VecX& v) {
    double s = 0.0;
    for (int i = 2; i <= n - 3; ++i)
      s = std::max(s, std::pow(std::hypot(model.grid[i], prm.eps), 4.0 - prm.delta) *
                          std::abs(v[i]));
    return s;
  };

  // Target curvature profile of the glued background along the probe ray.
  VecX s_hat(n);
  for (int i = 0; i < n; ++i)
    s_hat[i] = hermitian_scalar_A(gs.triple, model.grid[i] * dir, stencil_at_node(i));
  require(s_hat.allFinite(), "background curvature profile is not finite");

  PicardReport rep;
  VecX psi = VecX::Zero(n);
  for (int i = 2; i <= n - 3; ++i) psi[i] = -s_hat[i];

  rep.residual_initial = weighted_sup(psi);
  const double ball = 2.0 * rep.residual_initial;
  rep.ball_constant = ball / (prm.eps * prm.eps);
  rep.ball_confined = true;
  rep.contraction_max = 0.0;

  double prev_gap = rep.residual_initial;
  {
    PicardTraceRow row;
    row.n = 1;
    row.psi_norm = rep.residual_initial;
    row.gap = rep.residual_initial;
    row.ratio = 0.0;
    row.lambda = 0.0;
    rep.trace.push_back(row);
  }

  VecX ts(n);
  for (int i = 0; i < n; ++i) ts[i] = std::log(model.grid[i]);

  VecX f_last = VecX::Zero(n);
  double nu_last = 0.0;
  for (int it = 1; it < max_iter; ++it) {
    const VecX phi = corr.lu.solve(psi);
    if (!phi.allFinite()) throw ModelSolveFailure("picard corrected solve failed");
    const ComposeOut co = compose_inverse(model, phi);
    f_last = co.f;
    nu_last = co.nu;

    // Curvature of the deformed structure along the ray.  The potential
    // rides on a cubic spline, so every stencil spans grid cells rather
    // than the sub-knot scale where a cubic has no fourth derivative left.
    CubicSpline fspl(ts, co.f);
    ScalarField ffield = [fspl](const Vec4& z) { return fspl(std::log(z.norm())); };
    EndoField a_field = [&gs, ffield, h_t](const Vec4& z) {
      StencilConfig ci;
      ci.h = h_t * z.norm();
      return hamiltonian_deformation(gs.triple.omega, gs.triple.J, ffield, z, ci);
    };
    const EndoField jf = deformed_structure(gs.triple.J, a_field, 1.0);
    StructureTriple def;
    def.omega = gs.triple.omega;
    def.J = jf;
    def.g = [om = gs.triple.omega, jf](const Vec4& y) -> Mat4 {
      const Mat4 m = om(y) * jf(y);
      return Mat4(0.5 * (m + m.transpose()));
    };

    VecX next = VecX::Zero(n);
    for (int i = 2; i <= n - 3; ++i) {
      const double s_def = hermitian_scalar_A(def, model.grid[i] * dir, stencil_at_node(i));
      if (!std::isfinite(s_def)) throw StencilError("non-finite deformed curvature");
      next[i] = psi[i] - co.nu - s_def;
    }

    const double gap = weighted_sup(next - psi);
    psi = next;
    const double norm = weighted_sup(psi);
    if (norm > ball) rep.ball_confined = false;

    PicardTraceRow row;
    row.n = it + 1;
    row.psi_norm = norm;
    row.gap = gap;
    row.ratio = prev_gap > 0.0 ? gap / prev_gap : 0.0;
    row.lambda = co.nu;
    rep.trace.push_back(row);
    rep.contraction_max = std::max(rep.contraction_max, row.ratio);
    prev_gap = gap;
    if (gap <= tol) break;
  }

  rep.residual_final = rep.trace.back().gap;
  rep.lambda = nu_last;
  rep.f.grid = model.grid;
  rep.f.values = f_last;
  rep.f.bc_lo = RadialBc::EvenCore;
  rep.f.bc_hi = RadialBc::Clamped;
  const bool reduced = rep.residual_final <= rep.residual_initial / 10.0;
  rep.status = (reduced && rep.contraction_max < 1.0) ? PicardStatus::Converged
                                                      : PicardStatus::NoContraction;
  return rep;
}

}  // namespace akg
