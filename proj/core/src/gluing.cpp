#include "akglue/gluing.hpp"

#include "akglue/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace akg {

double GluingParams::r_eps() const { return std::pow(eps, beta); }
double GluingParams::R_eps() const { return std::pow(eps, beta - 1.0); }

void GluingParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("gluing eps outside (0,1)");
  if (!(beta > 0.0 && beta < 0.8)) throw DomainError("gluing beta outside (0, 4/5)");
  if (!(beta_minus > 0.0 && beta_minus < beta && beta < beta_plus && beta_plus < 1.0))
    throw DomainError("gluing weights need 0 < beta- < beta < beta+ < 1");
  if (!(eta > 0.0 && eta < 0.5)) throw DomainError("gluing eta outside (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("gluing delta outside (0,1)");
  if (4.0 * r_eps() > kAnnulusCeiling)
    throw DomainError("gluing annuli reach the annulus ceiling; eps too large for beta");
  if (darboux_rmin(eps * eps) > r_eps() / 8.0)
    throw DomainError("core chart floor too close to r_eps");
}

namespace {

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double bump_d1(double u) {
  if (u <= 0.0) return 0.0;
  return bump(u) / (u * u);
}
double bump_d2(double u) {
  if (u <= 0.0) return 0.0;
  return bump(u) * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
}

}  // namespace

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = bump(t), b = bump(1.0 - t);
  return a / (a + b);
}

double smoothstep_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = bump(t), b = bump(1.0 - t);
  const double ap = bump_d1(t), bp = -bump_d1(1.0 - t);
  const double w = a + b;
  return (ap * b - a * bp) / (w * w);
}

double smoothstep_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = bump(t), b = bump(1.0 - t);
  const double ap = bump_d1(t), bp = -bump_d1(1.0 - t);
  const double app = bump_d2(t), bpp = bump_d2(1.0 - t);
  const double w = a + b, wp = ap + bp;
  const double num = ap * b - a * bp;
  const double nump = app * b - a * bpp;
  return nump / (w * w) - 2.0 * num * wp / (w * w * w);
}

double chi_inner(double t, double eta) {
  if (t <= 1.0) return 1.0;
  return 1.0 - smoothstep((t - 1.0) / (1.0 - eta));
}

double chi_outer(double t, double eta) {
  return smoothstep((t - 2.0 - eta) / (2.0 - eta));
}

double cutoff_derivative_bound(CutoffKind kind, int k) {
  if (k < 0 || k > 4) throw DomainError("cutoff derivative bound recorded for k <= 4");
  static const std::array<double, 5> step_bounds = [] {
    std::array<double, 5> b{1.0, 0.0, 0.0, 0.0, 0.0};
    const int n = 2000;
    const double h = 1e-4;
    for (int i = 1; i < n; ++i) {
      const double t = static_cast<double>(i) / n;
      const double d2m = smoothstep_d2(t - h), d2 = smoothstep_d2(t), d2p = smoothstep_d2(t + h);
      b[1] = std::max(b[1], std::abs(smoothstep_d1(t)));
      b[2] = std::max(b[2], std::abs(d2));
      b[3] = std::max(b[3], std::abs((d2p - d2m) / (2.0 * h)));
      b[4] = std::max(b[4], std::abs((d2p - 2.0 * d2 + d2m) / (h * h)));
    }
    for (int j = 1; j <= 4; ++j) b[j] *= 1.05;
    return b;
  }();
  const double eta = 0.1;
  const double scale = kind == CutoffKind::Inner ? 1.0 / (1.0 - eta) : 1.0 / (2.0 - eta);
  return step_bounds[static_cast<std::size_t>(k)] * std::pow(scale, k);
}

namespace {

// Darboux pairing of the chart coordinates: (q1, q2, p1, p2) = (x3, x2, x0, x1),
// so that J0 q_i = p_i and omega0 = dq ^ dp.
constexpr int kQ1 = 3, kQ2 = 2, kP1 = 0, kP2 = 1;

struct Quartic2d {
  double val = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Mat2 hess = Mat2::Zero();
};

// P(u,v) = c0 u^4 + c1 u^3 v + c2 u^2 v^2 + c3 u v^3 + c4 v^4.  Polynomial
// throughout, so the pullback fields stay stencil-friendly on the whole chart.
Quartic2d quartic_2d(const std::array<double, 5>& c, double u, double v) {
  Quartic2d q;
  const double u2 = u * u, v2 = v * v;
  q.val = c[0] * u2 * u2 + c[1] * u2 * u * v + c[2] * u2 * v2 + c[3] * u * v2 * v +
          c[4] * v2 * v2;
  q.grad << 4.0 * c[0] * u2 * u + 3.0 * c[1] * u2 * v + 2.0 * c[2] * u * v2 + c[3] * v2 * v,
      c[1] * u2 * u + 2.0 * c[2] * u2 * v + 3.0 * c[3] * u * v2 + 4.0 * c[4] * v2 * v;
  q.hess << 12.0 * c[0] * u2 + 6.0 * c[1] * u * v + 2.0 * c[2] * v2,
      3.0 * c[1] * u2 + 4.0 * c[2] * u * v + 3.0 * c[3] * v2,
      3.0 * c[1] * u2 + 4.0 * c[2] * u * v + 3.0 * c[3] * v2,
      2.0 * c[2] * u2 + 6.0 * c[3] * u * v + 12.0 * c[4] * v2;
  return q;
}

Vec4 shear_in_p(const std::array<double, 5>& c, const Vec4& x) {  // p += dF/dq
  const Quartic2d f = quartic_2d(c, x[kQ1], x[kQ2]);
  Vec4 y = x;
  y[kP1] += f.grad[0];
  y[kP2] += f.grad[1];
  return y;
}

// Jacobian of the shear; sign = -1 gives the exact inverse (I + E)^-1 = I - E.
Mat4 shear_in_p_jac(const std::array<double, 5>& c, const Vec4& x, double sign) {
  const Quartic2d f = quartic_2d(c, x[kQ1], x[kQ2]);
  Mat4 m = Mat4::Identity();
  m(kP1, kQ1) = sign * f.hess(0, 0);
  m(kP1, kQ2) = sign * f.hess(0, 1);
  m(kP2, kQ1) = sign * f.hess(1, 0);
  m(kP2, kQ2) = sign * f.hess(1, 1);
  return m;
}

}  // namespace

SyntheticOrbifold::SyntheticOrbifold(std::uint64_t seed, double amplitude) {
  Rng rng(seed);
  for (auto& c : fq_) c = amplitude * (2.0 * rng.uniform() - 1.0);
  // Seeded unitary conjugation: project a random skew generator onto the
  // commutant of J0, so the rotation preserves omega0, g0 and J0 at once.
  Mat4 s = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      s(a, b) = 0.7 * (2.0 * rng.uniform() - 1.0);
      s(b, a) = -s(a, b);
    }
  const Mat4 j0 = J0_mat();
  rot_ = matrix_exp(0.5 * (s - j0 * s * j0));
  trivial_ = amplitude == 0.0;
}

SyntheticOrbifold SyntheticOrbifold::zero() { return SyntheticOrbifold(); }

Vec4 SyntheticOrbifold::map(const Vec4& x) const {
  if (trivial_) return x;
  return rot_.transpose() * shear_in_p(fq_, rot_ * x);
}

Mat4 SyntheticOrbifold::map_jacobian(const Vec4& x) const {
  if (trivial_) return Mat4::Identity();
  return rot_.transpose() * shear_in_p_jac(fq_, rot_ * x, 1.0) * rot_;
}

Mat4 SyntheticOrbifold::J(const Vec4& x) const {
  if (trivial_) return J0_mat();
  const Vec4 y = rot_ * x;
  const Mat4 d = shear_in_p_jac(fq_, y, 1.0);
  const Mat4 dinv = shear_in_p_jac(fq_, y, -1.0);
  return rot_.transpose() * dinv * J0_mat() * d * rot_;
}

Mat4 SyntheticOrbifold::g(const Vec4& x) const {
  if (trivial_) return Mat4::Identity();
  const Mat4 d = map_jacobian(x);
  return d.transpose() * d;
}

Mat4 SyntheticOrbifold::A(const Vec4& x) const {
  if (trivial_) return Mat4::Zero();
  return 0.5 * spd_log(g(x));
}

Mat4 SyntheticOrbifold::quadratic_coeff(int a, int b) const {
  if (a < 0 || a > 3 || b < 0 || b > 3) throw DomainError("quadratic_coeff index");
  if (a > b) std::swap(a, b);
  auto second = [&](double h) -> Mat4 {
    Vec4 ea = Vec4::Zero(), eb = Vec4::Zero();
    ea[a] = 1.0;
    eb[b] = 1.0;
    if (a == b) return 2.0 * A(h * ea) / (h * h);
    return (A(h * (ea + eb)) - A(h * (ea - eb))) / (2.0 * h * h);
  };
  const double h = 0.08;
  const Mat4 dd = (4.0 * second(h / 2.0) - second(h)) / 3.0;
  return a == b ? Mat4(0.5 * dd) : dd;
}

StructureTriple SyntheticOrbifold::structure() const {
  StructureTriple t;
  const SyntheticOrbifold s = *this;
  t.g = [s](const Vec4& x) { return s.g(x); };
  t.J = [s](const Vec4& x) { return s.J(x); };
  t.omega = [](const Vec4&) { return omega0_mat(); };
  return t;
}

RegionTag region_of(double rho, const GluingParams& prm) {
  const double re = prm.r_eps();
  if (rho < re) return RegionTag::Core;
  if (rho < 2.0 * re) return RegionTag::InnerAnnulus;
  if (rho <= 4.0 * re) return RegionTag::OuterAnnulus;
  return RegionTag::Bulk;
}

RadiusRegion rho_eps(const ChartPoint& p, const GluingParams& prm) {
  if (p.chart != ChartId::Glued) throw DomainError("rho_eps needs a glued-chart point");
  const double rho = p.x.norm();
  return RadiusRegion{rho, region_of(rho, prm)};
}

Mat4 orbifold_interp_J(const Vec4& x, const SyntheticOrbifold& synth,
                       const GluingParams& prm) {
  const double c1 = chi_outer(x.norm() / prm.r_eps(), prm.eta);
  if (c1 <= 0.0) return J0_mat();
  if (c1 >= 1.0) return synth.J(x);
  return conjugate_structure(J0_mat(), synth.A(x), c1);
}

Mat4 ale_interp_J(const Vec4& w, const GluingParams& prm) {
  static const StructureTriple unit_model = ale_darboux_triple(1.0);
  const double c2 = chi_inner(w.norm() / prm.R_eps(), prm.eta);
  if (c2 >= 1.0) return unit_model.J(w);
  if (c2 <= 0.0) return J0_mat();
  const Mat4 b = connecting_endo(Mat4::Identity(), J0_mat(), unit_model.J(w));
  return conjugate_structure(J0_mat(), b, c2);
}

namespace {

struct GluedCtx {
  GluingParams prm;
  SyntheticOrbifold synth;
  StructureTriple core;
  double re;

  Mat4 J(const Vec4& z) const {
    const double t = z.norm() / re;
    const double c2 = chi_inner(t, prm.eta);
    if (c2 >= 1.0) return core.J(z);
    const double c1 = chi_outer(t, prm.eta);
    if (c1 >= 1.0) return synth.J(z);
    if (c2 <= 0.0 && c1 <= 0.0) return J0_mat();
    Mat4 m = Mat4::Zero();
    if (c2 > 0.0) m += c2 * connecting_endo(Mat4::Identity(), J0_mat(), core.J(z));
    if (c1 > 0.0) m += c1 * synth.A(z);
    return conjugate_structure(J0_mat(), m);
  }

  Mat4 g(const Vec4& z) const {
    const double t = z.norm() / re;
    if (chi_inner(t, prm.eta) >= 1.0) return core.g(z);
    if (chi_outer(t, prm.eta) >= 1.0) return synth.g(z);
    const Mat4 m = omega0_mat() * J(z);
    return 0.5 * (m + m.transpose());
  }
};

}  // namespace

GluedStructure glued_structure(const SyntheticOrbifold& synth, const GluingParams& prm) {
  prm.validate();
  auto ctx = std::make_shared<GluedCtx>(
      GluedCtx{prm, synth, ale_darboux_triple(prm.eps * prm.eps), prm.r_eps()});
  GluedStructure out;
  out.prm = prm;
  out.synth = synth;
  out.floor_radius = darboux_rmin(prm.eps * prm.eps);
  out.triple.J = [ctx](const Vec4& z) { return ctx->J(z); };
  out.triple.g = [ctx](const Vec4& z) { return ctx->g(z); };
  out.triple.omega = [](const Vec4&) { return omega0_mat(); };
  return out;
}

double seam_consistency(const GluedStructure& gs, int n_dirs) {
  Rng rng(20240815ULL);
  const double re = gs.prm.r_eps();
  double worst = 0.0;
  for (int i = 0; i < n_dirs; ++i) {
    const Vec4 u = rng.unit_vec4();
    for (double t : {1.95, 2.0, 2.05}) {
      const Vec4 z = (t * re) * u;
      const Mat4 orb = orbifold_interp_J(z, gs.synth, gs.prm);
      const Mat4 ale = ale_interp_J(z / gs.prm.eps, gs.prm);
      worst = std::max(worst, (orb - ale).cwiseAbs().maxCoeff());
    }
  }
  if (worst > 1e-10)
    throw SeamMismatch("glued branches differ by " + std::to_string(worst));
  return worst;
}

StencilConfig stencil_for_rho(double rho) {
  StencilConfig c;
  c.h = 1e-3 * rho;
  c.order = 4;
  return c;
}

double sup_nijenhuis_annulus(const EndoField& J, double rho_lo, double rho_hi,
                             int n_r, int n_dir, Rng& rng,
                             const std::function<StencilConfig(double)>& stencil_of) {
  std::vector<Vec4> dirs;
  dirs.reserve(static_cast<std::size_t>(n_dir));
  for (int i = 0; i < n_dir; ++i) dirs.push_back(rng.unit_vec4());
  double sup = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double r = rho_lo * std::pow(rho_hi / rho_lo, (i + 0.5) / n_r);
    const StencilConfig c = stencil_of(r);
    for (const Vec4& d : dirs)
      sup = std::max(sup, max_abs(nijenhuis_bracket(J, r * d, c)));
  }
  return sup;
}

double sup_nijenhuis_annulus(const EndoField& J, double rho_lo, double rho_hi,
                             int n_r, int n_dir, Rng& rng) {
  return sup_nijenhuis_annulus(J, rho_lo, rho_hi, n_r, n_dir, rng, stencil_for_rho);
}

NijenhuisSweepResult nijenhuis_sweep(const std::vector<double>& eps_list,
                                     const SyntheticOrbifold& synth, GluingParams prm,
                                     std::uint64_t sample_seed) {
  if (eps_list.size() < 4) throw InsufficientRange("nijenhuis sweep needs >= 4 eps values");
  const auto [mn, mx] = std::minmax_element(eps_list.begin(), eps_list.end());
  if (std::log10(*mx / *mn) < 1.5 - 1e-9)
    throw InsufficientRange("nijenhuis sweep needs >= 1.5 decades of eps");

  NijenhuisSweepResult out;
  std::vector<double> sup_inner, sup_outer;
  out.max_outside = 0.0;
  for (double eps : eps_list) {
    prm.eps = eps;
    const GluedStructure gs = glued_structure(synth, prm);
    const double re = prm.r_eps();

    Rng r_in(sample_seed);
    const double si = sup_nijenhuis_annulus(gs.triple.J, re, 2.0 * re, 32, 24, r_in);
    Rng r_out(sample_seed);
    const double so = sup_nijenhuis_annulus(gs.triple.J, 2.0 * re, 4.0 * re, 32, 24, r_out);
    sup_inner.push_back(si);
    sup_outer.push_back(so);
    out.rows.push_back({eps, prm.beta, RegionTag::InnerAnnulus, si});
    out.rows.push_back({eps, prm.beta, RegionTag::OuterAnnulus, so});

    // Off-annulus bands.  The resolved core model is analytic but not
    // polynomial, so Richardson with a moderate step balances truncation
    // against rounding; the bulk pullback J is a quartic polynomial, so the
    // fourth-order stencil is exact there and the step only controls rounding.
    const auto core_stencil = [](double rho) {
      StencilConfig c;
      c.h = 5e-3 * rho;
      c.richardson = true;
      return c;
    };
    const auto bulk_stencil = [](double rho) {
      StencilConfig c;
      c.h = 1e-2 * rho;
      return c;
    };
    Rng r_supp(sample_seed ^ 0x5deece66dULL);
    const double lo_core = std::max({re / 4.0, gs.floor_radius * 1.5, kStencilTrustRadius});
    if (lo_core < 0.92 * re) {
      const double core_band =
          sup_nijenhuis_annulus(gs.triple.J, lo_core, 0.92 * re, 10, 12, r_supp, core_stencil);
      out.max_outside = std::max(out.max_outside, core_band);
    }
    Rng r_bulk(sample_seed ^ 0x5deece66dULL);
    const double lo_bulk = std::max(4.15 * re, kStencilTrustRadius);
    const double bulk_band =
        sup_nijenhuis_annulus(gs.triple.J, lo_bulk, 0.95, 10, 12, r_bulk, bulk_stencil);
    out.max_outside = std::max(out.max_outside, bulk_band);
  }
  out.inner_fit = loglog_fit(eps_list, sup_inner);
  const double peak_outer = *std::max_element(sup_outer.begin(), sup_outer.end());
  if (peak_outer > 1e-11) out.outer_fit = loglog_fit(eps_list, sup_outer);
  return out;
}

}  // namespace akg
