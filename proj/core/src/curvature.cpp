#include "akglue/curvature.hpp"

#include "akglue/acspace.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace akg {

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

constexpr std::array<std::pair<int, int>, 6> kPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Star scalar s* = 2 (Rm omega, omega): curvature endomorphism assembled on
// the coordinate 2-form basis E_I = dx^a ^ dx^b, inner product
// <alpha, beta> = (1/2) alpha_{ab} beta^{ab}.
double star_scalar(const CurvatureTensors& ct, const Mat4& g0, const Mat4& om0) {
  const Mat4 ginv = g0.inverse();
  double rlow[4][4][4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int e = 0; e < 4; ++e) v += g0(a, e) * ct.R[e][b](c, d);
          rlow[a][b][c][d] = v;
        }
  Mat6 gram, rop;
  Vec6 w;
  for (int jb = 0; jb < 6; ++jb) {
    const auto [c, d] = kPairs[jb];
    Mat4 ej = Mat4::Zero();
    ej(c, d) = 1.0;
    ej(d, c) = -1.0;
    const Mat4 ejup = ginv * ej * ginv;
    for (int ib = 0; ib < 6; ++ib) {
      const auto [a, b] = kPairs[ib];
      gram(ib, jb) = ejup(a, b);
      double v = 0.0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) v += rlow[a][b][p][q] * ejup(p, q);
      rop(ib, jb) = 0.5 * v;
    }
  }
  for (int ib = 0; ib < 6; ++ib) {
    const auto [a, b] = kPairs[ib];
    w[ib] = om0(a, b);
  }
  const Vec6 rw = rop * w;
  return 2.0 * rw.dot(gram * w);
}

// Gamma^m_{c n} as a matrix in (m, n) for fixed lower index c.
Mat4 christoffel_slice(const Christoffel& ch, int c) {
  Mat4 gc;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) gc(m, n) = ch.G[m](c, n);
  return gc;
}

// Metric recovered pointwise from (omega, J_t) along a deformation path; the
// product is symmetrized to shed stencil noise.
MetricField metric_of_deformed(const TwoFormField& omega, const EndoField& jt) {
  return [omega, jt](const Vec4& y) -> Mat4 {
    const Mat4 m = omega(y) * jt(y);
    return Mat4(0.5 * (m + m.transpose()));
  };
}

// Term coefficients of the linearized operator, pinned by agreement with the
// finite-difference variation along Hamiltonian deformations.
constexpr double kRicciCoeff = -2.0;
constexpr double kErrorCoeff = 1.0;

}  // namespace

double hermitian_scalar_A(const StructureTriple& t, const Vec4& x, const StencilConfig& c) {
  const CurvatureTensors ct = riemann_ricci_scalar(t.g, x, c);
  const CovariantDJ dj = covariant_dJ(t.g, t.J, x, c);
  return ct.scalar + 0.5 * dj_norm_sq(t.g(x), dj);
}

CurvatureReport hermitian_scalar(const StructureTriple& t, const Vec4& x,
                                 const StencilConfig& c) {
  const Mat4 g0 = t.g(x);
  const Mat4 j0 = t.J(x);
  const Mat4 om0 = t.omega(x);
  require_compatible(g0, j0, om0, 1e-6);
  const CurvatureTensors ct = riemann_ricci_scalar(t.g, x, c);
  const CovariantDJ dj = covariant_dJ(t.g, t.J, x, c);
  CurvatureReport r;
  r.s_riem = ct.scalar;
  r.dj_norm_sq = dj_norm_sq(g0, dj);
  r.s_nabla_A = r.s_riem + 0.5 * r.dj_norm_sq;
  r.s_star = star_scalar(ct, g0, om0);
  r.s_nabla_B = 0.5 * (r.s_riem + r.s_star);
  r.cross_check = std::abs(r.s_nabla_A - r.s_nabla_B);
  return r;
}

MasterIdentityCheck master_identity_check(const StructureTriple& t, const Vec4& x,
                                          const StencilConfig& c) {
  const CurvatureReport fine = hermitian_scalar(t, x, c);
  StencilConfig coarse_cfg = c;
  coarse_cfg.h = 2.0 * c.h;
  const CurvatureReport coarse = hermitian_scalar(t, x, coarse_cfg);
  const double w = c.order == 2 ? 3.0 : 15.0;
  const double est_a = std::abs(fine.s_nabla_A - coarse.s_nabla_A) / w;
  const double est_b = std::abs(fine.s_nabla_B - coarse.s_nabla_B) / w;
  MasterIdentityCheck out;
  out.report = fine;
  out.tolerance = 10.0 * (est_a + est_b + 1e-9 * (1.0 + std::abs(fine.s_riem)));
  out.pass = fine.cross_check <= out.tolerance;
  return out;
}

Vec4 endo_divergence(const MetricField& g, const EndoField& K, const Vec4& x,
                     const StencilConfig& c) {
  const Christoffel ch = christoffel(g, x, c);
  const Mat4 k0 = K(x);
  const Mat4 ginv = g(x).inverse();
  Vec4 out = Vec4::Zero();
  for (int cd = 0; cd < 4; ++cd) {
    const Mat4 gc = christoffel_slice(ch, cd);
    const Mat4 dck = d1(K, x, cd, c) + gc * k0 - k0 * gc;
    for (int a = 0; a < 4; ++a) {
      double s = 0.0;
      for (int b = 0; b < 4; ++b) s += ginv(cd, b) * dck(a, b);
      out[a] -= s;
    }
  }
  return out;
}

MohsenReport mohsen_first_variation(const StructureTriple& t, const EndoField& a,
                                    const Vec4& x, const StencilConfig& c) {
  const Mat4 ax = a(x);
  const double defect = tangent_space_defect(t.g(x), t.J(x), ax);
  if (defect > 1e-9 * (1.0 + ax.cwiseAbs().maxCoeff()))
    throw DomainError("deformation is not tangent to the compatible space");

  const EndoField jdot = [J = t.J, a](const Vec4& y) -> Mat4 { return -2.0 * a(y) * J(y); };
  const OneFormField u = [g = t.g, J = t.J, jdot, c](const Vec4& y) -> Vec4 {
    const Vec4 v = endo_divergence(g, jdot, y, c);
    return Vec4(-J(y).transpose() * flat(g(y), v));
  };
  MohsenReport rep;
  rep.formula = -codifferential(t.g, u, x, c);

  const auto s_at = [&](double tt) {
    const EndoField jt = deformed_structure(t.J, a, tt);
    const StructureTriple trip{metric_of_deformed(t.omega, jt), jt, t.omega};
    return hermitian_scalar_A(trip, x, c);
  };
  const double tau = 1e-3;
  const double coarse = (s_at(tau) - s_at(-tau)) / (2.0 * tau);
  const double fine = (s_at(0.5 * tau) - s_at(-0.5 * tau)) / tau;
  rep.finite_difference = (4.0 * fine - coarse) / 3.0;
  rep.gap = std::abs(rep.formula - rep.finite_difference);
  return rep;
}

MohsenReport hamiltonian_variation(const StructureTriple& t, const ScalarField& f,
                                   const Vec4& x, const StencilConfig& c) {
  const EndoField a = [om = t.omega, J = t.J, f, c](const Vec4& y) -> Mat4 {
    return hamiltonian_deformation(om, J, f, y, c);
  };
  return mohsen_first_variation(t, a, x, c);
}

Vec4 error_one_form(const StructureTriple& t, const ScalarField& f, const Vec4& x,
                    const StencilConfig& c) {
  const Mat4 g0 = t.g(x);
  const Mat4 j0 = t.J(x);
  const Mat4 frame = adapted_frame(g0, j0);
  const Christoffel ch = christoffel(t.g, x, c);
  const CovariantDJ dj0 = covariant_dJ(t.g, t.J, x, c);

  const auto djf = [&](const Vec4& y) { return covariant_dJ(t.g, t.J, y, c); };
  std::array<std::array<Mat4, 4>, 4> d2j;  // d2j[c][d] = (D^2 J)_{c d}
  for (int cd = 0; cd < 4; ++cd) {
    Vec4 e = Vec4::Zero();
    e[cd] = 1.0;
    std::array<Mat4, 4> partial;
    if (c.order == 2) {
      const CovariantDJ p1 = djf(x + c.h * e);
      const CovariantDJ m1 = djf(x - c.h * e);
      for (int d = 0; d < 4; ++d) partial[d] = (p1.DJ[d] - m1.DJ[d]) / (2.0 * c.h);
    } else {
      const CovariantDJ p2 = djf(x + 2.0 * c.h * e);
      const CovariantDJ p1 = djf(x + c.h * e);
      const CovariantDJ m1 = djf(x - c.h * e);
      const CovariantDJ m2 = djf(x - 2.0 * c.h * e);
      for (int d = 0; d < 4; ++d)
        partial[d] =
            (-p2.DJ[d] + 8.0 * p1.DJ[d] - 8.0 * m1.DJ[d] + m2.DJ[d]) / (12.0 * c.h);
    }
    const Mat4 gc = christoffel_slice(ch, cd);
    for (int d = 0; d < 4; ++d) {
      Mat4 v = partial[d] + gc * dj0.DJ[d] - dj0.DJ[d] * gc;
      for (int e2 = 0; e2 < 4; ++e2) v -= ch.G[e2](cd, d) * dj0.DJ[e2];
      d2j[cd][d] = v;
    }
  }

  const Vec4 gr = grad4(f, x, c);
  const Mat4 hess = hessian_covariant(t.g, f, x, c);

  Vec4 out;
  for (int b = 0; b < 4; ++b) {
    const Vec4 jy = j0.col(b);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      const Vec4 ei = frame.col(i);
      Mat4 contracted = Mat4::Zero();  // sum_{c,d} ei^c (JY)^d (D^2 J)_{c d}
      for (int cd = 0; cd < 4; ++cd)
        for (int d = 0; d < 4; ++d) contracted += ei[cd] * jy[d] * d2j[cd][d];
      acc += gr.dot(contracted * ei);
      const Vec4 w = j0 * (dj0.DJ[b] * ei);
      acc += 2.0 * ei.dot(hess * w);
    }
    out[b] = acc;
  }
  return out;
}

double delta_error_term(const StructureTriple& t, const ScalarField& f, const Vec4& x,
                        const StencilConfig& c) {
  const OneFormField ef = [&t, &f, &c](const Vec4& y) -> Vec4 {
    return error_one_form(t, f, y, c);
  };
  return codifferential(t.g, ef, x, c);
}

LinearizedReport linearized_operator(const StructureTriple& t, const ScalarField& f,
                                     const Vec4& x, const StencilConfig& c) {
  const ScalarField lap = [g = t.g, f, c](const Vec4& y) { return laplacian(g, f, y, c); };
  StencilConfig outer = c;
  outer.h = 10.0 * c.h;
  LinearizedReport rep;
  rep.bilaplacian = laplacian(t.g, lap, x, outer);

  const OneFormField ric_df = [g = t.g, f, c](const Vec4& y) -> Vec4 {
    const CurvatureTensors ct = riemann_ricci_scalar(g, y, c);
    const Vec4 v = sharp(g(y), grad4(f, y, c));
    return Vec4(ct.ricci * v);
  };
  rep.ricci_term = kRicciCoeff * codifferential(t.g, ric_df, x, c);
  rep.delta_e = kErrorCoeff * delta_error_term(t, f, x, c);
  rep.total = rep.bilaplacian + rep.ricci_term + rep.delta_e;
  return rep;
}

double nonlinear_remainder(const StructureTriple& t, const ScalarField& f, const Vec4& x,
                           const StencilConfig& c) {
  const EndoField a = [om = t.omega, J = t.J, f, c](const Vec4& y) -> Mat4 {
    return hamiltonian_deformation(om, J, f, y, c);
  };
  const EndoField jf = deformed_structure(t.J, a, 1.0);
  const StructureTriple deformed{metric_of_deformed(t.omega, jf), jf, t.omega};
  const double s_def = hermitian_scalar_A(deformed, x, c);
  const double s_base = hermitian_scalar_A(t, x, c);
  const double lin = linearized_operator(t, f, x, c).total;
  return s_def - s_base - lin;
}

DefectSweepResult hermitian_scalar_defect_sweep(const std::vector<double>& eps_list,
                                                const SyntheticOrbifold& synth,
                                                GluingParams prm, std::uint64_t seed) {
  if (eps_list.size() < 4)
    throw InsufficientRange("defect sweep needs >= 4 eps values");
  std::vector<double> eps = eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (std::log10(eps.front() / eps.back()) < 1.5)
    throw InsufficientRange("defect sweep needs >= 1.5 decades of eps");

  DefectSweepResult out;
  out.delta = prm.delta;
  const double wexp = 4.0 - prm.delta;
  std::vector<double> per_eps;
  for (const double e : eps) {
    prm.eps = e;
    const GluedStructure gs = glued_structure(synth, prm);
    const double re = prm.r_eps();
    Rng rng(seed);
    std::array<Vec4, 5> dirs;
    for (auto& d : dirs) d = rng.unit_vec4();

    const auto band_sup = [&](double lo, double hi, int n) {
      double sup = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = lo * std::pow(hi / lo, (i + 0.5) / n);
        for (const Vec4& d : dirs) {
          const double s = hermitian_scalar_A(gs.triple, r * d, stencil_for_rho(r));
          sup = std::max(sup, std::pow(r, wexp) * std::abs(s));
        }
      }
      return sup;
    };

    const double sup_inner = band_sup(re, 2.0 * re, 9);
    const double sup_outer = band_sup(2.0 * re, 4.0 * re, 9);
    out.rows.push_back({e, RegionTag::InnerAnnulus, sup_inner});
    out.rows.push_back({e, RegionTag::OuterAnnulus, sup_outer});
    out.max_bulk_weighted = std::max(out.max_bulk_weighted, band_sup(4.6 * re, 0.9, 5));
    per_eps.push_back(std::max(sup_inner, sup_outer));
  }
  out.fit = loglog_fit(eps, per_eps);
  return out;
}

ScalarFamily annulus_bump_family() {
  return [](const GluingParams& prm) -> ScalarField {
    const double re = prm.r_eps();
    const double scale = std::pow(re, prm.delta);
    return [re, scale](const Vec4& z) -> double {
      const double u = (z.norm() - 0.9 * re) / (3.8 * re);
      if (u <= 0.0 || u >= 1.0) return 0.0;
      return scale * smoothstep(2.0 * u) * smoothstep(2.0 - 2.0 * u);
    };
  };
}

ErrorTermSweepResult error_term_sweep(const std::vector<double>& eps_list,
                                      const SyntheticOrbifold& synth, GluingParams prm,
                                      const ScalarFamily& family, std::uint64_t seed) {
  if (eps_list.size() < 3)
    throw InsufficientRange("error-term sweep needs >= 3 eps values");
  ErrorTermSweepResult out;
  out.eps = eps_list;
  std::sort(out.eps.begin(), out.eps.end(), std::greater<>());
  const double wexp = 4.0 - prm.delta;
  for (const double e : out.eps) {
    prm.eps = e;
    const GluedStructure gs = glued_structure(synth, prm);
    const ScalarField f = family(prm);
    const double re = prm.r_eps();
    Rng rng(seed);
    std::array<Vec4, 4> dirs;
    for (auto& d : dirs) d = rng.unit_vec4();
    double sup = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double r = 0.95 * re * std::pow(4.6 / 0.95, (i + 0.5) / 8.0);
      StencilConfig st = stencil_for_rho(r);
      st.order = 2;
      for (const Vec4& d : dirs) {
        const double v = delta_error_term(gs.triple, f, r * d, st);
        sup = std::max(sup, std::pow(r, wexp) * std::abs(v));
      }
    }
    out.weighted_sup.push_back(sup);
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.weighted_sup.size(); ++i)
    if (out.weighted_sup[i] > 1.02 * out.weighted_sup[i - 1]) out.monotone = false;
  out.final_over_initial = out.weighted_sup.back() / out.weighted_sup.front();
  return out;
}

}  // namespace akg
