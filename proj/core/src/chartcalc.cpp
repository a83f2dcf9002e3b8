#include "akglue/chartcalc.hpp"

namespace akg {

Christoffel christoffel(const MetricField& g, const Vec4& x, const StencilConfig& c) {
  const Mat4 g0 = g(x);
  require_finite(g0, "christoffel: metric");
  Eigen::LDLT<Mat4> ldlt(g0);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SingularMetric("christoffel: metric not positive definite");
  const Mat4 ginv = g0.inverse();
  std::array<Mat4, 4> dg;
  for (int k = 0; k < 4; ++k) dg[k] = d1(g, x, k, c);
  Christoffel out;
  for (int k = 0; k < 4; ++k) out.G[k].setZero();
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      Vec4 lower;  // 2 Gamma_{l,ij}
      for (int l = 0; l < 4; ++l) lower[l] = dg[i](j, l) + dg[j](i, l) - dg[l](i, j);
      const Vec4 upper = 0.5 * (ginv * lower);
      for (int k = 0; k < 4; ++k) {
        out.G[k](i, j) = upper[k];
        out.G[k](j, i) = upper[k];
      }
    }
  return out;
}

CurvatureTensors riemann_ricci_scalar(const MetricField& g, const Vec4& x,
                                      const StencilConfig& c) {
  const Christoffel G0 = christoffel(g, x, c);
  std::array<Christoffel, 4> dG;  // dG[c] = partial_c Gamma
  for (int dir = 0; dir < 4; ++dir)
    for (int a = 0; a < 4; ++a) {
      auto comp = [&, a](const Vec4& y) { return christoffel(g, y, c).G[a]; };
      dG[dir].G[a] = d1(comp, x, dir, c);
    }

  CurvatureTensors out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out.R[a][b].setZero();

  // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
  //           + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int cc = 0; cc < 4; ++cc)
        for (int dd = cc + 1; dd < 4; ++dd) {
          double v = dG[cc].G[a](dd, b) - dG[dd].G[a](cc, b);
          for (int e = 0; e < 4; ++e)
            v += G0.G[a](cc, e) * G0.G[e](dd, b) - G0.G[a](dd, e) * G0.G[e](cc, b);
          out.R[a][b](cc, dd) = v;
          out.R[a][b](dd, cc) = -v;
        }

  for (int b = 0; b < 4; ++b)
    for (int dd = 0; dd < 4; ++dd) {
      double v = 0;
      for (int a = 0; a < 4; ++a) v += out.R[a][b](a, dd);
      out.ricci(b, dd) = v;
    }
  const Mat4 ginv = g(x).inverse();
  out.scalar = (ginv * out.ricci).trace();
  return out;
}

std::array<Mat4, 4> nijenhuis_bracket(const EndoField& J, const Vec4& x,
                                      const StencilConfig& c) {
  const Mat4 J0 = J(x);
  require_finite(J0, "nijenhuis: J");
  std::array<Mat4, 4> dJ;
  for (int k = 0; k < 4; ++k) dJ[k] = d1(J, x, k, c);
  std::array<Mat4, 4> N;
  for (int k = 0; k < 4; ++k) N[k].setZero();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double v = 0;
        for (int a = 0; a < 4; ++a) {
          v += J0(a, i) * dJ[a](k, j) - J0(a, j) * dJ[a](k, i);
          v += J0(k, a) * (dJ[j](a, i) - dJ[i](a, j));
        }
        v *= 0.25;
        N[k](i, j) = v;
        N[k](j, i) = -v;
      }
  return N;
}

CovariantDJ covariant_dJ(const MetricField& g, const EndoField& J, const Vec4& x,
                         const StencilConfig& c) {
  const Mat4 J0 = J(x);
  const Christoffel G = christoffel(g, x, c);
  CovariantDJ out;
  for (int cc = 0; cc < 4; ++cc) {
    Mat4 m = d1(J, x, cc, c);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double corr = 0;
        for (int e = 0; e < 4; ++e)
          corr += G.G[a](cc, e) * J0(e, b) - G.G[e](cc, b) * J0(a, e);
        m(a, b) += corr;
      }
    out.DJ[cc] = m;
  }
  return out;
}

std::array<Mat4, 4> nijenhuis_covariant(const MetricField& g, const EndoField& J, const Vec4& x,
                                        const StencilConfig& c) {
  const Mat4 J0 = J(x);
  const CovariantDJ dj = covariant_dJ(g, J, x, c);
  std::array<Mat4, 4> N;
  for (int k = 0; k < 4; ++k) N[k].setZero();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      // N(e_i, e_j) = (1/2) J((D_j J) e_i - (D_i J) e_j)
      Vec4 w = dj.DJ[j].col(i) - dj.DJ[i].col(j);
      Vec4 v = 0.5 * (J0 * w);
      for (int k = 0; k < 4; ++k) {
        N[k](i, j) = v[k];
        N[k](j, i) = -v[k];
      }
    }
  return N;
}

double max_abs(const std::array<Mat4, 4>& t) {
  double m = 0;
  for (const auto& comp : t) m = std::max(m, comp.cwiseAbs().maxCoeff());
  return m;
}

double dj_norm_sq(const Mat4& g, const CovariantDJ& dj) {
  const Mat4 E = orthonormal_frame(g);
  // |DJ|^2 = -(1/2) sum_i tr((D_{e_i}J)^2); with this normalization
  // |DJ|^2 = 8 |N|^2 on any almost-Hermitian 4-manifold.
  double total = 0;
  for (int i = 0; i < 4; ++i) {
    Mat4 Di = Mat4::Zero();
    for (int cc = 0; cc < 4; ++cc) Di += E(cc, i) * dj.DJ[cc];
    total += -0.5 * (Di * Di).trace();
  }
  return total;
}

double nijenhuis_norm_sq(const Mat4& g, const std::array<Mat4, 4>& N) {
  const Mat4 E = orthonormal_frame(g);
  double total = 0;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      Vec4 v = Vec4::Zero();
      for (int m = 0; m < 4; ++m) {
        // N(e_j, e_k)^m = sum_{ab} E(a,j) E(b,k) N[m](a,b)
        double comp = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) comp += E(a, j) * E(b, k) * N[m](a, b);
        v[m] = comp;
      }
      total += v.dot(g * v);
    }
  return 0.25 * total;
}

Mat4 orthonormal_frame(const Mat4& g) {
  Eigen::LLT<Mat4> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetric("orthonormal_frame");
  Mat4 L = llt.matrixL();
  return L.transpose().inverse();
}

Mat4 adapted_frame(const Mat4& g, const Mat4& J) {
  auto unit = [&](const Vec4& v) {
    const double n = std::sqrt(v.dot(g * v));
    if (n < 1e-12) throw SingularMetric("adapted_frame: null vector");
    return Vec4(v / n);
  };
  const Vec4 e1 = unit(Vec4::Unit(0));
  const Vec4 e2 = J * e1;
  Vec4 best = Vec4::Zero();
  double best_norm = -1;
  for (int k = 1; k < 4; ++k) {
    Vec4 v = Vec4::Unit(k);
    v -= e1 * (e1.dot(g * v));
    v -= e2 * (e2.dot(g * v));
    const double n = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (n > best_norm + 1e-12) {
      best_norm = n;
      best = v;
    }
  }
  const Vec4 e3 = unit(best);
  const Vec4 e4 = J * e3;
  Mat4 E;
  E.col(0) = e1;
  E.col(1) = e2;
  E.col(2) = e3;
  E.col(3) = e4;
  const Mat4 gram = E.transpose() * g * E;
  if ((gram - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-8)
    throw NotCompatible("adapted_frame: J not g-orthogonal");
  return E;
}

Vec4 sharp(const Mat4& g, const Vec4& alpha) { return g.inverse() * alpha; }
Vec4 flat(const Mat4& g, const Vec4& v) { return g * v; }

double laplacian(const MetricField& g, const ScalarField& f, const Vec4& x,
                 const StencilConfig& c) {
  const Christoffel G = christoffel(g, x, c);
  const Mat4 ginv = g(x).inverse();
  const Vec4 df = grad4(f, x, c);
  const Mat4 ddf = hess4(f, x, c);
  double tr = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) tr += ginv(a, b) * (ddf(a, b) - G.G[0](a, b) * df[0] -
                                                    G.G[1](a, b) * df[1] -
                                                    G.G[2](a, b) * df[2] -
                                                    G.G[3](a, b) * df[3]);
  return -tr;
}

double codifferential(const MetricField& g, const OneFormField& a, const Vec4& x,
                      const StencilConfig& c) {
  const Christoffel G = christoffel(g, x, c);
  const Mat4 ginv = g(x).inverse();
  const Vec4 a0 = a(x);
  std::array<Vec4, 4> da;
  for (int k = 0; k < 4; ++k) da[k] = d1(a, x, k, c);
  double tr = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double cov = da[i][j];
      for (int m = 0; m < 4; ++m) cov -= G.G[m](i, j) * a0[m];
      tr += ginv(i, j) * cov;
    }
  return -tr;
}

Mat4 hessian_covariant(const MetricField& g, const ScalarField& f, const Vec4& x,
                       const StencilConfig& c) {
  const Christoffel G = christoffel(g, x, c);
  const Vec4 df = grad4(f, x, c);
  Mat4 h = hess4(f, x, c);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < 4; ++m) h(i, j) -= G.G[m](i, j) * df[m];
  return h;
}

std::array<double, 4> exterior_d(const TwoFormField& beta, const Vec4& x,
                                 const StencilConfig& c) {
  std::array<Mat4, 4> db;
  for (int k = 0; k < 4; ++k) db[k] = d1(beta, x, k, c);
  std::array<double, 4> out{};
  for (int m = 0; m < 4; ++m) {
    int axes[3], n = 0;
    for (int a = 0; a < 4; ++a)
      if (a != m) axes[n++] = a;
    const int a = axes[0], b = axes[1], cc = axes[2];
    out[m] = db[a](b, cc) - db[b](a, cc) + db[cc](a, b);
  }
  return out;
}

double lambda_contract(const Mat4& g, const Mat4& omega, const Mat4& beta) {
  const Mat4 ginv = g.inverse();
  const Mat4 omega_up = ginv * omega * ginv.transpose();  // omega^{ab}
  double v = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v += beta(a, b) * omega_up(a, b);
  return 0.5 * v;
}

double TripleDefect::max() const {
  return std::max(std::max(j_square, metric_invariance),
                  std::max(omega_consistency, omega_antisymmetry));
}

TripleDefect compatibility_defect(const Mat4& g, const Mat4& J, const Mat4& omega) {
  TripleDefect d;
  d.j_square = (J * J + Mat4::Identity()).cwiseAbs().maxCoeff();
  d.metric_invariance = (J.transpose() * g * J - g).cwiseAbs().maxCoeff();
  // omega(X, Y) = g(J X, Y)  =>  omega_{ab} = (J^T g)_{ab}
  d.omega_consistency = (omega - J.transpose() * g).cwiseAbs().maxCoeff();
  d.omega_antisymmetry = (omega + omega.transpose()).cwiseAbs().maxCoeff();
  return d;
}

void require_compatible(const Mat4& g, const Mat4& J, const Mat4& omega, double tol) {
  const TripleDefect d = compatibility_defect(g, J, omega);
  if (d.j_square > tol) throw NotAlmostComplex("J^2 + 1 = " + std::to_string(d.j_square));
  if (d.max() > tol) throw NotCompatible("triple defect " + std::to_string(d.max()));
}

double max_metric_derivative(const MetricField& g, const Vec4& x, const StencilConfig& c) {
  double m = 0;
  for (int k = 0; k < 4; ++k) m = std::max(m, d1(g, x, k, c).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace akg
