#include "akglue/acspace.hpp"

#include "akglue/fixtures.hpp"

namespace akg {

Mat4 matrix_exp(const Mat4& a) {
  require_finite(a, "matrix_exp");
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  Mat4 b = a;
  if (nrm > 0.5) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / 0.5))));
    b *= std::ldexp(1.0, -squarings);
  }
  // Pade(6,6)
  static const double c[7] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0,
                              1.0 / 15840.0, 1.0 / 665280.0};
  const Mat4 b2 = b * b;
  const Mat4 b4 = b2 * b2;
  const Mat4 u_even = c[0] * Mat4::Identity() + c[2] * b2 + c[4] * b4 + c[6] * b4 * b2;
  const Mat4 u_odd = b * (c[1] * Mat4::Identity() + c[3] * b2 + c[5] * b4);
  Mat4 num = u_even + u_odd;
  Mat4 den = u_even - u_odd;
  Mat4 r = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

Mat4 spd_log(const Mat4& p) {
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + p.cwiseAbs().maxCoeff()))
    throw NonPositiveTransfer("spd_log: not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat4> es(p);
  if (es.eigenvalues().minCoeff() <= 1e-14)
    throw NonPositiveTransfer("spd_log: nonpositive spectrum");
  Vec4 lam = es.eigenvalues();
  Mat4 d = Mat4::Zero();
  for (int i = 0; i < 4; ++i) d(i, i) = std::log(lam[i]);
  return es.eigenvectors() * d * es.eigenvectors().transpose();
}

const std::array<Mat4, 6>& anticommuting_symmetric_basis() {
  static const std::array<Mat4, 6> basis = [] {
    // L_a R_b with a in {i, j} is symmetric (both factors skew, commuting)
    // and anticommutes with J0 = -Lk because Lk anticommutes with Li, Lj and
    // commutes with every right multiplication.
    std::array<Mat4, 6> b = {Li() * Ri(), Li() * Rj(), Li() * Rk(),
                             Lj() * Ri(), Lj() * Rj(), Lj() * Rk()};
    for (auto& m : b) m /= std::sqrt((m * m.transpose()).trace() / 4.0);
    return b;
  }();
  return basis;
}

double tangent_space_defect(const Mat4& g, const Mat4& J, const Mat4& a) {
  const double anti = (a * J + J * a).cwiseAbs().maxCoeff();
  const Mat4 ga = g * a;
  const double sym = (ga - ga.transpose()).cwiseAbs().maxCoeff();
  return std::max(anti, sym);
}

AntiInvariantPart anti_invariance_defect(const EndoField& J, const ScalarField& f,
                                         const Vec4& x, const StencilConfig& c) {
  auto jdf = [&](const Vec4& y) -> Vec4 {
    return -J(y).transpose() * grad4(f, y, c);
  };
  std::array<Vec4, 4> da;
  for (int k = 0; k < 4; ++k) da[k] = d1(jdf, x, k, c);
  Mat4 beta;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) beta(a, b) = da[a][b] - da[b][a];
  const Mat4 J0 = J(x);
  AntiInvariantPart out;
  out.beta_minus = 0.5 * (beta - J0.transpose() * beta * J0);
  out.norm = out.beta_minus.cwiseAbs().maxCoeff();
  return out;
}

Mat4 connecting_endo(const Mat4& g1, const Mat4& J1, const Mat4& J2) {
  const Mat4 p = -J1 * J2;
  // g1-symmetrize, then take the principal log in the g1 inner product.
  Eigen::LLT<Mat4> llt(g1);
  if (llt.info() != Eigen::Success) throw SingularMetric("connecting_endo");
  const Mat4 L = llt.matrixL();
  const Mat4 s = 0.5 * (p + g1.inverse() * p.transpose() * g1);
  const Mat4 m = L.transpose() * s * L.transpose().inverse().eval();
  const Mat4 m_sym = 0.5 * (m + m.transpose());
  if ((m - m_sym).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw NonPositiveTransfer("connecting_endo: transfer not g-symmetric");
  Eigen::SelfAdjointEigenSolver<Mat4> es(m_sym);
  if (es.eigenvalues().minCoeff() <= 0)
    throw NonPositiveTransfer("connecting_endo: nonpositive transfer spectrum");
  Vec4 lam = es.eigenvalues();
  Mat4 d = Mat4::Zero();
  for (int i = 0; i < 4; ++i) d(i, i) = 0.5 * std::log(lam[i]);
  const Mat4 log_half = es.eigenvectors() * d * es.eigenvectors().transpose();
  return L.transpose().inverse() * log_half * L.transpose();
}

Mat4 conjugate_structure(const Mat4& J, const Mat4& a, double t) {
  const Mat4 e = matrix_exp(t * a);
  return matrix_exp(-t * a) * J * e;
}

Vec4 hamiltonian_field(const Mat4& omega, const Vec4& df) {
  // omega(X_f, .) = df  =>  Omega^T X = df with Omega_{ab} acting as X^a Omega_{ab}
  return omega.transpose().partialPivLu().solve(df);
}

Mat4 lie_derivative_J(const VectorField& X, const EndoField& J, const Vec4& x,
                      const StencilConfig& c) {
  const Mat4 J0 = J(x);
  std::array<Mat4, 4> dJ;
  std::array<Vec4, 4> dX;
  for (int k = 0; k < 4; ++k) {
    dJ[k] = d1(J, x, k, c);
    dX[k] = d1(X, x, k, c);
  }
  const Vec4 X0 = X(x);
  Mat4 out = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double v = 0;
      for (int cc = 0; cc < 4; ++cc) {
        v += X0[cc] * dJ[cc](a, b);       // X^c d_c J^a_b
        v -= J0(cc, b) * dX[cc][a];       // - J^c_b d_c X^a
        v += J0(a, cc) * dX[b][cc];       // + J^a_c d_b X^c
      }
      out(a, b) = v;
    }
  return out;
}

Mat4 hamiltonian_deformation(const TwoFormField& omega, const EndoField& J,
                             const ScalarField& f, const Vec4& x, const StencilConfig& c) {
  auto Xf = [&](const Vec4& y) {
    return hamiltonian_field(omega(y), grad4(f, y, c));
  };
  return 0.5 * lie_derivative_J(Xf, J, x, c);
}

EndoField deformed_structure(const EndoField& J, const EndoField& a, double t) {
  return [J, a, t](const Vec4& x) { return conjugate_structure(J(x), a(x), t); };
}

Mat4 metric_from_pair(const Mat4& omega, const Mat4& J) {
  const Mat4 g = omega * J;
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
    throw NotCompatible("metric_from_pair: omega J not symmetric");
  Eigen::LDLT<Mat4> ldlt(Mat4(0.5 * (g + g.transpose())));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw NotCompatible("metric_from_pair: omega J not positive");
  return 0.5 * (g + g.transpose());
}

}  // namespace akg
