#include "akglue/alemodel.hpp"

#include "akglue/fixtures.hpp"

namespace akg {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

// Euclidean orthonormal frame (x_hat, X_1/|x|, X_2/|x|, X_3/|x|) as columns.
Mat4 radial_frame(const Vec4& x) {
  const double r = x.norm();
  Mat4 u;
  u.col(0) = x / r;
  for (int m = 1; m < 4; ++m) u.col(m) = euler_field(m, x) / r;
  return u;
}

// Assembles Cartesian fields from frame data (p, q) where
// J u0 = -u3 / p, J u1 = -u2 / p, J u2 = p u1, J u3 = p u0 and
// g = diag(c0, c0, c2, c2) in the frame (u0, u1, u2, u3).
Mat4 frame_J(const Vec4& x, double p) {
  const Mat4 u = radial_frame(x);
  Mat4 jf = Mat4::Zero();
  jf(3, 0) = -1.0 / p;
  jf(2, 1) = -1.0 / p;
  jf(1, 2) = p;
  jf(0, 3) = p;
  return u * jf * u.transpose();
}

Mat4 frame_metric(const Vec4& x, double c0, double c2) {
  const Mat4 u = radial_frame(x);
  Mat4 gf = Mat4::Zero();
  gf(0, 0) = c0;
  gf(1, 1) = c0;
  gf(2, 2) = c2;
  gf(3, 3) = c2;
  return u * gf * u.transpose();
}
}  // namespace

double ale_w(double s) {
  if (!(s > kSqrt2)) throw OutOfChart("ale_w: s <= sqrt(2)");
  return std::sqrt(1.0 - 4.0 / (s * s * s * s));
}

StructureTriple ale_spherical_triple(double eps) {
  require(eps > 0, "ale_spherical_triple: eps > 0");
  const double kappa = eps / kSqrt2;
  StructureTriple t;
  t.J = [](const Vec4& y) {
    const double s = y.norm();
    return frame_J(y, ale_w(s));
  };
  t.g = [kappa](const Vec4& y) {
    const double w = ale_w(y.norm());
    const Mat4 u = radial_frame(y);
    Mat4 gf = Mat4::Zero();
    gf(0, 0) = kappa / (w * w);
    gf(1, 1) = kappa * w * w;
    gf(2, 2) = kappa;
    gf(3, 3) = kappa;
    return Mat4(u * gf * u.transpose());
  };
  t.omega = [t](const Vec4& y) { return Mat4(t.J(y).transpose() * t.g(y)); };
  return t;
}

double ale_v(double r, double eps) {
  require(r > 0, "ale_v: r > 0");
  return std::sqrt(1.0 + 2.0 * eps * eps / (r * r * r * r));
}

StructureTriple ale_darboux_triple(double eps) {
  require(eps > 0, "ale_darboux_triple: eps > 0");
  const double rmin = darboux_rmin(eps, 0.0);
  StructureTriple t;
  t.J = [eps, rmin](const Vec4& z) {
    const double r = z.norm();
    if (r <= rmin) throw OutOfChart("ale_darboux_triple: inside vanishing locus");
    return frame_J(z, ale_v(r, eps));
  };
  t.g = [eps, rmin](const Vec4& z) {
    const double r = z.norm();
    if (r <= rmin) throw OutOfChart("ale_darboux_triple: inside vanishing locus");
    const double v = ale_v(r, eps);
    return frame_metric(z, 1.0 / v, v);
  };
  t.omega = [](const Vec4&) { return omega0_mat(); };
  return t;
}

double darboux_radius(double s, double eps) {
  if (!(s > kSqrt2)) throw OutOfChart("darboux_radius: s <= sqrt(2)");
  const double s4 = s * s * s * s;
  return std::pow(0.5 * eps * eps * (s4 - 4.0), 0.25);
}

double darboux_radius_drds(double s, double eps) {
  const double r = darboux_radius(s, eps);
  return 0.5 * eps * eps * s * s * s / (r * r * r);
}

double spherical_radius(double r, double eps) {
  require(r > 0 && eps > 0, "spherical_radius: positive arguments");
  const double s4 = 4.0 + 2.0 * r * r * r * r / (eps * eps);
  return std::pow(s4, 0.25);
}

double darboux_rmin(double eps, double margin) {
  return darboux_radius(kSqrt2 * (1.0 + std::max(margin, 1e-12)), eps);
}

Vec4 darboux_from_spherical_point(const Vec4& y, double eps) {
  const double s = y.norm();
  return (darboux_radius(s, eps) / s) * y;
}

Vec4 spherical_from_darboux_point(const Vec4& z, double eps) {
  const double r = z.norm();
  return (spherical_radius(r, eps) / r) * z;
}

Mat4 radial_map_jacobian(const Vec4& y, double eps) {
  const double s = y.norm();
  const double r = darboux_radius(s, eps);
  const double h = r / s;
  // dr/ds = eps^2 s^3 / (2 r^3) from r^4 = (eps^2/2)(s^4 - 4)
  const double drds = 0.5 * eps * eps * s * s * s / (r * r * r);
  const Vec4 yhat = y / s;
  return h * Mat4::Identity() + (drds - h) * (yhat * yhat.transpose());
}

StructureTriple ale_darboux_via_pushforward(double eps) {
  const StructureTriple sph = ale_spherical_triple(eps);
  StructureTriple t;
  t.J = [sph, eps](const Vec4& z) {
    const Vec4 y = spherical_from_darboux_point(z, eps);
    const Mat4 dphi = radial_map_jacobian(y, eps);
    return Mat4(dphi * sph.J(y) * dphi.inverse());
  };
  t.g = [sph, eps](const Vec4& z) {
    const Vec4 y = spherical_from_darboux_point(z, eps);
    const Mat4 dphi_inv = radial_map_jacobian(y, eps).inverse();
    return Mat4(dphi_inv.transpose() * sph.g(y) * dphi_inv);
  };
  t.omega = [sph, eps](const Vec4& z) {
    const Vec4 y = spherical_from_darboux_point(z, eps);
    const Mat4 dphi_inv = radial_map_jacobian(y, eps).inverse();
    return Mat4(dphi_inv.transpose() * sph.omega(y) * dphi_inv);
  };
  return t;
}

double stenzel_f(double tau, double eps) {
  require(tau >= eps * eps * (1.0 - 1e-12), "stenzel_f: tau below quadric range");
  return std::sqrt(tau + eps * eps);
}

double stenzel_fp(double tau, double eps) { return 0.5 / std::sqrt(tau + eps * eps); }

double stenzel_fpp(double tau, double eps) {
  const double t = tau + eps * eps;
  return -0.25 / (t * std::sqrt(t));
}

double ma_residual(double tau, double eps) {
  const double fp = stenzel_fp(tau, eps);
  const double fpp = stenzel_fpp(tau, eps);
  const double e4 = eps * eps * eps * eps;
  return tau * fp * fp + fpp * fp * (tau * tau - e4) - 0.125;
}

Eigen::Vector3cd psi_embedding(const Vec3& x, const Vec3& xi, double eps) {
  if (std::abs(x.norm() - 1.0) > 1e-9) throw DomainError("psi_embedding: |x| != 1");
  if (std::abs(x.dot(xi)) > 1e-9 * (1.0 + xi.norm()))
    throw DomainError("psi_embedding: xi not tangent");
  const double n = xi.norm();
  const double sinc = n < 1e-8 ? 1.0 + n * n / 6.0 : std::sinh(n) / n;
  Eigen::Vector3cd z;
  for (int a = 0; a < 3; ++a)
    z[a] = std::complex<double>(eps * std::cosh(n) * x[a], eps * sinc * xi[a]);
  return z;
}

FitResult decay_order_fit(const EndoField& J, const Mat4& J_limit, double r_lo, double r_hi,
                          int n_radii, int n_dirs, Rng& rng) {
  require(r_hi > r_lo && r_lo > 0, "decay_order_fit: bad radial window");
  require(n_radii >= 3 && n_dirs >= 1, "decay_order_fit: too few samples");
  std::vector<Vec4> dirs;
  dirs.reserve(n_dirs);
  for (int i = 0; i < n_dirs; ++i) dirs.push_back(rng.unit_vec4());
  std::vector<double> rs, sup;
  for (int i = 0; i < n_radii; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, double(i) / (n_radii - 1));
    double m = 0;
    for (const Vec4& d : dirs) m = std::max(m, (J(r * d) - J_limit).cwiseAbs().maxCoeff());
    rs.push_back(r);
    sup.push_back(m);
  }
  return loglog_fit(rs, sup, 1e-14);
}

}  // namespace akg
