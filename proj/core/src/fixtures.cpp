#include "akglue/fixtures.hpp"

#include "akglue/acspace.hpp"

namespace akg {

namespace {
Mat4 make(std::initializer_list<double> rows) {
  Mat4 m;
  auto it = rows.begin();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = *it++;
  return m;
}
}  // namespace

Mat4 Li() {
  static const Mat4 m = make({0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0});
  return m;
}
Mat4 Lj() {
  static const Mat4 m = make({0, 0, -1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, 0, 0});
  return m;
}
Mat4 Lk() {
  static const Mat4 m = make({0, 0, 0, -1, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, 0});
  return m;
}
Mat4 Ri() {
  static const Mat4 m = make({0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0});
  return m;
}
Mat4 Rj() {
  static const Mat4 m = make({0, 0, -1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 1, 0, 0});
  return m;
}
Mat4 Rk() {
  static const Mat4 m = make({0, 0, 0, -1, 0, 0, 1, 0, 0, -1, 0, 0, 1, 0, 0, 0});
  return m;
}

Mat4 J0_mat() { return -Lk(); }
Mat4 omega0_mat() { return J0_mat().transpose(); }

Vec4 euler_field(int m, const Vec4& x) {
  switch (m) {
    case 1: return Li() * x;
    case 2: return Lj() * x;
    case 3: return Lk() * x;
    default: throw Error("euler_field: index in {1,2,3}");
  }
}

Vec4 euler_coform(int m, const Vec4& x) {
  const double r2 = x.squaredNorm();
  if (r2 < 1e-300) throw OutOfChart("euler_coform at origin");
  return euler_field(m, x) / r2;
}

StructureTriple flat_triple() {
  StructureTriple t;
  t.g = [](const Vec4&) { return Mat4(Mat4::Identity()); };
  t.J = [](const Vec4&) { return J0_mat(); };
  t.omega = [](const Vec4&) { return omega0_mat(); };
  return t;
}

StructureTriple product_sphere_triple() {
  StructureTriple t;
  auto conf = [](const Vec4& x) {
    const double d = 1.0 + x[0] * x[0] + x[1] * x[1];
    return 4.0 / (d * d);
  };
  t.g = [conf](const Vec4& x) {
    Mat4 g = Mat4::Identity();
    const double c = conf(x);
    g(0, 0) = c;
    g(1, 1) = c;
    return g;
  };
  t.J = [](const Vec4&) {
    Mat4 J = Mat4::Zero();
    J(0, 1) = -1;
    J(1, 0) = 1;
    J(2, 3) = -1;
    J(3, 2) = 1;
    return J;
  };
  t.omega = [t](const Vec4& x) { return Mat4(t.J(x).transpose() * t.g(x)); };
  return t;
}

StructureTriple periodic_test_triple(double amplitude) {
  const auto& basis = anticommuting_symmetric_basis();
  auto a_field = [amplitude, &basis](const Vec4& x) {
    return Mat4(amplitude *
                (std::sin(x[0] + 2.0 * x[1]) * basis[0] +
                 std::cos(x[2]) * std::sin(x[3] + 0.5) * basis[4] +
                 0.5 * std::sin(x[1] - x[3]) * basis[2]));
  };
  StructureTriple t;
  t.omega = [](const Vec4&) { return omega0_mat(); };
  t.J = [a_field](const Vec4& x) {
    return conjugate_structure(J0_mat(), a_field(x), 1.0);
  };
  t.g = [a_field](const Vec4& x) { return matrix_exp(2.0 * a_field(x)); };
  return t;
}

}  // namespace akg
