#pragma once

#include "akglue/base.hpp"

#include <optional>

namespace akg {

enum class ChartId {
  OrbifoldDarboux,  // punctured ball around the orbifold point, flat symplectic coordinates
  AleSpherical,     // resolved model in asymptotically Euclidean radial coordinates
  AleDarboux,       // resolved model pulled back to flat symplectic coordinates
  Glued,            // glued chart around the replaced singular point
  WeinsteinS2,      // cotangent-type neighborhood of the vanishing 2-sphere
  Fixture,          // synthetic test geometry
};

enum class RegionTag { Core, InnerAnnulus, OuterAnnulus, Bulk };

inline const char* to_string(ChartId c) {
  switch (c) {
    case ChartId::OrbifoldDarboux: return "orbifold-darboux";
    case ChartId::AleSpherical: return "ale-spherical";
    case ChartId::AleDarboux: return "ale-darboux";
    case ChartId::Glued: return "glued";
    case ChartId::WeinsteinS2: return "weinstein-s2";
    case ChartId::Fixture: return "fixture";
  }
  return "?";
}

inline const char* to_string(RegionTag r) {
  switch (r) {
    case RegionTag::Core: return "core";
    case RegionTag::InnerAnnulus: return "inner";
    case RegionTag::OuterAnnulus: return "outer";
    case RegionTag::Bulk: return "bulk";
  }
  return "?";
}

struct ChartPoint {
  ChartId chart = ChartId::Fixture;
  Vec4 x = Vec4::Zero();
  std::optional<RegionTag> region;
};

enum class TensorKind { Scalar, Vector, OneForm, TwoForm, Metric, Endo };

// A tensor value at one chart point, tagged by type so mismatched consumers
// fail loudly instead of silently transposing index conventions.
struct TensorSample {
  ChartPoint at;
  TensorKind kind = TensorKind::Scalar;
  VecX comp;  // row-major for rank-2

  static TensorSample scalar(const ChartPoint& p, double v) {
    TensorSample s{p, TensorKind::Scalar, VecX(1)};
    s.comp[0] = v;
    return s;
  }
  static TensorSample vector(const ChartPoint& p, const Vec4& v) {
    TensorSample s{p, TensorKind::Vector, VecX(4)};
    for (int i = 0; i < 4; ++i) s.comp[i] = v[i];
    return s;
  }
  static TensorSample one_form(const ChartPoint& p, const Vec4& v) {
    TensorSample s = vector(p, v);
    s.kind = TensorKind::OneForm;
    return s;
  }
  static TensorSample rank2(const ChartPoint& p, TensorKind k, const Mat4& m) {
    if (k != TensorKind::TwoForm && k != TensorKind::Metric && k != TensorKind::Endo)
      throw KindMismatch("rank2 sample needs a rank-2 kind");
    TensorSample s{p, k, VecX(16)};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s.comp[4 * i + j] = m(i, j);
    return s;
  }

  double as_scalar() const {
    if (kind != TensorKind::Scalar) throw KindMismatch("expected scalar sample");
    return comp[0];
  }
  Vec4 as_vec4() const {
    if (kind != TensorKind::Vector && kind != TensorKind::OneForm)
      throw KindMismatch("expected rank-1 sample");
    return Vec4(comp[0], comp[1], comp[2], comp[3]);
  }
  Mat4 as_mat4() const {
    if (comp.size() != 16) throw KindMismatch("expected rank-2 sample");
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = comp[4 * i + j];
    return m;
  }

  void validate() const {
    if (!comp.allFinite()) throw NonFiniteSample("tensor sample");
    if (kind == TensorKind::TwoForm) {
      Mat4 m = as_mat4();
      if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
        throw KindMismatch("two-form sample not antisymmetric");
    }
    if (kind == TensorKind::Metric) {
      Mat4 m = as_mat4();
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
        throw KindMismatch("metric sample not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat4> es(m);
      if (es.eigenvalues().minCoeff() <= 0) throw SingularMetric("metric sample not positive");
    }
  }
};

}  // namespace akg
