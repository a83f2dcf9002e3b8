#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace akg {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vec4&)>;
using VectorField = std::function<Vec4(const Vec4&)>;
using OneFormField = std::function<Vec4(const Vec4&)>;
using MetricField = std::function<Mat4(const Vec4&)>;   // symmetric, positive definite
using EndoField = std::function<Mat4(const Vec4&)>;     // (1,1)-tensor, matrix acts on column vectors
using TwoFormField = std::function<Mat4(const Vec4&)>;  // antisymmetric component matrix

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define AKG_ERROR_TYPE(Name)                                        \
  struct Name : Error {                                             \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

AKG_ERROR_TYPE(OutOfChart);
AKG_ERROR_TYPE(NonFiniteSample);
AKG_ERROR_TYPE(StencilError);
AKG_ERROR_TYPE(SingularMetric);
AKG_ERROR_TYPE(NotAlmostComplex);
AKG_ERROR_TYPE(NotCompatible);
AKG_ERROR_TYPE(KindMismatch);
AKG_ERROR_TYPE(NonPositiveTransfer);
AKG_ERROR_TYPE(DomainError);
AKG_ERROR_TYPE(SeamMismatch);
AKG_ERROR_TYPE(DegenerateFit);
AKG_ERROR_TYPE(InsufficientRange);
AKG_ERROR_TYPE(IllConditioned);
AKG_ERROR_TYPE(ModelSolveFailure);
AKG_ERROR_TYPE(StiffFailure);
AKG_ERROR_TYPE(NewtonDiverged);
AKG_ERROR_TYPE(LeftNeighborhood);
AKG_ERROR_TYPE(ConfigError);

#undef AKG_ERROR_TYPE

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

template <class T>
void require_finite(const T& v, const std::string& where) {
  if (!v.allFinite()) throw NonFiniteSample(where);
}
inline void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NonFiniteSample(where);
}

// Deterministic RNG: fixed algorithm and fixed float construction so that
// identical seeds give bit-identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    for (int i = 0; i < 8; ++i) next();
  }

  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return std::ldexp(static_cast<double>(next() >> 11), -53); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec4 unit_vec4() {
    Vec4 v;
    do {
      for (int i = 0; i < 4; ++i) v[i] = normal();
    } while (v.norm() < 1e-8);
    return v / v.norm();
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   // 95% band for the slope
  double ci_high = 0.0;
  double r2 = 0.0;
  int n = 0;
};

// Ordinary least squares of y against x.
inline FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw DegenerateFit("linear_fit needs >= 3 points");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx < 1e-14) throw DegenerateFit("linear_fit: no spread in abscissae");
  FitResult out;
  out.n = n;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (out.intercept + out.slope * x[i]);
    ss_res += r * r;
  }
  out.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  const double se = std::sqrt(ss_res / std::max(1, n - 2) / sxx);
  out.ci_low = out.slope - 1.96 * se;
  out.ci_high = out.slope + 1.96 * se;
  return out;
}

// Power-law fit: slope of log|y| against log x.  Positive x required; y below
// the floor is rejected so that noise plateaus are not fitted as slopes.
inline FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                            double y_floor = 1e-300) {
  if (x.size() != y.size()) throw DegenerateFit("loglog_fit: size mismatch");
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0)) throw DegenerateFit("loglog_fit: nonpositive abscissa");
    if (std::abs(y[i]) <= y_floor)
      throw DegenerateFit("loglog_fit: sample at or below floor");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return linear_fit(lx, ly);
}

inline double sqr(double v) { return v * v; }

}  // namespace akg
