#pragma once

#include "akglue/base.hpp"

namespace akg {

// Central finite-difference stencils.  order selects the leading truncation
// error (2 or 4); richardson adds one h -> h/2 extrapolation level on top.
struct StencilConfig {
  double h = 1e-3;
  int order = 4;
  bool richardson = false;
};

// Default step scales with the distance from the chart center so that sweeps
// toward a coordinate singularity keep the stencil inside the chart.
inline StencilConfig stencil_at(double radius, double rel = 1e-3) {
  StencilConfig c;
  c.h = rel * std::max(radius, 1e-2);
  return c;
}

namespace detail {
template <class F>
auto d1_step(const F& f, const Vec4& x, int dir, double h, int order) -> decltype(f(x)) {
  Vec4 e = Vec4::Zero();
  e[dir] = 1.0;
  if (order == 2) return (f(x + h * e) - f(x - h * e)) * (1.0 / (2.0 * h));
  return (-f(x + 2.0 * h * e) + 8.0 * f(x + h * e) - 8.0 * f(x - h * e) + f(x - 2.0 * h * e)) *
         (1.0 / (12.0 * h));
}

template <class F>
auto d2_pure_step(const F& f, const Vec4& x, int dir, double h, int order) -> decltype(f(x)) {
  Vec4 e = Vec4::Zero();
  e[dir] = 1.0;
  if (order == 2)
    return (f(x + h * e) - 2.0 * f(x) + f(x - h * e)) * (1.0 / (h * h));
  return (-f(x + 2.0 * h * e) + 16.0 * f(x + h * e) - 30.0 * f(x) + 16.0 * f(x - h * e) -
          f(x - 2.0 * h * e)) *
         (1.0 / (12.0 * h * h));
}
}  // namespace detail

template <class F>
auto d1(const F& f, const Vec4& x, int dir, const StencilConfig& c) -> decltype(f(x)) {
  if (!c.richardson) return detail::d1_step(f, x, dir, c.h, c.order);
  auto coarse = detail::d1_step(f, x, dir, c.h, c.order);
  auto fine = detail::d1_step(f, x, dir, c.h / 2.0, c.order);
  const double w = c.order == 2 ? 4.0 : 16.0;
  return (w * fine - coarse) * (1.0 / (w - 1.0));
}

template <class F>
auto d2(const F& f, const Vec4& x, int i, int j, const StencilConfig& c) -> decltype(f(x)) {
  if (i == j) {
    if (!c.richardson) return detail::d2_pure_step(f, x, i, c.h, c.order);
    auto coarse = detail::d2_pure_step(f, x, i, c.h, c.order);
    auto fine = detail::d2_pure_step(f, x, i, c.h / 2.0, c.order);
    const double w = c.order == 2 ? 4.0 : 16.0;
    return (w * fine - coarse) * (1.0 / (w - 1.0));
  }
  auto inner = [&](const Vec4& y) { return d1(f, y, j, c); };
  return d1(inner, x, i, c);
}

inline Vec4 grad4(const ScalarField& f, const Vec4& x, const StencilConfig& c) {
  Vec4 g;
  for (int i = 0; i < 4; ++i) g[i] = d1(f, x, i, c);
  return g;
}

inline Mat4 hess4(const ScalarField& f, const Vec4& x, const StencilConfig& c) {
  Mat4 h;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      h(i, j) = d2(f, x, i, j, c);
      h(j, i) = h(i, j);
    }
  return h;
}

// Fourth partials are built as second derivatives of a second-derivative
// field; the outer pass widens the step to keep the two levels decoupled.
template <class F>
auto d4_nested(const F& f, const Vec4& x, int i, int j, int k, int l, const StencilConfig& c)
    -> decltype(f(x)) {
  StencilConfig outer = c;
  outer.h = 10.0 * c.h;
  auto inner = [&](const Vec4& y) { return d2(f, y, k, l, c); };
  return d2(inner, x, i, j, outer);
}

}  // namespace akg
