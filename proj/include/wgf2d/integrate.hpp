// Quadrature over segments and convex polygons.  Polynomial integrands up
// to degree 2 are handled by exact rules; smooth non-polynomial integrands
// (Gaussian bumps) go through fixed high-order Gauss rules so that values
// stay consistent with the analytic boundary-motion derivatives to far
// below the finite-difference tolerances used in the tests.

#pragma once

#include <array>
#include <functional>

#include "wgf2d/geom2d.hpp"

namespace wgf2d {

// Nodes on [0,1] and weights summing to 1.
struct LineRule {
  const double* t;
  const double* w;
  int n;
};

namespace detail {

// 3-point Gauss-Legendre on [0,1] (degree 5).
inline constexpr std::array<double, 3> kGL3t = {
    0.1127016653792583, 0.5, 0.8872983346207417};
inline constexpr std::array<double, 3> kGL3w = {
    0.2777777777777778, 0.4444444444444444, 0.2777777777777778};

// 16-point Gauss-Legendre on [0,1] (degree 31).
inline constexpr std::array<double, 16> kGL16t = {
    0.005299532504175031, 0.02771248846338372, 0.06718439880608412,
    0.1222977958224985,   0.1910618777986781,  0.2709916111713863,
    0.3591982246103705,   0.4524937450811813,  0.5475062549188187,
    0.6408017753896295,   0.7290083888286137,  0.8089381222013219,
    0.8777022041775015,   0.9328156011939159,  0.9722875115366163,
    0.9947004674958250};
inline constexpr std::array<double, 16> kGL16w = {
    0.01357622970587705, 0.03112676196932395, 0.04757925584124639,
    0.06231448562776694, 0.07479799440828837, 0.08457825969750127,
    0.09130170752246179, 0.09472530522753425, 0.09472530522753425,
    0.09130170752246179, 0.08457825969750127, 0.07479799440828837,
    0.06231448562776694, 0.04757925584124639, 0.03112676196932395,
    0.01357622970587705};

} // namespace detail

inline LineRule line_rule(int degree) {
  if (degree >= 0 && degree <= 5)
    return {detail::kGL3t.data(), detail::kGL3w.data(), 3};
  return {detail::kGL16t.data(), detail::kGL16w.data(), 16};
}

// Integral of f along the segment [a, b].
template <class F>
double line_integral(Point2 a, Point2 b, F&& f, int degree) {
  const LineRule r = line_rule(degree);
  const double len = dist(a, b);
  double s = 0.0;
  for (int i = 0; i < r.n; ++i) s += r.w[i] * f(a + r.t[i] * (b - a));
  return len * s;
}

namespace detail {

// Degree-2 exact rule on a triangle: edge midpoints with equal weights.
template <class F>
double tri_integral_deg2(Point2 a, Point2 b, Point2 c, F&& f) {
  const double ar = 0.5 * cross(b - a, c - a);
  return ar * (f(0.5 * (a + b)) + f(0.5 * (b + c)) + f(0.5 * (c + a))) / 3.0;
}

// Degree-5 7-point symmetric rule (Strang-Fix), applied on a uniformly
// subdivided triangle for extra accuracy on analytic integrands.
template <class F>
double tri_integral_deg5(Point2 a, Point2 b, Point2 c, F&& f, int levels) {
  if (levels > 0) {
    const Point2 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
    return tri_integral_deg5(a, mab, mca, f, levels - 1) +
           tri_integral_deg5(mab, b, mbc, f, levels - 1) +
           tri_integral_deg5(mca, mbc, c, f, levels - 1) +
           tri_integral_deg5(mab, mbc, mca, f, levels - 1);
  }
  static constexpr double w0 = 0.225;
  static constexpr double w1 = 0.1259391805448271;
  static constexpr double w2 = 0.1323941527885062;
  static constexpr double a1 = 0.7974269853530873, b1 = 0.1012865073234563;
  static constexpr double a2 = 0.0597158717897698, b2 = 0.4701420641051151;
  const double ar = 0.5 * cross(b - a, c - a);
  auto at = [&](double l1, double l2, double l3) {
    return f(l1 * a + l2 * b + l3 * c);
  };
  double s = w0 * at(1.0 / 3, 1.0 / 3, 1.0 / 3);
  s += w1 * (at(a1, b1, b1) + at(b1, a1, b1) + at(b1, b1, a1));
  s += w2 * (at(a2, b2, b2) + at(b2, a2, b2) + at(b2, b2, a2));
  return ar * s;
}

} // namespace detail

// Integral of f over a convex polygon by fan triangulation from the first
// vertex.  degree <= 2 uses the exact midpoint rule.
template <class F>
double polygon_integral(const ConvexPolygon& poly, F&& f, int degree) {
  const int n = poly.size();
  if (n < 3) return 0.0;
  double total = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    if (degree >= 0 && degree <= 2)
      total += detail::tri_integral_deg2(poly.v[0], poly.v[i], poly.v[i + 1], f);
    else
      total += detail::tri_integral_deg5(poly.v[0], poly.v[i], poly.v[i + 1], f, 2);
  }
  return total;
}

} // namespace wgf2d
