// Adaptive-precision sign predicates for planar geometry.
//
// The exact paths follow the classic expansion arithmetic of Shewchuk
// (nonoverlapping floating-point expansions combined with exact
// transformations).  Each predicate first tries a plain evaluation with a
// static error filter and only falls back to exact arithmetic when the
// filter cannot certify the sign.

#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

namespace wgf2d::detail {

inline constexpr double kEps = 2.220446049250313e-16; // 2^-52

// x + y = a + b with x = fl(a+b) and y the roundoff.
inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

// x + y = a * b exactly (fma gives the rounding error of the product).
inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// Exact sum of two expansions with zero elimination, by repeated
// grow-expansion.  Quadratic in the component count, which stays tiny here
// (the predicates below never exceed ~16 components).
inline int expansion_sum(int elen, const double* e, int flen, const double* f,
                         double* h) {
  std::array<double, 64> buf{};
  int n = 0;
  for (int i = 0; i < elen; ++i) buf[n++] = e[i];
  for (int i = 0; i < flen; ++i) buf[n++] = f[i];
  int hlen = 0;
  for (int i = 0; i < n; ++i) {
    double carry = buf[i];
    int m = 0;
    for (int j = 0; j < hlen; ++j) {
      double s, err;
      two_sum(h[j], carry, s, err);
      if (err != 0.0) h[m++] = err;
      carry = s;
    }
    h[m++] = carry;
    hlen = m;
  }
  if (hlen == 0) h[hlen++] = 0.0;
  return hlen;
}

inline double expansion_estimate(int n, const double* e) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += e[i];
  return s;
}

inline int expansion_sign(int n, const double* e) {
  // Largest-magnitude component is last after grow-expansion.
  for (int i = n - 1; i >= 0; --i) {
    if (e[i] > 0) return 1;
    if (e[i] < 0) return -1;
  }
  return 0;
}

} // namespace wgf2d::detail

namespace wgf2d {

// Sign of the determinant | bx-ax  by-ay ; cx-ax  cy-ay |.
// Positive when a,b,c make a counterclockwise turn.
inline int orient2d(double ax, double ay, double bx, double by, double cx,
                    double cy) {
  const double detleft = (ax - cx) * (by - cy);
  const double detright = (ay - cy) * (bx - cx);
  const double det = detleft - detright;
  double detsum;
  if (detleft > 0) {
    if (detright <= 0) return det > 0 ? 1 : (det < 0 ? -1 : 0);
    detsum = detleft + detright;
  } else if (detleft < 0) {
    if (detright >= 0) return det > 0 ? 1 : (det < 0 ? -1 : 0);
    detsum = -detleft - detright;
  } else {
    return det > 0 ? 1 : (det < 0 ? -1 : 0);
  }
  const double errbound = (3.0 + 16.0 * detail::kEps) * detail::kEps * detsum;
  if (det > errbound || -det > errbound) return det > 0 ? 1 : -1;

  // Exact fallback: expand the six products of the 2x2 determinant in the
  // original (untranslated) coordinates.
  using namespace detail;
  double p[6][2];
  two_product(ax, by, p[0][1], p[0][0]);
  two_product(-ax, cy, p[1][1], p[1][0]);
  two_product(-ay, bx, p[2][1], p[2][0]);
  two_product(ay, cx, p[3][1], p[3][0]);
  two_product(bx, cy, p[4][1], p[4][0]);
  two_product(-by, cx, p[5][1], p[5][0]);
  double acc[32];
  int alen = 0;
  double tmp[32];
  acc[0] = 0.0;
  alen = 1;
  for (int i = 0; i < 6; ++i) {
    int tlen = expansion_sum(alen, acc, 2, p[i], tmp);
    for (int j = 0; j < tlen; ++j) acc[j] = tmp[j];
    alen = tlen;
  }
  return expansion_sign(alen, acc);
}

// Sign of  nx*px + ny*py - b : +1 outside the half-plane {n.y <= b},
// -1 strictly inside, 0 exactly on the boundary line.
inline int halfplane_side(double nx, double ny, double b, double px,
                          double py) {
  const double t1 = nx * px;
  const double t2 = ny * py;
  const double s = (t1 + t2) - b;
  const double mag = std::abs(t1) + std::abs(t2) + std::abs(b);
  const double errbound = 8.0 * detail::kEps * mag;
  if (s > errbound) return 1;
  if (s < -errbound) return -1;

  using namespace detail;
  double p1[2], p2[2];
  two_product(nx, px, p1[1], p1[0]);
  two_product(ny, py, p2[1], p2[0]);
  double nb[1] = {-b};
  double acc[16], tmp[16];
  int alen = expansion_sum(2, p1, 2, p2, acc);
  int tlen = expansion_sum(alen, acc, 1, nb, tmp);
  return expansion_sign(tlen, tmp);
}

} // namespace wgf2d
