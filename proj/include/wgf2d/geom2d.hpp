// Planar convex geometry: points, half-planes, convex polygons and the
// handful of exact integrals the rest of the library is built on.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wgf2d/predicates.hpp"

namespace wgf2d {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double xx, double yy) : x(xx), y(yy) {}

  Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  Point2 operator-() const { return {-x, -y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
  Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
  bool operator==(const Point2&) const = default;
};

inline Point2 operator*(double s, Point2 p) { return p * s; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
// Rotate by -90 degrees: outward normal of a CCW polygon edge direction.
inline Point2 perp_cw(Point2 a) { return {a.y, -a.x}; }

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Half-plane {y : <normal, y> <= offset}.
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;

  HalfPlane() = default;
  HalfPlane(Point2 n, double b) : normal(n), offset(b) {
    if (norm2(n) == 0.0) throw std::invalid_argument("half-plane with zero normal");
  }
  // Robust side: -1 strictly inside, 0 on the line, +1 strictly outside.
  int side(Point2 p) const {
    return halfplane_side(normal.x, normal.y, offset, p.x, p.y);
  }
  double signed_value(Point2 p) const { return dot(normal, p) - offset; }
};

// Convex polygon, vertices in counterclockwise order.  An empty vertex list
// represents the empty set.
struct ConvexPolygon {
  std::vector<Point2> v;

  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Point2> verts) : v(std::move(verts)) {}

  bool empty() const { return v.empty(); }
  int size() const { return static_cast<int>(v.size()); }
  Point2 vertex(int i) const { return v[i]; }
  Point2 vertex_wrapped(int i) const { return v[((i % size()) + size()) % size()]; }
};

inline double area(const ConvexPolygon& poly) {
  const int n = poly.size();
  if (n < 3) return 0.0;
  double a = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2& p = poly.v[i];
    const Point2& q = poly.v[(i + 1) % n];
    a += cross(p, q);
  }
  return 0.5 * a;
}

inline double diameter(const ConvexPolygon& poly) {
  double d2 = 0.0;
  for (int i = 0; i < poly.size(); ++i)
    for (int j = i + 1; j < poly.size(); ++j)
      d2 = std::max(d2, norm2(poly.v[i] - poly.v[j]));
  return std::sqrt(d2);
}

struct BBox {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  void add(Point2 p) {
    xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
  }
  Point2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  double half_diagonal() const {
    return 0.5 * std::hypot(xmax - xmin, ymax - ymin);
  }
};

inline BBox bounding_box(const ConvexPolygon& poly) {
  BBox b;
  for (const Point2& p : poly.v) b.add(p);
  return b;
}

inline Point2 centroid(const ConvexPolygon& poly) {
  const int n = poly.size();
  if (n == 0) throw std::invalid_argument("centroid of empty polygon");
  if (n == 1) return poly.v[0];
  if (n == 2) return 0.5 * (poly.v[0] + poly.v[1]);
  double a = 0.0;
  Point2 c{0, 0};
  for (int i = 0; i < n; ++i) {
    const Point2& p = poly.v[i];
    const Point2& q = poly.v[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  if (a == 0.0) {
    // Degenerate: fall back to vertex average.
    Point2 s{0, 0};
    for (const Point2& p : poly.v) s += p;
    return s * (1.0 / n);
  }
  return c * (1.0 / (3.0 * a));
}

// True when p lies in the closed polygon.
inline bool contains(const ConvexPolygon& poly, Point2 p) {
  const int n = poly.size();
  if (n == 0) return false;
  for (int i = 0; i < n; ++i) {
    const Point2& a = poly.v[i];
    const Point2& b = poly.v[(i + 1) % n];
    if (orient2d(a.x, a.y, b.x, b.y, p.x, p.y) < 0) return false;
  }
  return true;
}

// Clip a convex polygon by a half-plane (Sutherland-Hodgman walk).  Side
// decisions go through the robust predicate; points exactly on the boundary
// line are kept.
inline ConvexPolygon clip(const ConvexPolygon& poly, const HalfPlane& h) {
  const int n = poly.size();
  if (n == 0) return poly;
  ConvexPolygon out;
  out.v.reserve(n + 2);
  std::vector<int> side(n);
  std::vector<double> val(n);
  bool any_in = false, any_out = false;
  for (int i = 0; i < n; ++i) {
    side[i] = h.side(poly.v[i]);
    val[i] = h.signed_value(poly.v[i]);
    (side[i] <= 0 ? any_in : any_out) = true;
  }
  if (!any_out) return poly;
  if (!any_in) return ConvexPolygon{};
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const bool in_i = side[i] <= 0;
    const bool in_j = side[j] <= 0;
    if (in_i) out.v.push_back(poly.v[i]);
    if (in_i != in_j) {
      const double denom = val[i] - val[j];
      double t = denom != 0.0 ? val[i] / denom : 0.5;
      t = std::clamp(t, 0.0, 1.0);
      out.v.push_back(poly.v[i] + t * (poly.v[j] - poly.v[i]));
    }
  }
  if (out.size() < 3) return ConvexPolygon{};
  return out;
}

// Merge vertices closer than tol and drop the resulting zero-length edges.
inline ConvexPolygon cleaned(const ConvexPolygon& poly, double tol) {
  const int n = poly.size();
  if (n == 0) return poly;
  ConvexPolygon out;
  out.v.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (out.empty() || dist(out.v.back(), poly.v[i]) > tol)
      out.v.push_back(poly.v[i]);
  }
  while (out.size() >= 2 && dist(out.v.front(), out.v.back()) <= tol)
    out.v.pop_back();
  if (out.size() < 3) return ConvexPolygon{};
  return out;
}

// Exact integral of |x - p|^2 over the polygon.  Fan triangulation from the
// first vertex with the degree-2 edge-midpoint rule, which integrates
// quadratics exactly.
inline double second_moment(const ConvexPolygon& poly, Point2 p) {
  const int n = poly.size();
  if (n < 3) return 0.0;
  const Point2 a = poly.v[0] - p;
  double total = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const Point2 b = poly.v[i] - p;
    const Point2 c = poly.v[i + 1] - p;
    const double tri_area = 0.5 * cross(b - a, c - a);
    const Point2 mab = 0.5 * (a + b);
    const Point2 mbc = 0.5 * (b + c);
    const Point2 mca = 0.5 * (c + a);
    total += tri_area * (norm2(mab) + norm2(mbc) + norm2(mca)) / 3.0;
  }
  return total;
}

// Steiner point: support-function average over the unit circle, evaluated
// in closed form on each vertex normal arc.
inline Point2 steiner_point(const ConvexPolygon& poly) {
  const int n = poly.size();
  if (n < 3) throw std::invalid_argument("steiner_point of degenerate polygon");
  // Outward normal angle of each edge i: v[i] -> v[i+1].
  std::vector<double> theta(n);
  for (int i = 0; i < n; ++i) {
    const Point2 d = poly.v[(i + 1) % n] - poly.v[i];
    const Point2 nrm = perp_cw(d);
    theta[i] = std::atan2(nrm.y, nrm.x);
  }
  Point2 s{0, 0};
  for (int i = 0; i < n; ++i) {
    // Vertex v[i] supports directions between the normals of edges i-1 and i.
    const double alpha = theta[(i + n - 1) % n];
    double beta = theta[i];
    while (beta < alpha) beta += 2.0 * M_PI;
    const double dt = beta - alpha;
    const double s2a = std::sin(2 * alpha), s2b = std::sin(2 * beta);
    const double c2a = std::cos(2 * alpha), c2b = std::cos(2 * beta);
    const double icc = 0.5 * dt + 0.25 * (s2b - s2a);
    const double iss = 0.5 * dt - 0.25 * (s2b - s2a);
    const double isc = 0.25 * (c2a - c2b);
    const Point2 v = poly.v[i];
    s += Point2{v.x * icc + v.y * isc, v.x * isc + v.y * iss};
  }
  return s * (1.0 / M_PI);
}

namespace detail {
// Reorder a CCW polygon to start at its lowest (then leftmost) vertex.
inline ConvexPolygon rotate_to_lowest(const ConvexPolygon& p) {
  int best = 0;
  for (int i = 1; i < p.size(); ++i) {
    if (p.v[i].y < p.v[best].y ||
        (p.v[i].y == p.v[best].y && p.v[i].x < p.v[best].x))
      best = i;
  }
  ConvexPolygon out;
  out.v.reserve(p.size());
  for (int i = 0; i < p.size(); ++i) out.v.push_back(p.v[(best + i) % p.size()]);
  return out;
}
} // namespace detail

// Minkowski combination (1-t)A + tB of two convex polygons by the classic
// edge-angle merge.
inline ConvexPolygon minkowski_interpolate(const ConvexPolygon& A,
                                           const ConvexPolygon& B, double t) {
  if (A.empty() || B.empty())
    throw std::invalid_argument("minkowski_interpolate of empty polygon");
  if (t <= 0.0) return A;
  if (t >= 1.0) return B;
  ConvexPolygon a = detail::rotate_to_lowest(A);
  ConvexPolygon b = detail::rotate_to_lowest(B);
  for (Point2& p : a.v) p = (1.0 - t) * p;
  for (Point2& p : b.v) p = t * p;
  // Unwrapped, strictly increasing edge direction angles.  Starting at the
  // lowest vertex puts the first angle of both polygons in [0, pi).
  auto edge_angles = [](const ConvexPolygon& p) {
    const int n = p.size();
    std::vector<double> ang(n);
    Point2 e0 = p.v[1 % n] - p.v[0];
    ang[0] = std::atan2(e0.y, e0.x);
    if (ang[0] < 0) ang[0] += 2.0 * M_PI;
    Point2 prev = e0;
    for (int i = 1; i < n; ++i) {
      const Point2 e = p.v[(i + 1) % n] - p.v[i];
      double turn = std::atan2(cross(prev, e), dot(prev, e));
      if (turn < 0) turn += 2.0 * M_PI;
      ang[i] = ang[i - 1] + turn;
      prev = e;
    }
    return ang;
  };
  const std::vector<double> ta = edge_angles(a);
  const std::vector<double> tb = edge_angles(b);
  const int na = a.size(), nb = b.size();
  ConvexPolygon out;
  out.v.reserve(na + nb);
  int i = 0, j = 0;
  while (i < na || j < nb) {
    out.v.push_back(a.v[i % na] + b.v[j % nb]);
    const double aa = i < na ? ta[i] : std::numeric_limits<double>::infinity();
    const double ab = j < nb ? tb[j] : std::numeric_limits<double>::infinity();
    if (aa < ab) ++i;
    else if (ab < aa) ++j;
    else { ++i; ++j; }
  }
  return cleaned(out, 1e-14 * (1.0 + diameter(out)));
}

// Andrew monotone chain; input points need not be sorted or distinct.
inline ConvexPolygon convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return ConvexPolygon{};
  std::vector<Point2> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && orient2d(h[k - 2].x, h[k - 2].y, h[k - 1].x, h[k - 1].y,
                              pts[i].x, pts[i].y) <= 0)
      --k;
    h[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && orient2d(h[k - 2].x, h[k - 2].y, h[k - 1].x,
                                  h[k - 1].y, pts[i].x, pts[i].y) <= 0)
      --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return ConvexPolygon{std::move(h)};
}

inline ConvexPolygon make_box(double xmin, double ymin, double xmax, double ymax) {
  return ConvexPolygon{{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}}};
}

inline ConvexPolygon make_square(double side, Point2 center = {0, 0}) {
  const double h = 0.5 * side;
  return make_box(center.x - h, center.y - h, center.x + h, center.y + h);
}

// Convex target domain Y together with its boundary segment decomposition
// (one segment per polygon edge).
class ConvexDomain {
 public:
  ConvexDomain() = default;
  explicit ConvexDomain(ConvexPolygon poly) : poly_(std::move(poly)) {
    if (poly_.size() < 3) throw std::invalid_argument("domain needs >= 3 vertices");
    if (area(poly_) <= 0) throw std::invalid_argument("domain must be CCW with positive area");
    for (int i = 0; i < poly_.size(); ++i) {
      const Point2 a = poly_.v[i];
      const Point2 b = poly_.v[(i + 1) % poly_.size()];
      const Point2 c = poly_.v[(i + 2) % poly_.size()];
      if (orient2d(a.x, a.y, b.x, b.y, c.x, c.y) <= 0)
        throw std::invalid_argument("domain not strictly convex");
    }
    area_ = area(poly_);
    diameter_ = diameter(poly_);
  }

  const ConvexPolygon& polygon() const { return poly_; }
  int num_segments() const { return poly_.size(); }
  double domain_area() const { return area_; }
  double domain_diameter() const { return diameter_; }

  Point2 segment_a(int i) const { return poly_.v[i]; }
  Point2 segment_b(int i) const { return poly_.v[(i + 1) % poly_.size()]; }

  // Inward half-plane of boundary segment i.
  HalfPlane halfplane(int i) const {
    const Point2 a = segment_a(i), b = segment_b(i);
    const Point2 n = perp_cw(b - a);
    return HalfPlane(n, dot(n, a));
  }
  // Supporting line of segment i as (normal, offset) with <n,y> = c on it.
  void line(int i, Point2& n, double& c) const {
    const Point2 a = segment_a(i), b = segment_b(i);
    n = perp_cw(b - a);
    c = dot(n, a);
  }
  bool contains(Point2 p) const { return wgf2d::contains(poly_, p); }

 private:
  ConvexPolygon poly_;
  double area_ = 0.0;
  double diameter_ = 0.0;
};

} // namespace wgf2d
