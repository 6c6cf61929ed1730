// Seeded RNG with an explicit uint64 -> double mapping so that runs are
// reproducible byte-for-byte across standard library implementations.

#pragma once

#include <cstdint>
#include <random>

#include "wgf2d/geom2d.hpp"

namespace wgf2d {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  Point2 in_box(const BBox& b) {
    return {uniform(b.xmin, b.xmax), uniform(b.ymin, b.ymax)};
  }
  Point2 in_polygon(const ConvexPolygon& poly) {
    const BBox b = bounding_box(poly);
    for (;;) {
      const Point2 p = in_box(b);
      if (contains(poly, p)) return p;
    }
  }
  Point2 in_disk(Point2 center, double radius) {
    for (;;) {
      const Point2 p{uniform(-radius, radius), uniform(-radius, radius)};
      if (norm2(p) <= radius * radius) return center + p;
    }
  }
  // Standard normal via Box-Muller on the explicit uniform stream.
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

} // namespace wgf2d
