#include "test_support.hpp"

using namespace wgf2d;

TEST_CASE("orient2d basic signs") {
  CHECK(orient2d(0, 0, 1, 0, 0, 1) > 0);
  CHECK(orient2d(0, 0, 0, 1, 1, 0) < 0);
  CHECK(orient2d(0, 0, 1, 1, 2, 2) == 0);
  CHECK(orient2d(12, 12, 24, 24, 0.5, 0.5) == 0);
}

TEST_CASE("orient2d resolves near-collinear points exactly") {
  // One ulp above/below the diagonal; the naive determinant cancels to
  // noise at this scale.
  const double eps = std::nextafter(0.5, 1.0) - 0.5;
  CHECK(orient2d(12, 12, 24, 24, 0.5, 0.5 + eps) > 0);
  CHECK(orient2d(12, 12, 24, 24, 0.5, 0.5 - eps) < 0);

  // Tiny perturbations around a long skinny configuration.
  for (int i = -2; i <= 2; ++i) {
    const double y = 1.0 + i * (std::nextafter(1.0, 2.0) - 1.0);
    const int s = orient2d(0, 0, 1e10, 1e10, 1.0, y);
    if (i == 0) CHECK(s == 0);
    else CHECK(s == (i > 0 ? 1 : -1));
  }
}

TEST_CASE("halfplane_side exact on-boundary detection") {
  CHECK(halfplane_side(2, 0, 1, 0.5, 123.456) == 0);
  CHECK(halfplane_side(2, 0, 1, std::nextafter(0.5, 1.0), 0) == 1);
  CHECK(halfplane_side(2, 0, 1, std::nextafter(0.5, 0.0), 0) == -1);

  // Mixed-magnitude case where plain evaluation underflows the true sign.
  const double big = 1e16;
  CHECK(halfplane_side(1, 1, 2 * big, big, big) == 0);
  CHECK(halfplane_side(1, 1, 2 * big, big, std::nextafter(big, 2 * big)) == 1);
}

TEST_CASE("halfplane_side agrees with plain arithmetic away from the line") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Point2 n{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if (norm2(n) < 1e-6) continue;
    const double b = rng.uniform(-2, 2);
    const Point2 p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double v = dot(n, p) - b;
    if (std::abs(v) < 1e-9) continue;
    CHECK(halfplane_side(n.x, n.y, b, p.x, p.y) == (v > 0 ? 1 : -1));
  }
}
