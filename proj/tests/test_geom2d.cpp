#include "test_support.hpp"

using namespace wgf2d;
using namespace wgf2d::testing;
using Catch::Approx;

namespace {
const ConvexPolygon unit_square = make_box(0, 0, 1, 1);
}

TEST_CASE("clip against a half-plane") {
  SECTION("splits the unit square") {
    const ConvexPolygon c = clip(unit_square, HalfPlane({1, 0}, 0.5));
    CHECK(area(c) == Approx(0.5).margin(1e-15));
  }
  SECTION("no-op when the polygon is inside") {
    const ConvexPolygon c = clip(unit_square, HalfPlane({1, 0}, 2.0));
    CHECK(c.size() == 4);
    CHECK(area(c) == Approx(1.0));
  }
  SECTION("disjoint half-plane empties the polygon") {
    const ConvexPolygon c = clip(unit_square, HalfPlane({1, 0}, -1.0));
    CHECK(c.empty());
  }
}

TEST_CASE("clip is idempotent and area-additive") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const ConvexPolygon poly = random_convex_polygon(rng);
    const Point2 n{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (norm2(n) < 1e-4) continue;
    const double b = rng.uniform(-1, 1);
    const ConvexPolygon once = clip(poly, HalfPlane(n, b));
    const ConvexPolygon twice = clip(once, HalfPlane(n, b));
    // Idempotent up to vertex tolerance: re-clipping may split a vertex
    // that rounded onto the cutting line, but only within roundoff.
    CHECK(std::abs(area(once) - area(twice)) <= 1e-12 * (1.0 + area(once)));
    for (const Point2& v : twice.v) CHECK(dist_to_polygon(once, v) <= 1e-12);
    for (const Point2& v : once.v) CHECK(dist_to_polygon(twice, v) <= 1e-12);

    const ConvexPolygon other = clip(poly, HalfPlane(-1.0 * n, -b));
    CHECK(area(once) + area(other) ==
          Approx(area(poly)).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("area basics") {
  CHECK(area(unit_square) == 1.0);
  CHECK(area(ConvexPolygon{}) == 0.0);
  CHECK(area(ConvexPolygon{{{0, 0}, {1, 0}, {0, 1}}}) == Approx(0.5));
}

TEST_CASE("centroid basics") {
  const Point2 c1 = centroid(make_box(0, 0, 2, 2));
  CHECK(c1.x == Approx(1.0));
  CHECK(c1.y == Approx(1.0));
  const Point2 c2 = centroid(ConvexPolygon{{{0, 0}, {3, 0}, {0, 3}}});
  CHECK(c2.x == Approx(1.0));
  CHECK(c2.y == Approx(1.0));
  const Point2 c3 = centroid(make_box(0, 0, 1, 0.5));
  CHECK(c3.x == Approx(0.5));
  CHECK(c3.y == Approx(0.25));
}

TEST_CASE("second_moment closed form") {
  CHECK(second_moment(unit_square, {0, 0}) == Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(second_moment(make_box(-1, -1, 1, 1), {0, 0}) ==
        Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(second_moment(ConvexPolygon{}, {3, 3}) == 0.0);
}

TEST_CASE("second_moment matches a Monte-Carlo estimate") {
  Rng rng(17);
  const ConvexPolygon poly = random_convex_polygon(rng, 9, 1.3);
  const Point2 p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
  const BBox bb = bounding_box(poly);
  const long n = 10'000'000;
  long hits = 0;
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const Point2 x = rng.in_box(bb);
    if (!contains(poly, x)) continue;
    ++hits;
    acc += norm2(x - p);
  }
  const double box_area = (bb.xmax - bb.xmin) * (bb.ymax - bb.ymin);
  const double mc = acc / n * box_area;
  CHECK(std::abs(mc - second_moment(poly, p)) / second_moment(poly, p) < 1e-3);
  CHECK(static_cast<double>(hits) / n * box_area ==
        Approx(area(poly)).epsilon(1e-3));
}

TEST_CASE("second_moment identities") {
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const ConvexPolygon poly = random_convex_polygon(rng);
    const Point2 p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point2 c = centroid(poly);
    const double a = area(poly);
    const double direct = second_moment(poly, p);
    const double shifted = second_moment(poly, c) + a * norm2(p - c);
    CHECK(direct == Approx(shifted).epsilon(1e-10));
    const double d = dist_to_polygon(poly, p);
    CHECK(direct >= a * d * d - 1e-12);
  }
}

TEST_CASE("steiner point") {
  SECTION("symmetry and equivariance") {
    const ConvexPolygon sq = make_square(2.0);
    const Point2 s = steiner_point(sq);
    CHECK(std::abs(s.x) < 1e-14);
    CHECK(std::abs(s.y) < 1e-14);
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
      ConvexPolygon poly = random_convex_polygon(rng);
      const Point2 v{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      const Point2 s0 = steiner_point(poly);
      for (Point2& q : poly.v) q += v;
      const Point2 s1 = steiner_point(poly);
      CHECK(dist(s1, s0 + v) < 1e-12);
    }
  }
  SECTION("interior and Minkowski additivity") {
    Rng rng(37);
    for (int i = 0; i < 30; ++i) {
      const ConvexPolygon a = random_convex_polygon(rng);
      const ConvexPolygon b = random_convex_polygon(rng);
      CHECK(contains(a, steiner_point(a)));
      const double t = rng.uniform(0.1, 0.9);
      const ConvexPolygon mix = minkowski_interpolate(a, b, t);
      const Point2 expect =
          (1 - t) * steiner_point(a) + t * steiner_point(b);
      CHECK(dist(steiner_point(mix), expect) < 1e-9);
    }
  }
}

TEST_CASE("minkowski_interpolate") {
  Rng rng(41);
  const ConvexPolygon a = random_convex_polygon(rng);
  const ConvexPolygon b = random_convex_polygon(rng);
  SECTION("endpoints") {
    CHECK(area(minkowski_interpolate(a, b, 0.0)) == Approx(area(a)));
    CHECK(area(minkowski_interpolate(a, b, 1.0)) == Approx(area(b)));
  }
  SECTION("identical operands reproduce the polygon") {
    const ConvexPolygon m = minkowski_interpolate(a, a, 0.37);
    CHECK(area(m) == Approx(area(a)).epsilon(1e-12));
    for (const Point2& v : m.v) CHECK(dist_to_polygon(a, v) < 1e-12);
  }
  SECTION("Brunn-Minkowski concavity of sqrt(area)") {
    for (int i = 0; i < 40; ++i) {
      const ConvexPolygon x = random_convex_polygon(rng);
      const ConvexPolygon y = random_convex_polygon(rng);
      const double t = rng.uniform(0.05, 0.95);
      const double lhs = std::sqrt(area(minkowski_interpolate(x, y, t)));
      const double rhs =
          (1 - t) * std::sqrt(area(x)) + t * std::sqrt(area(y));
      CHECK(lhs >= rhs - 1e-10);
    }
  }
}

TEST_CASE("domain validation") {
  CHECK_THROWS(ConvexDomain(ConvexPolygon{{{0, 0}, {0, 1}, {1, 0}}})); // CW
  CHECK_THROWS(ConvexDomain(ConvexPolygon{{{0, 0}, {1, 0}, {2, 0}, {0, 1}}}));
  const ConvexDomain d(make_square(2.0));
  CHECK(d.domain_area() == Approx(4.0));
  CHECK(d.num_segments() == 4);
}
