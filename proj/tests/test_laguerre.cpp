#include "test_support.hpp"

using namespace wgf2d;
using namespace wgf2d::testing;
using Catch::Approx;

namespace {

// Worst slack of the defining inequalities of cell p at point z.
double cell_violation(const SiteSet& sites, const PotentialVector& phi,
                      const ConvexDomain& domain, int p, Point2 z) {
  double worst = 0.0;
  for (int q = 0; q < sites.size(); ++q) {
    if (q == p) continue;
    worst = std::max(worst, phi[p] + dot(sites[q] - sites[p], z) - phi[q]);
  }
  for (int s = 0; s < domain.num_segments(); ++s)
    worst = std::max(worst, domain.halfplane(s).signed_value(z));
  return worst;
}

} // namespace

TEST_CASE("single site occupies the whole domain") {
  const ConvexDomain Y(make_box(0, 0, 1, 1));
  const SiteSet P(std::vector<Point2>{{0, 0}});
  const LaguerreDiagram d = build_diagram(P, Eigen::VectorXd::Zero(1), Y);
  CHECK(d.areas[0] == Approx(1.0));
  CHECK(d.triangles.size() == 4); // one per domain corner
  CHECK(d.edges.size() == 4);     // one per boundary segment
  CHECK(is_interpolate(d));
}

TEST_CASE("two symmetric sites split the square") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{-1, 0}, {1, 0}});
  const PotentialVector phi = Eigen::VectorXd::Zero(2);
  const LaguerreDiagram d = build_diagram(P, phi, Y);
  CHECK(d.areas[0] == Approx(2.0));
  CHECK(d.areas[1] == Approx(2.0));
  const auto e = d.find_edge(0, 1);
  REQUIRE(e.has_value());
  CHECK(d.edges[*e].length == Approx(2.0));

  // Dual vertex with the top boundary segment (segment 2, dual id 2 + 2).
  const Point2 v = cell_vertex(0, 1, 2 + 2, P, phi, Y);
  CHECK(v.x == Approx(0.0).margin(1e-12));
  CHECK(v.y == Approx(1.0).margin(1e-12));
}

TEST_CASE("cell vanishes past the assignment threshold") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{-1, 0}, {1, 0}});
  // Cell of site 1 is {2x >= c} in the square: empty exactly when c > 2.
  for (double c : {1.9, 2.1}) {
    PotentialVector phi(2);
    phi << 0.0, c;
    const LaguerreDiagram d = build_diagram(P, phi, Y);
    const McAreaEstimate mc = mc_area_oracle(P, phi, Y, 20000, 99);
    if (c < 2.0) {
      CHECK(!d.cell_empty(1));
      CHECK(is_interpolate(d));
      CHECK(mc.area[1] > 0.0);
      CHECK(std::abs(mc.area[1] - d.areas[1]) <= 4 * mc.std_error[1] + 1e-12);
    } else {
      CHECK(d.cell_empty(1));
      CHECK(!is_interpolate(d));
      CHECK(mc.area[1] == 0.0);
    }
  }
}

TEST_CASE("adding a constant leaves the diagram unchanged") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(3);
  const SiteSet P = random_sites(20, Y, rng);
  // Potential values on a coarse binary grid so that adding an integer
  // constant is exact in floating point.
  PotentialVector phi(20);
  for (int i = 0; i < 20; ++i)
    phi[i] = std::round((0.5 * norm2(P[i]) + 0.1 * rng.normal()) * 1048576.0) /
             1048576.0;
  const LaguerreDiagram d0 = build_diagram(P, phi, Y);
  const LaguerreDiagram d1 =
      build_diagram(P, phi + Eigen::VectorXd::Constant(20, 3.0), Y);
  for (int p = 0; p < 20; ++p) CHECK(d0.areas[p] == d1.areas[p]);
  CHECK(is_interpolate(P, phi, Y) ==
        is_interpolate(P, phi + Eigen::VectorXd::Constant(20, 0.37), Y));
}

TEST_CASE("partition of the domain") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(7);
  for (int i = 0; i < 30; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform() * 60);
    const SiteSet P = random_sites(n, Y, rng);
    const PotentialVector phi = random_interior_potential(P, Y, rng, 0.2);
    const LaguerreDiagram d = build_diagram(P, phi, Y);
    CHECK(std::abs(d.area_sum() - Y.domain_area()) <=
          1e-9 * Y.domain_area());
  }
}

TEST_CASE("cells interpolate along potential segments (inclusion)") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(13);
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    const int n = 4 + static_cast<int>(rng.uniform() * 12);
    const SiteSet P = random_sites(n, Y, rng);
    const PotentialVector a = random_interior_potential(P, Y, rng, 0.2);
    const PotentialVector b = random_interior_potential(P, Y, rng, 0.2);
    const double t = rng.uniform(0.1, 0.9);
    const PotentialVector mid = (1 - t) * a + t * b;
    const LaguerreDiagram da = build_diagram(P, a, Y);
    const LaguerreDiagram db = build_diagram(P, b, Y);
    for (int p = 0; p < n; ++p) {
      if (da.cell_empty(p) || db.cell_empty(p)) continue;
      const ConvexPolygon mix =
          minkowski_interpolate(da.cells[p], db.cells[p], t);
      const BBox bb = bounding_box(mix);
      for (int s = 0; s < 5; ++s) {
        Point2 z;
        do {
          z = rng.in_box(bb);
        } while (!contains(mix, z));
        CHECK(cell_violation(P, mid, Y, p, z) <= 1e-9);
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("dual complex satisfies the Euler relation") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(19);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform() * 40);
    const SiteSet P = random_sites(n, Y, rng);
    const PotentialVector phi = random_interior_potential(P, Y, rng, 0.15);
    const LaguerreDiagram d = build_diagram(P, phi, Y);
    int cells = 0;
    for (int p = 0; p < n; ++p)
      if (!d.cell_empty(p)) ++cells;
    const int V = static_cast<int>(d.triangles.size());
    const int E = static_cast<int>(d.edges.size());
    CHECK(V - E + cells == 1);
  }
}

TEST_CASE("dual vertices lie on all three cells") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(23);
  const SiteSet P = random_sites(25, Y, rng);
  const PotentialVector phi = random_interior_potential(P, Y, rng, 0.2);
  const LaguerreDiagram d = build_diagram(P, phi, Y);
  int site_triangles = 0;
  for (const DualTriangle& tri : d.triangles) {
    REQUIRE(finite(tri.pos));
    for (int id : tri.ids) {
      if (!is_site_id(id, d.n_sites())) continue;
      CHECK(cell_violation(P, phi, Y, id, tri.pos) <= 1e-9);
    }
    if (is_site_id(tri.ids[2], d.n_sites())) ++site_triangles;
    // Consistency with the public solver.
    const Point2 v = cell_vertex(tri.ids[0], tri.ids[1], tri.ids[2], P, phi, Y);
    CHECK(dist(v, tri.pos) <= 1e-9);
  }
  CHECK(site_triangles > 0);
}

TEST_CASE("three equidistant sites meet at the center") {
  const ConvexDomain Y(make_square(4.0));
  std::vector<Point2> pts;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    pts.push_back({std::cos(a), std::sin(a)});
  }
  const SiteSet P(pts);
  const PotentialVector phi = Eigen::VectorXd::Zero(3);
  const Point2 v = cell_vertex(0, 1, 2, P, phi, Y);
  CHECK(std::abs(v.x) < 1e-12);
  CHECK(std::abs(v.y) < 1e-12);
}

TEST_CASE("laguerre cells equal power cells") {
  // With weights w_p = |p|^2 - 2 phi_p, the nearest-power site is the
  // affine-maximal site.
  const ConvexDomain Y(make_square(4.0));
  Rng rng(29);
  const SiteSet P = random_sites(15, Y, rng);
  const PotentialVector phi = random_interior_potential(P, Y, rng, 0.3);
  const LaguerreDiagram d = build_diagram(P, phi, Y);
  for (int i = 0; i < 2000; ++i) {
    const Point2 y = rng.in_polygon(Y.polygon());
    int amax = 0, pmin = 0;
    double vmax = -1e300, vmin = 1e300;
    for (int p = 0; p < P.size(); ++p) {
      const double affine = dot(y, P[p]) - phi[p];
      if (affine > vmax) { vmax = affine; amax = p; }
      const double w = norm2(P[p]) - 2.0 * phi[p];
      const double pw = norm2(y - P[p]) - w;
      if (pw < vmin) { vmin = pw; pmin = p; }
    }
    CHECK(amax == pmin);
    // The assigned cell contains the sample (up to boundary tolerance).
    CHECK(cell_violation(P, phi, Y, amax, y) <= 1e-9);
    if (i < 200) CHECK(dist_to_polygon(d.cells[amax], y) <= 1e-9);
  }
}

TEST_CASE("genericity report") {
  const ConvexDomain Y(make_square(4.0));
  SECTION("collinear triple") {
    const SiteSet P(std::vector<Point2>{{0, 0}, {0.5, 0.5}, {1, 1}, {0.3, -0.7}});
    const GenericityReport rep = genericity_check(P, Y);
    REQUIRE(rep.collinear_triples.size() == 1);
    CHECK(rep.collinear_triples[0] == std::array<int, 3>{0, 1, 2});
  }
  SECTION("bisector collinear with a boundary segment") {
    // Square with its bottom edge on the line y = 0.
    const ConvexDomain D(make_box(-1, 0, 1, 2));
    const SiteSet P(std::vector<Point2>{{0, -1}, {0, 1}});
    const GenericityReport rep = genericity_check(P, D);
    REQUIRE(rep.bisector_segment_hits.size() == 1);
    CHECK(rep.bisector_segment_hits[0].p == 0);
    CHECK(rep.bisector_segment_hits[0].q == 1);
  }
  SECTION("random points are generic") {
    Rng rng(31);
    const SiteSet P = random_sites(40, Y, rng);
    CHECK(genericity_check(P, Y).ok());
  }
}

TEST_CASE("duplicate sites are rejected with a diagnostic") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{0.1, 0.2}, {0.3, 0.4}, {0.1, 0.2}});
  CHECK_THROWS_WITH(build_diagram(P, Eigen::VectorXd::Zero(3), Y),
                    Catch::Matchers::ContainsSubstring("duplicate sites"));
}
