// Laguerre (power) diagrams clipped to a convex polygon, together with the
// dual complex over sites and boundary segments.
//
// Cells are built by robust half-plane intersection with constraint
// provenance: every edge of a finished cell remembers which site bisector
// or boundary segment produced it, which makes extraction of the dual
// edges/triangles a local walk.  Exact side decisions with a deterministic
// index-based tie rule stand in for symbolic perturbation, so degenerate
// inputs still produce a consistent complex.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgf2d/geom2d.hpp"

namespace wgf2d {

using PotentialVector = Eigen::VectorXd;

struct SiteSet {
  std::vector<Point2> pts;

  SiteSet() = default;
  explicit SiteSet(std::vector<Point2> p) : pts(std::move(p)) {}
  int size() const { return static_cast<int>(pts.size()); }
  Point2 operator[](int i) const { return pts[i]; }
};

// Dual ids: values < n_sites are sites, n_sites + j is boundary segment j.
inline bool is_site_id(int id, int n_sites) { return id < n_sites; }

struct DualTriangle {
  std::array<int, 3> ids; // sorted ascending; at least one site
  Point2 pos;
};

struct DualEdge {
  int a = -1, b = -1; // dual ids, a < b; a is always a site
  int tri0 = -1, tri1 = -1; // triangles at the two endpoints
  Point2 p0, p1;
  double length = 0.0;
  bool site_site() const { return tri1 >= 0 && b >= 0; }
};

// Distance-sorted neighbor lists; reusable across potentials for the same
// site set (e.g. across Newton iterations).
struct SiteOrdering {
  std::vector<std::vector<int>> order;

  static SiteOrdering build(const SiteSet& sites) {
    const int n = sites.size();
    SiteOrdering so;
    so.order.resize(n);
    // Above this size the quadratic table is not worth the memory; the
    // per-constraint pruning test still applies in index order.
    const bool sorted = n <= 4096;
    for (int p = 0; p < n; ++p) {
      auto& ord = so.order[p];
      ord.reserve(n - 1);
      for (int q = 0; q < n; ++q)
        if (q != p) ord.push_back(q);
      if (sorted) {
        const Point2 pp = sites[p];
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
          const double da = norm2(sites[a] - pp), db = norm2(sites[b] - pp);
          return da < db || (da == db && a < b);
        });
      }
    }
    return so;
  }
};

class LaguerreDiagram {
 public:
  SiteSet sites;
  ConvexDomain domain;
  std::vector<ConvexPolygon> cells;          // per site; empty polygon = empty cell
  std::vector<std::vector<int>> cell_tags;   // per site, tag of edge i of cells[i]
  std::vector<double> areas;                 // per site
  std::vector<DualTriangle> triangles;
  std::vector<DualEdge> edges;
  std::vector<std::vector<int>> site_edges;  // per site, incident edge indices

  int n_sites() const { return sites.size(); }
  int n_segments() const { return domain.num_segments(); }
  double empty_tolerance() const { return 1e-14 * domain.domain_area(); }
  bool cell_empty(int p) const { return areas[p] < empty_tolerance(); }
  bool all_nonempty() const {
    for (int p = 0; p < n_sites(); ++p)
      if (cell_empty(p)) return false;
    return true;
  }
  double area_sum() const {
    double s = 0.0;
    for (double a : areas) s += a;
    return s;
  }
  std::optional<int> find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = edge_index_.find({a, b});
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }

  std::map<std::pair<int, int>, int> edge_index_;
  std::map<std::array<int, 3>, int> triangle_index_;
};

namespace detail {

struct TaggedCell {
  std::vector<Point2> v;
  std::vector<int> tag; // tag[i] belongs to edge v[i] -> v[i+1]
};

// Clip {<a,y> <= b}; ties on the line count as inside iff tie_inside.
// Returns false when the cell becomes empty.
inline bool clip_tagged(TaggedCell& c, Point2 a, double b, int newtag,
                        bool tie_inside) {
  const int n = static_cast<int>(c.v.size());
  if (n == 0) return false;
  static thread_local std::vector<int> inside;
  static thread_local std::vector<double> val;
  inside.resize(n);
  val.resize(n);
  bool any_in = false, any_out = false;
  for (int i = 0; i < n; ++i) {
    const int s = halfplane_side(a.x, a.y, b, c.v[i].x, c.v[i].y);
    inside[i] = s < 0 || (s == 0 && tie_inside);
    val[i] = dot(a, c.v[i]) - b;
    (inside[i] ? any_in : any_out) = true;
  }
  if (!any_out) return true;
  if (!any_in) {
    c.v.clear();
    c.tag.clear();
    return false;
  }
  static thread_local std::vector<Point2> nv;
  static thread_local std::vector<int> nt;
  nv.clear();
  nt.clear();
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (inside[i]) {
      nv.push_back(c.v[i]);
      nt.push_back(c.tag[i]);
    }
    if (inside[i] != inside[j]) {
      const double denom = val[i] - val[j];
      double t = denom != 0.0 ? val[i] / denom : 0.5;
      t = std::clamp(t, 0.0, 1.0);
      const Point2 x = c.v[i] + t * (c.v[j] - c.v[i]);
      nv.push_back(x);
      nt.push_back(inside[i] ? newtag : c.tag[i]);
    }
  }
  c.v = nv;
  c.tag = nt;
  return c.v.size() >= 3;
}

// Merge near-duplicate vertices and collapse runs of edges sharing a tag.
inline void cleanup_cell(TaggedCell& c, double tol) {
  const int n = static_cast<int>(c.v.size());
  if (n == 0) return;
  std::vector<Point2> nv;
  std::vector<int> nt;
  nv.reserve(n);
  nt.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!nv.empty() && dist(nv.back(), c.v[i]) <= tol) {
      // Vertex collapses onto the previous one; the incoming edge vanished,
      // keep the outgoing tag.
      nt.back() = c.tag[i];
      continue;
    }
    nv.push_back(c.v[i]);
    nt.push_back(c.tag[i]);
  }
  while (nv.size() >= 2 && dist(nv.front(), nv.back()) <= tol) {
    nv.pop_back();
    nt.pop_back();
  }
  // Merge consecutive edges carrying the same tag (collinear by
  // construction).
  std::vector<Point2> mv;
  std::vector<int> mt;
  const int m = static_cast<int>(nv.size());
  for (int i = 0; i < m; ++i) {
    const int prev = (i + m - 1) % m;
    if (m >= 2 && nt[prev] == nt[i]) continue; // drop interior vertex
    mv.push_back(nv[i]);
    mt.push_back(nt[i]);
  }
  if (mv.size() < 3) {
    c.v.clear();
    c.tag.clear();
    return;
  }
  c.v = mv;
  c.tag = mt;
}

} // namespace detail

// Solves the 2x2 system that pins the common point of three dual cells.
// ids must be sorted ascending with ids[0] a site.  Returns the relative
// condition measure through *cond (larger is worse).
inline bool solve_dual_vertex(const std::array<int, 3>& ids,
                              const SiteSet& sites, const PotentialVector& phi,
                              const ConvexDomain& domain, Point2& out,
                              double* cond = nullptr) {
  const int n = sites.size();
  if (ids[0] < 0 || ids[0] >= n) return false;
  if (ids[2] >= n + domain.num_segments()) return false;
  if (ids[0] == ids[1] || ids[1] == ids[2]) return false;
  const int nsites = static_cast<int>(is_site_id(ids[0], n)) +
                     static_cast<int>(is_site_id(ids[1], n)) +
                     static_cast<int>(is_site_id(ids[2], n));
  if (nsites == 1) {
    // Two boundary segments; if adjacent, the exact domain corner.
    const int s1 = ids[1] - n, s2 = ids[2] - n;
    const int k = domain.num_segments();
    if ((s1 + 1) % k == s2) {
      out = domain.segment_a(s2);
      if (cond) *cond = 1.0;
      return true;
    }
    if ((s2 + 1) % k == s1) {
      out = domain.segment_a(s1);
      if (cond) *cond = 1.0;
      return true;
    }
  }
  const Point2 base = sites[ids[0]];
  Point2 r[2];
  double rhs[2];
  for (int k = 0; k < 2; ++k) {
    const int e = ids[k + 1];
    if (is_site_id(e, n)) {
      r[k] = sites[e] - base;
      rhs[k] = phi[e] - phi[ids[0]];
    } else {
      domain.line(e - n, r[k], rhs[k]);
    }
  }
  const double det = cross(r[0], r[1]);
  const double scale = norm(r[0]) * norm(r[1]);
  if (cond) *cond = scale > 0 && det != 0.0 ? scale / std::abs(det)
                                            : std::numeric_limits<double>::infinity();
  if (det == 0.0 || scale == 0.0 || !(std::abs(det) > 0)) return false;
  out.x = (rhs[0] * r[1].y - rhs[1] * r[0].y) / det;
  out.y = (r[0].x * rhs[1] - r[1].x * rhs[0]) / det;
  return finite(out);
}

// Point where the three listed cells meet.  Throws when the triple is
// degenerate (near-singular line system).
inline Point2 cell_vertex(int p, int q, int r, const SiteSet& sites,
                          const PotentialVector& phi,
                          const ConvexDomain& domain) {
  std::array<int, 3> ids{p, q, r};
  std::sort(ids.begin(), ids.end());
  Point2 out;
  double cond = 0.0;
  if (!solve_dual_vertex(ids, sites, phi, domain, out, &cond) || cond > 1e14)
    throw std::runtime_error("cell_vertex: singular system for triple (" +
                             std::to_string(p) + "," + std::to_string(q) + "," +
                             std::to_string(r) + ")");
  return out;
}

inline LaguerreDiagram build_diagram(const SiteSet& sites,
                                     const PotentialVector& phi,
                                     const ConvexDomain& domain,
                                     const SiteOrdering& ordering) {
  const int n = sites.size();
  if (n == 0) throw std::invalid_argument("build_diagram: empty site set");
  if (phi.size() != n)
    throw std::invalid_argument("build_diagram: potential size mismatch");
  for (int i = 0; i < n; ++i)
    if (!finite(sites[i]) || !std::isfinite(phi[i]))
      throw std::invalid_argument("build_diagram: non-finite input at site " +
                                  std::to_string(i));
  {
    // Exact duplicates cannot be resolved by the index tie rule.
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const Point2 pa = sites[a], pb = sites[b];
      return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
    });
    for (int i = 0; i + 1 < n; ++i)
      if (sites[idx[i]] == sites[idx[i + 1]])
        throw std::runtime_error("build_diagram: duplicate sites " +
                                 std::to_string(idx[i]) + " and " +
                                 std::to_string(idx[i + 1]));
  }

  LaguerreDiagram d;
  d.sites = sites;
  d.domain = domain;
  d.cells.resize(n);
  d.cell_tags.resize(n);
  d.areas.assign(n, 0.0);
  d.site_edges.resize(n);

  const double merge_tol = 1e-12 * domain.domain_diameter();
  const int nseg = domain.num_segments();

  std::vector<detail::TaggedCell> built(n);
  for (int p = 0; p < n; ++p) {
    detail::TaggedCell cell;
    cell.v = domain.polygon().v;
    cell.tag.resize(nseg);
    for (int j = 0; j < nseg; ++j) cell.tag[j] = n + j;

    BBox bb = bounding_box(domain.polygon());
    Point2 c = bb.center();
    double radius = 0.0;
    for (const Point2& vv : cell.v) radius = std::max(radius, dist(c, vv));

    for (int q : ordering.order[p]) {
      const Point2 a = sites[q] - sites[p];
      const double b = phi[q] - phi[p];
      if (dot(a, c) + norm(a) * radius <= b) continue; // cell untouched
      if (!detail::clip_tagged(cell, a, b, q, /*tie_inside=*/q < p)) break;
      BBox nb;
      for (const Point2& vv : cell.v) nb.add(vv);
      c = nb.center();
      radius = 0.0;
      for (const Point2& vv : cell.v) radius = std::max(radius, dist(c, vv));
    }
    detail::cleanup_cell(cell, merge_tol);
    built[p] = std::move(cell);
  }

  // Dual triangles: one per cell corner, keyed by the sorted triple of the
  // cell id and the two adjacent constraint tags.
  auto triangle_of = [&](int cellid, int t1, int t2) {
    std::array<int, 3> key{cellid, t1, t2};
    std::sort(key.begin(), key.end());
    auto it = d.triangle_index_.find(key);
    if (it != d.triangle_index_.end()) return it->second;
    const int idx = static_cast<int>(d.triangles.size());
    DualTriangle tri;
    tri.ids = key;
    Point2 pos;
    double cond = 0.0;
    if (solve_dual_vertex(key, sites, phi, domain, pos, &cond) && cond < 1e14)
      tri.pos = pos;
    else
      tri.pos = Point2{std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN()};
    d.triangles.push_back(tri);
    d.triangle_index_.emplace(key, idx);
    return idx;
  };

  for (int p = 0; p < n; ++p) {
    auto& cell = built[p];
    const int m = static_cast<int>(cell.v.size());
    if (m == 0) {
      d.cells[p] = ConvexPolygon{};
      continue;
    }
    // Canonical vertex positions: re-solve each corner from its generating
    // constraints so that the same triple yields bit-identical coordinates
    // in every incident cell.
    for (int i = 0; i < m; ++i) {
      const int tprev = cell.tag[(i + m - 1) % m];
      const int tcur = cell.tag[i];
      const int tri = triangle_of(p, tprev, tcur);
      const Point2 pos = d.triangles[tri].pos;
      if (finite(pos) && dist(pos, cell.v[i]) <= 1e-6 * domain.domain_diameter())
        cell.v[i] = pos;
    }
    d.cells[p] = ConvexPolygon{cell.v};
    d.cell_tags[p] = cell.tag;
    d.areas[p] = area(d.cells[p]);
  }

  // Dual edges, geometry owned by the lowest incident site id.
  for (int p = 0; p < n; ++p) {
    const auto& cell = built[p];
    const int m = static_cast<int>(cell.v.size());
    for (int i = 0; i < m; ++i) {
      const int t = cell.tag[i];
      const int a = std::min(p, t), b = std::max(p, t);
      // Cells are scanned in id order, so the lower incident site id gets
      // to define the geometry; a later cell only fills in edges the owner
      // dropped during cleanup.
      if (d.edge_index_.count({a, b})) continue;
      DualEdge e;
      e.a = a;
      e.b = b;
      const int tprev = cell.tag[(i + m - 1) % m];
      const int tnext = cell.tag[(i + 1) % m];
      e.tri0 = triangle_of(p, tprev, t);
      e.tri1 = triangle_of(p, t, tnext);
      const Point2 q0 = d.triangles[e.tri0].pos;
      const Point2 q1 = d.triangles[e.tri1].pos;
      e.p0 = finite(q0) ? q0 : cell.v[i];
      e.p1 = finite(q1) ? q1 : cell.v[(i + 1) % m];
      e.length = dist(e.p0, e.p1);
      const int idx = static_cast<int>(d.edges.size());
      d.edges.push_back(e);
      d.edge_index_.emplace(std::make_pair(a, b), idx);
      d.site_edges[p].push_back(idx);
      if (is_site_id(t, n)) d.site_edges[t].push_back(idx);
    }
  }
  return d;
}

inline LaguerreDiagram build_diagram(const SiteSet& sites,
                                     const PotentialVector& phi,
                                     const ConvexDomain& domain) {
  return build_diagram(sites, phi, domain, SiteOrdering::build(sites));
}

inline bool is_interpolate(const LaguerreDiagram& d) { return d.all_nonempty(); }

inline bool is_interpolate(const SiteSet& sites, const PotentialVector& phi,
                           const ConvexDomain& domain) {
  return build_diagram(sites, phi, domain).all_nonempty();
}

struct GenericityReport {
  std::vector<std::array<int, 3>> collinear_triples;
  struct BisectorHit {
    int p, q, segment;
  };
  std::vector<BisectorHit> bisector_segment_hits;
  bool ok() const {
    return collinear_triples.empty() && bisector_segment_hits.empty();
  }
};

// Advisory check of the generic-position assumptions: no collinear site
// triples, no pair bisector collinear with a boundary segment.
inline GenericityReport genericity_check(const SiteSet& sites,
                                         const ConvexDomain& domain) {
  GenericityReport rep;
  const int n = sites.size();
  std::set<std::array<int, 3>> triples;
  for (int p = 0; p < n; ++p) {
    // Sort the other sites by direction from p; collinear triples show up
    // as equal (or opposite) directions.
    std::vector<std::pair<double, int>> dirs;
    dirs.reserve(n - 1);
    for (int q = 0; q < n; ++q) {
      if (q == p) continue;
      Point2 v = sites[q] - sites[p];
      if (v.y < 0 || (v.y == 0 && v.x < 0)) v = -v; // half-turn canonical
      dirs.emplace_back(std::atan2(v.y, v.x), q);
    }
    std::sort(dirs.begin(), dirs.end());
    for (size_t i = 0; i + 1 < dirs.size(); ++i) {
      const int a = dirs[i].second, b = dirs[i + 1].second;
      const Point2 pp = sites[p], pa = sites[a], pb = sites[b];
      if (orient2d(pp.x, pp.y, pa.x, pa.y, pb.x, pb.y) == 0) {
        std::array<int, 3> t{p, a, b};
        std::sort(t.begin(), t.end());
        triples.insert(t);
      }
    }
  }
  rep.collinear_triples.assign(triples.begin(), triples.end());

  const double tol = 1e-12 * domain.domain_diameter();
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const Point2 nrm = sites[q] - sites[p];
      const double len = norm(nrm);
      if (len == 0) continue;
      const double c = dot(nrm, 0.5 * (sites[p] + sites[q]));
      for (int s = 0; s < domain.num_segments(); ++s) {
        const Point2 a = domain.segment_a(s), b = domain.segment_b(s);
        if (std::abs(dot(nrm, a) - c) <= tol * len &&
            std::abs(dot(nrm, b) - c) <= tol * len)
          rep.bisector_segment_hits.push_back({p, q, s});
      }
    }
  }
  return rep;
}

} // namespace wgf2d
