// Cell areas of a clipped Laguerre diagram as an operator on the potential,
// with sparse first and second derivatives.
//
// The derivative structure rides on the dual complex: moving phi(q) slides
// the (p,q) bisector, so first derivatives are line integrals over shared
// edges and second derivatives come from differentiating the edge endpoints
// through the 2x2 vertex systems.  The same assembly works for any fixed
// integrand, which the energy layer uses for density-weighted terms.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "wgf2d/integrate.hpp"
#include "wgf2d/laguerre.hpp"

namespace wgf2d {

using MaVector = Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double>;

enum class HessianMode { analytic, fd_of_jacobian };

struct MaHessianEntry {
  int p, q, r; // d^2 F_p / dphi_q dphi_r, ordered pair (q,r)
  double value;
};

struct MaHessian {
  int n = 0;
  std::vector<MaHessianEntry> entries;

  // sum_p w_p * H_p as a sparse matrix (entries land at (q,r) as stored).
  SparseMat contract(const Eigen::VectorXd& w) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(entries.size());
    for (const auto& e : entries) trip.emplace_back(e.q, e.r, w[e.p] * e.value);
    SparseMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  // Dense per-site matrices; test support for small instances.
  std::vector<Eigen::MatrixXd> dense() const {
    std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd::Zero(n, n));
    for (const auto& e : entries) out[e.p](e.q, e.r) += e.value;
    return out;
  }
};

// Derivative of a dual vertex position with respect to the potential values
// of the sites that generate it.
struct VertexDerivs {
  int nsite = 0;
  std::array<int, 3> site{{-1, -1, -1}};
  std::array<Point2, 3> d{};
  bool degenerate = false;
};

inline VertexDerivs vertex_derivatives(const DualTriangle& tri,
                                       const SiteSet& sites,
                                       const ConvexDomain& domain) {
  VertexDerivs out;
  const int n = sites.size();
  const int base = tri.ids[0];
  Point2 r[2];
  double dummy;
  bool row_is_site[2];
  for (int k = 0; k < 2; ++k) {
    const int e = tri.ids[k + 1];
    row_is_site[k] = is_site_id(e, n);
    if (row_is_site[k])
      r[k] = sites[e] - sites[base];
    else
      domain.line(e - n, r[k], dummy);
  }
  const double det = cross(r[0], r[1]);
  const double scale = norm(r[0]) * norm(r[1]);
  if (!(std::abs(det) * 1e12 > scale)) {
    out.degenerate = true;
    out.site[0] = base;
    out.nsite = 1;
    for (int k = 0; k < 2; ++k)
      if (row_is_site[k]) out.site[out.nsite++] = tri.ids[k + 1];
    return out;
  }
  // Columns of A^{-1}.
  const Point2 col0{r[1].y / det, -r[1].x / det};
  const Point2 col1{-r[0].y / det, r[0].x / det};
  Point2 dbase{0, 0};
  out.site[out.nsite] = base;
  int base_slot = out.nsite++;
  if (row_is_site[0]) {
    out.site[out.nsite] = tri.ids[1];
    out.d[out.nsite] = col0;
    ++out.nsite;
    dbase -= col0;
  }
  if (row_is_site[1]) {
    out.site[out.nsite] = tri.ids[2];
    out.d[out.nsite] = col1;
    ++out.nsite;
    dbase -= col1;
  }
  out.d[base_slot] = dbase;
  return out;
}

// Integrand for per-cell integrals; depends on the cell's site.  A null
// value function means the constant 1.
struct CellIntegrand {
  std::function<double(int, Point2)> value;
  std::function<Point2(int, Point2)> grad;
  int degree = 0;
};

struct CellFieldData {
  Eigen::VectorXd F;
  SparseMat dF;
  MaHessian d2F;
};

// Lazily filled vertex-derivative cache, shareable between several field
// assemblies over the same diagram.
struct VertexDerivCache {
  std::vector<VertexDerivs> derivs;
  std::vector<char> ready;
  const VertexDerivs& get(const LaguerreDiagram& d, int t) {
    if (derivs.empty()) {
      derivs.resize(d.triangles.size());
      ready.assign(d.triangles.size(), 0);
    }
    if (!ready[t]) {
      derivs[t] = vertex_derivatives(d.triangles[t], d.sites, d.domain);
      ready[t] = 1;
    }
    return derivs[t];
  }
};

namespace detail {

// Rebuild a single cell under a modified potential and integrate f along
// the edge shared with q; used as a fallback when a dual vertex system is
// too ill-conditioned for the analytic endpoint derivative.
inline double edge_integral_rebuilt(int p, int q, const SiteSet& sites,
                                    const PotentialVector& phi,
                                    const ConvexDomain& domain,
                                    const CellIntegrand* f, int fsite) {
  const int n = sites.size();
  TaggedCell cell;
  cell.v = domain.polygon().v;
  cell.tag.resize(domain.num_segments());
  for (int j = 0; j < domain.num_segments(); ++j) cell.tag[j] = n + j;
  for (int s = 0; s < n; ++s) {
    if (s == p) continue;
    const Point2 a = sites[s] - sites[p];
    if (!clip_tagged(cell, a, phi[s] - phi[p], s, s < p)) return 0.0;
  }
  cleanup_cell(cell, 1e-12 * domain.domain_diameter());
  const int m = static_cast<int>(cell.v.size());
  for (int i = 0; i < m; ++i) {
    if (cell.tag[i] != q) continue;
    const Point2 a = cell.v[i], b = cell.v[(i + 1) % m];
    if (!f || !f->value) return dist(a, b);
    return line_integral(a, b, [&](Point2 x) { return f->value(fsite, x); },
                         f->degree);
  }
  return 0.0;
}

} // namespace detail

// Per-cell integrals of f with first and (optionally) second derivatives in
// the potential.
inline CellFieldData assemble_cell_field(const LaguerreDiagram& d,
                                         const PotentialVector& phi,
                                         const CellIntegrand* f,
                                         bool want_hessian,
                                         VertexDerivCache* shared_cache = nullptr) {
  const int n = d.n_sites();
  CellFieldData out;
  out.F.resize(n);
  out.d2F.n = n;
  const bool constant = !f || !f->value;
  for (int p = 0; p < n; ++p) {
    if (constant)
      out.F[p] = d.areas[p];
    else
      out.F[p] = polygon_integral(
          d.cells[p], [&](Point2 x) { return f->value(p, x); }, f->degree);
  }

  std::vector<Eigen::Triplet<double>> jt;
  VertexDerivCache local_cache;
  VertexDerivCache& cache = shared_cache ? *shared_cache : local_cache;
  auto get_vd = [&](int t) -> const VertexDerivs& { return cache.get(d, t); };

  const LineRule rule = line_rule(f ? f->degree : 0);
  const double len_floor = 1e-15 * d.domain.domain_diameter();

  for (const DualEdge& e : d.edges) {
    if (!is_site_id(e.b, n)) continue; // boundary edges carry no derivative
    const int p = e.a, q = e.b;
    const double dpq = dist(d.sites[p], d.sites[q]);
    if (dpq <= 0) continue;
    const double len = e.length;

    // Values of the two one-sided line integrals.
    double Sp = 1.0, Sq = 1.0;
    if (!constant) {
      Sp = Sq = 0.0;
      for (int i = 0; i < rule.n; ++i) {
        const Point2 x = e.p0 + rule.t[i] * (e.p1 - e.p0);
        Sp += rule.w[i] * f->value(p, x);
        Sq += rule.w[i] * f->value(q, x);
      }
    }
    const double Ip = len * Sp, Iq = len * Sq;
    jt.emplace_back(p, q, Ip / dpq);
    jt.emplace_back(p, p, -Ip / dpq);
    jt.emplace_back(q, p, Iq / dpq);
    jt.emplace_back(q, q, -Iq / dpq);

    if (!want_hessian || len <= len_floor) continue;

    const VertexDerivs& v0 = get_vd(e.tri0);
    const VertexDerivs& v1 = get_vd(e.tri1);

    // Union of sites whose potential moves either endpoint.
    std::array<int, 6> stencil;
    int ns = 0;
    auto add_site = [&](int s) {
      for (int i = 0; i < ns; ++i)
        if (stencil[i] == s) return;
      stencil[ns++] = s;
    };
    for (int i = 0; i < v0.nsite; ++i) add_site(v0.site[i]);
    for (int i = 0; i < v1.nsite; ++i) add_site(v1.site[i]);

    const bool degenerate = v0.degenerate || v1.degenerate;
    for (int side = 0; side < 2; ++side) {
      const int own = side == 0 ? p : q;
      const int other = side == 0 ? q : p;
      const double S = side == 0 ? Sp : Sq;
      // dI/dv at the two endpoints; independent of the stencil site.
      Point2 g0 = (1.0 / len) * (e.p0 - e.p1) * S;
      Point2 g1 = (1.0 / len) * (e.p1 - e.p0) * S;
      if (!degenerate && !constant) {
        Point2 a0{0, 0}, a1{0, 0};
        for (int i = 0; i < rule.n; ++i) {
          const Point2 x = e.p0 + rule.t[i] * (e.p1 - e.p0);
          const Point2 gf = f->grad(own, x);
          a0 += (rule.w[i] * (1.0 - rule.t[i])) * gf;
          a1 += (rule.w[i] * rule.t[i]) * gf;
        }
        g0 += len * a0;
        g1 += len * a1;
      }
      for (int si = 0; si < ns; ++si) {
        const int s = stencil[si];
        double dI;
        if (degenerate) {
          const double h = 1e-6 * (1.0 + phi.cwiseAbs().maxCoeff());
          PotentialVector ph = phi;
          ph[s] += h;
          const double ip = detail::edge_integral_rebuilt(own, other, d.sites,
                                                          ph, d.domain, f, own);
          ph[s] -= 2 * h;
          const double im = detail::edge_integral_rebuilt(own, other, d.sites,
                                                          ph, d.domain, f, own);
          dI = (ip - im) / (2 * h);
        } else {
          Point2 dv0{0, 0}, dv1{0, 0};
          for (int i = 0; i < v0.nsite; ++i)
            if (v0.site[i] == s) dv0 = v0.d[i];
          for (int i = 0; i < v1.nsite; ++i)
            if (v1.site[i] == s) dv1 = v1.d[i];
          dI = dot(g0, dv0) + dot(g1, dv1);
        }
        const double c = dI / dpq;
        if (c == 0.0) continue;
        out.d2F.entries.push_back({own, other, s, c});
        out.d2F.entries.push_back({own, own, s, -c});
      }
    }
  }

  out.dF.resize(n, n);
  out.dF.setFromTriplets(jt.begin(), jt.end());
  return out;
}

// --- spec operations -------------------------------------------------------

inline MaVector ma(const LaguerreDiagram& d) {
  return Eigen::Map<const Eigen::VectorXd>(d.areas.data(), d.n_sites());
}

inline MaVector ma(const SiteSet& sites, const PotentialVector& phi,
                   const ConvexDomain& domain) {
  return ma(build_diagram(sites, phi, domain));
}

inline bool interiority(const LaguerreDiagram& d) { return d.all_nonempty(); }

inline bool interiority(const SiteSet& sites, const PotentialVector& phi,
                        const ConvexDomain& domain) {
  return build_diagram(sites, phi, domain).all_nonempty();
}

inline SparseMat ma_jacobian(const LaguerreDiagram& d) {
  if (!d.all_nonempty())
    throw std::runtime_error("ma_jacobian: potential not in the interior (empty cell)");
  const int n = d.n_sites();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * d.edges.size());
  for (const DualEdge& e : d.edges) {
    if (!is_site_id(e.b, n)) continue;
    const double dpq = dist(d.sites[e.a], d.sites[e.b]);
    const double w = e.length / dpq;
    t.emplace_back(e.a, e.b, w);
    t.emplace_back(e.b, e.a, w);
    t.emplace_back(e.a, e.a, -w);
    t.emplace_back(e.b, e.b, -w);
  }
  SparseMat j(n, n);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

inline SparseMat ma_jacobian(const SiteSet& sites, const PotentialVector& phi,
                             const ConvexDomain& domain) {
  return ma_jacobian(build_diagram(sites, phi, domain));
}

inline MaHessian ma_hessian(const LaguerreDiagram& d,
                            const PotentialVector& phi,
                            HessianMode mode = HessianMode::analytic) {
  if (!d.all_nonempty())
    throw std::runtime_error("ma_hessian: potential not in the interior (empty cell)");
  const int n = d.n_sites();
  if (mode == HessianMode::fd_of_jacobian) {
    MaHessian h;
    h.n = n;
    const double step = 1e-6 * (1.0 + phi.cwiseAbs().maxCoeff());
    for (int s = 0; s < n; ++s) {
      PotentialVector ph = phi;
      ph[s] += step;
      Eigen::MatrixXd jp = ma_jacobian(d.sites, ph, d.domain);
      ph[s] -= 2 * step;
      Eigen::MatrixXd jm = ma_jacobian(d.sites, ph, d.domain);
      Eigen::MatrixXd diff = (jp - jm) / (2 * step);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          if (diff(p, q) != 0.0) h.entries.push_back({p, q, s, diff(p, q)});
    }
    return h;
  }
  CellFieldData data = assemble_cell_field(d, phi, nullptr, true);
  return std::move(data.d2F);
}

inline MaHessian ma_hessian(const SiteSet& sites, const PotentialVector& phi,
                            const ConvexDomain& domain,
                            HessianMode mode = HessianMode::analytic) {
  return ma_hessian(build_diagram(sites, phi, domain), phi, mode);
}

struct LogConcavityReport {
  struct Violation {
    double t;
    int site;
    double gap;
  };
  std::vector<Violation> violations;
  double worst_gap = 0.0; // most negative slack observed
  int samples = 0;
  bool ok() const { return violations.empty(); }
};

// Along the segment phi_t = (1-t)phi0 + t phi1, checks
//   log MA(phi_t)(p) >= (1-t) log MA(phi0)(p) + t log MA(phi1)(p) - 1e-9.
inline LogConcavityReport segment_logconcavity_check(
    const SiteSet& sites, const PotentialVector& phi0,
    const PotentialVector& phi1, const ConvexDomain& domain, int t_samples) {
  LogConcavityReport rep;
  const MaVector a0 = ma(sites, phi0, domain);
  const MaVector a1 = ma(sites, phi1, domain);
  const SiteOrdering ord = SiteOrdering::build(sites);
  for (int i = 1; i <= t_samples; ++i) {
    const double t = static_cast<double>(i) / (t_samples + 1);
    const PotentialVector pt = (1.0 - t) * phi0 + t * phi1;
    const MaVector at = ma(build_diagram(sites, pt, domain, ord));
    for (int p = 0; p < sites.size(); ++p) {
      const double lhs = at[p] > 0 ? std::log(at[p])
                                   : -std::numeric_limits<double>::infinity();
      const double r0 = a0[p] > 0 ? std::log(a0[p])
                                  : -std::numeric_limits<double>::infinity();
      const double r1 = a1[p] > 0 ? std::log(a1[p])
                                  : -std::numeric_limits<double>::infinity();
      const double rhs = (1.0 - t) * r0 + t * r1;
      if (!std::isfinite(rhs)) { ++rep.samples; continue; }
      const double slack = lhs - rhs;
      rep.worst_gap = std::min(rep.worst_gap, slack);
      if (slack < -1e-9) rep.violations.push_back({t, p, slack});
      ++rep.samples;
    }
  }
  return rep;
}

} // namespace wgf2d
