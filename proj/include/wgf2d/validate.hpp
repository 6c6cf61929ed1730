// Independent oracles and property harnesses: Monte-Carlo cell areas via
// the assignment rule, finite-difference derivative checks, and convexity
// property suites.  Oracles deliberately avoid the clipping pipeline; they
// only touch raw coordinates.

#pragma once

#include <string>

#include "wgf2d/energy.hpp"
#include "wgf2d/rng.hpp"
#include "wgf2d/solver.hpp"

namespace wgf2d {

struct OracleReport {
  std::string test;
  std::string instance;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  long samples = 0;
};

struct McAreaEstimate {
  Eigen::VectorXd area;
  Eigen::VectorXd std_error;
  long samples = 0;
};

// Uniform rejection samples in Y assigned by  y -> argmax_p <y,p> - phi_p
// (ties broken toward the lowest site id).  No polygon clipping involved.
inline McAreaEstimate mc_area_oracle(const SiteSet& sites,
                                     const PotentialVector& phi,
                                     const ConvexDomain& domain,
                                     long n_samples, std::uint64_t seed) {
  if (n_samples < 10000)
    throw std::invalid_argument("mc_area_oracle: need at least 1e4 samples");
  const int n = sites.size();
  const auto& poly = domain.polygon().v;
  const int k = static_cast<int>(poly.size());
  auto inside = [&](Point2 p) {
    for (int i = 0; i < k; ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % k];
      if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0)
        return false;
    }
    return true;
  };
  BBox bb;
  for (const Point2& p : poly) bb.add(p);
  Rng rng(seed);
  std::vector<long> counts(n, 0);
  long accepted = 0;
  while (accepted < n_samples) {
    const Point2 y = rng.in_box(bb);
    if (!inside(y)) continue;
    ++accepted;
    int best = 0;
    double bestv = dot(y, sites[0]) - phi[0];
    for (int p = 1; p < n; ++p) {
      const double v = dot(y, sites[p]) - phi[p];
      if (v > bestv) {
        bestv = v;
        best = p;
      }
    }
    ++counts[best];
  }
  const double ya = domain.domain_area();
  McAreaEstimate out;
  out.samples = n_samples;
  out.area.resize(n);
  out.std_error.resize(n);
  for (int p = 0; p < n; ++p) {
    const double frac = static_cast<double>(counts[p]) / n_samples;
    out.area[p] = ya * frac;
    out.std_error[p] = ya * std::sqrt(frac * (1.0 - frac) / n_samples);
  }
  return out;
}

// Central finite differences of an objective: order 1 compares the gradient
// against differences of values, order 2 compares the Hessian against
// differences of gradients.
inline OracleReport fd_check(const Objective& obj, const Eigen::VectorXd& phi,
                             int order, double h) {
  const int n = static_cast<int>(phi.size());
  OracleReport rep;
  rep.test = order == 1 ? "fd-gradient" : "fd-hessian";
  rep.samples = n;
  const ObjectiveEval at = obj(phi, true);
  if (!std::isfinite(at.value))
    throw std::runtime_error("fd_check: infeasible base point");
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xp = phi, xm = phi;
    xp[i] += h;
    xm[i] -= h;
    if (order == 1) {
      const double fp = obj(xp, false).value;
      const double fm = obj(xm, false).value;
      dev = std::max(dev, std::abs((fp - fm) / (2 * h) - at.grad[i]));
    } else {
      const Eigen::VectorXd gp = obj(xp, true).grad;
      const Eigen::VectorXd gm = obj(xm, true).grad;
      const Eigen::VectorXd col = (gp - gm) / (2 * h);
      const Eigen::VectorXd acol = Eigen::MatrixXd(at.hess).col(i);
      dev = std::max(dev, (col - acol).cwiseAbs().maxCoeff());
    }
  }
  rep.max_deviation = dev;
  rep.tolerance = order == 1 ? 1e-5 : 1e-4;
  rep.pass = dev <= rep.tolerance;
  return rep;
}

inline OracleReport fd_check_ma_jacobian(const SiteSet& sites,
                                         const PotentialVector& phi,
                                         const ConvexDomain& domain,
                                         double h = 0.0) {
  const int n = sites.size();
  if (h <= 0) h = 1e-6 * (1.0 + phi.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd j = ma_jacobian(sites, phi, domain);
  double dev = 0.0;
  for (int s = 0; s < n; ++s) {
    PotentialVector xp = phi, xm = phi;
    xp[s] += h;
    xm[s] -= h;
    const Eigen::VectorXd col = (ma(sites, xp, domain) - ma(sites, xm, domain)) / (2 * h);
    dev = std::max(dev, (col - j.col(s)).cwiseAbs().maxCoeff());
  }
  OracleReport rep;
  rep.test = "fd-ma-jacobian";
  rep.samples = n;
  rep.max_deviation = dev;
  rep.tolerance = 1e-5;
  rep.pass = dev <= rep.tolerance;
  return rep;
}

inline OracleReport fd_check_ma_hessian(const SiteSet& sites,
                                        const PotentialVector& phi,
                                        const ConvexDomain& domain,
                                        double h = 0.0) {
  const int n = sites.size();
  if (h <= 0) h = 1e-4 * (1.0 + phi.cwiseAbs().maxCoeff());
  const std::vector<Eigen::MatrixXd> hs =
      ma_hessian(sites, phi, domain).dense();
  double dev = 0.0;
  for (int s = 0; s < n; ++s) {
    PotentialVector xp = phi, xm = phi;
    xp[s] += h;
    xm[s] -= h;
    const Eigen::MatrixXd diff =
        (Eigen::MatrixXd(ma_jacobian(sites, xp, domain)) -
         Eigen::MatrixXd(ma_jacobian(sites, xm, domain))) /
        (2 * h);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        dev = std::max(dev, std::abs(diff(p, q) - hs[p](q, s)));
  }
  OracleReport rep;
  rep.test = "fd-ma-hessian";
  rep.samples = n;
  rep.max_deviation = dev;
  rep.tolerance = 1e-4;
  rep.pass = dev <= rep.tolerance;
  return rep;
}

// --- random instances -------------------------------------------------------

inline SiteSet random_sites(int n, const ConvexDomain& domain, Rng& rng) {
  SiteSet s;
  s.pts.reserve(n);
  while (static_cast<int>(s.pts.size()) < n)
    s.pts.push_back(rng.in_polygon(domain.polygon()));
  return s;
}

inline double min_site_edge_length(const LaguerreDiagram& d) {
  double m = std::numeric_limits<double>::infinity();
  for (const DualEdge& e : d.edges)
    if (is_site_id(e.b, d.n_sites())) m = std::min(m, e.length);
  return m;
}

// Random potential keeping the diagram interior and comfortably away from
// combinatorial flips, so finite differences see a smooth function.
inline PotentialVector random_interior_potential(const SiteSet& sites,
                                                 const ConvexDomain& domain,
                                                 Rng& rng, double amplitude) {
  const int n = sites.size();
  const double edge_floor = 1e-4 * domain.domain_diameter();
  const double area_floor = 1e-3 * domain.domain_area() / n;
  for (int attempt = 0; attempt < 60; ++attempt) {
    PotentialVector phi(n);
    for (int p = 0; p < n; ++p)
      phi[p] = 0.5 * norm2(sites[p]) + amplitude * rng.normal();
    const LaguerreDiagram d = build_diagram(sites, phi, domain);
    double amin = std::numeric_limits<double>::infinity();
    for (double a : d.areas) amin = std::min(amin, a);
    if (amin > area_floor && min_site_edge_length(d) > edge_floor) return phi;
    amplitude *= 0.7;
  }
  // Identity transport is always interior for sites inside the domain.
  PotentialVector phi(n);
  for (int p = 0; p < n; ++p) phi[p] = 0.5 * norm2(sites[p]);
  return phi;
}

struct FdInstance {
  SiteSet sites;
  PotentialVector phi;
};

// Sites with a pairwise separation floor (dart throwing); keeps the cell
// sensitivities d(area)/d(phi) = length/dist bounded.
inline SiteSet separated_sites(int n, const ConvexDomain& domain, Rng& rng,
                               double separation) {
  SiteSet s;
  s.pts.reserve(n);
  int stale = 0;
  while (static_cast<int>(s.pts.size()) < n) {
    const Point2 c = rng.in_polygon(domain.polygon());
    bool ok = true;
    for (const Point2& q : s.pts)
      if (dist(c, q) < separation) {
        ok = false;
        break;
      }
    if (ok) {
      s.pts.push_back(c);
      stale = 0;
    } else if (++stale > 2000) {
      separation *= 0.7; // domain too crowded for the requested spacing
      stale = 0;
    }
  }
  return s;
}

// Instance for finite-difference comparisons.  Central differences step the
// potential by up to ~1e-4 scale units, so the diagram must sit well away
// from combinatorial flips and from the empty-cell boundary: separated
// sites, then resampling until the shortest dual edge and smallest cell
// clear the given floors.
inline FdInstance random_fd_instance(int n, const ConvexDomain& domain,
                                     Rng& rng, double min_area_frac = 0.05,
                                     double min_edge_frac = 2e-3,
                                     double amplitude = 0.15) {
  FdInstance best;
  double best_area = -1.0;
  const double edge_floor = min_edge_frac * domain.domain_diameter();
  const double area_floor = min_area_frac * domain.domain_area() / n;
  const double separation = 0.3 * std::sqrt(domain.domain_area() / n);
  for (int attempt = 0; attempt < 40; ++attempt) {
    FdInstance inst;
    inst.sites = separated_sites(n, domain, rng, separation);
    inst.phi = random_interior_potential(inst.sites, domain, rng, amplitude);
    const LaguerreDiagram d = build_diagram(inst.sites, inst.phi, domain);
    double amin = std::numeric_limits<double>::infinity();
    for (double a : d.areas) amin = std::min(amin, a);
    const double emin = min_site_edge_length(d);
    if (amin > area_floor && emin > edge_floor) return inst;
    if (amin > best_area) {
      best_area = amin;
      best = std::move(inst);
    }
  }
  return best;
}

// --- convexity property suite ----------------------------------------------

inline std::vector<OracleReport> convexity_suite(std::uint64_t seed,
                                                 int n_instances) {
  std::vector<OracleReport> reports;
  Rng rng(seed);
  const ConvexDomain domain(make_square(4.0));

  // Log-concavity of cell areas along potential segments.
  {
    OracleReport rep;
    rep.test = "segment-logconcavity";
    rep.instance = "random pairs, N in [3,50], 9 interior t";
    rep.tolerance = 1e-9;
    double worst = 0.0;
    long samples = 0;
    bool ok = true;
    for (int i = 0; i < n_instances; ++i) {
      const int n = 3 + static_cast<int>(rng.uniform() * 48);
      const SiteSet sites = random_sites(n, domain, rng);
      const PotentialVector a = random_interior_potential(sites, domain, rng, 0.2);
      const PotentialVector b = random_interior_potential(sites, domain, rng, 0.2);
      const LogConcavityReport r =
          segment_logconcavity_check(sites, a, b, domain, 9);
      worst = std::min(worst, r.worst_gap);
      samples += r.samples;
      ok = ok && r.ok();
    }
    rep.max_deviation = -worst;
    rep.samples = samples;
    rep.pass = ok;
    reports.push_back(rep);
  }

  // Convexity of the discretized internal energy along potential segments.
  for (const auto& [name, spec] :
       {std::pair<std::string, InternalEnergySpec>{"entropy",
                                                   InternalEnergySpec::entropy()},
        {"power-m2", InternalEnergySpec::power(2.0)}}) {
    OracleReport rep;
    rep.test = "internal-energy-convexity-" + name;
    rep.tolerance = 1e-9;
    double worst = 0.0;
    long samples = 0;
    for (int i = 0; i < n_instances; ++i) {
      const int n = 3 + static_cast<int>(rng.uniform() * 28);
      const SiteSet sites = random_sites(n, domain, rng);
      const DiscreteMeasure mu = DiscreteMeasure::uniform(sites);
      const PotentialVector a = random_interior_potential(sites, domain, rng, 0.2);
      const PotentialVector b = random_interior_potential(sites, domain, rng, 0.2);
      const double ua = internal_energy(mu, a, domain, spec);
      const double ub = internal_energy(mu, b, domain, spec);
      for (int j = 1; j <= 7; ++j) {
        const double t = j / 8.0;
        const double ut =
            internal_energy(mu, (1.0 - t) * a + t * b, domain, spec);
        worst = std::max(worst, ut - ((1.0 - t) * ua + t * ub));
        ++samples;
      }
    }
    rep.max_deviation = worst;
    rep.samples = samples;
    rep.pass = worst <= rep.tolerance;
    reports.push_back(rep);
  }

  // Interpolating feasible (phi, G) pairs stays feasible.
  {
    OracleReport rep;
    rep.test = "joint-feasibility-interpolation";
    rep.tolerance = 1e-9;
    double worst = 0.0;
    long samples = 0;
    for (int i = 0; i < n_instances; ++i) {
      const int n = 3 + static_cast<int>(rng.uniform() * 18);
      const SiteSet sites = random_sites(n, domain, rng);
      const PotentialVector a = random_interior_potential(sites, domain, rng, 0.2);
      const PotentialVector b = random_interior_potential(sites, domain, rng, 0.2);
      auto pick = [&](const PotentialVector& phi) {
        const LaguerreDiagram d = build_diagram(sites, phi, domain);
        GradientSelection g;
        for (int p = 0; p < n; ++p) {
          const BBox bb = bounding_box(d.cells[p]);
          Point2 x;
          do {
            x = rng.in_box(bb);
          } while (!contains(d.cells[p], x));
          g.g.push_back(x);
        }
        return g;
      };
      const GradientSelection ga = pick(a), gb = pick(b);
      for (int j = 1; j <= 7; ++j) {
        const double t = j / 8.0;
        const PotentialVector pt = (1.0 - t) * a + t * b;
        GradientSelection gt;
        for (int p = 0; p < n; ++p)
          gt.g.push_back((1.0 - t) * ga.g[p] + t * gb.g[p]);
        worst = std::max(worst, selection_violation(sites, pt, domain, gt));
        ++samples;
      }
    }
    rep.max_deviation = worst;
    rep.samples = samples;
    rep.pass = worst <= rep.tolerance;
    reports.push_back(rep);
  }

  // The harness must also detect genuine nonconvexity.
  {
    OracleReport rep;
    rep.test = "nonconvexity-detected";
    rep.instance = "three-site second-moment path";
    const NonconvexityDemo demo = nonconvexity_demo(101);
    rep.max_deviation = demo.violation_gap;
    rep.tolerance = 1e-9;
    rep.samples = static_cast<long>(demo.ts.size());
    rep.pass = demo.violation_found;
    reports.push_back(rep);
  }
  return reports;
}

} // namespace wgf2d
