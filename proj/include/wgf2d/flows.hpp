// Time loops built on the single-step solver: Lagrangian nonlinear
// diffusion on a moving point cloud, and congested transport of a density
// tracked on a fixed pixel grid.

#pragma once

#include <cstdint>
#include <string>

#include "wgf2d/energy.hpp"
#include "wgf2d/rng.hpp"
#include "wgf2d/solver.hpp"

namespace wgf2d {

enum class SelectionKind { steiner, centroid };

struct FlowConfig {
  ConvexDomain domain;
  double tau = 0.01;
  int steps = 10;
  InternalEnergySpec internal = InternalEnergySpec::entropy();
  std::optional<PotentialSpec> potential;
  // The transport term selects cell centroids, so moving the sites to the
  // centroids keeps the time step coherent; Steiner moves stay available.
  SelectionKind selection = SelectionKind::centroid;
  std::uint64_t seed = 1;
  SolveOptions solver;

  // Point-cloud diffusion.
  int n_points = 100;
  enum class PointInit { uniform, disk };
  PointInit point_init = PointInit::uniform;
  Point2 disk_center{0, 0};
  double disk_radius = 0.25;
  std::optional<std::vector<Point2>> explicit_points;

  // Fixed-grid crowd transport.
  int grid_nx = 40, grid_ny = 40;
  double init_density = 0.8;
  double rect_xmin = -1.75, rect_ymin = -0.5, rect_xmax = -0.5,
         rect_ymax = 0.5;
};

struct StepRecord {
  std::vector<Point2> positions; // sites entering the step
  Eigen::VectorXd masses;
  Eigen::VectorXd potential; // accepted minimizer
  Eigen::VectorXd areas;     // cell areas at the accepted minimizer
  double w_half_tau = 0.0, e_term = 0.0, u_term = 0.0, total = 0.0;
  double objective_initial = 0.0, objective_final = 0.0;
  int newton_iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;

  // Crowd flow only.
  Eigen::VectorXd grid_masses; // nx*ny, row-major in (j, i)
  double grid_max_density = 0.0;
  double grid_total_mass = 0.0;
  double grid_energy = 0.0; // E + U of the grid measure
};

struct FlowTrace {
  std::vector<StepRecord> steps;
  bool truncated = false;
  std::string diagnostic;
  bool fast_diffusion_warning = false; // exponent below 1: no barrier from U
  int grid_nx = 0, grid_ny = 0;
};

namespace detail {

inline Objective make_jko_objective(const JkoProblem& prob) {
  return [&prob](const Eigen::VectorXd& phi, bool derivs) {
    JkoEval e = prob.eval(phi, derivs ? Want::full : Want::value);
    ObjectiveEval out;
    out.value = e.value;
    out.grad = std::move(e.grad);
    out.hess = std::move(e.hess);
    out.max_step = std::move(e.max_step);
    return out;
  };
}

} // namespace detail

inline std::vector<Point2> generate_initial_points(const FlowConfig& cfg) {
  if (cfg.explicit_points) return *cfg.explicit_points;
  Rng rng(cfg.seed);
  std::vector<Point2> pts;
  pts.reserve(cfg.n_points);
  while (static_cast<int>(pts.size()) < cfg.n_points) {
    Point2 p = cfg.point_init == FlowConfig::PointInit::disk
                   ? rng.in_disk(cfg.disk_center, cfg.disk_radius)
                   : rng.in_polygon(cfg.domain.polygon());
    if (cfg.domain.contains(p)) pts.push_back(p);
  }
  return pts;
}

// Implicit-step diffusion: each step solves the transport objective with the
// internal energy, then moves every site to its selected subgradient.
inline FlowTrace diffusion_flow(const FlowConfig& cfg) {
  FlowTrace trace;
  if (cfg.internal.kind == InternalEnergySpec::Kind::power &&
      cfg.internal.m < 1.0)
    trace.fast_diffusion_warning = true;

  std::vector<Point2> pts = generate_initial_points(cfg);
  const int n = static_cast<int>(pts.size());
  Eigen::VectorXd masses = Eigen::VectorXd::Constant(n, 1.0 / n);

  for (int k = 0; k < cfg.steps; ++k) {
    StepRecord rec;
    rec.positions = pts;
    rec.masses = masses;

    DiscreteMeasure mu(SiteSet(pts), masses);
    EnergySpecs specs;
    specs.internal = cfg.internal;
    specs.potential = cfg.potential;
    JkoProblem prob(std::move(mu), cfg.tau, cfg.domain, specs,
                    CouplingMode::ac);

    PotentialVector phi0;
    try {
      phi0 = initial_potential(SiteSet(pts), cfg.domain);
    } catch (const std::exception& e) {
      trace.truncated = true;
      trace.diagnostic = "step " + std::to_string(k) + ": " + e.what();
      trace.steps.push_back(rec);
      return trace;
    }
    const Objective obj = detail::make_jko_objective(prob);
    auto [phi, rep] = newton_solve(obj, phi0, cfg.solver);

    const JkoEval fin = prob.eval(phi, Want::value);
    rec.objective_initial = rep.objective_trajectory.front();
    rec.objective_final = fin.value;
    rec.newton_iterations = rep.iterations;
    rec.grad_norm = rep.final_grad_norm;
    rec.converged = rep.converged();
    if (rep.reason == Termination::infeasible_start || !fin.interior) {
      trace.truncated = true;
      trace.diagnostic =
          "step " + std::to_string(k) + ": solver failed (termination " +
          std::to_string(static_cast<int>(rep.reason)) + ")";
      trace.steps.push_back(rec);
      return trace;
    }

    const LaguerreDiagram d =
        build_diagram(SiteSet(pts), phi, cfg.domain, prob.ordering());
    rec.potential = phi;
    rec.areas = ma(d);
    rec.w_half_tau = fin.w_term / (2.0 * cfg.tau);
    rec.e_term = fin.e_term;
    rec.u_term = fin.u_term;
    rec.total = fin.value;

    const GradientSelection sel = cfg.selection == SelectionKind::steiner
                                      ? steiner_selection(d)
                                      : centroid_selection(d);
    pts = sel.g;
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

// --- fixed-grid crowd transport ---------------------------------------------

struct PixelGrid {
  int nx = 0, ny = 0;
  double xmin = 0, ymin = 0, hx = 0, hy = 0;

  int index(int ix, int iy) const { return iy * nx + ix; }
  Point2 center(int ix, int iy) const {
    return {xmin + (ix + 0.5) * hx, ymin + (iy + 0.5) * hy};
  }
  ConvexPolygon pixel(int ix, int iy) const {
    return make_box(xmin + ix * hx, ymin + iy * hy, xmin + (ix + 1) * hx,
                    ymin + (iy + 1) * hy);
  }
  double pixel_area() const { return hx * hy; }

  static PixelGrid over(const ConvexDomain& domain, int nx, int ny) {
    const BBox b = bounding_box(domain.polygon());
    PixelGrid g;
    g.nx = nx;
    g.ny = ny;
    g.xmin = b.xmin;
    g.ymin = b.ymin;
    g.hx = (b.xmax - b.xmin) / nx;
    g.hy = (b.ymax - b.ymin) / ny;
    return g;
  }
};

// Exact overlap deposition of a piecewise-constant cell density onto the
// grid.  Clipping against the four pixel half-planes keeps the split exact
// up to roundoff, so total mass is preserved to machine precision.
inline Eigen::VectorXd rasterize_cells(const LaguerreDiagram& d,
                                       const Eigen::VectorXd& density,
                                       const PixelGrid& g) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(g.nx * g.ny);
  for (int p = 0; p < d.n_sites(); ++p) {
    if (d.cells[p].empty()) continue;
    const BBox bb = bounding_box(d.cells[p]);
    int ix0 = static_cast<int>(std::floor((bb.xmin - g.xmin) / g.hx));
    int ix1 = static_cast<int>(std::floor((bb.xmax - g.xmin) / g.hx));
    int iy0 = static_cast<int>(std::floor((bb.ymin - g.ymin) / g.hy));
    int iy1 = static_cast<int>(std::floor((bb.ymax - g.ymin) / g.hy));
    ix0 = std::max(ix0, 0);
    iy0 = std::max(iy0, 0);
    ix1 = std::min(ix1, g.nx - 1);
    iy1 = std::min(iy1, g.ny - 1);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        ConvexPolygon c = d.cells[p];
        c = clip(c, HalfPlane({1, 0}, g.xmin + (ix + 1) * g.hx));
        c = clip(c, HalfPlane({-1, 0}, -(g.xmin + ix * g.hx)));
        c = clip(c, HalfPlane({0, 1}, g.ymin + (iy + 1) * g.hy));
        c = clip(c, HalfPlane({0, -1}, -(g.ymin + iy * g.hy)));
        const double a = area(c);
        if (a > 0) m[g.index(ix, iy)] += density[p] * a;
      }
    }
  }
  return m;
}

// JKO steps for a density on a fixed grid: occupied pixel centers carry the
// mass, each step solves the congested transport objective and the spread
// pushforward is deposited back onto the grid by exact polygon overlap.
inline FlowTrace crowd_flow(const FlowConfig& cfg) {
  FlowTrace trace;
  const PixelGrid grid = PixelGrid::over(cfg.domain, cfg.grid_nx, cfg.grid_ny);
  trace.grid_nx = grid.nx;
  trace.grid_ny = grid.ny;
  const double pix_area = grid.pixel_area();

  // Initial masses: exact overlap of the seed rectangle with each pixel.
  const ConvexPolygon rect =
      make_box(cfg.rect_xmin, cfg.rect_ymin, cfg.rect_xmax, cfg.rect_ymax);
  Eigen::VectorXd gm = Eigen::VectorXd::Zero(grid.nx * grid.ny);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      ConvexPolygon c = rect;
      const ConvexPolygon pix = grid.pixel(ix, iy);
      for (int s = 0; s < 4; ++s) {
        const Point2 a = pix.v[s], b = pix.v[(s + 1) % 4];
        const Point2 n = perp_cw(b - a);
        c = clip(c, HalfPlane(n, dot(n, a)));
      }
      const double a = area(c);
      if (a > 0) gm[grid.index(ix, iy)] = cfg.init_density * a;
    }
  }
  const double total = gm.sum();
  if (!(total > 0)) throw std::invalid_argument("crowd_flow: empty initial density");
  gm /= total;
  if (gm.maxCoeff() / pix_area > 1.0 + 1e-9)
    throw std::invalid_argument("crowd_flow: initial density exceeds one");

  // Pixel integrals of the potential, computed once on the fixed grid.
  Eigen::VectorXd pixV = Eigen::VectorXd::Zero(grid.nx * grid.ny);
  if (cfg.potential) {
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix)
        pixV[grid.index(ix, iy)] = polygon_integral(
            grid.pixel(ix, iy),
            [&](Point2 x) { return cfg.potential->value(x); },
            cfg.potential->poly_degree());
  }
  auto grid_energy = [&](const Eigen::VectorXd& masses) {
    double e = 0.0, u = 0.0;
    for (int i = 0; i < masses.size(); ++i) {
      if (masses[i] <= 0) continue;
      if (cfg.potential) e += masses[i] / pix_area * pixV[i];
      const double uu = cfg.internal.U(masses[i] / pix_area);
      u += pix_area * uu;
    }
    return e + u;
  };

  for (int k = 0; k < cfg.steps; ++k) {
    StepRecord rec;
    std::vector<Point2> pts;
    std::vector<double> mvals;
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double m = gm[grid.index(ix, iy)];
        if (m > 0) {
          pts.push_back(grid.center(ix, iy));
          mvals.push_back(m);
        }
      }
    }
    const int n = static_cast<int>(pts.size());
    Eigen::VectorXd masses =
        Eigen::Map<const Eigen::VectorXd>(mvals.data(), n);
    rec.positions = pts;
    rec.masses = masses;

    DiscreteMeasure mu(SiteSet(pts), masses);
    EnergySpecs specs;
    specs.internal = cfg.internal;
    specs.potential = cfg.potential;
    JkoProblem prob(std::move(mu), cfg.tau, cfg.domain, specs,
                    CouplingMode::ac);
    PotentialVector phi0 = initial_potential(SiteSet(pts), cfg.domain);
    const Objective obj = detail::make_jko_objective(prob);
    auto [phi, rep] = newton_solve(obj, phi0, cfg.solver);

    const JkoEval fin = prob.eval(phi, Want::value);
    rec.objective_initial = rep.objective_trajectory.front();
    rec.objective_final = fin.value;
    rec.newton_iterations = rep.iterations;
    rec.grad_norm = rep.final_grad_norm;
    rec.converged = rep.converged();
    if (rep.reason == Termination::infeasible_start || !fin.interior) {
      trace.truncated = true;
      trace.diagnostic = "step " + std::to_string(k) + ": solver failed";
      trace.steps.push_back(rec);
      return trace;
    }

    const LaguerreDiagram d =
        build_diagram(SiteSet(pts), phi, cfg.domain, prob.ordering());
    rec.potential = phi;
    rec.areas = ma(d);
    rec.w_half_tau = fin.w_term / (2.0 * cfg.tau);
    rec.e_term = fin.e_term;
    rec.u_term = fin.u_term;
    rec.total = fin.value;

    Eigen::VectorXd density(n);
    for (int p = 0; p < n; ++p) density[p] = masses[p] / d.areas[p];
    gm = rasterize_cells(d, density, grid);

    rec.grid_masses = gm;
    rec.grid_max_density = gm.maxCoeff() / pix_area;
    rec.grid_total_mass = gm.sum();
    rec.grid_energy = grid_energy(gm);
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

} // namespace wgf2d
