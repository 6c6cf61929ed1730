// Shared helpers for the test suites.

#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "wgf2d/energy.hpp"
#include "wgf2d/rng.hpp"
#include "wgf2d/solver.hpp"
#include "wgf2d/validate.hpp"

namespace wgf2d::testing {

inline ConvexPolygon random_convex_polygon(Rng& rng, int max_pts = 12,
                                           double scale = 1.0) {
  for (;;) {
    std::vector<Point2> pts;
    const int k = 4 + static_cast<int>(rng.uniform() * (max_pts - 3));
    for (int i = 0; i < k; ++i)
      pts.push_back({scale * rng.uniform(-1, 1), scale * rng.uniform(-1, 1)});
    ConvexPolygon hull = convex_hull(pts);
    if (hull.size() >= 3 && area(hull) > 0.05 * scale * scale) return hull;
  }
}

inline Objective make_objective(const JkoProblem& prob) {
  return [&prob](const Eigen::VectorXd& phi, bool derivs) {
    JkoEval e = prob.eval(phi, derivs ? Want::full : Want::value);
    return ObjectiveEval{e.value, std::move(e.grad), std::move(e.hess),
                         std::move(e.max_step)};
  };
}

// Additive perturbation of an interior potential, shrunk until the result
// stays interior.
inline PotentialVector perturb_interior(const JkoProblem& prob,
                                        const PotentialVector& phi,
                                        std::uint64_t seed,
                                        double amplitude = 0.01) {
  Rng rng(seed);
  Eigen::VectorXd noise(phi.size());
  for (int i = 0; i < phi.size(); ++i) noise[i] = rng.normal();
  for (;;) {
    const PotentialVector cand = phi + amplitude * noise;
    if (std::isfinite(prob.eval(cand, Want::value).value)) return cand;
    amplitude *= 0.5;
  }
}

// Distance from a point to a convex polygon (0 inside).
inline double dist_to_polygon(const ConvexPolygon& poly, Point2 p) {
  if (contains(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < poly.size(); ++i) {
    const Point2 a = poly.v[i], b = poly.v[(i + 1) % poly.size()];
    const Point2 d = b - a;
    const double t = std::clamp(dot(p - a, d) / norm2(d), 0.0, 1.0);
    best = std::min(best, dist(p, a + t * d));
  }
  return best;
}

} // namespace wgf2d::testing
