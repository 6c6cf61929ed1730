// Damped Newton minimization over potentials.  The objective owns a barrier
// (+inf off the feasible interior), so plain backtracking keeps iterates
// interior; the additive-constant gauge freedom is removed by pinning the
// first coordinate to zero.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <string>
#include <vector>

#include "wgf2d/laguerre.hpp"

namespace wgf2d {

struct ObjectiveEval {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  Eigen::SparseMatrix<double> hess;
  // Optional fraction-to-boundary rule: largest sensible initial step along
  // a direction (barrier problems cap it by the predicted feasibility gap).
  std::function<double(const Eigen::VectorXd&)> max_step;
};

// phi, need_derivatives -> evaluation.  A value of +inf means infeasible.
using Objective =
    std::function<ObjectiveEval(const Eigen::VectorXd&, bool)>;

enum class SolverHessianMode { analytic, fd_of_gradient };

struct SolveOptions {
  double grad_tol = 1e-8;
  int max_iters = 100;
  double shrink = 0.5;        // line-search backtracking factor
  double armijo_c = 1e-4;
  double tikhonov_floor = 1e-10;
  SolverHessianMode hessian_mode = SolverHessianMode::analytic;
};

enum class Termination { converged, max_iters, stalled, infeasible_start };

struct SolveReport {
  int iterations = 0;
  double final_grad_norm = 0.0;
  std::vector<double> objective_trajectory;
  std::vector<double> grad_norms; // per evaluated iterate
  std::vector<int> backtracks;
  Termination reason = Termination::max_iters;
  int regularized_solves = 0;
  int gradient_fallbacks = 0;

  bool converged() const { return reason == Termination::converged; }
};

namespace detail {

// Drop row/column `pin` of a sparse symmetric matrix.
inline Eigen::SparseMatrix<double> drop_pinned(
    const Eigen::SparseMatrix<double>& h, int pin) {
  const int n = static_cast<int>(h.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(h.nonZeros());
  for (int k = 0; k < h.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (r == pin || c == pin) continue;
      t.emplace_back(r - (r > pin), c - (c > pin), it.value());
    }
  }
  Eigen::SparseMatrix<double> out(n - 1, n - 1);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

} // namespace detail

inline std::pair<Eigen::VectorXd, SolveReport> newton_solve(
    const Objective& objective, Eigen::VectorXd phi,
    const SolveOptions& opts = {}) {
  SolveReport rep;
  const int n = static_cast<int>(phi.size());
  const int pin = 0;
  phi.array() -= phi[pin];

  auto eval_with_derivs = [&](const Eigen::VectorXd& x) {
    ObjectiveEval e = objective(x, true);
    if (opts.hessian_mode == SolverHessianMode::fd_of_gradient &&
        std::isfinite(e.value)) {
      const double h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
      Eigen::MatrixXd dense(n, n);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        dense.col(i) =
            (objective(xp, true).grad - objective(xm, true).grad) / (2 * h);
      }
      e.hess = dense.sparseView();
    }
    return e;
  };

  ObjectiveEval cur = eval_with_derivs(phi);
  if (!std::isfinite(cur.value)) {
    rep.reason = Termination::infeasible_start;
    return {phi, rep};
  }
  rep.objective_trajectory.push_back(cur.value);
  double lambda_seed = 0.0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double gnorm = cur.grad.size() ? cur.grad.cwiseAbs().maxCoeff() : 0.0;
    rep.final_grad_norm = gnorm;
    rep.grad_norms.push_back(gnorm);
    if (gnorm <= opts.grad_tol) {
      rep.reason = Termination::converged;
      return {phi, rep};
    }

    Eigen::SparseMatrix<double> hsym = cur.hess;
    hsym = Eigen::SparseMatrix<double>(0.5 * (hsym + Eigen::SparseMatrix<double>(hsym.transpose())));
    Eigen::SparseMatrix<double> hr = detail::drop_pinned(hsym, pin);
    Eigen::VectorXd gr(n - 1);
    for (int i = 0, j = 0; i < n; ++i)
      if (i != pin) gr[j++] = cur.grad[i];

    Eigen::SparseMatrix<double> eye(n - 1, n - 1);
    eye.setIdentity();

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    bool have_direction = false;
    double lambda = lambda_seed;
    const double diag_scale =
        std::max(1.0, Eigen::VectorXd(hr.diagonal()).cwiseAbs().maxCoeff());
    while (true) {
      Eigen::SparseMatrix<double> sys = hr;
      if (lambda > 0) sys = hr + (lambda * diag_scale) * eye;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys);
      // Indefinite factorizations still "succeed"; insist on a positive
      // definite model so the direction is a real descent direction and
      // not a saddle chase.
      if (ldlt.info() == Eigen::Success &&
          (ldlt.vectorD().array() > 0.0).all()) {
        Eigen::VectorXd dr = ldlt.solve(-gr);
        if (dr.allFinite()) {
          double gd = 0.0;
          for (int i = 0, j = 0; i < n; ++i)
            if (i != pin) gd += cur.grad[i] * dr[j++];
          if (gd < 0) {
            for (int i = 0, j = 0; i < n; ++i) delta[i] = i == pin ? 0.0 : dr[j++];
            have_direction = true;
            break;
          }
        }
      }
      lambda = lambda == 0.0 ? opts.tikhonov_floor : lambda * 10.0;
      ++rep.regularized_solves;
      if (lambda > 1e-2) break;
    }
    // Decay the shift between iterations so a quadratic phase can resume.
    lambda_seed = lambda <= opts.tikhonov_floor ? 0.0 : 0.1 * lambda;
    if (!have_direction) {
      // Regularized solve failed outright: take one steepest-descent step.
      ++rep.gradient_fallbacks;
      delta = -cur.grad;
      delta[pin] = 0.0;
    }

    const double gd = cur.grad.dot(delta);
    double t = 1.0;
    if (cur.max_step) t = std::min(t, std::max(cur.max_step(delta), 1e-12));
    int bt = 0;
    bool accepted = false;
    bool have_next = false;
    ObjectiveEval next;
    // Near the minimizer the Armijo decrease drops below the roundoff of
    // the objective value; there, accept the full step when the gradient
    // norm contracts instead of fighting value noise.
    const double value_noise =
        64.0 * detail::kEps * (1.0 + std::abs(cur.value));
    while (t >= 1e-16) {
      const Eigen::VectorXd cand = phi + t * delta;
      ObjectiveEval trial = objective(cand, false);
      if (std::isfinite(trial.value) &&
          trial.value <= cur.value + opts.armijo_c * t * gd) {
        phi = cand;
        accepted = true;
        break;
      }
      if (std::isfinite(trial.value) &&
          std::abs(opts.armijo_c * t * gd) <= value_noise &&
          trial.value <= cur.value + value_noise) {
        ObjectiveEval full = objective(cand, true);
        const double gnorm = cur.grad.cwiseAbs().maxCoeff();
        if (std::isfinite(full.value) && full.grad.size() &&
            full.grad.cwiseAbs().maxCoeff() <= 0.5 * gnorm) {
          phi = cand;
          accepted = true;
          have_next = true;
          next = std::move(full);
          break;
        }
      }
      t *= opts.shrink;
      ++bt;
    }
    rep.backtracks.push_back(bt);
    if (!accepted) {
      rep.reason = Termination::stalled;
      return {phi, rep};
    }
    phi.array() -= phi[pin];
    cur = (have_next && opts.hessian_mode == SolverHessianMode::analytic)
              ? std::move(next)
              : eval_with_derivs(phi);
    rep.objective_trajectory.push_back(cur.value);
    rep.iterations = iter + 1;
  }
  rep.reason = Termination::max_iters;
  return {phi, rep};
}

// Identity-transport initialization: weights vanish and the diagram is the
// Voronoi diagram of the sites clipped to the domain.
inline PotentialVector initial_potential(const SiteSet& sites,
                                         const ConvexDomain& domain) {
  PotentialVector phi(sites.size());
  for (int p = 0; p < sites.size(); ++p) phi[p] = 0.5 * norm2(sites[p]);
  const LaguerreDiagram d = build_diagram(sites, phi, domain);
  for (int p = 0; p < sites.size(); ++p) {
    if (d.cell_empty(p))
      throw std::runtime_error(
          "initial_potential: Voronoi cell of site " + std::to_string(p) +
          " misses the domain; check that the sites lie inside it");
  }
  return phi;
}

struct OuterOptions {
  double selection_tol = 1e-7;
  int max_rounds = 20;
};

struct OuterReport {
  int rounds = 0;
  double last_delta = 0.0;
  bool converged = false;
  std::vector<SolveReport> inner;
};

struct OuterResult {
  Eigen::VectorXd phi;
  std::vector<Point2> selection;
  OuterReport report;
};

// Alternates (freeze selected subgradients) / (Newton solve in phi) until
// the selected points stop moving.
inline OuterResult fixed_point_outer(
    const std::function<Objective(const std::vector<Point2>&)>& make_objective,
    const std::function<std::vector<Point2>(const Eigen::VectorXd&)>& select,
    Eigen::VectorXd phi0, const SolveOptions& opts,
    const OuterOptions& oopts = {}) {
  OuterResult res;
  res.phi = std::move(phi0);
  std::vector<Point2> frozen = select(res.phi);
  for (int round = 0; round < oopts.max_rounds; ++round) {
    const Objective obj = make_objective(frozen);
    auto [phi, rep] = newton_solve(obj, res.phi, opts);
    res.phi = phi;
    res.report.inner.push_back(rep);
    res.report.rounds = round + 1;
    std::vector<Point2> next = select(res.phi);
    double delta = 0.0;
    for (size_t i = 0; i < next.size(); ++i)
      delta = std::max(delta, dist(next[i], frozen[i]));
    res.report.last_delta = delta;
    frozen = next;
    if (delta <= oopts.selection_tol) {
      res.report.converged = true;
      break;
    }
  }
  res.selection = frozen;
  return res;
}

} // namespace wgf2d
