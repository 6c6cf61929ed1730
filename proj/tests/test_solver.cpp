#include "test_support.hpp"

using namespace wgf2d;
using namespace wgf2d::testing;
using Catch::Approx;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

JkoProblem entropy_problem(const SiteSet& P, double tau,
                           const ConvexDomain& Y) {
  EnergySpecs specs;
  specs.internal = InternalEnergySpec::entropy();
  return JkoProblem(DiscreteMeasure::uniform(P), tau, Y, specs,
                    CouplingMode::ac);
}
} // namespace

TEST_CASE("single site converges immediately") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{0.1, -0.3}});
  JkoProblem prob = entropy_problem(P, 0.1, Y);
  auto [phi, rep] = newton_solve(make_objective(prob), initial_potential(P, Y));
  CHECK(rep.converged());
  CHECK(rep.iterations <= 1);
}

TEST_CASE("entropy-only minimizer equalizes areas on a symmetric pair") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{-0.4, 0.0}, {0.4, 0.0}});
  JkoProblem prob = entropy_problem(P, kInf, Y);
  PotentialVector phi0(2);
  phi0 << 0.0, 0.35; // asymmetric but interior start
  REQUIRE(std::isfinite(prob.eval(phi0, Want::value).value));
  auto [phi, rep] = newton_solve(make_objective(prob), phi0);
  REQUIRE(rep.converged());
  const MaVector a = ma(P, phi, Y);
  CHECK(a[0] == Approx(a[1]).epsilon(1e-8));
}

TEST_CASE("random step: convergence, uniqueness, gauge") {
  const ConvexDomain Y(make_square(4.0));
  Rng rng(101);
  const SiteSet P = random_sites(60, Y, rng);
  JkoProblem prob = entropy_problem(P, 0.1, Y);
  const Objective obj = make_objective(prob);
  const PotentialVector phi0 = initial_potential(P, Y);

  auto [phi, rep] = newton_solve(obj, phi0);
  REQUIRE(rep.converged());
  CHECK(rep.final_grad_norm <= 1e-8);
  CHECK(rep.iterations <= 50);

  SECTION("objective trajectory is non-increasing up to value roundoff") {
    for (size_t i = 1; i < rep.objective_trajectory.size(); ++i)
      CHECK(rep.objective_trajectory[i] <=
            rep.objective_trajectory[i - 1] + 1e-12);
    for (double v : rep.objective_trajectory) CHECK(std::isfinite(v));
  }
  SECTION("perturbed start reaches the same value") {
    const PotentialVector phi0b = perturb_interior(prob, phi0, 777);
    auto [phi2, rep2] = newton_solve(obj, phi0b);
    REQUIRE(rep2.converged());
    CHECK(std::abs(prob.eval(phi, Want::value).value -
                   prob.eval(phi2, Want::value).value) <= 1e-9);
  }
  SECTION("constant shifts of the start are invisible after gauge fixing") {
    auto [phi2, rep2] =
        newton_solve(obj, phi0 + Eigen::VectorXd::Constant(60, 4.2));
    REQUIRE(rep2.converged());
    CHECK((phi2 - phi).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(phi2[0] == 0.0); // pinned gauge
  }
  SECTION("fd-of-gradient hessian mode reaches the same minimizer") {
    const ConvexDomain Ys(make_square(4.0));
    Rng r2(5);
    const SiteSet Ps = random_sites(12, Ys, r2);
    JkoProblem small = entropy_problem(Ps, 0.1, Ys);
    SolveOptions opts;
    opts.hessian_mode = SolverHessianMode::fd_of_gradient;
    auto [pa, ra] = newton_solve(make_objective(small),
                                 initial_potential(Ps, Ys));
    auto [pb, rb] = newton_solve(make_objective(small),
                                 initial_potential(Ps, Ys), opts);
    REQUIRE(ra.converged());
    REQUIRE(rb.converged());
    CHECK(std::abs(small.eval(pa, Want::value).value -
                   small.eval(pb, Want::value).value) <= 1e-9);
  }
}

TEST_CASE("infeasible start is reported") {
  const ConvexDomain Y(make_square(2.0));
  const SiteSet P(std::vector<Point2>{{-1, 0}, {1, 0}});
  JkoProblem prob = entropy_problem(P, 0.1, Y);
  PotentialVector bad(2);
  bad << 0.0, 10.0;
  auto [phi, rep] = newton_solve(make_objective(prob), bad);
  CHECK(rep.reason == Termination::infeasible_start);
}

TEST_CASE("initial potential") {
  const ConvexDomain Y(make_square(4.0));
  SECTION("matches the zero-weight diagram") {
    Rng rng(107);
    const SiteSet P = random_sites(30, Y, rng);
    const PotentialVector phi = initial_potential(P, Y);
    for (int p = 0; p < 30; ++p)
      CHECK(phi[p] == 0.5 * norm2(P[p]));
    const LaguerreDiagram d = build_diagram(P, phi, Y);
    CHECK(d.all_nonempty());
    CHECK(d.area_sum() == Approx(Y.domain_area()).epsilon(1e-12));
  }
  SECTION("site with an out-of-domain Voronoi cell is diagnosed") {
    const ConvexDomain U(make_box(0, 0, 1, 1));
    const SiteSet P(std::vector<Point2>{{0.5, 0.5}, {100, 100}});
    CHECK_THROWS_WITH(initial_potential(P, U),
                      Catch::Matchers::ContainsSubstring("site 1"));
  }
}

TEST_CASE("fixed-point outer loop") {
  const ConvexDomain Y(make_square(2.0));

  auto make = [&](const SiteSet& P, double tau) {
    return [&, tau](const std::vector<Point2>& frozen) -> Objective {
      EnergySpecs specs;
      specs.internal = InternalEnergySpec::entropy();
      specs.potential = PotentialSpec::quadratic(0.5, {0.3, 0.0});
      specs.selection = GradientSelection{frozen};
      // Transport couples through the cell geometry; the potential term is
      // evaluated at the frozen selection.
      auto prob = std::make_shared<JkoProblem>(
          DiscreteMeasure::uniform(P), tau, Y, specs, CouplingMode::ac);
      const double e_frozen = [&] {
        DiscreteMeasure nu = DiscreteMeasure::uniform(P);
        nu.sites = SiteSet(frozen);
        return potential_energy(nu, *specs.potential);
      }();
      return [prob, e_frozen](const Eigen::VectorXd& phi, bool derivs) {
        JkoEval e = prob->eval(phi, derivs ? Want::full : Want::value);
        ObjectiveEval out;
        out.value = e.value + e_frozen;
        out.grad = std::move(e.grad);
        out.hess = std::move(e.hess);
        out.max_step = std::move(e.max_step);
        return out;
      };
    };
  };
  auto select = [&](const SiteSet& P) {
    return [&](const Eigen::VectorXd& phi) {
      return steiner_selection(build_diagram(P, phi, Y)).g;
    };
  };

  SECTION("a solved potential is a fixed point after one round") {
    const SiteSet P(std::vector<Point2>{{-0.5, 0.1}, {0.4, -0.2}});
    auto mk = make(P, 0.05);
    auto sel = select(P);
    auto first = fixed_point_outer(mk, sel, initial_potential(P, Y), {});
    REQUIRE(first.report.converged);
    auto again = fixed_point_outer(mk, sel, first.phi, {});
    CHECK(again.report.rounds == 1);
  }
  SECTION("symmetry is preserved") {
    const SiteSet P(std::vector<Point2>{{-0.5, 0.0}, {0.5, 0.0}});
    auto mk = [&](const std::vector<Point2>& frozen) -> Objective {
      EnergySpecs specs;
      specs.internal = InternalEnergySpec::entropy();
      specs.selection = GradientSelection{frozen};
      auto prob = std::make_shared<JkoProblem>(
          DiscreteMeasure::uniform(P), 0.05, Y, specs, CouplingMode::ac);
      return [prob](const Eigen::VectorXd& phi, bool derivs) {
        JkoEval e = prob->eval(phi, derivs ? Want::full : Want::value);
        return ObjectiveEval{e.value, std::move(e.grad), std::move(e.hess),
                             std::move(e.max_step)};
      };
    };
    auto res = fixed_point_outer(mk, select(P), initial_potential(P, Y), {});
    REQUIRE(res.report.converged);
    CHECK(res.selection[0].x == Approx(-res.selection[1].x).margin(1e-7));
    CHECK(std::abs(res.selection[0].y) <= 1e-7);
    CHECK(std::abs(res.selection[1].y) <= 1e-7);
  }
  SECTION("small steps pin the selection to the sites") {
    // Regular grid sites: the transport term dominates as tau -> 0 and the
    // selected points converge to the sites themselves.
    std::vector<Point2> pts;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        pts.push_back({-0.75 + 0.5 * i, -0.75 + 0.5 * j});
    const SiteSet P(pts);
    double prev = kInf;
    for (double tau : {1e-1, 1e-2, 1e-3, 1e-4}) {
      auto mk = [&](const std::vector<Point2>& frozen) -> Objective {
        EnergySpecs specs;
        specs.internal = InternalEnergySpec::entropy();
        specs.selection = GradientSelection{frozen};
        auto prob = std::make_shared<JkoProblem>(
            DiscreteMeasure::uniform(P), tau, Y, specs, CouplingMode::ac);
        return [prob](const Eigen::VectorXd& phi, bool derivs) {
          JkoEval e = prob->eval(phi, derivs ? Want::full : Want::value);
          return ObjectiveEval{e.value, e.grad, e.hess};
        };
      };
      auto res = fixed_point_outer(mk, select(P), initial_potential(P, Y), {});
      double disp = 0.0;
      for (int p = 0; p < P.size(); ++p)
        disp = std::max(disp, dist(res.selection[p], P[p]));
      CHECK(disp <= prev + 1e-12);
      prev = disp;
      if (tau == 1e-4) CHECK(disp <= 2e-3);
    }
  }
}
