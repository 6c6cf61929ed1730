// Energies on discrete measures transported by a convex potential: the two
// pushforwards (point selection / cell-spread density), Wasserstein terms,
// potential and internal energies, and the assembled objective of a single
// implicit gradient-flow step with sparse derivatives.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <map>
#include <optional>

#include "wgf2d/ma.hpp"

namespace wgf2d {

struct DiscreteMeasure {
  SiteSet sites;
  Eigen::VectorXd masses;

  DiscreteMeasure() = default;
  DiscreteMeasure(SiteSet s, Eigen::VectorXd m)
      : sites(std::move(s)), masses(std::move(m)) {
    validate();
  }
  static DiscreteMeasure uniform(SiteSet s) {
    const int n = s.size();
    return DiscreteMeasure(std::move(s),
                           Eigen::VectorXd::Constant(n, 1.0 / n));
  }
  int size() const { return sites.size(); }
  void validate() const {
    if (masses.size() != sites.size())
      throw std::invalid_argument("measure: size mismatch");
    double total = 0.0;
    for (int i = 0; i < masses.size(); ++i) {
      if (!(masses[i] > 0))
        throw std::invalid_argument("measure: nonpositive mass at site " +
                                    std::to_string(i));
      total += masses[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("measure: masses sum to " +
                                  std::to_string(total));
  }
};

// One chosen subgradient per site.
struct GradientSelection {
  std::vector<Point2> g;
  int size() const { return static_cast<int>(g.size()); }
};

inline GradientSelection steiner_selection(const LaguerreDiagram& d) {
  GradientSelection s;
  s.g.reserve(d.n_sites());
  for (int p = 0; p < d.n_sites(); ++p) {
    if (d.cell_empty(p))
      throw std::runtime_error("steiner_selection: empty cell " + std::to_string(p));
    s.g.push_back(steiner_point(d.cells[p]));
  }
  return s;
}

inline GradientSelection centroid_selection(const LaguerreDiagram& d) {
  GradientSelection s;
  s.g.reserve(d.n_sites());
  for (int p = 0; p < d.n_sites(); ++p) {
    if (d.cell_empty(p))
      throw std::runtime_error("centroid_selection: empty cell " + std::to_string(p));
    s.g.push_back(centroid(d.cells[p]));
  }
  return s;
}

// Worst violation of the subgradient inequalities
//   phi(q) >= phi(p) + <q - p, G_p>  and  G_p in Y.
inline double selection_violation(const SiteSet& sites,
                                  const PotentialVector& phi,
                                  const ConvexDomain& domain,
                                  const GradientSelection& G) {
  double worst = 0.0;
  const int n = sites.size();
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (q == p) continue;
      worst = std::max(worst,
                       phi[p] + dot(sites[q] - sites[p], G.g[p]) - phi[q]);
    }
    for (int s = 0; s < domain.num_segments(); ++s)
      worst = std::max(worst, domain.halfplane(s).signed_value(G.g[p]));
  }
  return worst;
}

inline bool selection_feasible(const SiteSet& sites, const PotentialVector& phi,
                               const ConvexDomain& domain,
                               const GradientSelection& G,
                               double tol = 1e-9) {
  return selection_violation(sites, phi, domain, G) <= tol;
}

// Move each Dirac mass to its selected subgradient; coincident targets merge.
inline DiscreteMeasure discrete_pushforward(const DiscreteMeasure& mu,
                                            const GradientSelection& G) {
  if (G.size() != mu.size())
    throw std::invalid_argument("discrete_pushforward: selection size mismatch");
  std::map<std::pair<double, double>, double> acc;
  for (int p = 0; p < mu.size(); ++p) {
    if (!finite(G.g[p]))
      throw std::invalid_argument("discrete_pushforward: non-finite target");
    acc[{G.g[p].x, G.g[p].y}] += mu.masses[p];
  }
  SiteSet s;
  Eigen::VectorXd m(acc.size());
  int i = 0;
  for (const auto& [xy, mass] : acc) {
    s.pts.push_back({xy.first, xy.second});
    m[i++] = mass;
  }
  return DiscreteMeasure(std::move(s), std::move(m));
}

// Piecewise-constant density mu_p / area(cell_p) on the cells.
struct AcPushforward {
  LaguerreDiagram diagram;
  Eigen::VectorXd density;

  double total_mass() const {
    double t = 0.0;
    for (int p = 0; p < diagram.n_sites(); ++p)
      t += density[p] * diagram.areas[p];
    return t;
  }
};

inline AcPushforward ac_pushforward(const DiscreteMeasure& mu,
                                    const LaguerreDiagram& d) {
  if (!d.all_nonempty())
    throw std::runtime_error("ac_pushforward: potential not in the interior");
  AcPushforward out;
  out.density.resize(d.n_sites());
  for (int p = 0; p < d.n_sites(); ++p)
    out.density[p] = mu.masses[p] / d.areas[p];
  out.diagram = d;
  return out;
}

inline AcPushforward ac_pushforward(const DiscreteMeasure& mu,
                                    const PotentialVector& phi,
                                    const ConvexDomain& domain) {
  return ac_pushforward(mu, build_diagram(mu.sites, phi, domain));
}

inline double wasserstein_discrete(const DiscreteMeasure& mu,
                                   const GradientSelection& G) {
  double w = 0.0;
  for (int p = 0; p < mu.size(); ++p)
    w += mu.masses[p] * norm2(mu.sites[p] - G.g[p]);
  return w;
}

inline double wasserstein_ac(const DiscreteMeasure& mu,
                             const LaguerreDiagram& d) {
  if (!d.all_nonempty())
    throw std::runtime_error("wasserstein_ac: potential not in the interior");
  double w = 0.0;
  for (int p = 0; p < mu.size(); ++p)
    w += mu.masses[p] / d.areas[p] * second_moment(d.cells[p], mu.sites[p]);
  return w;
}

inline double wasserstein_ac(const DiscreteMeasure& mu,
                             const PotentialVector& phi,
                             const ConvexDomain& domain) {
  return wasserstein_ac(mu, build_diagram(mu.sites, phi, domain));
}

// Closed-form external potential: quadratic well plus an optional Gaussian
// bump, with an optional quadratic pair interaction.
struct PotentialSpec {
  double quad_weight = 0.0;
  Point2 quad_center{0, 0};
  double bump_amp = 0.0;
  double bump_rate = 0.0;
  Point2 bump_center{0, 0};
  double interaction_weight = 0.0; // W(x,y) = interaction_weight |x-y|^2

  double value(Point2 x) const {
    double v = quad_weight * norm2(x - quad_center);
    if (bump_amp != 0.0)
      v += bump_amp * std::exp(-0.5 * bump_rate * norm2(x - bump_center));
    return v;
  }
  Point2 gradient(Point2 x) const {
    Point2 g = 2.0 * quad_weight * (x - quad_center);
    if (bump_amp != 0.0) {
      const double e = std::exp(-0.5 * bump_rate * norm2(x - bump_center));
      g += (-bump_amp * bump_rate * e) * (x - bump_center);
    }
    return g;
  }
  bool has_bump() const { return bump_amp != 0.0; }
  bool has_interaction() const { return interaction_weight != 0.0; }
  int poly_degree() const { return has_bump() ? -1 : 2; }
  // Metadata only; the solver never relies on it.
  bool convexity_certified() const { return bump_amp <= 0.0 && quad_weight >= 0.0; }

  static PotentialSpec quadratic(double w, Point2 center) {
    PotentialSpec s;
    s.quad_weight = w;
    s.quad_center = center;
    return s;
  }
};

// Integrand U of the internal energy  sum_p area_p * U(mass_p / area_p).
struct InternalEnergySpec {
  enum class Kind { power, entropy, congestion, custom };
  Kind kind = Kind::entropy;
  double m = 1.0;     // power exponent
  double alpha = 1.0; // congestion exponent
  double beta = 1.0;  // congestion scale
  std::function<double(double)> U, dU, d2U;
  bool superlinear = true;

  static InternalEnergySpec entropy() {
    InternalEnergySpec s;
    s.kind = Kind::entropy;
    s.m = 1.0;
    s.U = [](double r) { return r > 0 ? r * std::log(r) : 0.0; };
    s.dU = [](double r) { return std::log(r) + 1.0; };
    s.d2U = [](double r) { return 1.0 / r; };
    s.superlinear = true;
    return s;
  }
  static InternalEnergySpec power(double m) {
    if (m == 1.0) return entropy();
    InternalEnergySpec s;
    s.kind = Kind::power;
    s.m = m;
    s.U = [m](double r) { return r > 0 ? std::pow(r, m) / (m - 1.0) : 0.0; };
    s.dU = [m](double r) { return m * std::pow(r, m - 1.0) / (m - 1.0); };
    s.d2U = [m](double r) { return m * std::pow(r, m - 2.0); };
    s.superlinear = m > 1.0;
    return s;
  }
  static InternalEnergySpec congestion(double alpha, double beta) {
    InternalEnergySpec s;
    s.kind = Kind::congestion;
    s.alpha = alpha;
    s.beta = beta;
    const double a = alpha, b = beta;
    s.U = [a, b](double r) {
      if (r <= 0) return 0.0;
      if (r >= 1.0) return std::numeric_limits<double>::infinity();
      return -b * std::pow(r, a) * std::log(1.0 - std::sqrt(r));
    };
    s.dU = [a, b](double r) {
      const double sq = std::sqrt(r);
      const double L = -std::log(1.0 - sq);
      return b * (a * std::pow(r, a - 1.0) * L +
                  std::pow(r, a - 0.5) / (2.0 * (1.0 - sq)));
    };
    s.d2U = [a, b](double r) {
      const double sq = std::sqrt(r);
      const double L = -std::log(1.0 - sq);
      return b * (a * (a - 1.0) * std::pow(r, a - 2.0) * L +
                  (a - 0.25) * std::pow(r, a - 1.5) / (1.0 - sq) +
                  0.25 * std::pow(r, a - 1.0) / ((1.0 - sq) * (1.0 - sq)));
    };
    s.superlinear = true; // blows up at density one, which also bars empty cells
    return s;
  }
  static InternalEnergySpec custom(std::function<double(double)> u,
                                   std::function<double(double)> du,
                                   std::function<double(double)> d2u,
                                   bool superlinear_growth) {
    InternalEnergySpec s;
    s.kind = Kind::custom;
    s.U = std::move(u);
    s.dU = std::move(du);
    s.d2U = std::move(d2u);
    s.superlinear = superlinear_growth;
    return s;
  }

  // Value of the discretized internal energy given masses and cell areas.
  double term_value(const Eigen::VectorXd& masses, const Eigen::VectorXd& areas,
                    double empty_tol) const {
    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int p = 0; p < masses.size(); ++p) {
      const double a = areas[p];
      if (a <= empty_tol) {
        if (superlinear) return inf;
        continue; // sublinear growth: a * U(mu/a) -> 0
      }
      const double rho = masses[p] / a;
      if (kind == Kind::entropy) {
        total += -masses[p] * std::log(a);
      } else {
        const double u = U(rho);
        if (!std::isfinite(u)) return inf;
        total += a * u;
      }
    }
    return total;
  }
  // d/da [ a U(mu/a) ] = U(rho) - rho U'(rho).
  double area_derivative(double rho) const { return U(rho) - rho * dU(rho); }
  // d^2/da^2 [ a U(mu/a) ] = rho^2 U''(rho) / a.
  double area_curvature(double rho, double a) const {
    return rho * rho * d2U(rho) / a;
  }
};

inline double internal_energy(const DiscreteMeasure& mu,
                              const LaguerreDiagram& d,
                              const InternalEnergySpec& u) {
  return u.term_value(mu.masses, ma(d), d.empty_tolerance());
}

inline double internal_energy(const DiscreteMeasure& mu,
                              const PotentialVector& phi,
                              const ConvexDomain& domain,
                              const InternalEnergySpec& u) {
  return internal_energy(mu, build_diagram(mu.sites, phi, domain), u);
}

inline double potential_energy(const DiscreteMeasure& nu,
                               const PotentialSpec& spec) {
  double e = 0.0;
  for (int p = 0; p < nu.size(); ++p)
    e += nu.masses[p] * spec.value(nu.sites[p]);
  if (spec.has_interaction()) {
    for (int p = 0; p < nu.size(); ++p)
      for (int q = 0; q < nu.size(); ++q)
        e += nu.masses[p] * nu.masses[q] * spec.interaction_weight *
             norm2(nu.sites[p] - nu.sites[q]);
  }
  return e;
}

struct McCannReport {
  bool monotone_ok = true;
  bool convex_ok = true;
  double worst_monotone_gap = 0.0;
  double worst_convex_gap = 0.0;
  int usable_points = 0;
  bool pass() const { return monotone_ok && convex_ok; }
};

// Checks that g(r) = r^2 U(r^{-2}) is non-increasing and convex on the given
// positive grid (three-point test, so uneven spacing is fine).
inline McCannReport mccann_check(const InternalEnergySpec& u,
                                 const std::vector<double>& grid) {
  McCannReport rep;
  std::vector<double> r, g;
  for (double x : grid) {
    if (!(x > 0)) continue;
    const double rho = 1.0 / (x * x);
    const double ux = u.U(rho);
    if (!std::isfinite(ux)) continue;
    r.push_back(x);
    g.push_back(x * x * ux);
  }
  rep.usable_points = static_cast<int>(r.size());
  const double tol = 1e-9;
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    const double gap = g[i + 1] - g[i]; // should be <= 0 for r increasing
    if (r[i + 1] > r[i]) {
      rep.worst_monotone_gap = std::max(rep.worst_monotone_gap, gap);
      if (gap > tol * (1.0 + std::abs(g[i]))) rep.monotone_ok = false;
    }
  }
  for (size_t i = 0; i + 2 < r.size(); ++i) {
    const double lam = (r[i + 2] - r[i + 1]) / (r[i + 2] - r[i]);
    const double interp = lam * g[i] + (1.0 - lam) * g[i + 2];
    const double gap = g[i + 1] - interp; // should be <= 0 for convexity
    rep.worst_convex_gap = std::max(rep.worst_convex_gap, gap);
    if (gap > tol * (1.0 + std::abs(interp))) rep.convex_ok = false;
  }
  return rep;
}

enum class CouplingMode { ac, selection };

struct EnergySpecs {
  InternalEnergySpec internal;
  std::optional<PotentialSpec> potential;
  std::optional<GradientSelection> selection; // frozen targets for mode selection
};

enum class Want { value, full };

struct JkoEval {
  double value = std::numeric_limits<double>::infinity();
  bool interior = false;
  double w_term = 0.0; // squared transport cost (before the 1/2tau factor)
  double e_term = 0.0;
  double u_term = 0.0;
  Eigen::VectorXd grad;
  SparseMat hess;
  // Fraction-to-boundary cap: largest step along a direction that keeps the
  // linearized cell areas clear of the feasibility floor.
  std::function<double(const Eigen::VectorXd&)> max_step;
};

// One implicit-step objective  W^2/(2 tau) + E + U  as a function of the
// potential.  Holds the reusable site ordering so repeated evaluations
// (Newton iterations, line searches) stay cheap.
class JkoProblem {
 public:
  JkoProblem(DiscreteMeasure mu, double tau, ConvexDomain domain,
             EnergySpecs specs, CouplingMode mode)
      : mu_(std::move(mu)),
        tau_(tau),
        domain_(std::move(domain)),
        specs_(std::move(specs)),
        mode_(mode),
        ordering_(SiteOrdering::build(mu_.sites)) {
    if (!(tau_ > 0)) throw std::invalid_argument("jko: tau must be positive");
    if (mode_ == CouplingMode::selection && !specs_.selection)
      throw std::invalid_argument("jko: selection mode needs frozen targets");
    if (mode_ == CouplingMode::ac && specs_.potential &&
        specs_.potential->has_interaction())
      throw std::invalid_argument(
          "jko: pair interactions are only supported with a point selection");
  }

  int size() const { return mu_.size(); }
  const DiscreteMeasure& measure() const { return mu_; }
  const ConvexDomain& domain() const { return domain_; }
  double tau() const { return tau_; }
  const SiteOrdering& ordering() const { return ordering_; }

  JkoEval eval(const PotentialVector& phi, Want want) const {
    JkoEval out;
    const LaguerreDiagram d = build_diagram(mu_.sites, phi, domain_, ordering_);
    if (!d.all_nonempty()) return out; // +inf, not interior
    out.interior = true;
    const int n = d.n_sites();
    const Eigen::VectorXd A = ma(d);
    const Eigen::VectorXd& mass = mu_.masses;

    out.u_term = specs_.internal.term_value(mass, A, d.empty_tolerance());
    if (!std::isfinite(out.u_term)) {
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }

    const double w_coeff = std::isinf(tau_) ? 0.0 : 1.0 / (2.0 * tau_);
    // Transport cost of the point pushforward.  In ac mode the selected
    // point is the cell centroid, the selection that is smooth in the
    // potential; its derivatives come from the same boundary-motion rule
    // as the cell areas.
    Eigen::VectorXd Bx, By; // cell integrals of the coordinate functions
    std::vector<Point2> cent;
    if (mode_ == CouplingMode::ac) {
      if (w_coeff != 0.0) {
        Bx.resize(n);
        By.resize(n);
        cent.resize(n);
        out.w_term = 0.0;
        for (int p = 0; p < n; ++p) {
          Bx[p] = polygon_integral(d.cells[p], [](Point2 x) { return x.x; }, 1);
          By[p] = polygon_integral(d.cells[p], [](Point2 x) { return x.y; }, 1);
          cent[p] = Point2{Bx[p] / A[p], By[p] / A[p]};
          out.w_term += mass[p] * norm2(mu_.sites[p] - cent[p]);
        }
      }
    } else {
      const GradientSelection& G = *specs_.selection;
      out.w_term = wasserstein_discrete(mu_, G);
    }

    Eigen::VectorXd Phi; // per-cell integral of V
    if (specs_.potential) {
      const PotentialSpec& V = *specs_.potential;
      if (mode_ == CouplingMode::ac) {
        Phi.resize(n);
        for (int p = 0; p < n; ++p)
          Phi[p] = polygon_integral(
              d.cells[p], [&](Point2 x) { return V.value(x); },
              V.poly_degree());
        out.e_term = (mass.array() * Phi.array() / A.array()).sum();
      } else {
        DiscreteMeasure nu = mu_;
        nu.sites = SiteSet(specs_.selection->g);
        out.e_term = potential_energy(nu, V);
      }
    }
    out.value = w_coeff * out.w_term + out.e_term + out.u_term;
    if (want == Want::value) return out;

    // ---- derivatives ----
    const SparseMat J = ma_jacobian(d);
    VertexDerivCache vcache; // shared by all field assemblies on this diagram
    CellFieldData area_field = assemble_cell_field(d, phi, nullptr, true, &vcache);
    const MaHessian& Hma = area_field.d2F;

    {
      // Feasibility floor per cell: density one for the congestion barrier,
      // the empty-cell tolerance otherwise.
      Eigen::VectorXd floor(n);
      const bool congested =
          specs_.internal.kind == InternalEnergySpec::Kind::congestion;
      for (int p = 0; p < n; ++p)
        floor[p] = congested ? mass[p] : 4.0 * d.empty_tolerance();
      out.max_step = [J, A, floor](const Eigen::VectorXd& delta) {
        const Eigen::VectorXd dA = J * delta;
        double t = 1.0;
        for (int p = 0; p < A.size(); ++p) {
          if (dA[p] >= 0) continue;
          const double gap = A[p] - floor[p];
          if (gap <= 0) return 1e-12;
          t = std::min(t, 0.95 * gap / (-dA[p]));
        }
        return t;
      };
    }

    Eigen::VectorXd psi(n), curve(n);
    for (int p = 0; p < n; ++p) {
      const double rho = mass[p] / A[p];
      psi[p] = specs_.internal.area_derivative(rho);
      curve[p] = specs_.internal.area_curvature(rho, A[p]);
    }
    out.grad = J.transpose() * psi;
    SparseMat H = SparseMat(J.transpose() * curve.asDiagonal() * J) +
                  Hma.contract(psi);

    auto add_ratio_term = [&](const Eigen::VectorXd& F,
                              const CellFieldData& data, double coeff) {
      // d/dphi of  sum_p mass_p F_p / A_p  and its Hessian.
      const Eigen::VectorXd wA = mass.array() / A.array();
      const Eigen::VectorXd wA2 = mass.array() * F.array() / A.array().square();
      out.grad += coeff * (data.dF.transpose() * wA - J.transpose() * wA2);
      const Eigen::VectorXd wA3 =
          2.0 * mass.array() * F.array() / A.array().cube();
      SparseMat term = data.d2F.contract(wA);
      term -= SparseMat(data.dF.transpose() * (mass.array() / A.array().square()).matrix().asDiagonal() * J);
      term -= SparseMat(J.transpose() * (mass.array() / A.array().square()).matrix().asDiagonal() * data.dF);
      term -= Hma.contract(wA2);
      term += SparseMat(J.transpose() * wA3.asDiagonal() * J);
      H += coeff * term;
    };

    if (mode_ == CouplingMode::ac && w_coeff != 0.0) {
      CellIntegrand fx, fy;
      fx.value = [](int, Point2 x) { return x.x; };
      fx.grad = [](int, Point2) { return Point2{1.0, 0.0}; };
      fx.degree = 1;
      fy.value = [](int, Point2 x) { return x.y; };
      fy.grad = [](int, Point2) { return Point2{0.0, 1.0}; };
      fy.degree = 1;
      CellFieldData bxf = assemble_cell_field(d, phi, &fx, true, &vcache);
      CellFieldData byf = assemble_cell_field(d, phi, &fy, true, &vcache);

      // Derivative of the centroid coordinate:  dc = (dB - c dA) / A.
      const Eigen::VectorXd invA = A.cwiseInverse();
      const Eigen::VectorXd cx = Bx.cwiseProduct(invA);
      const Eigen::VectorXd cy = By.cwiseProduct(invA);
      const SparseMat Dx =
          invA.asDiagonal() * SparseMat(bxf.dF - SparseMat(cx.asDiagonal() * J));
      const SparseMat Dy =
          invA.asDiagonal() * SparseMat(byf.dF - SparseMat(cy.asDiagonal() * J));
      Eigen::VectorXd ex(n), ey(n); // centroid offsets from the sites
      for (int p = 0; p < n; ++p) {
        ex[p] = cx[p] - mu_.sites[p].x;
        ey[p] = cy[p] - mu_.sites[p].y;
      }
      const Eigen::VectorXd wx = 2.0 * mass.cwiseProduct(ex);
      const Eigen::VectorXd wy = 2.0 * mass.cwiseProduct(ey);
      out.grad += w_coeff * (Dx.transpose() * wx + Dy.transpose() * wy);

      // Gauss-Newton parts  2 m (Dc^T Dc)  plus the curvature of c itself:
      //   d2c = [d2B - c d2A]/A - (Dc dA^T + dA Dc^T)/A  (per cell row).
      SparseMat term = SparseMat(2.0 * (Dx.transpose() * mass.asDiagonal() * Dx +
                                        Dy.transpose() * mass.asDiagonal() * Dy));
      term += bxf.d2F.contract(wx.cwiseProduct(invA));
      term += byf.d2F.contract(wy.cwiseProduct(invA));
      term -= Hma.contract(wx.cwiseProduct(invA).cwiseProduct(cx) +
                           wy.cwiseProduct(invA).cwiseProduct(cy));
      const Eigen::VectorXd sx = wx.cwiseProduct(invA);
      const Eigen::VectorXd sy = wy.cwiseProduct(invA);
      SparseMat cross = SparseMat(Dx.transpose() * sx.asDiagonal() * J) +
                        SparseMat(Dy.transpose() * sy.asDiagonal() * J);
      term -= SparseMat(cross + SparseMat(cross.transpose()));
      H += w_coeff * term;
    }
    if (mode_ == CouplingMode::ac && specs_.potential) {
      const PotentialSpec& V = *specs_.potential;
      CellIntegrand f;
      f.value = [&V](int, Point2 x) { return V.value(x); };
      f.grad = [&V](int, Point2 x) { return V.gradient(x); };
      f.degree = V.poly_degree();
      CellFieldData efield = assemble_cell_field(d, phi, &f, true, &vcache);
      add_ratio_term(Phi, efield, 1.0);
    }
    out.hess = H;
    return out;
  }

 private:
  DiscreteMeasure mu_;
  double tau_;
  ConvexDomain domain_;
  EnergySpecs specs_;
  CouplingMode mode_;
  SiteOrdering ordering_;
};

inline JkoEval jko_objective(const PotentialVector& phi,
                             const DiscreteMeasure& mu, double tau,
                             const ConvexDomain& domain,
                             const EnergySpecs& specs, CouplingMode mode,
                             Want want = Want::full) {
  return JkoProblem(mu, tau, domain, specs, mode).eval(phi, want);
}

// --- nonconvexity demonstration --------------------------------------------

struct NonconvexityInstance {
  DiscreteMeasure mu;
  ConvexDomain domain;
  PotentialVector phi0, phi1;
};

// Three sites, one far outside the target square; the second moment of the
// spread pushforward along the linear potential path fails midpoint
// convexity.
inline NonconvexityInstance nonconvexity_instance() {
  NonconvexityInstance inst;
  SiteSet sites(std::vector<Point2>{{2, 0}, {0, 1}, {0, -1}});
  Eigen::VectorXd m(3);
  m << 0.8, 0.1, 0.1;
  inst.mu = DiscreteMeasure(std::move(sites), std::move(m));
  inst.domain = ConvexDomain(make_square(2.0));
  inst.phi0 = Eigen::Vector3d(1.0, 0.0, 0.0);
  inst.phi1 = Eigen::Vector3d::Zero();
  return inst;
}

// Second moment (about the origin) of the cell-spread pushforward at
// parameter t along the potential segment.
inline double nonconvexity_energy_at(const NonconvexityInstance& inst,
                                     double t) {
  const PotentialVector phi = (1.0 - t) * inst.phi0 + t * inst.phi1;
  const LaguerreDiagram d = build_diagram(inst.mu.sites, phi, inst.domain);
  double e = 0.0;
  for (int p = 0; p < d.n_sites(); ++p) {
    if (d.cell_empty(p))
      return std::numeric_limits<double>::quiet_NaN();
    e += inst.mu.masses[p] / d.areas[p] *
         second_moment(d.cells[p], Point2{0, 0});
  }
  return e;
}

struct NonconvexityDemo {
  std::vector<double> ts;
  std::vector<double> values;
  bool violation_found = false;
  int vi = -1, vj = -1; // indices of the certificate pair
  double violation_gap = 0.0;
};

inline NonconvexityDemo nonconvexity_demo(int grid_n = 101) {
  const NonconvexityInstance inst = nonconvexity_instance();
  NonconvexityDemo demo;
  demo.ts.resize(grid_n);
  demo.values.resize(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    demo.ts[i] = static_cast<double>(i) / (grid_n - 1);
    demo.values[i] = nonconvexity_energy_at(inst, demo.ts[i]);
  }
  for (int i = 0; i < grid_n; ++i) {
    for (int j = i + 2; j < grid_n; j += 2) {
      const int mid = (i + j) / 2;
      const double gap =
          demo.values[mid] - 0.5 * (demo.values[i] + demo.values[j]);
      if (gap > demo.violation_gap) {
        demo.violation_gap = gap;
        demo.vi = i;
        demo.vj = j;
        demo.violation_found = gap > 1e-9;
      }
    }
  }
  return demo;
}

} // namespace wgf2d
