// Command-line front end: diagram dumps, validation suites, single JKO
// steps and the two flow drivers.  A JSON config file provides defaults,
// command-line flags win.  Exit codes: 0 success, 1 validation failure,
// 2 solver failure, 3 bad config.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "wgf2d/flows.hpp"
#include "wgf2d/io.hpp"
#include "wgf2d/svg.hpp"
#include "wgf2d/validate.hpp"

namespace fs = std::filesystem;
using namespace wgf2d;

namespace {

struct BadConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw BadConfig(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw BadConfig(where + ": unknown key '" + key + "'");
  }
}

ConvexDomain parse_domain(const json& j) {
  check_keys(j, {"kind", "side", "center", "vertices"}, "domain");
  const std::string kind = j.value("kind", "square");
  if (kind == "square") {
    const double side = j.value("side", 1.0);
    Point2 c{0, 0};
    if (j.contains("center")) {
      c.x = j["center"][0].get<double>();
      c.y = j["center"][1].get<double>();
    }
    return ConvexDomain(make_square(side, c));
  }
  if (kind == "polygon") {
    if (!j.contains("vertices")) throw BadConfig("domain: polygon needs vertices");
    std::vector<Point2> v;
    for (const auto& p : j["vertices"])
      v.push_back({p[0].get<double>(), p[1].get<double>()});
    return ConvexDomain(ConvexPolygon{std::move(v)});
  }
  throw BadConfig("domain: unknown kind '" + kind + "'");
}

// "square:4" or "square:4@0,0"
json parse_domain_flag(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || s.substr(0, colon) != "square")
    throw BadConfig("--domain: expected square:<side>");
  json j;
  j["kind"] = "square";
  const std::string rest = s.substr(colon + 1);
  const auto at = rest.find('@');
  j["side"] = std::stod(rest.substr(0, at));
  if (at != std::string::npos) {
    const std::string c = rest.substr(at + 1);
    const auto comma = c.find(',');
    j["center"] = {std::stod(c.substr(0, comma)), std::stod(c.substr(comma + 1))};
  }
  return j;
}

InternalEnergySpec parse_internal(const json& j) {
  check_keys(j, {"kind", "m", "alpha", "beta"}, "energy.internal");
  const std::string kind = j.value("kind", "entropy");
  if (kind == "entropy") return InternalEnergySpec::entropy();
  if (kind == "power") return InternalEnergySpec::power(j.value("m", 2.0));
  if (kind == "congestion")
    return InternalEnergySpec::congestion(j.value("alpha", 1.0),
                                          j.value("beta", 1.0));
  throw BadConfig("energy.internal: unknown kind '" + kind + "'");
}

PotentialSpec parse_potential(const json& j) {
  check_keys(j,
             {"quad_weight", "quad_center", "bump_amp", "bump_rate",
              "bump_center", "interaction_weight"},
             "energy.potential");
  PotentialSpec v;
  v.quad_weight = j.value("quad_weight", 0.0);
  if (j.contains("quad_center"))
    v.quad_center = {j["quad_center"][0].get<double>(),
                     j["quad_center"][1].get<double>()};
  v.bump_amp = j.value("bump_amp", 0.0);
  v.bump_rate = j.value("bump_rate", 0.0);
  if (j.contains("bump_center"))
    v.bump_center = {j["bump_center"][0].get<double>(),
                     j["bump_center"][1].get<double>()};
  v.interaction_weight = j.value("interaction_weight", 0.0);
  return v;
}

SolveOptions parse_solver(const json& j) {
  check_keys(j,
             {"grad_tol", "max_iters", "shrink", "armijo", "tikhonov_floor",
              "hessian_mode"},
             "solver");
  SolveOptions o;
  o.grad_tol = j.value("grad_tol", 1e-8);
  o.max_iters = j.value("max_iters", 100);
  o.shrink = j.value("shrink", 0.5);
  o.armijo_c = j.value("armijo", 1e-4);
  o.tikhonov_floor = j.value("tikhonov_floor", 1e-10);
  const std::string hm = j.value("hessian_mode", "analytic");
  if (hm == "fd") o.hessian_mode = SolverHessianMode::fd_of_gradient;
  else if (hm != "analytic") throw BadConfig("solver.hessian_mode: 'analytic' or 'fd'");
  return o;
}

struct PointSource {
  SiteSet sites;
  Eigen::VectorXd masses;
};

PointSource make_points(const json& j, const ConvexDomain& domain) {
  check_keys(j, {"kind", "n", "seed", "path", "radius", "center"}, "points");
  const std::string kind = j.value("kind", "random");
  if (kind == "csv") {
    if (!j.contains("path")) throw BadConfig("points: csv needs a path");
    const LoadedPoints lp = load_points_csv(j["path"].get<std::string>());
    return {lp.sites, lp.masses};
  }
  const int n = j.value("n", 100);
  if (n < 1) throw BadConfig("points: n must be >= 1");
  Rng rng(j.value("seed", std::uint64_t{1}));
  SiteSet s;
  if (kind == "random") {
    s = SiteSet{};
    while (s.size() < n) s.pts.push_back(rng.in_polygon(domain.polygon()));
  } else if (kind == "disk") {
    Point2 c{0, 0};
    if (j.contains("center"))
      c = {j["center"][0].get<double>(), j["center"][1].get<double>()};
    const double r = j.value("radius", 0.25);
    while (s.size() < n) {
      const Point2 p = rng.in_disk(c, r);
      if (domain.contains(p)) s.pts.push_back(p);
    }
  } else {
    throw BadConfig("points: unknown kind '" + kind + "'");
  }
  return {s, Eigen::VectorXd::Constant(n, 1.0 / n)};
}

fs::path prepare_out_dir(const json& cfg) {
  const std::string dir = cfg.value("out_dir", "out");
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

int cmd_diagram(const json& cfg) {
  const ConvexDomain domain = parse_domain(cfg.value("domain", json{{"kind", "square"}, {"side", 1.0}}));
  const PointSource pts = make_points(cfg.value("points", json{{"kind", "random"}, {"n", 10}}), domain);
  const PotentialVector phi = initial_potential(pts.sites, domain);
  const LaguerreDiagram d = build_diagram(pts.sites, phi, domain);

  const fs::path out = prepare_out_dir(cfg);
  write_manifest(out, cfg);
  write_text_file(out / "diagram.json", diagram_to_json(d).dump(2) + "\n");
  Eigen::VectorXd density(d.n_sites());
  for (int p = 0; p < d.n_sites(); ++p)
    density[p] = d.cell_empty(p) ? 0.0 : pts.masses[p] / d.areas[p];
  SvgOptions opt;
  opt.cell_values = &density;
  opt.vmin = 0.0;
  opt.vmax = std::max(1e-300, density.maxCoeff());
  opt.draw_dual = true;
  write_text_file(out / "diagram.svg", render_diagram_svg(d, opt));
  std::cout << "diagram: " << d.n_sites() << " sites, area sum "
            << d.area_sum() << " of " << domain.domain_area() << "\n";
  return 0;
}

int cmd_validate(const json& cfg) {
  const json v = cfg.value("validate", json::object());
  check_keys(v, {"suite", "seed", "instances"}, "validate");
  const std::uint64_t seed = v.value("seed", std::uint64_t{7});
  const int instances = v.value("instances", 20);
  const std::string suite = v.value("suite", "all");

  std::vector<OracleReport> reports;
  if (suite == "all" || suite == "convexity") {
    auto r = convexity_suite(seed, instances);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  if (suite == "all" || suite == "derivatives") {
    Rng rng(seed + 1);
    const ConvexDomain domain(make_square(4.0));
    for (int i = 0; i < std::max(1, instances / 4); ++i) {
      const int n = 5 + static_cast<int>(rng.uniform() * 45);
      const SiteSet sites = random_sites(n, domain, rng);
      const PotentialVector phi =
          random_interior_potential(sites, domain, rng, 0.2);
      OracleReport rj = fd_check_ma_jacobian(sites, phi, domain);
      rj.instance = "N=" + std::to_string(n);
      reports.push_back(rj);
      OracleReport rh = fd_check_ma_hessian(sites, phi, domain);
      rh.instance = "N=" + std::to_string(n);
      reports.push_back(rh);
    }
  }
  if (suite == "all" || suite == "mc") {
    Rng rng(seed + 2);
    const ConvexDomain domain(make_square(4.0));
    const int n = 12;
    const SiteSet sites = random_sites(n, domain, rng);
    const PotentialVector phi = random_interior_potential(sites, domain, rng, 0.2);
    const McAreaEstimate est = mc_area_oracle(sites, phi, domain, 1000000, seed + 3);
    const Eigen::VectorXd a = ma(sites, phi, domain);
    OracleReport r;
    r.test = "mc-area";
    r.instance = "N=12, 1e6 samples";
    r.samples = est.samples;
    double worst = 0.0;
    for (int p = 0; p < n; ++p)
      worst = std::max(worst, std::abs(a[p] - est.area[p]) /
                                  std::max(est.std_error[p], 1e-12));
    r.max_deviation = worst;
    r.tolerance = 4.0; // sigma units
    r.pass = worst <= r.tolerance;
    reports.push_back(r);
  }

  json arr = json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    arr.push_back(report_to_json(r));
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.test
              << " max_dev=" << r.max_deviation << " tol=" << r.tolerance
              << "\n";
  }
  const fs::path out = prepare_out_dir(cfg);
  write_manifest(out, cfg);
  write_text_file(out / "validate.json", arr.dump(2) + "\n");
  std::cout << arr.dump() << "\n";
  return all_pass ? 0 : 1;
}

json energy_section(const json& cfg) {
  const json e = cfg.value("energy", json::object());
  check_keys(e, {"internal", "potential", "tau", "mode"}, "energy");
  return e;
}

int cmd_jko_step(const json& cfg) {
  const ConvexDomain domain = parse_domain(cfg.value("domain", json{{"kind", "square"}, {"side", 4.0}}));
  const PointSource pts = make_points(cfg.value("points", json{{"kind", "random"}, {"n", 100}}), domain);
  const json e = energy_section(cfg);
  EnergySpecs specs;
  specs.internal = parse_internal(e.value("internal", json{{"kind", "entropy"}}));
  if (e.contains("potential")) specs.potential = parse_potential(e["potential"]);
  const double tau = e.value("tau", 0.1);
  const std::string mode_s = e.value("mode", "ac");
  if (mode_s != "ac" && mode_s != "selection")
    throw BadConfig("energy.mode: 'ac' or 'selection'");
  const SolveOptions sopts = parse_solver(cfg.value("solver", json::object()));

  DiscreteMeasure mu(pts.sites, pts.masses);
  PotentialVector phi0 = initial_potential(pts.sites, domain);
  CouplingMode mode = CouplingMode::ac;
  EnergySpecs run_specs = specs;
  if (mode_s == "selection") {
    mode = CouplingMode::selection;
    run_specs.selection =
        steiner_selection(build_diagram(pts.sites, phi0, domain));
  }
  JkoProblem prob(mu, tau, domain, run_specs, mode);
  const Objective obj = [&](const Eigen::VectorXd& p, bool derivs) {
    JkoEval ev = prob.eval(p, derivs ? Want::full : Want::value);
    return ObjectiveEval{ev.value, std::move(ev.grad), std::move(ev.hess),
                         std::move(ev.max_step)};
  };
  auto [phi, rep] = newton_solve(obj, phi0, sopts);

  const fs::path out = prepare_out_dir(cfg);
  write_manifest(out, cfg);
  const JkoEval fin = prob.eval(phi, Want::value);
  json result = {{"solve", solve_report_to_json(rep)},
                 {"w_term", fin.w_term},
                 {"e_term", fin.e_term},
                 {"u_term", fin.u_term},
                 {"value", fin.value}};
  write_text_file(out / "solve.json", result.dump(2) + "\n");
  write_text_file(out / "newton.jsonl", solve_report_jsonl(rep));
  {
    std::ostringstream os;
    os.precision(17);
    os << "x,y,phi\n";
    for (int p = 0; p < pts.sites.size(); ++p)
      os << pts.sites[p].x << "," << pts.sites[p].y << "," << phi[p] << "\n";
    write_text_file(out / "phi.csv", os.str());
  }
  const LaguerreDiagram d = build_diagram(pts.sites, phi, domain);
  Eigen::VectorXd density(d.n_sites());
  for (int p = 0; p < d.n_sites(); ++p)
    density[p] = d.cell_empty(p) ? 0.0 : pts.masses[p] / d.areas[p];
  SvgOptions opt;
  opt.cell_values = &density;
  opt.vmax = std::max(1e-300, density.maxCoeff());
  write_text_file(out / "cells.svg", render_diagram_svg(d, opt));
  std::cout << "jko-step: " << rep.iterations << " iterations, |g|="
            << rep.final_grad_norm << ", value " << fin.value << "\n";
  return rep.converged() ? 0 : 2;
}

// Fixed color scale for a whole run: densities from all steps.
double flow_density_scale(const FlowTrace& trace) {
  double vmax = 1e-300;
  for (const auto& s : trace.steps)
    for (int p = 0; p < s.masses.size(); ++p)
      if (s.areas.size() == s.masses.size() && s.areas[p] > 0)
        vmax = std::max(vmax, s.masses[p] / s.areas[p]);
  return vmax;
}

void write_flow_artifacts(const fs::path& out, const FlowTrace& trace,
                          const FlowConfig& fc, int snapshot_every,
                          double vmax) {
  write_text_file(out / "trace.json", trace_to_json(trace).dump(2) + "\n");
  const PixelGrid grid = trace.grid_nx
                             ? PixelGrid::over(fc.domain, trace.grid_nx, trace.grid_ny)
                             : PixelGrid{};
  for (size_t k = 0; k < trace.steps.size(); ++k) {
    const StepRecord& s = trace.steps[k];
    write_text_file(out / ("points_" + std::to_string(k) + ".csv"),
                    points_csv(s.positions, s.masses));
    if (s.grid_masses.size())
      write_text_file(out / ("grid_" + std::to_string(k) + ".csv"),
                      grid_csv(s.grid_masses, grid));
    if (snapshot_every > 0 && k % snapshot_every == 0 && s.potential.size()) {
      const LaguerreDiagram d =
          build_diagram(SiteSet(s.positions), s.potential, fc.domain);
      Eigen::VectorXd density(d.n_sites());
      for (int p = 0; p < d.n_sites(); ++p)
        density[p] = d.cell_empty(p) ? 0.0 : s.masses[p] / d.areas[p];
      SvgOptions opt;
      opt.cell_values = &density;
      opt.vmax = vmax;
      write_text_file(out / ("snapshot_" + std::to_string(k) + ".svg"),
                      render_diagram_svg(d, opt));
    }
  }
}

int cmd_flow(const json& cfg, bool crowd) {
  FlowConfig fc;
  fc.domain = parse_domain(cfg.value("domain", json{{"kind", "square"}, {"side", 4.0}}));
  const json e = energy_section(cfg);
  fc.internal = parse_internal(e.value("internal", json{{"kind", "entropy"}}));
  if (e.contains("potential")) fc.potential = parse_potential(e["potential"]);
  fc.tau = e.value("tau", 0.01);
  fc.solver = parse_solver(cfg.value("solver", json::object()));

  const json f = cfg.value("flow", json::object());
  check_keys(f,
             {"steps", "selection", "grid", "init_density", "init_rect",
              "snapshot_every"},
             "flow");
  fc.steps = f.value("steps", 10);
  const std::string sel = f.value("selection", "centroid");
  if (sel == "steiner") fc.selection = SelectionKind::steiner;
  else if (sel == "centroid") fc.selection = SelectionKind::centroid;
  else throw BadConfig("flow.selection: 'steiner' or 'centroid'");
  const int snapshot_every = f.value("snapshot_every", 1);

  FlowTrace trace;
  if (crowd) {
    if (f.contains("grid")) {
      fc.grid_nx = f["grid"][0].get<int>();
      fc.grid_ny = f["grid"][1].get<int>();
    }
    fc.init_density = f.value("init_density", 0.8);
    if (f.contains("init_rect")) {
      fc.rect_xmin = f["init_rect"][0].get<double>();
      fc.rect_ymin = f["init_rect"][1].get<double>();
      fc.rect_xmax = f["init_rect"][2].get<double>();
      fc.rect_ymax = f["init_rect"][3].get<double>();
    }
    trace = crowd_flow(fc);
  } else {
    const json p = cfg.value("points", json{{"kind", "random"}, {"n", 100}});
    check_keys(p, {"kind", "n", "seed", "path", "radius", "center"}, "points");
    fc.seed = p.value("seed", std::uint64_t{1});
    fc.n_points = p.value("n", 100);
    const std::string kind = p.value("kind", "random");
    if (kind == "disk") {
      fc.point_init = FlowConfig::PointInit::disk;
      fc.disk_radius = p.value("radius", 0.25);
      if (p.contains("center"))
        fc.disk_center = {p["center"][0].get<double>(),
                          p["center"][1].get<double>()};
    } else if (kind == "csv") {
      const LoadedPoints lp = load_points_csv(p["path"].get<std::string>());
      fc.explicit_points = lp.sites.pts;
    } else if (kind != "random") {
      throw BadConfig("points: unknown kind '" + kind + "'");
    }
    trace = diffusion_flow(fc);
  }

  const fs::path out = prepare_out_dir(cfg);
  const double vmax = flow_density_scale(trace);
  json resolved = cfg;
  resolved["color_scale"] = {{"min", 0.0}, {"max", vmax}};
  write_manifest(out, resolved);
  write_flow_artifacts(out, trace, fc, snapshot_every, vmax);
  for (size_t k = 0; k < trace.steps.size(); ++k) {
    const StepRecord& s = trace.steps[k];
    std::cout << "step " << k << ": F=" << s.total << " W/2tau=" << s.w_half_tau
              << " E=" << s.e_term << " U=" << s.u_term << " iters="
              << s.newton_iterations << "\n";
  }
  if (trace.truncated) {
    std::cout << "flow truncated: " << trace.diagnostic << "\n";
    return 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-discrete transport flows on convex planar domains"};
  app.require_subcommand(1);

  std::string config_path, out_dir, domain_flag, points_csv_path, mode_flag,
      selection_flag, suite_flag;
  double m_flag = -1, tau_flag = -1, beta_flag = -1, alpha_flag = -1;
  int steps_flag = -1, npoints_flag = -1, grid_flag = -1, instances_flag = -1;
  std::int64_t seed_flag = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--domain", domain_flag, "square:<side>");
    sub->add_option("--seed", seed_flag, "random seed");
    sub->add_option("--n-points", npoints_flag, "number of sites");
  };
  CLI::App* c_diagram = app.add_subcommand("diagram", "dump one diagram");
  add_common(c_diagram);
  CLI::App* c_validate = app.add_subcommand("validate", "run oracle suites");
  add_common(c_validate);
  c_validate->add_option("--suite", suite_flag, "all|convexity|derivatives|mc");
  c_validate->add_option("--instances", instances_flag, "instances per suite");
  CLI::App* c_jko = app.add_subcommand("jko-step", "solve one implicit step");
  add_common(c_jko);
  c_jko->add_option("--tau", tau_flag, "time step");
  c_jko->add_option("--m", m_flag, "power-law exponent");
  c_jko->add_option("--mode", mode_flag, "ac|selection");
  CLI::App* c_fd = app.add_subcommand("flow-diffusion", "nonlinear diffusion flow");
  add_common(c_fd);
  c_fd->add_option("--tau", tau_flag, "time step");
  c_fd->add_option("--steps", steps_flag, "number of steps");
  c_fd->add_option("--m", m_flag, "power-law exponent");
  c_fd->add_option("--selection", selection_flag, "steiner|centroid");
  c_fd->add_option("--points-csv", points_csv_path, "initial points CSV");
  CLI::App* c_fc = app.add_subcommand("flow-crowd", "congested crowd flow");
  add_common(c_fc);
  c_fc->add_option("--tau", tau_flag, "time step");
  c_fc->add_option("--steps", steps_flag, "number of steps");
  c_fc->add_option("--beta", beta_flag, "congestion scale");
  c_fc->add_option("--alpha", alpha_flag, "congestion exponent");
  c_fc->add_option("--grid", grid_flag, "grid resolution per side");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw BadConfig("cannot open config " + config_path);
      f >> cfg;
      check_keys(cfg,
                 {"command", "domain", "points", "energy", "solver", "flow",
                  "validate", "out_dir", "color_scale"},
                 "config");
    }
    // Flag overrides.
    if (!out_dir.empty()) cfg["out_dir"] = out_dir;
    if (!domain_flag.empty()) cfg["domain"] = parse_domain_flag(domain_flag);
    if (npoints_flag > 0) cfg["points"]["n"] = npoints_flag;
    if (seed_flag >= 0) {
      cfg["points"]["seed"] = seed_flag;
      cfg["validate"]["seed"] = seed_flag;
    }
    if (!points_csv_path.empty()) {
      cfg["points"]["kind"] = "csv";
      cfg["points"]["path"] = points_csv_path;
    }
    if (tau_flag > 0) cfg["energy"]["tau"] = tau_flag;
    if (m_flag > 0) cfg["energy"]["internal"] = {{"kind", "power"}, {"m", m_flag}};
    if (alpha_flag > 0 || beta_flag > 0) {
      cfg["energy"]["internal"] = {{"kind", "congestion"},
                                   {"alpha", alpha_flag > 0 ? alpha_flag : 1.0},
                                   {"beta", beta_flag > 0 ? beta_flag : 1.0}};
    }
    if (steps_flag > 0) cfg["flow"]["steps"] = steps_flag;
    if (!selection_flag.empty()) cfg["flow"]["selection"] = selection_flag;
    if (grid_flag > 0) cfg["flow"]["grid"] = {grid_flag, grid_flag};
    if (!suite_flag.empty()) cfg["validate"]["suite"] = suite_flag;
    if (instances_flag > 0) cfg["validate"]["instances"] = instances_flag;

    if (c_diagram->parsed()) return cmd_diagram(cfg);
    if (c_validate->parsed()) return cmd_validate(cfg);
    if (c_jko->parsed()) {
      if (!mode_flag.empty()) cfg["energy"]["mode"] = mode_flag;
      return cmd_jko_step(cfg);
    }
    if (c_fd->parsed()) return cmd_flow(cfg, false);
    if (c_fc->parsed()) {
      if (!cfg.contains("energy") || !cfg["energy"].contains("internal"))
        cfg["energy"]["internal"] = {{"kind", "congestion"}, {"alpha", 1.0}, {"beta", 0.01}};
      if (!cfg["energy"].contains("potential"))
        cfg["energy"]["potential"] = {{"quad_weight", 1.0},
                                      {"quad_center", {2.0, 0.0}},
                                      {"bump_amp", 5.0},
                                      {"bump_rate", 5.0},
                                      {"bump_center", {0.0, 0.0}}};
      return cmd_flow(cfg, true);
    }
  } catch (const BadConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 3;
}
