// CSV and JSON serialization: point sets, diagram dumps, flow traces,
// oracle reports and run manifests.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wgf2d/flows.hpp"
#include "wgf2d/validate.hpp"

namespace wgf2d {

inline constexpr const char* kVersionString = "wgf2d-0.1.0";

using json = nlohmann::json;

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << content;
}

// --- CSV ---------------------------------------------------------------------

struct LoadedPoints {
  SiteSet sites;
  Eigen::VectorXd masses; // normalized to total mass one
};

// Columns x,y[,mass]; header row required.  Masses default to uniform and
// are normalized; malformed rows are reported with their line number.
inline LoadedPoints load_points_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(c));
    return s;
  };
  const std::vector<std::string> header = split(line);
  int cx = -1, cy = -1, cm = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string h = lower(header[i]);
    if (h == "x") cx = static_cast<int>(i);
    else if (h == "y") cy = static_cast<int>(i);
    else if (h == "mass") cm = static_cast<int>(i);
  }
  if (cx < 0 || cy < 0)
    throw std::runtime_error(path.string() + ": header must contain x and y columns");

  std::vector<Point2> pts;
  std::vector<double> masses;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split(line);
    auto parse = [&](int col) {
      if (col >= static_cast<int>(cells.size()))
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) + ": missing column");
      try {
        size_t used = 0;
        const double v = std::stod(cells[col], &used);
        if (!std::isfinite(v))
          throw std::invalid_argument("non-finite");
        return v;
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) + ": bad number '" +
                                 cells[col] + "'");
      }
    };
    pts.push_back({parse(cx), parse(cy)});
    if (cm >= 0) {
      const double m = parse(cm);
      if (!(m > 0))
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(lineno) +
                                 ": mass must be positive");
      masses.push_back(m);
    }
  }
  if (pts.empty()) throw std::runtime_error(path.string() + ": no data rows");
  LoadedPoints out;
  out.sites = SiteSet(std::move(pts));
  const int n = out.sites.size();
  out.masses.resize(n);
  if (masses.empty()) {
    out.masses.setConstant(1.0 / n);
  } else {
    double total = 0.0;
    for (double m : masses) total += m;
    for (int i = 0; i < n; ++i) out.masses[i] = masses[i] / total;
  }
  return out;
}

inline std::string points_csv(const std::vector<Point2>& pts,
                              const Eigen::VectorXd& masses) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,mass\n";
  for (size_t i = 0; i < pts.size(); ++i)
    os << pts[i].x << "," << pts[i].y << "," << masses[static_cast<int>(i)]
       << "\n";
  return os.str();
}

inline std::string grid_csv(const Eigen::VectorXd& masses, const PixelGrid& g) {
  std::ostringstream os;
  os.precision(17);
  os << "ix,iy,x,y,density\n";
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point2 c = g.center(ix, iy);
      os << ix << "," << iy << "," << c.x << "," << c.y << ","
         << masses[g.index(ix, iy)] / g.pixel_area() << "\n";
    }
  return os.str();
}

// --- JSON --------------------------------------------------------------------

inline json diagram_to_json(const LaguerreDiagram& d) {
  json cells = json::array();
  for (int p = 0; p < d.n_sites(); ++p) {
    json verts = json::array();
    for (const Point2& v : d.cells[p].v) verts.push_back({v.x, v.y});
    cells.push_back({{"site", p},
                     {"position", {d.sites[p].x, d.sites[p].y}},
                     {"area", d.areas[p]},
                     {"vertices", verts}});
  }
  json edges = json::array();
  for (const DualEdge& e : d.edges)
    edges.push_back({{"a", e.a},
                     {"b", e.b},
                     {"length", e.length},
                     {"endpoints", {{e.p0.x, e.p0.y}, {e.p1.x, e.p1.y}}}});
  json tris = json::array();
  for (const DualTriangle& t : d.triangles)
    tris.push_back({{"ids", t.ids}, {"vertex", {t.pos.x, t.pos.y}}});
  return {{"n_sites", d.n_sites()},
          {"n_segments", d.n_segments()},
          {"domain_area", d.domain.domain_area()},
          {"cells", cells},
          {"edges", edges},
          {"triangles", tris}};
}

inline json report_to_json(const OracleReport& r) {
  return {{"test", r.test},         {"instance", r.instance},
          {"max_deviation", r.max_deviation}, {"tolerance", r.tolerance},
          {"pass", r.pass},         {"samples", r.samples}};
}

// One JSON object per Newton iteration, newline separated.
inline std::string solve_report_jsonl(const SolveReport& r) {
  std::string out;
  for (size_t i = 0; i + 1 < r.objective_trajectory.size(); ++i) {
    json line = {{"step", i},
                 {"value", r.objective_trajectory[i]},
                 {"grad_inf_norm",
                  i < r.grad_norms.size() ? r.grad_norms[i] : 0.0},
                 {"backtracks", i < r.backtracks.size() ? r.backtracks[i] : 0}};
    out += line.dump() + "\n";
  }
  return out;
}

inline json solve_report_to_json(const SolveReport& r) {
  static constexpr const char* names[] = {"converged", "max_iters", "stalled",
                                          "infeasible_start"};
  return {{"iterations", r.iterations},
          {"final_grad_norm", r.final_grad_norm},
          {"objective_trajectory", r.objective_trajectory},
          {"backtracks", r.backtracks},
          {"termination", names[static_cast<int>(r.reason)]},
          {"regularized_solves", r.regularized_solves},
          {"gradient_fallbacks", r.gradient_fallbacks}};
}

inline json trace_to_json(const FlowTrace& trace) {
  json steps = json::array();
  for (const StepRecord& s : trace.steps) {
    json rec = {{"w_half_tau", s.w_half_tau},
                {"e_term", s.e_term},
                {"u_term", s.u_term},
                {"total", s.total},
                {"objective_initial", s.objective_initial},
                {"objective_final", s.objective_final},
                {"newton_iterations", s.newton_iterations},
                {"grad_norm", s.grad_norm},
                {"converged", s.converged},
                {"n_sites", static_cast<int>(s.positions.size())}};
    if (s.grid_masses.size()) {
      rec["grid_max_density"] = s.grid_max_density;
      rec["grid_total_mass"] = s.grid_total_mass;
      rec["grid_energy"] = s.grid_energy;
    }
    steps.push_back(std::move(rec));
  }
  return {{"steps", steps},
          {"truncated", trace.truncated},
          {"diagnostic", trace.diagnostic},
          {"fast_diffusion_warning", trace.fast_diffusion_warning}};
}

inline void write_manifest(const std::filesystem::path& out_dir,
                           const json& resolved_config) {
  json manifest = {{"version", kVersionString}, {"config", resolved_config}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace wgf2d
