// Deterministic SVG rendering of diagrams: cells filled by a fixed color
// scale, optional sites and dual edges.  All numbers are printed with fixed
// precision so identical inputs give identical bytes.

#pragma once

#include <cstdio>
#include <string>

#include "wgf2d/laguerre.hpp"

namespace wgf2d {

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string color_at(double t) {
  // Compact perceptual ramp, dark blue to yellow.
  static constexpr double stops[6][3] = {
      {0.267, 0.005, 0.329}, {0.253, 0.265, 0.530}, {0.164, 0.471, 0.558},
      {0.134, 0.658, 0.517}, {0.477, 0.821, 0.318}, {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0);
  const double x = t * 5.0;
  const int i = std::min(4, static_cast<int>(x));
  const double f = x - i;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(255 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(255 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(255 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

} // namespace detail

struct SvgOptions {
  int width_px = 640;
  bool draw_sites = true;
  bool draw_dual = false;
  // Per-site scalar (e.g. density) mapped onto the fill color scale.
  const Eigen::VectorXd* cell_values = nullptr;
  double vmin = 0.0, vmax = 1.0;
};

inline std::string render_diagram_svg(const LaguerreDiagram& d,
                                      const SvgOptions& opt = {}) {
  const BBox bb = bounding_box(d.domain.polygon());
  const double margin = 0.03 * std::max(bb.xmax - bb.xmin, bb.ymax - bb.ymin);
  const double x0 = bb.xmin - margin, x1 = bb.xmax + margin;
  const double y0 = bb.ymin - margin, y1 = bb.ymax + margin;
  const double scale = opt.width_px / (x1 - x0);
  const int h = static_cast<int>((y1 - y0) * scale + 0.5);
  auto X = [&](double x) { return (x - x0) * scale; };
  auto Y = [&](double y) { return (y1 - y) * scale; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(opt.width_px) + "\" height=\"" + std::to_string(h) +
       "\" viewBox=\"0 0 " + std::to_string(opt.width_px) + " " +
       std::to_string(h) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < d.n_sites(); ++p) {
    const ConvexPolygon& c = d.cells[p];
    if (c.empty()) continue;
    std::string fill = "#dddddd";
    if (opt.cell_values) {
      const double span = opt.vmax - opt.vmin;
      const double t = span > 0 ? ((*opt.cell_values)[p] - opt.vmin) / span : 0.0;
      fill = detail::color_at(t);
    }
    s += "<polygon points=\"";
    for (int i = 0; i < c.size(); ++i) {
      if (i) s += " ";
      s += detail::fmt(X(c.v[i].x)) + "," + detail::fmt(Y(c.v[i].y));
    }
    s += "\" fill=\"" + fill + "\" stroke=\"#303030\" stroke-width=\"0.6\"/>\n";
  }

  if (opt.draw_dual) {
    for (const DualEdge& e : d.edges) {
      if (!is_site_id(e.b, d.n_sites())) continue;
      const Point2 a = d.sites[e.a], b = d.sites[e.b];
      s += "<line x1=\"" + detail::fmt(X(a.x)) + "\" y1=\"" +
           detail::fmt(Y(a.y)) + "\" x2=\"" + detail::fmt(X(b.x)) +
           "\" y2=\"" + detail::fmt(Y(b.y)) +
           "\" stroke=\"#d04040\" stroke-width=\"0.8\"/>\n";
    }
  }
  if (opt.draw_sites) {
    for (int p = 0; p < d.n_sites(); ++p) {
      const Point2 q = d.sites[p];
      s += "<circle cx=\"" + detail::fmt(X(q.x)) + "\" cy=\"" +
           detail::fmt(Y(q.y)) + "\" r=\"1.8\" fill=\"#000000\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

} // namespace wgf2d
