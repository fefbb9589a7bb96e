#include "flock/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace flock {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double x) { return format_double(std::abs(x) < 1e-300 ? 0.0 : x); }

}  // namespace

std::string render_svg(const std::vector<TrajectoryRow>& rows, std::span<const Obstacle> obstacles,
                       std::optional<std::size_t> leader) {
  std::map<std::size_t, std::vector<Vec2>> paths;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const TrajectoryRow& r : rows) {
    paths[r.agent_id].emplace_back(r.x, r.y);
    if (first) {
      xmin = xmax = r.x;
      ymin = ymax = r.y;
      first = false;
    }
    xmin = std::min(xmin, r.x);
    xmax = std::max(xmax, r.x);
    ymin = std::min(ymin, r.y);
    ymax = std::max(ymax, r.y);
  }
  double span = std::max(xmax - xmin, ymax - ymin);
  if (!(span > 0.0)) {
    span = 1.0;
  }
  const double margin = 0.1 * span;
  const double w = xmax - xmin + 2.0 * margin;
  const double h = ymax - ymin + 2.0 * margin;
  const double stroke = 0.004 * span;
  const double marker = 0.015 * span;

  // y is negated so the plot reads with y pointing up.
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(xmin - margin) + " " +
                    num(-(ymax + margin)) + " " + num(w) + " " + num(h) + "\">\n";
  out += "<rect x=\"" + num(xmin - margin) + "\" y=\"" + num(-(ymax + margin)) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
  for (const Obstacle& o : obstacles) {
    out += "<circle class=\"obstacle\" cx=\"" + num(o.center.x()) + "\" cy=\"" + num(-o.center.y()) + "\" r=\"" +
           num(o.radius) + "\" fill=\"#555555\"/>\n";
  }
  for (const auto& [id, pts] : paths) {
    const bool is_leader = leader && *leader == id;
    const std::string color = is_leader ? "#000000" : kPalette[id % kPalette.size()];
    const double sw = is_leader ? 2.5 * stroke : stroke;
    if (pts.size() >= 2) {
      out += "<path class=\"" + std::string(is_leader ? "leader" : "agent") + "\" data-agent=\"" +
             std::to_string(id) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(sw) + "\" d=\"";
      for (std::size_t k = 0; k < pts.size(); ++k) {
        out += (k == 0 ? "M" : " L") + num(pts[k].x()) + " " + num(-pts[k].y());
      }
      out += "\"/>\n";
    }
    const Vec2& s = pts.front();
    const Vec2& e = pts.back();
    out += "<circle class=\"start\" data-agent=\"" + std::to_string(id) + "\" cx=\"" + num(s.x()) + "\" cy=\"" +
           num(-s.y()) + "\" r=\"" + num(marker) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
           num(stroke) + "\"/>\n";
    out += "<path class=\"end\" data-agent=\"" + std::to_string(id) + "\" stroke=\"" + color + "\" stroke-width=\"" +
           num(stroke) + "\" d=\"M" + num(e.x() - marker) + " " + num(-e.y()) + " L" + num(e.x() + marker) + " " +
           num(-e.y()) + " M" + num(e.x()) + " " + num(-e.y() - marker) + " L" + num(e.x()) + " " +
           num(-e.y() + marker) + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace flock
