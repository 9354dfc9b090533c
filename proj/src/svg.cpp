#include "softmod/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace softmod {

namespace {

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

SvgView fit_view(const Trajectory& traj, const Terrain& terrain) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double top = 0.0;
  for (const State& s : traj.frames) {
    for (const Vec2& p : s.x) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
      top = std::max(top, p.y);
    }
  }
  SvgView v;
  if (!std::isfinite(lo)) return v;
  if (terrain.kind() == Terrain::Kind::kStairs) {
    hi = std::max(hi, terrain.final_edge() + terrain.step_width());
    top = std::max(top, terrain.step_height() * terrain.n_steps());
  }
  v.x_min = std::floor(lo) - 1.0;
  v.x_max = std::ceil(hi) + 1.0;
  v.y_min = -0.5;
  v.y_max = std::ceil(top) + 1.0;
  return v;
}

std::string render_svg(const RobotMesh& mesh, const Terrain& terrain, const State& state,
                       std::span<const double> u, const SvgView& view, int step, double dt) {
  const double s = view.pixels_per_unit;
  const double w = (view.x_max - view.x_min) * s;
  const double h = (view.y_max - view.y_min) * s;
  auto px = [&](double x) { return f2((x - view.x_min) * s); };
  auto py = [&](double y) { return f2((view.y_max - y) * s); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(w) + "\" height=\"" + f2(h) +
         "\" viewBox=\"0 0 " + f2(w) + " " + f2(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Terrain as a step polyline sampled at the stair edges.
  std::string ground = px(view.x_min) + "," + py(terrain.height(view.x_min));
  if (terrain.kind() == Terrain::Kind::kStairs) {
    for (int k = 0; k < terrain.n_steps(); ++k) {
      const double edge = terrain.x_start() + k * terrain.step_width();
      ground += " " + px(edge) + "," + py(terrain.height(edge - 1e-9));
      ground += " " + px(edge) + "," + py(terrain.height(edge));
    }
  }
  ground += " " + px(view.x_max) + "," + py(terrain.height(view.x_max));
  out += "<polyline points=\"" + ground + "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";

  for (const Spring& sp : mesh.springs) {
    const Vec2& a = state.x[static_cast<std::size_t>(sp.i)];
    const Vec2& b = state.x[static_cast<std::size_t>(sp.j)];
    std::string color = "#b0b0b0";
    if (sp.actuated()) {
      const double level = std::clamp(u[static_cast<std::size_t>(sp.actuator)], 0.0, 1.0);
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%02x00%02x", static_cast<int>(std::lround(255 * level)),
                    static_cast<int>(std::lround(255 * (1.0 - level))));
      color = buf;
    }
    out += "<line x1=\"" + px(a.x) + "\" y1=\"" + py(a.y) + "\" x2=\"" + px(b.x) + "\" y2=\"" +
           py(b.y) + "\" stroke=\"" + color + "\" stroke-width=\"" + (sp.actuated() ? "3" : "1") +
           "\"/>\n";
  }
  for (const Vec2& p : state.x) {
    out += "<circle cx=\"" + px(p.x) + "\" cy=\"" + py(p.y) + "\" r=\"3\" fill=\"black\"/>\n";
  }
  out += "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"14\">step " +
         std::to_string(step) + "  t=" + f2(step * dt) + "s</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace softmod
