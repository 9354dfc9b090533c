#pragma once

#include <span>
#include <string>

#include "softmod/mesh.hpp"
#include "softmod/sim.hpp"

namespace softmod {

struct SvgView {
  double x_min = -1.0;
  double x_max = 12.0;
  double y_min = -0.5;
  double y_max = 3.5;
  double pixels_per_unit = 60.0;
};

// Fits the view to the trajectory's frames and the terrain under them.
SvgView fit_view(const Trajectory& traj, const Terrain& terrain);

// One frame: terrain polyline, passive springs grey, actuated springs shaded
// from blue (u = 0) to red (u = 1), particles as dots.
std::string render_svg(const RobotMesh& mesh, const Terrain& terrain, const State& state,
                       std::span<const double> u, const SvgView& view, int step, double dt);

}  // namespace softmod
