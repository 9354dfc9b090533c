#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softmod/common.hpp"
#include "softmod/design.hpp"

namespace softmod {

struct MaterialParams {
  double cell_mass = 1.0;
  double stiffness = 3.0e4;
  double damping = 60.0;
};

struct Particle {
  Vec2 pos;  // rest position, block-edge units
  double mass = 0.0;
};

struct Spring {
  int i = 0;
  int j = 0;
  double rest_length = 1.0;
  double stiffness = 0.0;
  double damping = 0.0;
  int actuator = -1;  // -1 = passive

  bool actuated() const { return actuator >= 0; }
};

struct RobotMesh {
  std::vector<Particle> particles;
  std::vector<Spring> springs;
  int n_actuators = 0;
  int n_cells = 0;

  double total_mass() const;
  std::vector<Vec2> rest_positions() const;
};

// Corner particles and edge springs are shared between adjacent cells; every
// unique edge gets its own actuator, the two diagonals per cell are passive.
RobotMesh build_mesh(const GridDesign& design, const MaterialParams& params = {});

Vec2 center_of_mass(const RobotMesh& mesh, std::span<const Vec2> positions);

nlohmann::json mesh_to_json(const RobotMesh& mesh);

}  // namespace softmod
