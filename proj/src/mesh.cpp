#include "softmod/mesh.hpp"

#include <map>
#include <numbers>
#include <utility>

#include <nlohmann/json.hpp>

namespace softmod {

double RobotMesh::total_mass() const {
  double m = 0.0;
  for (const Particle& p : particles) m += p.mass;
  return m;
}

std::vector<Vec2> RobotMesh::rest_positions() const {
  std::vector<Vec2> out;
  out.reserve(particles.size());
  for (const Particle& p : particles) out.push_back(p.pos);
  return out;
}

RobotMesh build_mesh(const GridDesign& design, const MaterialParams& params) {
  if (!validate(design).legal) throw IllegalDesign("build_mesh needs a legal design");
  RobotMesh mesh;
  std::map<Cell, int> corner_index;
  std::map<std::pair<int, int>, int> edge_index;

  auto corner = [&](int col, int row) {
    auto [it, inserted] = corner_index.try_emplace(Cell{col, row}, static_cast<int>(mesh.particles.size()));
    if (inserted) mesh.particles.push_back({Vec2{double(col), double(row)}, 0.0});
    return it->second;
  };
  auto edge = [&](int a, int b) {
    auto key = std::minmax(a, b);
    if (edge_index.contains(key)) return;
    edge_index.emplace(key, mesh.n_actuators);
    mesh.springs.push_back({a, b, 1.0, params.stiffness, params.damping, mesh.n_actuators++});
  };

  const double corner_mass = params.cell_mass / 4.0;
  for (Cell c : normalized(design).cells()) {
    const int bl = corner(c.col, c.row);
    const int br = corner(c.col + 1, c.row);
    const int tl = corner(c.col, c.row + 1);
    const int tr = corner(c.col + 1, c.row + 1);
    for (int p : {bl, br, tl, tr}) mesh.particles[static_cast<std::size_t>(p)].mass += corner_mass;
    edge(bl, br);
    edge(br, tr);
    edge(tl, tr);
    edge(bl, tl);
    mesh.springs.push_back({bl, tr, std::numbers::sqrt2, params.stiffness, params.damping, -1});
    mesh.springs.push_back({br, tl, std::numbers::sqrt2, params.stiffness, params.damping, -1});
    ++mesh.n_cells;
  }
  return mesh;
}

Vec2 center_of_mass(const RobotMesh& mesh, std::span<const Vec2> positions) {
  Vec2 acc;
  double m = 0.0;
  for (std::size_t i = 0; i < mesh.particles.size(); ++i) {
    acc += mesh.particles[i].mass * positions[i];
    m += mesh.particles[i].mass;
  }
  return acc * (1.0 / m);
}

nlohmann::json mesh_to_json(const RobotMesh& mesh) {
  nlohmann::json particles = nlohmann::json::array();
  for (const Particle& p : mesh.particles) {
    particles.push_back({{"x", p.pos.x}, {"y", p.pos.y}, {"mass", p.mass}});
  }
  nlohmann::json springs = nlohmann::json::array();
  for (const Spring& s : mesh.springs) {
    nlohmann::json js = {{"i", s.i},
                         {"j", s.j},
                         {"rest_length", s.rest_length},
                         {"stiffness", s.stiffness},
                         {"damping", s.damping}};
    js["actuator"] = s.actuated() ? nlohmann::json(s.actuator) : nlohmann::json(nullptr);
    springs.push_back(std::move(js));
  }
  return {{"particles", std::move(particles)},
          {"springs", std::move(springs)},
          {"n_actuators", mesh.n_actuators},
          {"n_cells", mesh.n_cells}};
}

}  // namespace softmod
