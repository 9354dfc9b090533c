#include "softmod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace softmod {

Terrain Terrain::stairs(double step_width, double step_height, int n_steps, double x_start) {
  Terrain t;
  t.kind_ = Kind::kStairs;
  t.step_width_ = step_width;
  t.step_height_ = step_height;
  t.n_steps_ = n_steps;
  t.x_start_ = x_start;
  return t;
}

double Terrain::height(double x) const {
  if (kind_ == Kind::kFlat || n_steps_ <= 0) return 0.0;
  if (x < x_start_) return step_height_ * n_steps_;
  const double descended = std::floor((x - x_start_) / step_width_) + 1.0;
  if (descended >= n_steps_) return 0.0;
  return step_height_ * (n_steps_ - descended);
}

double Terrain::final_edge() const {
  if (kind_ == Kind::kFlat) return 0.0;
  return x_start_ + step_width_ * (n_steps_ - 1);
}

void check_config(const SimConfig& cfg) {
  auto bad = [](const std::string& what) { throw std::invalid_argument("SimConfig: " + what); };
  if (!(cfg.dt > 0.0)) bad("dt must be positive");
  if (cfg.n_steps < 1) bad("n_steps must be positive");
  if (cfg.contact_stiffness < 0.0 || cfg.contact_damping < 0.0 || cfg.friction < 0.0) {
    bad("contact stiffness, damping and friction must be non-negative");
  }
  if (!(cfg.friction_v_eps > 0.0)) bad("friction_v_eps must be positive");
  if (cfg.checkpoint_interval < 1) bad("checkpoint_interval must be positive");
}

State initial_state(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg) {
  State s;
  s.x = mesh.rest_positions();
  s.v.assign(s.x.size(), Vec2{});
  double min_x = std::numeric_limits<double>::infinity();
  for (const Vec2& p : s.x) min_x = std::min(min_x, p.x);
  double lift = -std::numeric_limits<double>::infinity();
  for (Vec2& p : s.x) {
    p.x -= min_x;
    lift = std::max(lift, terrain.height(p.x) - p.y);
  }
  for (Vec2& p : s.x) p.y += lift + cfg.clearance;
  return s;
}

namespace {

double rest_length(const Spring& s, const SimConfig& cfg, std::span<const double> u) {
  if (!s.actuated()) return s.rest_length;
  return s.rest_length * (1.0 - cfg.max_contraction * u[static_cast<std::size_t>(s.actuator)]);
}

void accumulate_forces(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg,
                       std::span<const double> u, const State& s, std::vector<Vec2>& f) {
  const std::size_t n = mesh.particles.size();
  f.assign(n, Vec2{});
  for (const Spring& sp : mesh.springs) {
    const auto i = static_cast<std::size_t>(sp.i);
    const auto j = static_cast<std::size_t>(sp.j);
    const Vec2 d = s.x[j] - s.x[i];
    const double len = norm(d);
    const Vec2 dir = d * (1.0 / len);
    const double tension =
        sp.stiffness * (len - rest_length(sp, cfg, u)) + sp.damping * dot(s.v[j] - s.v[i], dir);
    f[i] += tension * dir;
    f[j] -= tension * dir;
  }
  for (std::size_t i = 0; i < n; ++i) {
    f[i].y -= mesh.particles[i].mass * cfg.gravity;
    if (!cfg.contact) continue;
    const double pen = terrain.height(s.x[i].x) - s.x[i].y;
    if (pen <= 0.0) continue;
    const double normal = cfg.contact_stiffness * pen - cfg.contact_damping * s.v[i].y;
    if (normal <= 0.0) continue;
    f[i].y += normal;
    f[i].x -= cfg.friction * normal * std::tanh(s.v[i].x / cfg.friction_v_eps);
  }
}

bool finite_state(const State& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) acc += s.x[i].x + s.x[i].y + s.v[i].x + s.v[i].y;
  return std::isfinite(acc);
}

// Maps the adjoint of state k+1 (xb, vb) to the adjoint of state k, and
// writes the adjoint of the actuation signal at step k into ub.
void step_adjoint(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg,
                  std::span<const double> u, const State& s, std::vector<Vec2>& xb,
                  std::vector<Vec2>& vb, std::span<double> ub, std::vector<Vec2>& fb) {
  const std::size_t n = mesh.particles.size();
  const double dt = cfg.dt;
  fb.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    vb[i] += dt * xb[i];
    fb[i] = vb[i] * (dt / mesh.particles[i].mass);
  }
  std::fill(ub.begin(), ub.end(), 0.0);

  for (const Spring& sp : mesh.springs) {
    const auto i = static_cast<std::size_t>(sp.i);
    const auto j = static_cast<std::size_t>(sp.j);
    const Vec2 d = s.x[j] - s.x[i];
    const double len = norm(d);
    const Vec2 dir = d * (1.0 / len);
    const Vec2 dv = s.v[j] - s.v[i];
    const double tension =
        sp.stiffness * (len - rest_length(sp, cfg, u)) + sp.damping * dot(dv, dir);

    const Vec2 w = fb[i] - fb[j];
    const double tension_b = dot(w, dir);
    const Vec2 dir_b = tension * w + (sp.damping * tension_b) * dv;
    const double len_b = sp.stiffness * tension_b;
    const Vec2 d_b = len_b * dir + (dir_b - dot(dir_b, dir) * dir) * (1.0 / len);
    const Vec2 dv_b = (sp.damping * tension_b) * dir;
    xb[j] += d_b;
    xb[i] -= d_b;
    vb[j] += dv_b;
    vb[i] -= dv_b;
    if (sp.actuated()) {
      // rest = l0 (1 - c u)  =>  d tension / d u = k l0 c
      ub[static_cast<std::size_t>(sp.actuator)] +=
          sp.stiffness * sp.rest_length * cfg.max_contraction * tension_b;
    }
  }

  if (!cfg.contact) return;
  for (std::size_t i = 0; i < n; ++i) {
    const double pen = terrain.height(s.x[i].x) - s.x[i].y;
    if (pen <= 0.0) continue;
    const double normal = cfg.contact_stiffness * pen - cfg.contact_damping * s.v[i].y;
    if (normal <= 0.0) continue;
    const double th = std::tanh(s.v[i].x / cfg.friction_v_eps);
    const double normal_b = fb[i].y - cfg.friction * th * fb[i].x;
    vb[i].x += fb[i].x * (-cfg.friction * normal * (1.0 - th * th) / cfg.friction_v_eps);
    xb[i].y -= cfg.contact_stiffness * normal_b;
    vb[i].y -= cfg.contact_damping * normal_b;
  }
}

class Integrator {
 public:
  Integrator(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg,
             const ActuationSource& controller)
      : mesh_(mesh), terrain_(terrain), cfg_(cfg), controller_(controller),
        u_(static_cast<std::size_t>(controller.n_actuators())) {}

  void advance(int k, const State& in, State& out) {
    controller_.signals(k, cfg_.dt, u_);
    step(mesh_, terrain_, cfg_, u_, in, out);
    if (!finite_state(out)) {
      std::ostringstream os;
      os << "non-finite particle state at step " << (k + 1) << " (dt=" << cfg_.dt << ")";
      throw NonFiniteState(os.str());
    }
  }

  std::span<double> signals(int k) {
    controller_.signals(k, cfg_.dt, u_);
    return u_;
  }

 private:
  const RobotMesh& mesh_;
  const Terrain& terrain_;
  const SimConfig& cfg_;
  const ActuationSource& controller_;
  std::vector<double> u_;
};

double clearance(const Terrain& terrain, const State& s) {
  double c = std::numeric_limits<double>::infinity();
  for (const Vec2& p : s.x) c = std::min(c, p.y - terrain.height(p.x));
  return c;
}

void check_actuators(const RobotMesh& mesh, const ActuationSource& controller) {
  if (controller.n_actuators() != mesh.n_actuators) {
    throw std::invalid_argument("controller drives " + std::to_string(controller.n_actuators()) +
                                " actuators, mesh has " + std::to_string(mesh.n_actuators));
  }
}

}  // namespace

void step(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg,
          std::span<const double> u, const State& in, State& out) {
  thread_local std::vector<Vec2> f;
  accumulate_forces(mesh, terrain, cfg, u, in, f);
  const std::size_t n = mesh.particles.size();
  out.x.resize(n);
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = in.v[i] + f[i] * (cfg.dt / mesh.particles[i].mass);
    out.x[i] = in.x[i] + out.v[i] * cfg.dt;
  }
}

Trajectory rollout(const RobotMesh& mesh, const Terrain& terrain, const ActuationSource& controller,
                   const SimConfig& cfg, const RolloutOptions& opts) {
  check_config(cfg);
  check_actuators(mesh, controller);
  const int n_steps = opts.n_steps.value_or(cfg.n_steps);
  Integrator integ(mesh, terrain, cfg, controller);

  Trajectory traj;
  traj.frame_stride = opts.frame_stride;
  traj.com_track.reserve(static_cast<std::size_t>(n_steps) + 1);
  State cur = initial_state(mesh, terrain, cfg);
  State next;
  traj.com_track.push_back(center_of_mass(mesh, cur.x));
  traj.min_clearance = clearance(terrain, cur);
  if (opts.frame_stride > 0) traj.frames.push_back(cur);
  for (int k = 0; k < n_steps; ++k) {
    integ.advance(k, cur, next);
    std::swap(cur, next);
    traj.com_track.push_back(center_of_mass(mesh, cur.x));
    traj.min_clearance = std::min(traj.min_clearance, clearance(terrain, cur));
    if (opts.frame_stride > 0 && ((k + 1) % opts.frame_stride == 0 || k + 1 == n_steps)) {
      traj.frames.push_back(cur);
    }
  }
  traj.final_state = std::move(cur);
  if (opts.completion) traj.completion_step = opts.completion(traj.com_track);
  return traj;
}

GradientResult gradient(const RobotMesh& mesh, const Terrain& terrain,
                        const ParametricActuation& controller, const TrajectoryLoss& loss,
                        const SimConfig& cfg) {
  check_config(cfg);
  check_actuators(mesh, controller);
  const int n_steps = cfg.n_steps;
  const int interval = cfg.checkpoint_interval;
  const std::size_t n = mesh.particles.size();
  Integrator integ(mesh, terrain, cfg, controller);

  GradientResult result;
  Trajectory& traj = result.trajectory;
  std::vector<State> checkpoints;
  checkpoints.reserve(static_cast<std::size_t>(n_steps / interval) + 1);

  State cur = initial_state(mesh, terrain, cfg);
  State next;
  traj.com_track.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.com_track.push_back(center_of_mass(mesh, cur.x));
  traj.min_clearance = clearance(terrain, cur);
  for (int k = 0; k < n_steps; ++k) {
    if (k % interval == 0) checkpoints.push_back(cur);
    integ.advance(k, cur, next);
    std::swap(cur, next);
    traj.com_track.push_back(center_of_mass(mesh, cur.x));
    traj.min_clearance = std::min(traj.min_clearance, clearance(terrain, cur));
  }
  traj.final_state = std::move(cur);

  LossAdjoint seed;
  result.loss = loss.evaluate(mesh, traj, &seed);
  traj.loss = result.loss;

  const double inv_mass = 1.0 / mesh.total_mass();
  std::vector<Vec2> xb(n), vb(n), fb;
  auto add_com_seed = [&](int k) {
    if (seed.d_com.empty()) return;
    const Vec2 g = seed.d_com[static_cast<std::size_t>(k)];
    if (g.x == 0.0 && g.y == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) xb[i] += g * (mesh.particles[i].mass * inv_mass);
  };
  if (!seed.d_final_x.empty()) xb = seed.d_final_x;
  if (!seed.d_final_v.empty()) vb = seed.d_final_v;
  add_com_seed(n_steps);

  result.grad.assign(controller.n_params(), 0.0);
  std::vector<double> ub(static_cast<std::size_t>(mesh.n_actuators));
  std::vector<State> segment(static_cast<std::size_t>(interval));
  for (int c = static_cast<int>(checkpoints.size()) - 1; c >= 0; --c) {
    const int begin = c * interval;
    const int end = std::min(begin + interval, n_steps);
    segment[0] = checkpoints[static_cast<std::size_t>(c)];
    for (int k = begin; k + 1 < end; ++k) {
      integ.advance(k, segment[static_cast<std::size_t>(k - begin)],
                    segment[static_cast<std::size_t>(k - begin + 1)]);
    }
    for (int k = end - 1; k >= begin; --k) {
      auto u = integ.signals(k);
      step_adjoint(mesh, terrain, cfg, u, segment[static_cast<std::size_t>(k - begin)], xb, vb, ub, fb);
      controller.accumulate_gradient(k, cfg.dt, ub, result.grad);
      add_com_seed(k);
    }
  }

  for (double g : result.grad) {
    if (!std::isfinite(g)) throw NonFiniteGradient("non-finite entry in loss gradient");
  }
  return result;
}

double total_energy(const RobotMesh& mesh, const SimConfig& cfg, const State& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < mesh.particles.size(); ++i) {
    const double m = mesh.particles[i].mass;
    e += 0.5 * m * dot(s.v[i], s.v[i]) + m * cfg.gravity * s.x[i].y;
  }
  for (const Spring& sp : mesh.springs) {
    const double stretch = norm(s.x[static_cast<std::size_t>(sp.j)] - s.x[static_cast<std::size_t>(sp.i)]) -
                           sp.rest_length;
    e += 0.5 * sp.stiffness * stretch * stretch;
  }
  return e;
}

Vec2 total_momentum(const RobotMesh& mesh, const State& s) {
  Vec2 p;
  for (std::size_t i = 0; i < mesh.particles.size(); ++i) p += s.v[i] * mesh.particles[i].mass;
  return p;
}

double penetration_bound(const RobotMesh& mesh, const SimConfig& cfg) {
  double total = 0.0;
  double bottom = std::numeric_limits<double>::infinity();
  for (const Particle& p : mesh.particles) {
    total += p.mass;
    bottom = std::min(bottom, p.pos.y);
  }
  int grounded = 0;
  for (const Particle& p : mesh.particles) grounded += p.pos.y == bottom;
  if (grounded == 0) return 0.0;
  return 3.0 * (total / grounded) * cfg.gravity / cfg.contact_stiffness;
}

}  // namespace softmod
