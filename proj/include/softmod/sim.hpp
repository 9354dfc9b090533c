#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "softmod/common.hpp"
#include "softmod/mesh.hpp"

namespace softmod {

// Piecewise-constant ground height.
class Terrain {
 public:
  enum class Kind { kFlat, kStairs };

  static Terrain flat() { return Terrain(); }
  // Top plateau at step_height * n_steps for x < x_start, one step down every
  // step_width after that, ground level 0 past the last edge.
  static Terrain stairs(double step_width, double step_height, int n_steps, double x_start);

  Kind kind() const { return kind_; }
  double height(double x) const;
  // x of the last stair edge (x_start for flat ground is meaningless; 0).
  double final_edge() const;

  double step_width() const { return step_width_; }
  double step_height() const { return step_height_; }
  int n_steps() const { return n_steps_; }
  double x_start() const { return x_start_; }

 private:
  Kind kind_ = Kind::kFlat;
  double step_width_ = 0.0;
  double step_height_ = 0.0;
  int n_steps_ = 0;
  double x_start_ = 0.0;
};

struct SimConfig {
  double dt = 1.0e-3;
  int n_steps = 2048;
  double gravity = 9.8;
  double contact_stiffness = 5.0e3;
  double contact_damping = 300.0;
  double friction = 0.5;
  double friction_v_eps = 0.3;
  double max_contraction = 0.3;
  double clearance = 0.01;
  int checkpoint_interval = 32;
  bool contact = true;
  std::uint64_t seed = 0;
};

void check_config(const SimConfig& cfg);

struct State {
  std::vector<Vec2> x;
  std::vector<Vec2> v;
};

// Open-loop actuation signal in [0,1] per actuator, by step index.
class ActuationSource {
 public:
  virtual ~ActuationSource() = default;
  virtual int n_actuators() const = 0;
  virtual void signals(int step, double dt, std::span<double> u) const = 0;
};

// An actuation source with a differentiable parameter vector.
class ParametricActuation : public ActuationSource {
 public:
  virtual std::size_t n_params() const = 0;
  // grad += (du/dtheta)^T u_bar at `step`.
  virtual void accumulate_gradient(int step, double dt, std::span<const double> u_bar,
                                   std::span<double> grad) const = 0;
};

class ZeroActuation : public ParametricActuation {
 public:
  explicit ZeroActuation(int n) : n_(n) {}
  int n_actuators() const override { return n_; }
  void signals(int, double, std::span<double> u) const override {
    for (double& x : u) x = 0.0;
  }
  std::size_t n_params() const override { return 0; }
  void accumulate_gradient(int, double, std::span<const double>, std::span<double>) const override {}

 private:
  int n_;
};

// Rest geometry translated so the robot's left edge is at x = 0 and its
// lowest point clears the terrain by cfg.clearance.
State initial_state(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg);

// One semi-implicit Euler step. Throws NonFiniteState.
void step(const RobotMesh& mesh, const Terrain& terrain, const SimConfig& cfg,
          std::span<const double> u, const State& in, State& out);

struct Trajectory {
  std::vector<Vec2> com_track;  // n_steps + 1 entries, index 0 = initial pose
  std::optional<int> completion_step;
  double loss = 0.0;
  double min_clearance = 0.0;  // min over steps/particles of y - height(x)
  State final_state;
  int frame_stride = 0;
  std::vector<State> frames;  // every frame_stride steps plus the last, if requested
};

struct RolloutOptions {
  std::optional<int> n_steps;  // overrides cfg.n_steps
  int frame_stride = 0;        // 0 = no frames
  std::function<std::optional<int>(std::span<const Vec2>)> completion;
};

Trajectory rollout(const RobotMesh& mesh, const Terrain& terrain, const ActuationSource& controller,
                   const SimConfig& cfg, const RolloutOptions& opts = {});

// Adjoint seeds of a scalar loss with respect to the trajectory.
struct LossAdjoint {
  std::vector<Vec2> d_com;      // per com_track entry (may be empty)
  std::vector<Vec2> d_final_x;  // per particle (may be empty)
  std::vector<Vec2> d_final_v;  // per particle (may be empty)
};

class TrajectoryLoss {
 public:
  virtual ~TrajectoryLoss() = default;
  // Loss value; if `adjoint` is non-null, also fills its seeds.
  virtual double evaluate(const RobotMesh& mesh, const Trajectory& traj,
                          LossAdjoint* adjoint) const = 0;
};

struct GradientResult {
  double loss = 0.0;
  std::vector<double> grad;
  Trajectory trajectory;
};

// Reverse-mode gradient through the full rollout with checkpointed
// recomputation every cfg.checkpoint_interval steps.
GradientResult gradient(const RobotMesh& mesh, const Terrain& terrain,
                        const ParametricActuation& controller, const TrajectoryLoss& loss,
                        const SimConfig& cfg);

// Kinetic + elastic (at rest lengths, no actuation) + gravitational energy.
double total_energy(const RobotMesh& mesh, const SimConfig& cfg, const State& s);

// Allowed penetration depth 3 * m * g / k_c, where m is the robot mass per
// particle of its bottom row (the static load one ground particle carries).
double penetration_bound(const RobotMesh& mesh, const SimConfig& cfg);
Vec2 total_momentum(const RobotMesh& mesh, const State& s);

}  // namespace softmod
