#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softmod/mesh.hpp"
#include "softmod/sim.hpp"

namespace softmod {

struct SinusoidSegment {
  std::vector<double> amplitude;
  std::vector<double> phase;
  std::vector<double> bias;
};

struct LevelSegment {
  double duration = 0.0;  // seconds
  double level = 0.0;
};

// Open-loop actuation. A sinusoid plan may hold several parameter segments
// that take turns within a cycle of `cycle_steps` (used for back-and-forth
// gaits); with one segment the cycle length is irrelevant.
class ActuationPlan : public ParametricActuation {
 public:
  enum class Kind { kSinusoid, kPiecewiseConstant };

  static ActuationPlan sinusoid(double omega, std::vector<SinusoidSegment> segments,
                                int cycle_steps = 0);
  // Per-actuator level schedules, each repeated cyclically.
  static ActuationPlan piecewise(std::vector<std::vector<LevelSegment>> schedule);

  Kind kind() const { return kind_; }
  double omega() const { return omega_; }
  // Same parameters with the segment cycle stretched to `cycle_steps`.
  ActuationPlan with_cycle(int cycle_steps) const;
  int cycle_steps() const { return cycle_steps_; }
  const std::vector<SinusoidSegment>& segments() const { return segments_; }
  const std::vector<std::vector<LevelSegment>>& schedule() const { return schedule_; }

  int n_actuators() const override { return n_actuators_; }
  void signals(int step, double dt, std::span<double> u) const override;

  // Parameters laid out as [segment][actuator][amplitude, phase, bias].
  std::size_t n_params() const override;
  std::vector<double> params() const;
  void set_params(std::span<const double> theta);
  void accumulate_gradient(int step, double dt, std::span<const double> u_bar,
                           std::span<double> grad) const override;

  nlohmann::json to_json() const;
  static ActuationPlan from_json(const nlohmann::json& j);

 private:
  std::size_t segment_at(int step) const;

  Kind kind_ = Kind::kSinusoid;
  int n_actuators_ = 0;
  double omega_ = 0.0;
  int cycle_steps_ = 0;
  std::vector<SinusoidSegment> segments_;
  std::vector<std::vector<LevelSegment>> schedule_;
};

enum class Objective { kUni, kBackForth, kDownstairs };
enum class Environment { kFlatPlane, kStairs };

std::string_view objective_name(Objective o);
std::string_view environment_name(Environment e);
Objective parse_objective(std::string_view s);
Environment parse_environment(std::string_view s);

struct StairsParams {
  double step_width = 1.0;
  double step_height = 0.25;
  int n_steps = 3;
  double lead = 0.25;  // gap between the robot's right edge and the first drop
};

inline constexpr double kDefaultDistance = 4.0;

struct TaskSpec {
  Objective objective = Objective::kUni;
  Environment environment = Environment::kFlatPlane;
  StairsParams stairs;
  std::optional<double> distance_req;
  std::optional<int> min_blocks;
  std::optional<int> max_blocks;

  double distance() const { return distance_req.value_or(kDefaultDistance); }
  bool has_block_bounds() const { return min_blocks.has_value() || max_blocks.has_value(); }
};

// Throws std::invalid_argument for objective/environment mismatches.
void check_task(const TaskSpec& task);
TaskSpec default_task(Objective objective);

// Stairs start `lead` past the robot's initial right edge.
Terrain make_terrain(const TaskSpec& task, const RobotMesh& mesh);

// Differentiable surrogate loss for the task over a horizon of n_steps.
class TaskLoss : public TrajectoryLoss {
 public:
  explicit TaskLoss(Objective objective) : objective_(objective) {}
  double evaluate(const RobotMesh& mesh, const Trajectory& traj,
                  LossAdjoint* adjoint) const override;

 private:
  Objective objective_;
};

double task_loss(Objective objective, std::span<const Vec2> com_track);

std::optional<int> completion_step(const TaskSpec& task, std::span<const Vec2> com_track,
                                   const Terrain& terrain);

// Task horizon = rounds x SimConfig::n_steps; the optimizer sees one round.
struct TaskTiming {
  int rounds = 4;
  int ps_multiplier = 5;  // long-horizon rollouts for the promise score
};

int task_horizon(const SimConfig& sim, const TaskTiming& timing);

struct OptimizerConfig {
  int budget = 150;
  double learning_rate = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1.0e-8;
  double init_amplitude = 0.15;
  double init_bias = 0.3;
  double period_steps = 500.0;  // omega = 2 pi / (period_steps * dt)
  bool keep_history = false;
};

// Fresh plan for the task: one sinusoid segment, two for back-and-forth.
ActuationPlan initial_plan(const RobotMesh& mesh, const TaskSpec& task, std::uint64_t seed,
                           const OptimizerConfig& opt, const SimConfig& sim);

struct OptimizeResult {
  ActuationPlan plan;     // cycle stretched to the task horizon
  Trajectory trajectory;  // of `plan` over the task horizon
  Terrain terrain;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_iteration = 0;
  std::vector<double> loss_history;
  std::vector<std::vector<double>> param_history;  // when keep_history
};

// Adam on the sinusoid parameters over one round; returns the best iterate
// seen, deployed over the task horizon.
OptimizeResult optimize(const RobotMesh& mesh, const TaskSpec& task, std::uint64_t seed,
                        const OptimizerConfig& opt, const SimConfig& sim,
                        const TaskTiming& timing = {});

// Rollout of `plan` for `n_steps` with the task's terrain and completion
// predicate.
Trajectory evaluate_plan(const RobotMesh& mesh, const TaskSpec& task, const ActuationPlan& plan,
                         const SimConfig& sim, std::optional<int> n_steps = std::nullopt,
                         int frame_stride = 0);

// Promise-score distance: net displacement for uni/downstairs; for
// back_forth the sum of |displacement| over each half-cycle leg, the last one
// possibly partial.
double promise_distance(Objective objective, std::span<const Vec2> com_track, int cycle_steps);

}  // namespace softmod
