#include "softmod/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "softmod/rng.hpp"

namespace softmod {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_segment(const SinusoidSegment& s, std::size_t n) {
  if (s.amplitude.size() != n || s.phase.size() != n || s.bias.size() != n) {
    throw std::invalid_argument("sinusoid segment sizes disagree with actuator count");
  }
}

}  // namespace

ActuationPlan ActuationPlan::sinusoid(double omega, std::vector<SinusoidSegment> segments,
                                      int cycle_steps) {
  if (segments.empty()) throw std::invalid_argument("sinusoid plan needs a segment");
  if (segments.size() > 1 && cycle_steps < static_cast<int>(segments.size())) {
    throw std::invalid_argument("multi-segment sinusoid needs cycle_steps >= segment count");
  }
  ActuationPlan p;
  p.kind_ = Kind::kSinusoid;
  p.n_actuators_ = static_cast<int>(segments.front().amplitude.size());
  for (const auto& s : segments) check_segment(s, static_cast<std::size_t>(p.n_actuators_));
  p.omega_ = omega;
  p.cycle_steps_ = cycle_steps;
  p.segments_ = std::move(segments);
  return p;
}

ActuationPlan ActuationPlan::piecewise(std::vector<std::vector<LevelSegment>> schedule) {
  for (const auto& track : schedule) {
    if (track.empty()) throw std::invalid_argument("empty piecewise schedule");
    for (const LevelSegment& s : track) {
      if (!(s.duration > 0.0)) throw std::invalid_argument("piecewise durations must be positive");
    }
  }
  ActuationPlan p;
  p.kind_ = Kind::kPiecewiseConstant;
  p.n_actuators_ = static_cast<int>(schedule.size());
  p.schedule_ = std::move(schedule);
  return p;
}

ActuationPlan ActuationPlan::with_cycle(int cycle_steps) const {
  ActuationPlan p = *this;
  if (kind_ == Kind::kSinusoid && segments_.size() > 1) {
    if (cycle_steps < static_cast<int>(segments_.size())) {
      throw std::invalid_argument("cycle shorter than the segment count");
    }
    p.cycle_steps_ = cycle_steps;
  }
  return p;
}

std::size_t ActuationPlan::segment_at(int step) const {
  if (segments_.size() == 1) return 0;
  const auto in_cycle = static_cast<std::size_t>(step % cycle_steps_);
  return in_cycle * segments_.size() / static_cast<std::size_t>(cycle_steps_);
}

void ActuationPlan::signals(int step, double dt, std::span<double> u) const {
  const double t = step * dt;
  if (kind_ == Kind::kSinusoid) {
    const SinusoidSegment& s = segments_[segment_at(step)];
    for (std::size_t a = 0; a < u.size(); ++a) {
      u[a] = clamp01(s.bias[a] + s.amplitude[a] * std::sin(omega_ * t + s.phase[a]));
    }
    return;
  }
  for (std::size_t a = 0; a < u.size(); ++a) {
    const auto& track = schedule_[a];
    double period = 0.0;
    for (const LevelSegment& s : track) period += s.duration;
    double tm = std::fmod(t, period);
    double level = track.back().level;
    for (const LevelSegment& s : track) {
      if (tm < s.duration) {
        level = s.level;
        break;
      }
      tm -= s.duration;
    }
    u[a] = clamp01(level);
  }
}

std::size_t ActuationPlan::n_params() const {
  if (kind_ != Kind::kSinusoid) return 0;
  return segments_.size() * static_cast<std::size_t>(n_actuators_) * 3;
}

std::vector<double> ActuationPlan::params() const {
  std::vector<double> theta;
  theta.reserve(n_params());
  if (kind_ != Kind::kSinusoid) return theta;
  for (const auto& s : segments_) {
    for (std::size_t a = 0; a < s.amplitude.size(); ++a) {
      theta.push_back(s.amplitude[a]);
      theta.push_back(s.phase[a]);
      theta.push_back(s.bias[a]);
    }
  }
  return theta;
}

void ActuationPlan::set_params(std::span<const double> theta) {
  if (theta.size() != n_params()) throw std::invalid_argument("parameter vector has the wrong size");
  std::size_t k = 0;
  for (auto& s : segments_) {
    for (std::size_t a = 0; a < s.amplitude.size(); ++a) {
      s.amplitude[a] = theta[k++];
      s.phase[a] = theta[k++];
      s.bias[a] = theta[k++];
    }
  }
}

void ActuationPlan::accumulate_gradient(int step, double dt, std::span<const double> u_bar,
                                        std::span<double> grad) const {
  if (kind_ != Kind::kSinusoid) return;
  const double t = step * dt;
  const std::size_t seg = segment_at(step);
  const SinusoidSegment& s = segments_[seg];
  const std::size_t base = seg * static_cast<std::size_t>(n_actuators_) * 3;
  for (std::size_t a = 0; a < u_bar.size(); ++a) {
    if (u_bar[a] == 0.0) continue;
    const double arg = omega_ * t + s.phase[a];
    const double raw = s.bias[a] + s.amplitude[a] * std::sin(arg);
    if (raw <= 0.0 || raw >= 1.0) continue;  // clamped
    grad[base + 3 * a] += u_bar[a] * std::sin(arg);
    grad[base + 3 * a + 1] += u_bar[a] * s.amplitude[a] * std::cos(arg);
    grad[base + 3 * a + 2] += u_bar[a];
  }
}

nlohmann::json ActuationPlan::to_json() const {
  nlohmann::json j;
  if (kind_ == Kind::kSinusoid) {
    j["kind"] = "sinusoid";
    j["omega"] = omega_;
    j["cycle_steps"] = cycle_steps_;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments_) {
      segs.push_back({{"amplitude", s.amplitude}, {"phase", s.phase}, {"bias", s.bias}});
    }
    j["parameters"] = std::move(segs);
  } else {
    j["kind"] = "piecewise_constant";
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& track : schedule_) {
      nlohmann::json jt = nlohmann::json::array();
      for (const LevelSegment& s : track) jt.push_back({{"duration", s.duration}, {"level", s.level}});
      sched.push_back(std::move(jt));
    }
    j["schedule"] = std::move(sched);
  }
  return j;
}

ActuationPlan ActuationPlan::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sinusoid") {
      std::vector<SinusoidSegment> segs;
      for (const auto& js : j.at("parameters")) {
        segs.push_back({js.at("amplitude").get<std::vector<double>>(),
                        js.at("phase").get<std::vector<double>>(),
                        js.at("bias").get<std::vector<double>>()});
      }
      return sinusoid(j.at("omega").get<double>(), std::move(segs), j.value("cycle_steps", 0));
    }
    if (kind == "piecewise_constant") {
      std::vector<std::vector<LevelSegment>> sched;
      for (const auto& jt : j.at("schedule")) {
        auto& track = sched.emplace_back();
        for (const auto& js : jt) {
          track.push_back({js.at("duration").get<double>(), js.at("level").get<double>()});
        }
      }
      return piecewise(std::move(sched));
    }
    throw FileFormatError("unknown controller kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("malformed controller: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FileFormatError(std::string("malformed controller: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::kUni: return "uni";
    case Objective::kBackForth: return "back_forth";
    case Objective::kDownstairs: return "downstairs";
  }
  return "?";
}

std::string_view environment_name(Environment e) {
  return e == Environment::kFlatPlane ? "flat_plane" : "stairs";
}

Objective parse_objective(std::string_view s) {
  if (s == "uni") return Objective::kUni;
  if (s == "back_forth") return Objective::kBackForth;
  if (s == "downstairs") return Objective::kDownstairs;
  throw std::invalid_argument("unknown task objective '" + std::string(s) + "'");
}

Environment parse_environment(std::string_view s) {
  if (s == "flat_plane" || s == "flat") return Environment::kFlatPlane;
  if (s == "stairs") return Environment::kStairs;
  throw std::invalid_argument("unknown environment '" + std::string(s) + "'");
}

void check_task(const TaskSpec& task) {
  const bool stairs = task.environment == Environment::kStairs;
  if (stairs != (task.objective == Objective::kDownstairs)) {
    throw std::invalid_argument("downstairs runs on stairs; uni and back_forth on a flat plane");
  }
  if (task.distance_req && !(*task.distance_req > 0.0)) {
    throw std::invalid_argument("distance requirement must be positive");
  }
  if (task.min_blocks && task.max_blocks && *task.min_blocks > *task.max_blocks) {
    throw std::invalid_argument("min_blocks exceeds max_blocks");
  }
}

TaskSpec default_task(Objective objective) {
  TaskSpec t;
  t.objective = objective;
  t.environment =
      objective == Objective::kDownstairs ? Environment::kStairs : Environment::kFlatPlane;
  return t;
}

Terrain make_terrain(const TaskSpec& task, const RobotMesh& mesh) {
  if (task.environment == Environment::kFlatPlane) return Terrain::flat();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Particle& p : mesh.particles) {
    lo = std::min(lo, p.pos.x);
    hi = std::max(hi, p.pos.x);
  }
  const StairsParams& s = task.stairs;
  return Terrain::stairs(s.step_width, s.step_height, s.n_steps, (hi - lo) + s.lead);
}

double task_loss(Objective objective, std::span<const Vec2> com) {
  const double x0 = com.front().x;
  const double xt = com.back().x;
  if (objective == Objective::kBackForth) {
    const double xh = com[(com.size() - 1) / 2].x;
    return -(xh - x0) + (xt - x0) * (xt - x0);
  }
  return -(xt - x0);
}

double TaskLoss::evaluate(const RobotMesh& mesh, const Trajectory& traj,
                          LossAdjoint* adjoint) const {
  (void)mesh;
  const auto& com = traj.com_track;
  const double value = task_loss(objective_, com);
  if (adjoint) {
    adjoint->d_com.assign(com.size(), Vec2{});
    const std::size_t last = com.size() - 1;
    if (objective_ == Objective::kBackForth) {
      const double back = 2.0 * (com[last].x - com[0].x);
      adjoint->d_com[last].x += back;
      adjoint->d_com[last / 2].x -= 1.0;
      adjoint->d_com[0].x += 1.0 - back;
    } else {
      adjoint->d_com[last].x -= 1.0;
      adjoint->d_com[0].x += 1.0;
    }
  }
  return value;
}

std::optional<int> completion_step(const TaskSpec& task, std::span<const Vec2> com,
                                   const Terrain& terrain) {
  if (com.empty()) return std::nullopt;
  const double x0 = com.front().x;
  const double req = task.distance();
  switch (task.objective) {
    case Objective::kUni:
      for (std::size_t k = 0; k < com.size(); ++k) {
        if (com[k].x - x0 >= req) return static_cast<int>(k);
      }
      return std::nullopt;
    case Objective::kBackForth: {
      bool reached = false;
      for (std::size_t k = 0; k < com.size(); ++k) {
        if (!reached) {
          reached = com[k].x - x0 >= req;
        } else if (std::abs(com[k].x - x0) <= 0.5) {
          return static_cast<int>(k);
        }
      }
      return std::nullopt;
    }
    case Objective::kDownstairs: {
      const double edge = terrain.final_edge();
      for (std::size_t k = 0; k < com.size(); ++k) {
        if (com[k].x > edge) return static_cast<int>(k);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

ActuationPlan initial_plan(const RobotMesh& mesh, const TaskSpec& task, std::uint64_t seed,
                           const OptimizerConfig& opt, const SimConfig& sim) {
  const auto n = static_cast<std::size_t>(mesh.n_actuators);
  const std::size_t n_segments = task.objective == Objective::kBackForth ? 2 : 1;
  Rng rng(seed);
  std::vector<SinusoidSegment> segs(n_segments);
  for (auto& s : segs) {
    s.amplitude.assign(n, opt.init_amplitude);
    s.bias.assign(n, opt.init_bias);
    s.phase.resize(n);
    for (double& p : s.phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  const double omega = 2.0 * std::numbers::pi / (opt.period_steps * sim.dt);
  return ActuationPlan::sinusoid(omega, std::move(segs), n_segments > 1 ? sim.n_steps : 0);
}

Trajectory evaluate_plan(const RobotMesh& mesh, const TaskSpec& task, const ActuationPlan& plan,
                         const SimConfig& sim, std::optional<int> n_steps, int frame_stride) {
  const Terrain terrain = make_terrain(task, mesh);
  RolloutOptions ro;
  ro.n_steps = n_steps;
  ro.frame_stride = frame_stride;
  ro.completion = [&](std::span<const Vec2> com) { return completion_step(task, com, terrain); };
  Trajectory traj = rollout(mesh, terrain, plan, sim, ro);
  traj.loss = task_loss(task.objective, traj.com_track);
  return traj;
}

int task_horizon(const SimConfig& sim, const TaskTiming& timing) {
  if (timing.rounds < 1) throw std::invalid_argument("task rounds must be positive");
  return sim.n_steps * timing.rounds;
}

double promise_distance(Objective objective, std::span<const Vec2> com, int cycle_steps) {
  if (com.size() < 2) return 0.0;
  const std::size_t last = com.size() - 1;
  if (objective != Objective::kBackForth || cycle_steps < 2) return com[last].x - com[0].x;
  const auto leg = static_cast<std::size_t>(cycle_steps / 2);
  double total = 0.0;
  for (std::size_t start = 0; start < last; start += leg) {
    const std::size_t end = std::min(start + leg, last);
    total += std::abs(com[end].x - com[start].x);
  }
  return total;
}

OptimizeResult optimize(const RobotMesh& mesh, const TaskSpec& task, std::uint64_t seed,
                        const OptimizerConfig& opt, const SimConfig& sim,
                        const TaskTiming& timing) {
  check_task(task);
  if (opt.budget < 1) throw BudgetZero("optimizer budget must be at least 1");
  const int horizon = task_horizon(sim, timing);
  OptimizeResult res;
  res.plan = initial_plan(mesh, task, seed, opt, sim);
  res.terrain = make_terrain(task, mesh);
  ActuationPlan& plan = res.plan;
  const TaskLoss loss(task.objective);

  std::vector<double> theta = plan.params();
  std::vector<double> best = theta;
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
  res.best_loss = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.budget; ++it) {
    plan.set_params(theta);
    GradientResult g;
    try {
      g = gradient(mesh, res.terrain, plan, loss, sim);
    } catch (const NonFiniteGradient& e) {
      throw NonFiniteGradient("iterate " + std::to_string(it) + ": " + e.what());
    }
    if (it == 0) res.initial_loss = g.loss;
    res.loss_history.push_back(g.loss);
    if (opt.keep_history) res.param_history.push_back(theta);
    if (g.loss < res.best_loss) {
      res.best_loss = g.loss;
      res.best_iteration = it;
      best = theta;
    }
    if (it + 1 == opt.budget) break;
    const double c1 = 1.0 - std::pow(opt.beta1, it + 1);
    const double c2 = 1.0 - std::pow(opt.beta2, it + 1);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m1[k] = opt.beta1 * m1[k] + (1.0 - opt.beta1) * g.grad[k];
      m2[k] = opt.beta2 * m2[k] + (1.0 - opt.beta2) * g.grad[k] * g.grad[k];
      theta[k] -= opt.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + opt.epsilon);
    }
  }
  plan.set_params(best);
  plan = plan.with_cycle(horizon);
  res.trajectory = evaluate_plan(mesh, task, plan, sim, horizon);
  return res;
}

}  // namespace softmod
