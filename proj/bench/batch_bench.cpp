// Serial reference vs OpenMP schedule for batched rollouts and gradients.
#include <benchmark/benchmark.h>

#include "softmod/controller.hpp"
#include "softmod/design.hpp"
#include "softmod/mesh.hpp"
#include "softmod/parallel.hpp"
#include "softmod/rng.hpp"

namespace softmod {
namespace {

struct Batch {
  std::vector<RobotMesh> meshes;
  std::vector<ActuationPlan> plans;
  SimConfig sim;
  TaskSpec task = default_task(Objective::kUni);
};

const Batch& batch() {
  static const Batch b = [] {
    Batch out;
    out.sim.n_steps = 1024;
    for (std::uint64_t i = 0; i < 16; ++i) {
      out.meshes.push_back(build_mesh(sample_design({5, 5}, {4, 12}, derive_seed(1, {i}))));
      out.plans.push_back(initial_plan(out.meshes.back(), out.task, i, OptimizerConfig{}, out.sim));
    }
    return out;
  }();
  return b;
}

void rollouts(benchmark::State& state, Schedule schedule) {
  const Batch& b = batch();
  for (auto _ : state) {
    auto com = map_indices<Vec2>(
        b.meshes.size(),
        [&](std::size_t i) {
          return evaluate_plan(b.meshes[i], b.task, b.plans[i], b.sim).com_track.back();
        },
        schedule, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(com);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.meshes.size()));
}

void gradients(benchmark::State& state, Schedule schedule) {
  const Batch& b = batch();
  const TaskLoss loss(Objective::kUni);
  for (auto _ : state) {
    auto g = map_indices<double>(
        b.meshes.size(),
        [&](std::size_t i) {
          const Terrain t = make_terrain(b.task, b.meshes[i]);
          return gradient(b.meshes[i], t, b.plans[i], loss, b.sim).grad.front();
        },
        schedule, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(g);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.meshes.size()));
}

BENCHMARK_CAPTURE(rollouts, serial, Schedule::kSerial)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(rollouts, openmp, Schedule::kOpenMP)
    ->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gradients, serial, Schedule::kSerial)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gradients, openmp, Schedule::kOpenMP)
    ->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace softmod

BENCHMARK_MAIN();
