#include "softmod/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "softmod/mesh.hpp"
#include "softmod/parallel.hpp"
#include "softmod/rng.hpp"

namespace softmod {

namespace {

std::string number_text(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

DatasetRecord make_record(const DatasetConfig& cfg, const GridDesign& design, int config_index,
                          std::size_t task_index) {
  const SimulationSettings& s = cfg.settings;
  const auto ci = static_cast<std::uint64_t>(config_index);
  DatasetRecord r;
  r.config_index = config_index;
  r.objective = cfg.tasks[task_index];

  Rng rng(derive_seed(s.seed, {2, ci, task_index}));
  TaskSpec task = default_task(r.objective);
  r.environment = task.environment;
  task.stairs = s.stairs;
  task.distance_req = rng.between(cfg.min_distance, cfg.max_distance);
  const int lead_quarters = rng.between(static_cast<int>(std::lround(cfg.min_lead * 4)),
                                        static_cast<int>(std::lround(cfg.max_lead * 4)));
  task.stairs.lead = lead_quarters * 0.25;
  r.stairs = task.stairs;
  r.max_distance = r.objective == Objective::kDownstairs
                       ? task.stairs.lead + task.stairs.step_width * (task.stairs.n_steps - 1)
                       : *task.distance_req;

  r.design_text = to_text(bfs_augment(design, 1, derive_seed(s.seed, {3, ci, task_index}))[0]);
  r.n_blocks = static_cast<int>(design.size());
  r.canonical_key = canonical_key(design);

  try {
    const RobotMesh mesh = build_mesh(design, s.material);
    const OptimizeResult res =
        optimize(mesh, task, derive_seed(s.seed, {4, ci, task_index}), s.opt, s.sim, s.timing);
    if (res.trajectory.completion_step) r.time_cost = *res.trajectory.completion_step * s.sim.dt;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNonFiniteState && e.kind() != ErrorKind::kNonFiniteGradient) throw;
    r.failure = std::string(error_name(e.kind())) + ": " + e.what();
  }
  return r;
}

std::string join_prompt(std::string head, const std::optional<std::string>& distance,
                        std::string env, const std::optional<std::string>& blocks) {
  if (distance) head += " over a distance of " + *distance;
  head += " within " + env;
  if (blocks) head += " using " + *blocks + " blocks";
  return head;
}

}  // namespace

std::vector<DatasetRecord> build_dataset(const DatasetConfig& cfg) {
  if (cfg.n_configs < 0) throw std::invalid_argument("n_configs must be non-negative");
  if (cfg.tasks.empty()) throw std::invalid_argument("dataset needs at least one task");
  if (cfg.min_distance < 1 || cfg.min_distance > cfg.max_distance) {
    throw std::invalid_argument("bad distance range");
  }
  if (cfg.min_lead < 0.0 || cfg.min_lead > cfg.max_lead) throw std::invalid_argument("bad lead range");
  const auto n = static_cast<std::size_t>(cfg.n_configs);
  std::vector<GridDesign> designs;
  designs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    designs.push_back(sample_design(cfg.grid, cfg.blocks, derive_seed(cfg.settings.seed, {1, i})));
  }
  const std::size_t n_tasks = cfg.tasks.size();
  auto records = map_indices<DatasetRecord>(
      n * n_tasks,
      [&](std::size_t k) {
        return make_record(cfg, designs[k / n_tasks], static_cast<int>(k / n_tasks), k % n_tasks);
      },
      Schedule::kOpenMP, cfg.workers);
  for (std::size_t k = 0; k < records.size(); ++k) records[k].id = static_cast<int>(k);
  return records;
}

std::string task_phrase(Objective objective) {
  switch (objective) {
    case Objective::kUni: return "unidirectional locomotion from left to right";
    case Objective::kBackForth: return "back-and-forth locomotion";
    case Objective::kDownstairs: return "stair-descending locomotion";
  }
  return "";
}

std::string environment_phrase(Environment environment, const StairsParams& stairs) {
  if (environment == Environment::kFlatPlane) return "a flat plane";
  return "a staircase of " + std::to_string(stairs.n_steps) + " steps";
}

std::string distance_phrase(double distance) {
  return "at least " + number_text(distance) + " block lengths";
}

std::string blocks_phrase(int max_blocks) { return "at most " + std::to_string(max_blocks); }

PromptRecord render_clm(const DatasetRecord& record, std::uint64_t seed) {
  Rng rng(seed);
  const bool with_distance = rng.coin();
  const bool with_blocks = rng.coin();
  PromptRecord p;
  p.kind = PromptKind::kClm;
  p.prompt = join_prompt("Design a soft modular robot to achieve " + task_phrase(record.objective),
                         with_distance ? std::optional(distance_phrase(record.max_distance))
                                       : std::nullopt,
                         environment_phrase(record.environment, record.stairs),
                         with_blocks ? std::optional(blocks_phrase(record.n_blocks)) : std::nullopt) +
             ".";
  p.completion = record.design_text;
  p.source_ids = {record.id};
  return p;
}

PromptRecord render_compare(const DatasetRecord& a, const DatasetRecord& b, std::uint64_t seed) {
  if (a.objective != b.objective || a.environment != b.environment) {
    throw IncomparablePair("records " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                           " differ in task or environment");
  }
  if (!a.time_cost || !b.time_cost) {
    throw IncomparablePair("records " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                           " need time costs");
  }
  Rng rng(seed);
  const bool swap = rng.coin();
  const bool with_distance = rng.coin();
  const bool with_blocks = rng.coin();
  const DatasetRecord& first = swap ? b : a;
  const DatasetRecord& second = swap ? a : b;
  const DatasetRecord& winner = *first.time_cost <= *second.time_cost ? first : second;

  PromptRecord p;
  p.kind = PromptKind::kCompare;
  p.prompt =
      join_prompt("For achieving " + task_phrase(a.objective),
                  with_distance
                      ? std::optional(distance_phrase(std::min(a.max_distance, b.max_distance)))
                      : std::nullopt,
                  environment_phrase(a.environment, a.stairs),
                  with_blocks ? std::optional(blocks_phrase(std::max(a.n_blocks, b.n_blocks)))
                              : std::nullopt) +
      ", which design is better? (a) " + first.design_text + " (b) " + second.design_text;
  p.completion = winner.design_text;
  p.source_ids = {first.id, second.id};
  return p;
}

std::vector<std::pair<int, int>> pair_sampler(const std::vector<DatasetRecord>& dataset,
                                              std::size_t n_pairs, std::uint64_t seed) {
  std::map<std::pair<Objective, Environment>, std::vector<int>> groups;
  for (const DatasetRecord& r : dataset) {
    if (r.time_cost) groups[{r.objective, r.environment}].push_back(r.id);
  }
  std::vector<const std::vector<int>*> pools;
  std::vector<std::uint64_t> offsets;  // first linear pair index of each group
  std::uint64_t total = 0;
  for (const auto& [key, ids] : groups) {
    pools.push_back(&ids);
    offsets.push_back(total);
    const auto g = static_cast<std::uint64_t>(ids.size());
    total += g * (g - (g > 0 ? 1 : 0)) / 2;
  }
  const std::uint64_t want = std::min<std::uint64_t>(n_pairs, total);

  // Floyd's algorithm: `want` distinct linear indices, uniform over subsets.
  std::set<std::uint64_t> chosen;
  Rng rng(seed);
  for (std::uint64_t j = total - want; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  std::vector<std::pair<int, int>> out;
  out.reserve(chosen.size());
  std::size_t g = 0;
  for (std::uint64_t index : chosen) {
    while (g + 1 < offsets.size() && offsets[g + 1] <= index) ++g;
    const auto& ids = *pools[g];
    std::uint64_t k = index - offsets[g];
    std::size_t i = 0;
    for (std::uint64_t row = ids.size() - 1; k >= row; row = ids.size() - 1 - ++i) k -= row;
    out.emplace_back(ids[i], ids[i + 1 + static_cast<std::size_t>(k)]);
  }
  return out;
}

std::vector<std::string> extract_designs(const PromptRecord& prompt) {
  if (prompt.kind == PromptKind::kClm) return {prompt.completion};
  const auto a = prompt.prompt.find("(a) ");
  const auto b = prompt.prompt.find(" (b) ", a == std::string::npos ? 0 : a);
  if (a == std::string::npos || b == std::string::npos) {
    throw FileFormatError("compare prompt lacks (a)/(b) designs");
  }
  return {prompt.prompt.substr(a + 4, b - a - 4), prompt.prompt.substr(b + 5)};
}

nlohmann::json record_to_json(const DatasetRecord& r) {
  return {{"id", r.id},
          {"config_index", r.config_index},
          {"task", objective_name(r.objective)},
          {"environment", environment_name(r.environment)},
          {"max_distance", r.max_distance},
          {"design_text", r.design_text},
          {"n_blocks", r.n_blocks},
          {"time_cost", r.time_cost ? nlohmann::json(*r.time_cost) : nlohmann::json(nullptr)},
          {"failure", r.failure},
          {"canonical_key", r.canonical_key.key}};
}

nlohmann::json prompt_to_json(const PromptRecord& p) {
  return {{"kind", p.kind == PromptKind::kClm ? "clm" : "compare"},
          {"prompt", p.prompt},
          {"completion", p.completion},
          {"source_ids", p.source_ids}};
}

}  // namespace softmod
