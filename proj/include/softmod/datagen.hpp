#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softmod/controller.hpp"
#include "softmod/design.hpp"
#include "softmod/metrics.hpp"

namespace softmod {

struct DatasetRecord {
  int id = 0;
  int config_index = 0;
  Objective objective = Objective::kUni;
  Environment environment = Environment::kFlatPlane;
  // Distance requirement for flat tasks; distance from the robot's right edge
  // to the last stair edge for downstairs.
  double max_distance = 0.0;
  StairsParams stairs;
  std::string design_text;
  int n_blocks = 0;
  std::optional<double> time_cost;  // seconds; none if the task was not completed
  std::string failure;              // non-empty when the simulation failed
  CanonicalForm canonical_key;
};

struct DatasetConfig {
  int n_configs = 100;
  GridBound grid;
  BlockRange blocks{3, 25};
  std::vector<Objective> tasks{Objective::kUni, Objective::kBackForth, Objective::kDownstairs};
  int min_distance = 2;  // flat-task requirements drawn from [min, max] block lengths
  int max_distance = 6;
  double min_lead = 0.25;  // stairs lead drawn uniformly from [min_lead, max_lead]
  double max_lead = 1.25;
  SimulationSettings settings;
  int workers = 0;
};

// Records ordered by (config index, task order); ids are that position.
std::vector<DatasetRecord> build_dataset(const DatasetConfig& cfg);

enum class PromptKind { kClm, kCompare };

struct PromptRecord {
  PromptKind kind = PromptKind::kClm;
  std::string prompt;
  std::string completion;
  std::vector<int> source_ids;
};

std::string task_phrase(Objective objective);
std::string environment_phrase(Environment environment, const StairsParams& stairs);

// Optional-clause text, e.g. "at least 4 block lengths" and "at most 7".
std::string distance_phrase(double distance);
std::string blocks_phrase(int max_blocks);

// Each optional clause is kept with probability 0.5, independently.
PromptRecord render_clm(const DatasetRecord& record, std::uint64_t seed);

// (a)/(b) order is a coin flip; the winner has the lower time cost, ties go
// to (a). Throws IncomparablePair.
PromptRecord render_compare(const DatasetRecord& a, const DatasetRecord& b, std::uint64_t seed);

// Uniform distinct pairs, without replacement, among completed records that
// share task and environment. Returns fewer when the pool runs out.
std::vector<std::pair<int, int>> pair_sampler(const std::vector<DatasetRecord>& dataset,
                                              std::size_t n_pairs, std::uint64_t seed);

// Design texts embedded in a rendered prompt: the completion for CLM, the
// (a) and (b) designs for Compare.
std::vector<std::string> extract_designs(const PromptRecord& prompt);

nlohmann::json record_to_json(const DatasetRecord& r);
nlohmann::json prompt_to_json(const PromptRecord& p);

}  // namespace softmod
