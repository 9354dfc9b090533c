#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softmod/controller.hpp"
#include "softmod/design.hpp"

namespace softmod {

struct GenerationRecord {
  std::string prompt_id;
  TaskSpec task;
  std::string design_text;
};

// Simulation results for one legal design.
struct DesignOutcome {
  std::optional<double> completion_time;  // seconds
  double ps = 0.0;                        // block lengths over the long horizon
  bool failed = false;                    // simulation failure, excluded from PS/OPT
  std::string failure;
};

// Legality and bookkeeping for one record; outcome filled for legal designs.
struct DesignResult {
  std::size_t index = 0;
  std::string prompt_id;
  Objective objective = Objective::kUni;
  bool legal = false;
  std::string reason;  // parse error or violation names when illegal
  int n_blocks = 0;
  std::optional<CanonicalForm> key;
  bool constrained = false;
  bool compliant = false;
  bool unseen = false;
  std::optional<DesignOutcome> outcome;
};

struct MetricCounts {
  int total = 0;
  int legal = 0;
  int constrained = 0;
  int compliant = 0;
  int unseen = 0;
  int simulated = 0;
  int sim_failures = 0;
  int completed = 0;
};

// std::nullopt marks a metric that is not applicable (empty denominator).
struct TaskMetrics {
  std::optional<double> if_rate;
  std::optional<double> ps;
  std::optional<double> opt;
  std::optional<double> opt_completion_fraction;
  std::optional<double> gen;
  std::optional<double> sr;
  MetricCounts counts;
};

struct MetricReport {
  std::map<Objective, TaskMetrics> tasks;  // only objectives present in the batch
  TaskMetrics overall;
  std::vector<DesignResult> designs;
};

// Single-metric scorers. Each takes the per-design results of one group.
double score_sr(std::span<const DesignResult> batch);
// Throws NoConstrainedPrompts when no legal design carries block bounds.
double score_if(std::span<const DesignResult> batch);
std::optional<double> score_ps(std::span<const DesignResult> batch);
struct OptScore {
  std::optional<double> mean_time;
  double completion_fraction = 0.0;
};
std::optional<OptScore> score_opt(std::span<const DesignResult> batch);
std::optional<double> score_gen(std::span<const DesignResult> batch);

// Block-count compliance with the prompt bounds.
bool complies(const TaskSpec& task, int n_blocks);

// Legality, IF and GEN bookkeeping without simulation.
DesignResult classify(std::size_t index, const GenerationRecord& record,
                      const std::set<CanonicalForm>& training_keys);

TaskMetrics aggregate(std::span<const DesignResult> batch);

// Optimizes a controller and measures completion time and promise distance.
struct SimulationSettings {
  SimConfig sim;
  MaterialParams material;
  OptimizerConfig opt;
  TaskTiming timing;
  StairsParams stairs;
  std::uint64_t seed = 0;
};

DesignOutcome simulate_outcome(const GridDesign& design, const TaskSpec& task,
                               const SimulationSettings& settings, std::uint64_t seed);

// Precomputed outcomes keyed by record index, used instead of simulation.
using OutcomeTable = std::map<std::size_t, DesignOutcome>;

struct EvaluateOptions {
  SimulationSettings settings;
  std::optional<OutcomeTable> outcomes;
  int workers = 0;
};

MetricReport evaluate(std::span<const GenerationRecord> records,
                      const std::set<CanonicalForm>& training_keys,
                      const EvaluateOptions& options);

// IO. All readers throw FileFormatError with a line number on bad input.
std::vector<GenerationRecord> read_generations(const std::filesystem::path& path);
std::set<CanonicalForm> read_training_keys(const std::filesystem::path& path);
OutcomeTable read_outcomes(const std::filesystem::path& path);

nlohmann::json report_to_json(const MetricReport& report);

}  // namespace softmod
