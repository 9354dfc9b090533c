#include "softmod/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "softmod/mesh.hpp"
#include "softmod/parallel.hpp"
#include "softmod/rng.hpp"

namespace softmod {

namespace {

using nlohmann::json;

json opt_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <class F>
void for_each_json_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FileFormatError(where + ": " + e.what());
    }
    if (!j.is_object()) throw FileFormatError(where + ": expected a JSON object");
    if (j.contains("header")) continue;
    try {
      f(j, where);
    } catch (const json::exception& e) {
      throw FileFormatError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FileFormatError(where + ": " + e.what());
    }
  }
}

}  // namespace

double score_sr(std::span<const DesignResult> batch) {
  if (batch.empty()) return 0.0;
  const auto legal = std::count_if(batch.begin(), batch.end(),
                                   [](const DesignResult& d) { return d.legal; });
  return static_cast<double>(legal) / static_cast<double>(batch.size());
}

double score_if(std::span<const DesignResult> batch) {
  int constrained = 0;
  int compliant = 0;
  for (const DesignResult& d : batch) {
    if (!d.legal || !d.constrained) continue;
    ++constrained;
    compliant += d.compliant ? 1 : 0;
  }
  if (constrained == 0) throw NoConstrainedPrompts("no legal design has a block-count constraint");
  return static_cast<double>(compliant) / constrained;
}

std::optional<double> score_ps(std::span<const DesignResult> batch) {
  double sum = 0.0;
  int n = 0;
  for (const DesignResult& d : batch) {
    if (!d.legal || !d.outcome || d.outcome->failed) continue;
    sum += d.outcome->ps;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<OptScore> score_opt(std::span<const DesignResult> batch) {
  double sum = 0.0;
  int simulated = 0;
  int completed = 0;
  for (const DesignResult& d : batch) {
    if (!d.legal || !d.outcome || d.outcome->failed) continue;
    ++simulated;
    if (d.outcome->completion_time) {
      sum += *d.outcome->completion_time;
      ++completed;
    }
  }
  if (simulated == 0) return std::nullopt;
  OptScore s;
  s.completion_fraction = static_cast<double>(completed) / simulated;
  if (completed > 0) s.mean_time = sum / completed;
  return s;
}

std::optional<double> score_gen(std::span<const DesignResult> batch) {
  int legal = 0;
  int unseen = 0;
  for (const DesignResult& d : batch) {
    if (!d.legal) continue;
    ++legal;
    unseen += d.unseen ? 1 : 0;
  }
  if (legal == 0) return std::nullopt;
  return static_cast<double>(unseen) / legal;
}

bool complies(const TaskSpec& task, int n_blocks) {
  if (task.min_blocks && n_blocks < *task.min_blocks) return false;
  if (task.max_blocks && n_blocks > *task.max_blocks) return false;
  return true;
}

DesignResult classify(std::size_t index, const GenerationRecord& record,
                      const std::set<CanonicalForm>& training_keys) {
  DesignResult r;
  r.index = index;
  r.prompt_id = record.prompt_id;
  r.objective = record.task.objective;
  const TextVerdict v = check_text(record.design_text);
  r.legal = v.legal;
  if (!v.legal) {
    if (v.parse_error) {
      r.reason = std::string(error_name(*v.parse_error)) + ": " + v.message;
    } else {
      for (Violation x : v.reasons) {
        if (!r.reason.empty()) r.reason += ",";
        r.reason += violation_name(x);
      }
    }
    return r;
  }
  r.n_blocks = static_cast<int>(v.design->size());
  r.key = canonical_key(*v.design);
  r.constrained = record.task.has_block_bounds();
  r.compliant = r.constrained && complies(record.task, r.n_blocks);
  r.unseen = !training_keys.contains(*r.key);
  return r;
}

TaskMetrics aggregate(std::span<const DesignResult> batch) {
  TaskMetrics m;
  MetricCounts& c = m.counts;
  for (const DesignResult& d : batch) {
    ++c.total;
    if (!d.legal) continue;
    ++c.legal;
    c.constrained += d.constrained ? 1 : 0;
    c.compliant += d.compliant ? 1 : 0;
    c.unseen += d.unseen ? 1 : 0;
    if (!d.outcome) continue;
    if (d.outcome->failed) {
      ++c.sim_failures;
      continue;
    }
    ++c.simulated;
    c.completed += d.outcome->completion_time ? 1 : 0;
  }
  if (c.total > 0) m.sr = score_sr(batch);
  try {
    m.if_rate = score_if(batch);
  } catch (const NoConstrainedPrompts&) {
  }
  m.ps = score_ps(batch);
  if (const auto o = score_opt(batch)) {
    m.opt = o->mean_time;
    m.opt_completion_fraction = o->completion_fraction;
  }
  m.gen = score_gen(batch);
  return m;
}

DesignOutcome simulate_outcome(const GridDesign& design, const TaskSpec& task,
                               const SimulationSettings& settings, std::uint64_t seed) {
  DesignOutcome out;
  try {
    const RobotMesh mesh = build_mesh(design, settings.material);
    TaskSpec t = task;
    t.stairs = settings.stairs;
    const OptimizeResult res = optimize(mesh, t, seed, settings.opt, settings.sim, settings.timing);
    if (res.trajectory.completion_step) {
      out.completion_time = *res.trajectory.completion_step * settings.sim.dt;
    }
    const int long_steps =
        task_horizon(settings.sim, settings.timing) * settings.timing.ps_multiplier;
    const Trajectory longrun = evaluate_plan(mesh, t, res.plan, settings.sim, long_steps);
    out.ps = promise_distance(t.objective, longrun.com_track, res.plan.cycle_steps());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNonFiniteState && e.kind() != ErrorKind::kNonFiniteGradient) throw;
    out.failed = true;
    out.failure = std::string(error_name(e.kind())) + ": " + e.what();
  }
  return out;
}

MetricReport evaluate(std::span<const GenerationRecord> records,
                      const std::set<CanonicalForm>& training_keys,
                      const EvaluateOptions& options) {
  MetricReport report;
  report.designs.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_task(records[i].task);
    report.designs.push_back(classify(i, records[i], training_keys));
  }

  std::vector<std::size_t> legal;
  for (const DesignResult& d : report.designs) {
    if (d.legal) legal.push_back(d.index);
  }
  if (options.outcomes) {
    for (std::size_t i : legal) {
      const auto it = options.outcomes->find(i);
      if (it == options.outcomes->end()) {
        throw FileFormatError("outcome table has no entry for legal record " + std::to_string(i));
      }
      report.designs[i].outcome = it->second;
    }
  } else {
    const auto outcomes = map_indices<DesignOutcome>(
        legal.size(),
        [&](std::size_t k) {
          const std::size_t i = legal[k];
          const GridDesign design = execute(parse(records[i].design_text));
          return simulate_outcome(design, records[i].task, options.settings,
                                  derive_seed(options.settings.seed, {i}));
        },
        Schedule::kOpenMP, options.workers);
    for (std::size_t k = 0; k < legal.size(); ++k) report.designs[legal[k]].outcome = outcomes[k];
  }

  std::map<Objective, std::vector<DesignResult>> groups;
  for (const DesignResult& d : report.designs) {
    groups[d.objective].push_back(d);
  }
  for (const auto& [objective, batch] : groups) report.tasks[objective] = aggregate(batch);
  report.overall = aggregate(report.designs);
  return report;
}

std::vector<GenerationRecord> read_generations(const std::filesystem::path& path) {
  std::vector<GenerationRecord> out;
  for_each_json_line(path, [&](const json& j, const std::string&) {
    GenerationRecord r;
    r.prompt_id = j.value("prompt_id", std::string());
    r.task = default_task(parse_objective(j.at("task").get<std::string>()));
    if (j.contains("environment") && !j["environment"].is_null()) {
      r.task.environment = parse_environment(j["environment"].get<std::string>());
    }
    if (j.contains("distance") && !j["distance"].is_null()) {
      r.task.distance_req = j["distance"].get<double>();
    }
    if (j.contains("min_blocks") && !j["min_blocks"].is_null()) {
      r.task.min_blocks = j["min_blocks"].get<int>();
    }
    if (j.contains("max_blocks") && !j["max_blocks"].is_null()) {
      r.task.max_blocks = j["max_blocks"].get<int>();
    }
    check_task(r.task);
    r.design_text = j.at("design_text").get<std::string>();
    out.push_back(std::move(r));
  });
  return out;
}

std::set<CanonicalForm> read_training_keys(const std::filesystem::path& path) {
  std::set<CanonicalForm> keys;
  for_each_json_line(path, [&](const json& j, const std::string& where) {
    if (j.contains("canonical_key")) {
      keys.insert(CanonicalForm{j["canonical_key"].get<std::string>()});
      return;
    }
    const std::string text =
        j.contains("design_text") ? j["design_text"].get<std::string>() : j.at("text").get<std::string>();
    try {
      keys.insert(canonical_key(execute(parse(text))));
    } catch (const Error& e) {
      throw FileFormatError(where + ": training design does not parse: " + e.what());
    }
  });
  return keys;
}

OutcomeTable read_outcomes(const std::filesystem::path& path) {
  OutcomeTable table;
  for_each_json_line(path, [&](const json& j, const std::string& where) {
    const auto index = j.at("index").get<std::size_t>();
    DesignOutcome o;
    if (j.contains("completion_time") && !j["completion_time"].is_null()) {
      o.completion_time = j["completion_time"].get<double>();
    }
    o.ps = j.value("ps", 0.0);
    o.failed = j.value("failed", false);
    o.failure = j.value("failure", std::string());
    if (!table.emplace(index, o).second) {
      throw FileFormatError(where + ": duplicate outcome index " + std::to_string(index));
    }
  });
  return table;
}

namespace {

json task_metrics_json(const TaskMetrics& m) {
  const MetricCounts& c = m.counts;
  return {{"if", opt_value(m.if_rate)},
          {"ps", opt_value(m.ps)},
          {"opt", opt_value(m.opt)},
          {"opt_completion_fraction", opt_value(m.opt_completion_fraction)},
          {"gen", opt_value(m.gen)},
          {"sr", opt_value(m.sr)},
          {"counts",
           {{"total", c.total},
            {"legal", c.legal},
            {"constrained", c.constrained},
            {"compliant", c.compliant},
            {"unseen", c.unseen},
            {"simulated", c.simulated},
            {"sim_failures", c.sim_failures},
            {"completed", c.completed}}}};
}

}  // namespace

json report_to_json(const MetricReport& report) {
  json tasks = json::object();
  for (const auto& [objective, m] : report.tasks) {
    tasks[std::string(objective_name(objective))] = task_metrics_json(m);
  }
  json designs = json::array();
  for (const DesignResult& d : report.designs) {
    json row = {{"index", d.index},
                {"prompt_id", d.prompt_id},
                {"task", objective_name(d.objective)},
                {"legal", d.legal},
                {"reason", d.reason},
                {"n_blocks", d.n_blocks},
                {"canonical_key", d.key ? json(d.key->key) : json(nullptr)},
                {"constrained", d.constrained},
                {"compliant", d.compliant},
                {"unseen", d.unseen}};
    if (d.outcome) {
      row["completion_time"] = opt_value(d.outcome->completion_time);
      row["ps"] = d.outcome->ps;
      row["failed"] = d.outcome->failed;
      row["failure"] = d.outcome->failure;
    }
    designs.push_back(std::move(row));
  }
  return {{"tasks", std::move(tasks)},
          {"overall", task_metrics_json(report.overall)},
          {"definitions",
           {{"denominators", "sr: all records; if: legal records with block bounds; "
                             "ps, opt: legal records simulated without failure; gen: legal records"},
            {"opt_units", "simulated seconds, mean over completers"},
            {"ps_back_forth", "sum of |displacement| over completed legs plus the partial last leg"},
            {"ps_units", "block lengths"}}},
          {"designs", std::move(designs)}};
}

}  // namespace softmod
