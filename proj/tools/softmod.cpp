// softmod: command-line front end for design, simulation, datasets and metrics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "softmod/config.hpp"
#include "softmod/controller.hpp"
#include "softmod/datagen.hpp"
#include "softmod/design.hpp"
#include "softmod/mesh.hpp"
#include "softmod/metrics.hpp"
#include "softmod/parallel.hpp"
#include "softmod/rng.hpp"
#include "softmod/sim.hpp"
#include "softmod/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace softmod;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kDomain = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }
std::string line(const json& j) { return j.dump() + "\n"; }

json header(const RunConfig& cfg, const std::string& command) {
  json h = cfg.to_json();
  h["command"] = command;
  h["version"] = std::string(kVersion);
  return h;
}

// Settings shared by every subcommand: a config file and key=value overrides.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value settings file");
  app->add_option("--set", c.overrides, "override a setting, key=value (repeatable)");
  app->add_option("--seed", c.seed, "base seed");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    cfg.load_file(c.config_path);
    cfg.note("config_file", c.config_path);
  }
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    try {
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  return cfg;
}

void set_flag(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    cfg.set(key, value);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

GridBound parse_grid(const std::string& s) {
  int w = 0, h = 0;
  char x = 0;
  std::istringstream in(s);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || !in.eof() || w < 1 || h < 1) {
    throw UsageError("--grid expects WxH, got '" + s + "'");
  }
  return {w, h};
}

BlockRange parse_blocks(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("--blocks expects MIN..MAX, got '" + s + "'");
  }
}

Objective parse_task_flag(const std::string& s) {
  try {
    return parse_objective(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

GridDesign load_design(const std::string& path) {
  const std::string text = read_file(path);
  const TextVerdict v = check_text(text);
  if (v.parse_error) throw Error(*v.parse_error, path + ": " + v.message);
  if (!v.legal) {
    std::string reasons;
    for (Violation r : v.reasons) reasons += (reasons.empty() ? "" : ",") + std::string(violation_name(r));
    throw IllegalDesign(path + ": illegal design (" + reasons + ")");
  }
  return *v.design;
}

// "flat", "stairs" or "stairs:w=1,h=0.25,n=3,lead=0.25".
void apply_terrain(const std::string& spec, RunConfig& cfg, Objective objective) {
  const std::string kind = spec.substr(0, spec.find(':'));
  const bool stairs = kind == "stairs";
  if (!stairs && kind != "flat" && kind != "flat_plane") {
    throw UsageError("unknown terrain '" + spec + "'");
  }
  if (stairs != (objective == Objective::kDownstairs)) {
    throw UsageError("terrain '" + kind + "' does not match task '" +
                     std::string(objective_name(objective)) + "'");
  }
  if (!stairs || spec.find(':') == std::string::npos) return;
  std::istringstream in(spec.substr(spec.find(':') + 1));
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad terrain parameter '" + item + "'");
    const std::string k = item.substr(0, eq);
    const std::string key = k == "w" ? "stairs.step_width"
                            : k == "h" ? "stairs.step_height"
                            : k == "n" ? "stairs.n_steps"
                            : k == "lead" ? "stairs.lead"
                                          : "";
    if (key.empty()) throw UsageError("bad terrain parameter '" + item + "'");
    set_flag(cfg, key, item.substr(eq + 1));
  }
}

TaskSpec make_task(Objective objective, const RunConfig& cfg, std::optional<double> distance) {
  TaskSpec t = default_task(objective);
  t.stairs = cfg.stairs();
  t.distance_req = distance;
  try {
    check_task(t);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return t;
}

json summary(const Trajectory& traj, const SimConfig& sim, int decimation) {
  json com = json::array();
  const std::size_t n = traj.com_track.size();
  const auto stride = static_cast<std::size_t>(std::max(1, decimation));
  for (std::size_t k = 0; k < n; k += stride) com.push_back({k, traj.com_track[k].x, traj.com_track[k].y});
  if ((n - 1) % stride != 0) com.push_back({n - 1, traj.com_track[n - 1].x, traj.com_track[n - 1].y});
  return {{"loss", traj.loss},
          {"completion_step", traj.completion_step ? json(*traj.completion_step) : json(nullptr)},
          {"completion_time",
           traj.completion_step ? json(*traj.completion_step * sim.dt) : json(nullptr)},
          {"displacement", traj.com_track.back().x - traj.com_track.front().x},
          {"min_clearance", traj.min_clearance},
          {"steps", n - 1},
          {"com_track_decimated", std::move(com)}};
}

// --- subcommands -----------------------------------------------------------

struct GenConfigsArgs {
  Common common;
  std::string grid = "5x5";
  int count = 0;
  std::string blocks = "3..25";
  std::string out;
};

int run_gen_configs(const GenConfigsArgs& a) {
  RunConfig cfg = resolve(a.common);
  const GridBound grid = parse_grid(a.grid);
  const BlockRange blocks = parse_blocks(a.blocks);
  if (a.count < 0) throw UsageError("--count must be non-negative");
  cfg.note("grid", a.grid);
  cfg.note("blocks", a.blocks);
  cfg.note("count", std::to_string(a.count));
  std::string out = line({{"header", header(cfg, "gen-configs")}});
  for (int i = 0; i < a.count; ++i) {
    const GridDesign d = sample_design(grid, blocks, derive_seed(cfg.seed(), {static_cast<std::uint64_t>(i)}));
    char id[16];
    std::snprintf(id, sizeof id, "d%06d", i);
    out += line({{"id", id}, {"text", serialize(d)}});
  }
  write_file(a.out, out);
  return kOk;
}

struct AugmentArgs {
  Common common;
  std::string design;
  int k = 5;
  std::string out;
};

int run_augment(const AugmentArgs& a) {
  RunConfig cfg = resolve(a.common);
  cfg.note("design", a.design);
  cfg.note("k", std::to_string(a.k));
  const GridDesign d = load_design(a.design);
  const auto scripts = bfs_augment(d, a.k, cfg.seed());
  std::string out = line({{"header", header(cfg, "augment")}});
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    out += line({{"id", "a" + std::to_string(i)}, {"text", to_text(scripts[i])}});
  }
  write_file(a.out, out);
  return kOk;
}

struct OptimizeArgs {
  Common common;
  std::string design;
  std::string task = "uni";
  std::string terrain;
  std::optional<int> iters;
  std::optional<double> distance;
  std::string out;
  std::string summary_path;
};

int run_optimize(const OptimizeArgs& a) {
  RunConfig cfg = resolve(a.common);
  const Objective objective = parse_task_flag(a.task);
  if (!a.terrain.empty()) apply_terrain(a.terrain, cfg, objective);
  if (a.iters) set_flag(cfg, "opt.budget", std::to_string(*a.iters));
  cfg.note("design", a.design);
  cfg.note("task", a.task);
  if (a.distance) cfg.note("distance", std::to_string(*a.distance));
  const TaskSpec task = make_task(objective, cfg, a.distance);
  const GridDesign d = load_design(a.design);
  const SimConfig sim = cfg.sim();
  const RobotMesh mesh = build_mesh(d, cfg.material());
  const OptimizeResult res = optimize(mesh, task, cfg.seed(), cfg.optimizer(), sim, cfg.timing());

  json controller = res.plan.to_json();
  controller["header"] = header(cfg, "optimize");
  write_file(a.out, dump(controller));
  json s = summary(res.trajectory, sim, 64);
  s["header"] = header(cfg, "optimize");
  s["initial_loss"] = res.initial_loss;
  s["best_loss"] = res.best_loss;
  s["best_iteration"] = res.best_iteration;
  if (!a.summary_path.empty()) write_file(a.summary_path, dump(s));
  std::cout << json({{"best_loss", res.best_loss},
                     {"initial_loss", res.initial_loss},
                     {"best_iteration", res.best_iteration},
                     {"displacement", s["displacement"]},
                     {"completion_time", s["completion_time"]}})
                   .dump()
            << "\n";
  return kOk;
}

struct SimulateArgs {
  Common common;
  std::string design;
  std::string controller;
  std::string task = "uni";
  std::string terrain;
  std::optional<int> steps;
  std::optional<double> distance;
  std::string frames_dir;
  int stride = 100;
  std::string summary_path;
};

int run_simulate(const SimulateArgs& a) {
  RunConfig cfg = resolve(a.common);
  const Objective objective = parse_task_flag(a.task);
  if (!a.terrain.empty()) apply_terrain(a.terrain, cfg, objective);
  cfg.note("design", a.design);
  cfg.note("controller", a.controller);
  cfg.note("task", a.task);
  const TaskSpec task = make_task(objective, cfg, a.distance);
  const GridDesign d = load_design(a.design);
  const SimConfig sim = cfg.sim();
  const RobotMesh mesh = build_mesh(d, cfg.material());
  if (a.steps && *a.steps < 1) throw UsageError("--steps must be positive");
  if (a.stride < 1) throw UsageError("--stride must be positive");
  const int n_steps = a.steps.value_or(task_horizon(sim, cfg.timing()));

  ActuationPlan plan = ActuationPlan::piecewise(
      std::vector<std::vector<LevelSegment>>(static_cast<std::size_t>(mesh.n_actuators),
                                             {{1.0, 0.0}}));
  if (!a.controller.empty()) {
    json j;
    try {
      j = json::parse(read_file(a.controller));
    } catch (const json::exception& e) {
      throw FileFormatError(a.controller + ": " + e.what());
    }
    plan = ActuationPlan::from_json(j);
    if (plan.n_actuators() != mesh.n_actuators) {
      throw IllegalDesign("controller drives " + std::to_string(plan.n_actuators()) +
                          " actuators but the design has " + std::to_string(mesh.n_actuators));
    }
  }
  const int stride = a.frames_dir.empty() ? 0 : a.stride;
  const Trajectory traj = evaluate_plan(mesh, task, plan, sim, n_steps, stride);

  if (!a.frames_dir.empty()) {
    const Terrain terrain = make_terrain(task, mesh);
    const SvgView view = fit_view(traj, terrain);
    std::vector<double> u(static_cast<std::size_t>(mesh.n_actuators));
    for (std::size_t k = 0; k < traj.frames.size(); ++k) {
      const int step = std::min(static_cast<int>(k) * stride, n_steps);
      plan.signals(std::min(step, n_steps - 1), sim.dt, u);
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06zu.svg", k);
      write_file(fs::path(a.frames_dir) / name,
                 render_svg(mesh, terrain, traj.frames[k], u, view, step, sim.dt));
    }
  }
  json s = summary(traj, sim, 64);
  s["header"] = header(cfg, "simulate");
  s["frames"] = traj.frames.size();
  if (!a.summary_path.empty()) write_file(a.summary_path, dump(s));
  std::cout << json({{"displacement", s["displacement"]},
                     {"completion_time", s["completion_time"]},
                     {"frames", traj.frames.size()},
                     {"min_clearance", traj.min_clearance}})
                   .dump()
            << "\n";
  return kOk;
}

struct DatasetArgs {
  Common common;
  int n_configs = 10;
  std::string grid = "5x5";
  std::string blocks = "3..25";
  std::string tasks = "uni,back_forth,downstairs";
  std::optional<int> pairs;
  std::string out;
};

int run_dataset(const DatasetArgs& a) {
  RunConfig cfg = resolve(a.common);
  if (a.n_configs < 0) throw UsageError("--n-configs must be non-negative");
  cfg.note("n_configs", std::to_string(a.n_configs));
  cfg.note("grid", a.grid);
  cfg.note("blocks", a.blocks);
  cfg.note("tasks", a.tasks);
  DatasetConfig dc;
  dc.n_configs = a.n_configs;
  dc.grid = parse_grid(a.grid);
  dc.blocks = parse_blocks(a.blocks);
  dc.tasks.clear();
  std::istringstream in(a.tasks);
  std::string t;
  while (std::getline(in, t, ',')) dc.tasks.push_back(parse_task_flag(t));
  dc.settings = {cfg.sim(), cfg.material(), cfg.optimizer(), cfg.timing(), cfg.stairs(), cfg.seed()};
  const auto records = build_dataset(dc);

  const std::size_t n_pairs = a.pairs ? static_cast<std::size_t>(std::max(0, *a.pairs)) : records.size();
  cfg.note("pairs", std::to_string(n_pairs));
  const json head = {{"header", header(cfg, "dataset")}};

  std::string data = line(head);
  std::string clm = line(head);
  for (const DatasetRecord& r : records) {
    data += line(record_to_json(r));
    clm += line(prompt_to_json(
        render_clm(r, derive_seed(cfg.seed(), {5, static_cast<std::uint64_t>(r.id)}))));
  }
  std::string compare = line(head);
  const auto pairs = pair_sampler(records, n_pairs, derive_seed(cfg.seed(), {6}));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [i, j] = pairs[k];
    compare += line(prompt_to_json(render_compare(records[static_cast<std::size_t>(i)],
                                                  records[static_cast<std::size_t>(j)],
                                                  derive_seed(cfg.seed(), {7, k}))));
  }
  const fs::path dir(a.out);
  write_file(dir / "dataset.jsonl", data);
  write_file(dir / "clm.jsonl", clm);
  write_file(dir / "compare.jsonl", compare);
  std::cout << json({{"records", records.size()}, {"compare", pairs.size()}}).dump() << "\n";
  return kOk;
}

struct EvaluateArgs {
  Common common;
  std::string generations;
  std::string training;
  std::string outcomes;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
  RunConfig cfg = resolve(a.common);
  cfg.note("generations", a.generations);
  cfg.note("training", a.training);
  if (!a.outcomes.empty()) cfg.note("outcomes", a.outcomes);
  const auto records = read_generations(a.generations);
  const auto keys = read_training_keys(a.training);
  EvaluateOptions opts;
  opts.settings = {cfg.sim(), cfg.material(), cfg.optimizer(), cfg.timing(), cfg.stairs(), cfg.seed()};
  if (!a.outcomes.empty()) opts.outcomes = read_outcomes(a.outcomes);
  const MetricReport report = evaluate(records, keys, opts);
  json j = report_to_json(report);
  j["header"] = header(cfg, "evaluate");
  write_file(a.out, dump(j));
  std::cout << j["overall"].dump() << "\n";
  return kOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
    case ErrorKind::kFileFormat:
      return kIo;
    case ErrorKind::kNonFiniteState:
    case ErrorKind::kNonFiniteGradient:
      return kNumeric;
    default:
      return kDomain;
  }
}

int report_error(std::string_view kind, const std::string& message, int code,
                 const std::string& usage = {}) {
  json j{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!usage.empty()) j["usage"] = usage;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft modular robot design, simulation and evaluation toolkit", "softmod"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenConfigsArgs gen;
  auto* c_gen = app.add_subcommand("gen-configs", "sample random robot designs");
  add_common(c_gen, gen.common);
  c_gen->add_option("--grid", gen.grid, "grid bound WxH")->capture_default_str();
  c_gen->add_option("--count", gen.count, "number of designs")->required();
  c_gen->add_option("--blocks", gen.blocks, "block-count range MIN..MAX")->capture_default_str();
  c_gen->add_option("--out", gen.out, "output JSON Lines file")->required();

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "emit BFS assembly orders of a design");
  add_common(c_aug, aug.common);
  c_aug->add_option("--design", aug.design, "design script file")->required();
  c_aug->add_option("-k,--k", aug.k, "number of scripts")->capture_default_str();
  c_aug->add_option("--out", aug.out, "output JSON Lines file")->required();

  OptimizeArgs opt;
  auto* c_opt = app.add_subcommand("optimize", "fit an open-loop controller to a design");
  add_common(c_opt, opt.common);
  c_opt->add_option("--design", opt.design, "design script file")->required();
  c_opt->add_option("--task", opt.task, "uni | back_forth | downstairs")->capture_default_str();
  c_opt->add_option("--terrain", opt.terrain, "flat | stairs[:w=,h=,n=,lead=]");
  c_opt->add_option("--iters", opt.iters, "optimizer iterations (opt.budget)");
  c_opt->add_option("--distance", opt.distance, "distance requirement in block lengths");
  c_opt->add_option("--out", opt.out, "controller JSON file")->required();
  c_opt->add_option("--summary", opt.summary_path, "trajectory summary JSON file");

  SimulateArgs simu;
  auto* c_sim = app.add_subcommand("simulate", "roll out a design and optionally dump SVG frames");
  add_common(c_sim, simu.common);
  c_sim->add_option("--design", simu.design, "design script file")->required();
  c_sim->add_option("--controller", simu.controller, "controller JSON (default: all actuators off)");
  c_sim->add_option("--task", simu.task, "uni | back_forth | downstairs")->capture_default_str();
  c_sim->add_option("--terrain", simu.terrain, "flat | stairs[:w=,h=,n=,lead=]");
  c_sim->add_option("--steps", simu.steps, "steps (default: task horizon)");
  c_sim->add_option("--distance", simu.distance, "distance requirement in block lengths");
  c_sim->add_option("--dump-frames", simu.frames_dir, "directory for frame_%06d.svg");
  c_sim->add_option("--stride", simu.stride, "steps between frames")->capture_default_str();
  c_sim->add_option("--summary", simu.summary_path, "trajectory summary JSON file");

  DatasetArgs ds;
  auto* c_ds = app.add_subcommand("dataset", "synthesize the training dataset and prompts");
  add_common(c_ds, ds.common);
  c_ds->add_option("--n-configs", ds.n_configs, "sampled designs")->capture_default_str();
  c_ds->add_option("--grid", ds.grid, "grid bound WxH")->capture_default_str();
  c_ds->add_option("--blocks", ds.blocks, "block-count range MIN..MAX")->capture_default_str();
  c_ds->add_option("--tasks", ds.tasks, "comma-separated objectives")->capture_default_str();
  c_ds->add_option("--pairs", ds.pairs, "comparison prompts (default: one per record)");
  c_ds->add_option("--out", ds.out, "output directory")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "score generated designs with IF/PS/OPT/GEN/SR");
  add_common(c_ev, ev.common);
  c_ev->add_option("--generations", ev.generations, "generations JSON Lines")->required();
  c_ev->add_option("--training", ev.training, "training dataset JSON Lines")->required();
  c_ev->add_option("--outcomes", ev.outcomes, "precomputed outcomes JSON Lines (skips simulation)");
  c_ev->add_option("--out", ev.out, "report JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto parsed = app.get_subcommands();
    const CLI::App* target = parsed.empty() ? &app : parsed.back();
    return report_error("usage", e.what(), kUsage, target->help());
  }

  try {
    if (*c_gen) return run_gen_configs(gen);
    if (*c_aug) return run_augment(aug);
    if (*c_opt) return run_optimize(opt);
    if (*c_sim) return run_simulate(simu);
    if (*c_ds) return run_dataset(ds);
    if (*c_ev) return run_evaluate(ev);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), kUsage);
  } catch (const Error& e) {
    return report_error(error_name(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::invalid_argument& e) {
    return report_error("usage", e.what(), kUsage);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kDomain);
  }
  return kUsage;
}
