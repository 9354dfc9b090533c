#include "softmod/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace softmod {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(int v) { return std::to_string(v); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_int(const std::string& s, long long& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace

RunConfig::RunConfig() {
  const SimConfig s;
  values_["sim.dt"] = fmt(s.dt);
  values_["sim.steps"] = fmt(s.n_steps);
  values_["sim.gravity"] = fmt(s.gravity);
  values_["sim.contact_stiffness"] = fmt(s.contact_stiffness);
  values_["sim.contact_damping"] = fmt(s.contact_damping);
  values_["sim.friction"] = fmt(s.friction);
  values_["sim.friction_v_eps"] = fmt(s.friction_v_eps);
  values_["sim.max_contraction"] = fmt(s.max_contraction);
  values_["sim.clearance"] = fmt(s.clearance);
  values_["sim.checkpoint_interval"] = fmt(s.checkpoint_interval);
  const MaterialParams m;
  values_["material.cell_mass"] = fmt(m.cell_mass);
  values_["material.stiffness"] = fmt(m.stiffness);
  values_["material.damping"] = fmt(m.damping);
  const OptimizerConfig o;
  values_["opt.budget"] = fmt(o.budget);
  values_["opt.learning_rate"] = fmt(o.learning_rate);
  values_["opt.beta1"] = fmt(o.beta1);
  values_["opt.beta2"] = fmt(o.beta2);
  values_["opt.epsilon"] = fmt(o.epsilon);
  values_["opt.init_amplitude"] = fmt(o.init_amplitude);
  values_["opt.init_bias"] = fmt(o.init_bias);
  values_["opt.period_steps"] = fmt(o.period_steps);
  const TaskTiming t;
  values_["task.rounds"] = fmt(t.rounds);
  values_["task.ps_multiplier"] = fmt(t.ps_multiplier);
  const StairsParams st;
  values_["stairs.step_width"] = fmt(st.step_width);
  values_["stairs.step_height"] = fmt(st.step_height);
  values_["stairs.n_steps"] = fmt(st.n_steps);
  values_["stairs.lead"] = fmt(st.lead);
  values_["seed"] = "0";
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw FileFormatError(where + ": expected 'key = value'");
    try {
      set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw FileFormatError(where + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown setting '" + key + "'");
  const bool integral = key == "seed" || key == "sim.steps" || key == "sim.checkpoint_interval" ||
                        key == "opt.budget" || key == "task.rounds" ||
                        key == "task.ps_multiplier" || key == "stairs.n_steps";
  if (integral) {
    long long v = 0;
    if (!parse_int(value, v) || (key == "seed" ? v < 0 : false)) {
      throw std::invalid_argument("setting '" + key + "' needs an integer, got '" + value + "'");
    }
  } else {
    double v = 0.0;
    if (!parse_double(value, v)) {
      throw std::invalid_argument("setting '" + key + "' needs a number, got '" + value + "'");
    }
  }
  it->second = value;
}

void RunConfig::note(const std::string& key, const std::string& value) { notes_[key] = value; }

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown setting '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  double v = 0.0;
  parse_double(get(key), v);
  return v;
}

int RunConfig::integer(const std::string& key) const {
  long long v = 0;
  parse_int(get(key), v);
  return static_cast<int>(v);
}

std::uint64_t RunConfig::seed() const {
  std::uint64_t v = 0;
  const std::string& s = get("seed");
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

SimConfig RunConfig::sim() const {
  SimConfig s;
  s.dt = number("sim.dt");
  s.n_steps = integer("sim.steps");
  s.gravity = number("sim.gravity");
  s.contact_stiffness = number("sim.contact_stiffness");
  s.contact_damping = number("sim.contact_damping");
  s.friction = number("sim.friction");
  s.friction_v_eps = number("sim.friction_v_eps");
  s.max_contraction = number("sim.max_contraction");
  s.clearance = number("sim.clearance");
  s.checkpoint_interval = integer("sim.checkpoint_interval");
  s.seed = seed();
  check_config(s);
  return s;
}

MaterialParams RunConfig::material() const {
  return {number("material.cell_mass"), number("material.stiffness"), number("material.damping")};
}

OptimizerConfig RunConfig::optimizer() const {
  OptimizerConfig o;
  o.budget = integer("opt.budget");
  o.learning_rate = number("opt.learning_rate");
  o.beta1 = number("opt.beta1");
  o.beta2 = number("opt.beta2");
  o.epsilon = number("opt.epsilon");
  o.init_amplitude = number("opt.init_amplitude");
  o.init_bias = number("opt.init_bias");
  o.period_steps = number("opt.period_steps");
  return o;
}

TaskTiming RunConfig::timing() const {
  return {integer("task.rounds"), integer("task.ps_multiplier")};
}

StairsParams RunConfig::stairs() const {
  return {number("stairs.step_width"), number("stairs.step_height"), integer("stairs.n_steps"),
          number("stairs.lead")};
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  for (const auto& [k, v] : notes_) j[k] = v;
  return j;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace softmod
