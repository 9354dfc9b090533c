#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "softmod/controller.hpp"
#include "softmod/design.hpp"
#include "softmod/mesh.hpp"
#include "softmod/sim.hpp"

namespace softmod {

// Flat key = value settings. Layers apply in order (defaults, file, flags),
// later layers win. Unknown keys are rejected so typos never pass silently.
class RunConfig {
 public:
  RunConfig();

  // "key = value" lines, '#' starts a comment. Throws IoError/FileFormatError.
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, std::string_view origin = "<text>");
  // Throws std::invalid_argument for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  // Extra non-physics keys (paths, command name) that belong in headers.
  void note(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::uint64_t seed() const;

  SimConfig sim() const;
  MaterialParams material() const;
  OptimizerConfig optimizer() const;
  TaskTiming timing() const;
  StairsParams stairs() const;

  // Sorted key -> string map, the reproducibility header of every output.
  nlohmann::json to_json() const;
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> notes_;
};

}  // namespace softmod
