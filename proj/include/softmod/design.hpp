#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "softmod/common.hpp"

namespace softmod {

// Lattice cell, unit = one block edge.
struct Cell {
  int col = 0;
  int row = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Direction { kRight, kTop, kLeft, kBottom };

inline constexpr Direction kAllDirections[] = {Direction::kRight, Direction::kTop,
                                               Direction::kLeft, Direction::kBottom};

Cell neighbor(Cell c, Direction d);
std::string_view direction_name(Direction d);

// Occupied cells keyed by module id. A GridDesign can hold illegal content
// (overlap, disconnection); validate() says whether it is a robot.
struct GridDesign {
  std::map<int, Cell> modules;

  std::size_t size() const { return modules.size(); }
  bool empty() const { return modules.empty(); }
  // Distinct occupied cells, sorted.
  std::vector<Cell> cells() const;

  // Ids 0..n-1 in the given order.
  static GridDesign from_cells(const std::vector<Cell>& cells);
};

// Same cells translated so min col = min row = 0.
GridDesign normalized(const GridDesign& design);
GridDesign translated(const GridDesign& design, int dcol, int drow);

struct Place {
  int id = 0;
  friend bool operator==(const Place&, const Place&) = default;
};

struct Attach {
  int id = 0;
  int anchor = 0;
  Direction dir = Direction::kRight;
  friend bool operator==(const Attach&, const Attach&) = default;
};

using Statement = std::variant<Place, Attach>;

struct DesignScript {
  int block_count = 0;
  std::vector<Statement> statements;
  friend bool operator==(const DesignScript&, const DesignScript&) = default;
};

// Textual form:
//   robot with <n> blocks:
//   block b0 at origin.
//   attach block b<k> to the <right|left|top|bottom> of block b<j>.
// Parsing ignores case, extra whitespace and trailing punctuation; statements
// may also be separated by ". " on a single line.
DesignScript parse(std::string_view text);
std::string to_text(const DesignScript& script);

// Runs the statements; root at (0,0), result normalized.
GridDesign execute(const DesignScript& script);

// Canonical script: BFS from the smallest cell, neighbor order right, top,
// left, bottom, ids renumbered in visit order.
DesignScript canonical_script(const GridDesign& design);
std::string serialize(const GridDesign& design);

// Translation-normalized, sorted cell list as "c,r;c,r;...".
struct CanonicalForm {
  std::string key;
  friend auto operator<=>(const CanonicalForm&, const CanonicalForm&) = default;
};

CanonicalForm canonical_key(const GridDesign& design);

struct GridBound {
  int width = 5;
  int height = 5;
};

enum class Violation { kEmpty, kOverlap, kDisconnected, kOutOfBounds };
std::string_view violation_name(Violation v);

struct Verdict {
  bool legal = false;
  std::vector<Violation> reasons;
};

Verdict validate(const GridDesign& design, std::optional<GridBound> bound = std::nullopt);

// Verdict for raw text: parse errors make the design illegal.
struct TextVerdict {
  bool legal = false;
  std::optional<ErrorKind> parse_error;
  std::string message;
  std::vector<Violation> reasons;
  std::optional<GridDesign> design;
};

TextVerdict check_text(std::string_view text, std::optional<GridBound> bound = std::nullopt);

// k assembly orders from randomized-tie-break BFS traversals, each from a
// uniformly drawn root.
std::vector<DesignScript> bfs_augment(const GridDesign& design, int k, std::uint64_t seed);

struct BlockRange {
  int min = 1;
  int max = 1;
};

// Random connected growth inside the grid: uniform start cell, then uniform
// draws from the frontier until the drawn block count is reached.
GridDesign sample_design(GridBound grid, BlockRange blocks, std::uint64_t seed);

}  // namespace softmod
