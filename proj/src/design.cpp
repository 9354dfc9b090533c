#include "softmod/design.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "softmod/rng.hpp"

namespace softmod {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "SyntaxError";
    case ErrorKind::kReference: return "ReferenceError";
    case ErrorKind::kOverlap: return "OverlapError";
    case ErrorKind::kCountMismatch: return "CountMismatch";
    case ErrorKind::kEmptyDesign: return "EmptyDesign";
    case ErrorKind::kInfeasibleRange: return "InfeasibleRange";
    case ErrorKind::kIllegalDesign: return "IllegalDesign";
    case ErrorKind::kNonFiniteState: return "NonFiniteState";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kBudgetZero: return "BudgetZero";
    case ErrorKind::kIncomparablePair: return "IncomparablePair";
    case ErrorKind::kNoConstrainedPrompts: return "NoConstrainedPrompts";
    case ErrorKind::kFileFormat: return "FileFormatError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

Cell neighbor(Cell c, Direction d) {
  switch (d) {
    case Direction::kRight: return {c.col + 1, c.row};
    case Direction::kTop: return {c.col, c.row + 1};
    case Direction::kLeft: return {c.col - 1, c.row};
    case Direction::kBottom: return {c.col, c.row - 1};
  }
  return c;
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kRight: return "right";
    case Direction::kTop: return "top";
    case Direction::kLeft: return "left";
    case Direction::kBottom: return "bottom";
  }
  return "?";
}

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::kEmpty: return "empty";
    case Violation::kOverlap: return "overlap";
    case Violation::kDisconnected: return "disconnected";
    case Violation::kOutOfBounds: return "out_of_bounds";
  }
  return "?";
}

std::vector<Cell> GridDesign::cells() const {
  std::vector<Cell> out;
  out.reserve(modules.size());
  for (const auto& [id, c] : modules) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GridDesign GridDesign::from_cells(const std::vector<Cell>& cells) {
  GridDesign d;
  int id = 0;
  for (Cell c : cells) d.modules.emplace(id++, c);
  return d;
}

GridDesign translated(const GridDesign& design, int dcol, int drow) {
  GridDesign out;
  for (const auto& [id, c] : design.modules) out.modules.emplace(id, Cell{c.col + dcol, c.row + drow});
  return out;
}

GridDesign normalized(const GridDesign& design) {
  if (design.empty()) return design;
  int min_col = std::numeric_limits<int>::max();
  int min_row = std::numeric_limits<int>::max();
  for (const auto& [id, c] : design.modules) {
    min_col = std::min(min_col, c.col);
    min_row = std::min(min_row, c.row);
  }
  return translated(design, -min_col, -min_row);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct RawStatement {
  int line = 0;
  std::vector<std::string> words;
};

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == ':' || c == ';' || c == '!' || c == '?';
}

std::vector<std::string> split_words(std::string_view piece) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && is_trailing_punct(cur.back())) cur.pop_back();
    if (!cur.empty()) words.push_back(cur);
    cur.clear();
  };
  for (char ch : piece) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return words;
}

// Splits at line breaks, at ';', and at '.'/':' followed by whitespace.
std::vector<RawStatement> split_statements(std::string_view text) {
  std::vector<RawStatement> out;
  int line = 1;
  std::size_t start = 0;
  auto emit = [&](std::size_t end, int at_line) {
    auto words = split_words(text.substr(start, end - start));
    if (!words.empty()) out.push_back({at_line, std::move(words)});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    const bool next_space =
        i + 1 >= text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (ch == '\n' || ch == ';' || ((ch == '.' || ch == ':') && next_space)) {
      emit(i, line);
      start = i + 1;
    }
    if (ch == '\n') ++line;
  }
  emit(text.size(), line);
  return out;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_id(std::string_view w) {
  if (w.size() < 2 || w[0] != 'b') return std::nullopt;
  auto v = parse_int(w.substr(1));
  if (!v || *v < 0 || *v > std::numeric_limits<int>::max()) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<Direction> parse_direction(std::string_view w) {
  if (w == "right") return Direction::kRight;
  if (w == "left") return Direction::kLeft;
  if (w == "top" || w == "up" || w == "above") return Direction::kTop;
  if (w == "bottom" || w == "down" || w == "below") return Direction::kBottom;
  return std::nullopt;
}

class Cursor {
 public:
  explicit Cursor(const std::vector<std::string>& w) : w_(w) {}
  bool done() const { return i_ >= w_.size(); }
  bool accept(std::string_view word) {
    if (!done() && w_[i_] == word) {
      ++i_;
      return true;
    }
    return false;
  }
  std::optional<std::string_view> take() {
    if (done()) return std::nullopt;
    return std::string_view(w_[i_++]);
  }

 private:
  const std::vector<std::string>& w_;
  std::size_t i_ = 0;
};

std::string where(const RawStatement& s) {
  std::ostringstream os;
  os << "line " << s.line << ": '";
  for (std::size_t i = 0; i < s.words.size(); ++i) os << (i ? " " : "") << s.words[i];
  os << "'";
  return os.str();
}

std::optional<int> match_header(const RawStatement& s) {
  Cursor c(s.words);
  c.accept("a");
  if (!c.accept("robot") || !c.accept("with")) return std::nullopt;
  auto n = c.take();
  if (!n) return std::nullopt;
  auto v = parse_int(*n);
  if (!v || *v < 1 || *v > std::numeric_limits<int>::max()) return std::nullopt;
  if (!(c.accept("blocks") || c.accept("block")) || !c.done()) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<Place> match_place(const RawStatement& s) {
  Cursor c(s.words);
  c.accept("place");
  if (!c.accept("block")) return std::nullopt;
  auto id = c.take();
  if (!id || !parse_id(*id)) return std::nullopt;
  if (!c.accept("at")) return std::nullopt;
  c.accept("the");
  if (!c.accept("origin") || !c.done()) return std::nullopt;
  return Place{*parse_id(*id)};
}

std::optional<Attach> match_attach(const RawStatement& s) {
  Cursor c(s.words);
  if (!c.accept("attach")) return std::nullopt;
  c.accept("block");
  auto id = c.take();
  if (!id || !parse_id(*id)) return std::nullopt;
  if (!c.accept("to")) return std::nullopt;
  c.accept("the");
  auto dir = c.take();
  if (!dir || !parse_direction(*dir)) return std::nullopt;
  if (!c.accept("of")) return std::nullopt;
  c.accept("block");
  auto anchor = c.take();
  if (!anchor || !parse_id(*anchor) || !c.done()) return std::nullopt;
  return Attach{*parse_id(*id), *parse_id(*anchor), *parse_direction(*dir)};
}

// Executes statements against an occupancy map; shared by parse and execute.
GridDesign run_statements(const DesignScript& script) {
  GridDesign design;
  std::set<Cell> occupied;
  for (std::size_t k = 0; k < script.statements.size(); ++k) {
    const Statement& st = script.statements[k];
    if (const auto* place = std::get_if<Place>(&st)) {
      if (k != 0) throw SyntaxError("statement " + std::to_string(k) + ": root placed twice");
      design.modules.emplace(place->id, Cell{0, 0});
      occupied.insert(Cell{0, 0});
      continue;
    }
    const auto& at = std::get<Attach>(st);
    if (k == 0) throw ReferenceError("attach of b" + std::to_string(at.id) + " before any block is placed");
    auto anchor = design.modules.find(at.anchor);
    if (anchor == design.modules.end()) {
      throw ReferenceError("b" + std::to_string(at.id) + " attached to unplaced block b" +
                           std::to_string(at.anchor));
    }
    if (design.modules.contains(at.id)) {
      throw ReferenceError("block b" + std::to_string(at.id) + " placed twice");
    }
    const Cell target = neighbor(anchor->second, at.dir);
    if (occupied.contains(target)) {
      throw OverlapError("b" + std::to_string(at.id) + " to the " +
                         std::string(direction_name(at.dir)) + " of b" + std::to_string(at.anchor) +
                         " lands on an occupied cell");
    }
    design.modules.emplace(at.id, target);
    occupied.insert(target);
  }
  if (static_cast<int>(design.size()) != script.block_count) {
    throw CountMismatch("declared " + std::to_string(script.block_count) + " blocks, placed " +
                        std::to_string(design.size()));
  }
  return normalized(design);
}

}  // namespace

DesignScript parse(std::string_view text) {
  const auto raw = split_statements(text);
  if (raw.empty()) throw SyntaxError("empty design text");
  DesignScript script;
  auto n = match_header(raw.front());
  if (!n) throw SyntaxError("expected 'robot with <n> blocks:' at " + where(raw.front()));
  script.block_count = *n;
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (auto p = match_place(raw[i])) {
      script.statements.emplace_back(*p);
    } else if (auto a = match_attach(raw[i])) {
      script.statements.emplace_back(*a);
    } else {
      throw SyntaxError("unrecognized statement at " + where(raw[i]));
    }
  }
  run_statements(script);
  return script;
}

std::string to_text(const DesignScript& script) {
  std::ostringstream os;
  os << "robot with " << script.block_count << " blocks:";
  for (const Statement& st : script.statements) {
    os << '\n';
    if (const auto* p = std::get_if<Place>(&st)) {
      os << "block b" << p->id << " at origin.";
    } else {
      const auto& a = std::get<Attach>(st);
      os << "attach block b" << a.id << " to the " << direction_name(a.dir) << " of block b"
         << a.anchor << '.';
    }
  }
  return os.str();
}

GridDesign execute(const DesignScript& script) { return run_statements(script); }

// ---------------------------------------------------------------------------
// Canonical forms and validation

CanonicalForm canonical_key(const GridDesign& design) {
  if (design.empty()) throw EmptyDesign("canonical_key of an empty design");
  std::ostringstream os;
  bool first = true;
  for (Cell c : normalized(design).cells()) {
    os << (first ? "" : ";") << c.col << ',' << c.row;
    first = false;
  }
  return {os.str()};
}

Verdict validate(const GridDesign& design, std::optional<GridBound> bound) {
  Verdict v;
  if (design.empty()) {
    v.reasons.push_back(Violation::kEmpty);
    return v;
  }
  const auto cells = design.cells();
  if (cells.size() != design.size()) v.reasons.push_back(Violation::kOverlap);

  std::set<Cell> pending(cells.begin(), cells.end());
  std::deque<Cell> queue{cells.front()};
  pending.erase(cells.front());
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (Direction d : kAllDirections) {
      auto it = pending.find(neighbor(c, d));
      if (it != pending.end()) {
        queue.push_back(*it);
        pending.erase(it);
      }
    }
  }
  if (!pending.empty()) v.reasons.push_back(Violation::kDisconnected);

  if (bound) {
    int max_col = 0, max_row = 0;
    for (Cell c : normalized(design).cells()) {
      max_col = std::max(max_col, c.col);
      max_row = std::max(max_row, c.row);
    }
    if (max_col >= bound->width || max_row >= bound->height) {
      v.reasons.push_back(Violation::kOutOfBounds);
    }
  }
  v.legal = v.reasons.empty();
  return v;
}

TextVerdict check_text(std::string_view text, std::optional<GridBound> bound) {
  TextVerdict out;
  try {
    GridDesign d = execute(parse(text));
    Verdict v = validate(d, bound);
    out.legal = v.legal;
    out.reasons = std::move(v.reasons);
    out.design = std::move(d);
  } catch (const Error& e) {
    out.parse_error = e.kind();
    out.message = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linearizations

namespace {

void require_robot(const GridDesign& design, std::string_view op) {
  if (design.empty()) throw EmptyDesign(std::string(op) + " of an empty design");
  if (!validate(design).legal) throw IllegalDesign(std::string(op) + " of an illegal design");
}

// BFS from `root`; `order` permutes each expansion's unvisited neighbors.
template <class Order>
DesignScript bfs_script(const std::vector<Cell>& cells, Cell root, Order&& order) {
  const std::set<Cell> occupied(cells.begin(), cells.end());
  std::map<Cell, int> ids{{root, 0}};
  DesignScript script;
  script.block_count = static_cast<int>(cells.size());
  script.statements.emplace_back(Place{0});
  std::deque<Cell> queue{root};
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    std::vector<Direction> fresh;
    for (Direction d : kAllDirections) {
      const Cell n = neighbor(c, d);
      if (occupied.contains(n) && !ids.contains(n)) fresh.push_back(d);
    }
    order(fresh);
    for (Direction d : fresh) {
      const Cell n = neighbor(c, d);
      const int id = static_cast<int>(ids.size());
      ids.emplace(n, id);
      script.statements.emplace_back(Attach{id, ids.at(c), d});
      queue.push_back(n);
    }
  }
  return script;
}

}  // namespace

DesignScript canonical_script(const GridDesign& design) {
  require_robot(design, "serialize");
  const auto cells = normalized(design).cells();
  return bfs_script(cells, cells.front(), [](std::vector<Direction>&) {});
}

std::string serialize(const GridDesign& design) { return to_text(canonical_script(design)); }

std::vector<DesignScript> bfs_augment(const GridDesign& design, int k, std::uint64_t seed) {
  require_robot(design, "bfs_augment");
  if (k < 1) throw InfeasibleRange("bfs_augment needs k >= 1");
  const auto cells = normalized(design).cells();
  Rng rng(seed);
  std::vector<DesignScript> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const Cell root = cells[rng.below(cells.size())];
    out.push_back(bfs_script(cells, root, [&](std::vector<Direction>& dirs) {
      rng.shuffle(std::span<Direction>(dirs));
    }));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

GridDesign sample_design(GridBound grid, BlockRange blocks, std::uint64_t seed) {
  if (grid.width < 1 || grid.height < 1 || blocks.min < 1 || blocks.max < blocks.min ||
      blocks.max > grid.width * grid.height) {
    throw InfeasibleRange("block range [" + std::to_string(blocks.min) + ", " +
                          std::to_string(blocks.max) + "] infeasible in a " +
                          std::to_string(grid.width) + "x" + std::to_string(grid.height) + " grid");
  }
  Rng rng(seed);
  const int n = rng.between(blocks.min, blocks.max);
  auto inside = [&](Cell c) {
    return c.col >= 0 && c.row >= 0 && c.col < grid.width && c.row < grid.height;
  };
  std::vector<Cell> chosen;
  std::set<Cell> taken;
  std::set<Cell> frontier;
  auto add = [&](Cell c) {
    chosen.push_back(c);
    taken.insert(c);
    frontier.erase(c);
    for (Direction d : kAllDirections) {
      const Cell nb = neighbor(c, d);
      if (inside(nb) && !taken.contains(nb)) frontier.insert(nb);
    }
  };
  add(Cell{static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.width))),
           static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.height)))});
  while (static_cast<int>(chosen.size()) < n) {
    auto it = frontier.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(frontier.size())));
    add(*it);
  }
  return normalized(GridDesign::from_cells(chosen));
}

}  // namespace softmod
