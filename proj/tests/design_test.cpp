#include <algorithm>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "softmod/design.hpp"
#include "softmod/rng.hpp"
#include "test_util.hpp"

namespace softmod {
namespace {

using testing::flood_fill_connected;
using testing::enumerate_bfs_scripts;
using testing::random_cells;
using testing::shifted_to_origin;

std::set<Cell> cell_set(const GridDesign& d) {
  const auto c = d.cells();
  return {c.begin(), c.end()};
}

TEST(ParseTest, SingleBlock) {
  const DesignScript s = parse("robot with 1 blocks:\nblock b0 at origin.");
  EXPECT_EQ(s.block_count, 1);
  ASSERT_EQ(s.statements.size(), 1u);
  EXPECT_EQ(std::get<Place>(s.statements[0]).id, 0);
}

TEST(ParseTest, TwoBlocksRight) {
  const GridDesign d = execute(
      parse("robot with 2 blocks:\nblock b0 at origin.\nattach block b1 to the right of block b0."));
  EXPECT_EQ(d.cells(), (std::vector<Cell>{{0, 0}, {1, 0}}));
}

TEST(ParseTest, ToleratesCaseWhitespaceAndPunctuation) {
  const GridDesign d = execute(parse(
      "  Robot  With 2 Blocks:  \n\n BLOCK b0 at Origin!!\r\n attach block B1 to the TOP of block b0 ;"));
  EXPECT_EQ(d.cells(), (std::vector<Cell>{{0, 0}, {0, 1}}));
}

TEST(ParseTest, OverlapIsRejected) {
  EXPECT_THROW(parse("robot with 3 blocks:\nblock b0 at origin.\n"
                     "attach block b1 to the right of block b0.\n"
                     "attach block b2 to the right of block b0."),
               OverlapError);
}

TEST(ParseTest, ErrorClasses) {
  EXPECT_THROW(parse("robot with 1 blocks:\nblock b0 at the moon."), SyntaxError);
  EXPECT_THROW(parse("hello"), SyntaxError);
  EXPECT_THROW(parse(""), SyntaxError);
  EXPECT_THROW(parse("robot with 2 blocks:\nblock b0 at origin.\n"
                     "attach block b1 to the left of block b7."),
               ReferenceError);
  EXPECT_THROW(parse("robot with 2 blocks:\nblock b0 at origin.\n"
                     "attach block b0 to the left of block b0."),
               ReferenceError);
  EXPECT_THROW(parse("robot with 3 blocks:\nblock b0 at origin.\n"
                     "attach block b1 to the left of block b0."),
               CountMismatch);
}

TEST(ExecuteTest, OffsetsAndNormalization) {
  DesignScript s{3, {Place{0}, Attach{1, 0, Direction::kTop}, Attach{2, 1, Direction::kRight}}};
  EXPECT_EQ(execute(s).cells(), (std::vector<Cell>{{0, 0}, {0, 1}, {1, 1}}));
  DesignScript left{2, {Place{0}, Attach{1, 0, Direction::kLeft}}};
  const GridDesign d = execute(left);
  EXPECT_EQ(d.modules.at(0), (Cell{1, 0}));
  EXPECT_EQ(d.modules.at(1), (Cell{0, 0}));
}

TEST(SerializeTest, KnownTexts) {
  EXPECT_EQ(serialize(GridDesign::from_cells({{0, 0}})), "robot with 1 blocks:\nblock b0 at origin.");
  EXPECT_EQ(serialize(GridDesign::from_cells({{0, 0}, {1, 0}})),
            "robot with 2 blocks:\nblock b0 at origin.\nattach block b1 to the right of block b0.");
  EXPECT_THROW(serialize(GridDesign{}), EmptyDesign);
}

TEST(SerializeTest, RoundTripOnSampledDesigns) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GridDesign d = sample_design({5, 5}, {1, 25}, seed);
    const GridDesign back = execute(parse(serialize(d)));
    ASSERT_EQ(cell_set(back), cell_set(normalized(d))) << "seed " << seed;
    ASSERT_EQ(serialize(back), serialize(d));
  }
}

TEST(CanonicalKeyTest, TranslationOnly) {
  EXPECT_EQ(canonical_key(GridDesign::from_cells({{0, 0}, {1, 0}})),
            canonical_key(GridDesign::from_cells({{3, 2}, {4, 2}})));
  EXPECT_NE(canonical_key(GridDesign::from_cells({{0, 0}, {1, 0}})),
            canonical_key(GridDesign::from_cells({{0, 0}, {0, 1}})));
  EXPECT_THROW(canonical_key(GridDesign{}), EmptyDesign);
}

TEST(CanonicalKeyTest, AgreesWithBruteForceSetComparison) {
  Rng rng(17);
  std::vector<std::vector<Cell>> designs;
  for (int i = 0; i < 1000; ++i) {
    const GridDesign d = sample_design({3, 3}, {1, 4}, rng.next());
    auto cells = d.cells();
    const int dc = rng.between(-4, 4), dr = rng.between(-4, 4);
    for (Cell& c : cells) c = {c.col + dc, c.row + dr};
    designs.push_back(cells);
  }
  for (std::size_t i = 0; i < designs.size(); i += 7) {
    for (std::size_t j = 0; j < designs.size(); j += 3) {
      const bool same_key = canonical_key(GridDesign::from_cells(designs[i])) ==
                            canonical_key(GridDesign::from_cells(designs[j]));
      ASSERT_EQ(same_key, shifted_to_origin(designs[i]) == shifted_to_origin(designs[j]));
    }
  }
}

TEST(CanonicalKeyTest, TranslationCongruence) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const GridDesign d = sample_design({5, 5}, {1, 12}, seed);
    ASSERT_EQ(canonical_key(d), canonical_key(translated(d, -7, 11)));
  }
}

TEST(ValidateTest, Examples) {
  EXPECT_TRUE(validate(GridDesign::from_cells({{0, 0}, {1, 0}, {1, 1}})).legal);
  const Verdict v = validate(GridDesign::from_cells({{0, 0}, {2, 0}}));
  EXPECT_FALSE(v.legal);
  EXPECT_EQ(v.reasons, std::vector<Violation>{Violation::kDisconnected});
  EXPECT_FALSE(validate(GridDesign{}).legal);
  EXPECT_FALSE(validate(GridDesign::from_cells({{0, 0}, {0, 0}})).legal);
  EXPECT_FALSE(validate(GridDesign::from_cells({{0, 0}, {1, 0}, {2, 0}}), GridBound{2, 2}).legal);
  EXPECT_TRUE(validate(GridDesign::from_cells({{7, 7}, {8, 7}}), GridBound{2, 1}).legal);
}

TEST(ValidateTest, AgreesWithFloodFillOracle) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto cells = random_cells(rng, 8, 2);
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    const Verdict v = validate(GridDesign::from_cells(cells));
    ASSERT_EQ(v.legal, flood_fill_connected(cells)) << "case " << i;
  }
}

TEST(AugmentTest, LTrominoOrderCountMatchesExhaustiveOracle) {
  const std::vector<Cell> tromino{{0, 0}, {1, 0}, {0, 1}};
  const auto oracle = enumerate_bfs_scripts(tromino);
  // Two orders from the corner root, one from each leaf root.
  EXPECT_EQ(oracle.size(), 4u);
  std::set<std::string> generated;
  for (const DesignScript& s : bfs_augment(GridDesign::from_cells(tromino), 400, 3)) {
    generated.insert(to_text(s));
  }
  EXPECT_EQ(generated, oracle);
}

TEST(AugmentTest, ReachesEveryOrderOfSmallDesigns) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GridDesign d = sample_design({3, 3}, {2, 5}, seed);
    const auto oracle = enumerate_bfs_scripts(d.cells());
    std::set<std::string> generated;
    for (const DesignScript& s : bfs_augment(d, 3000, seed)) generated.insert(to_text(s));
    ASSERT_EQ(generated, oracle) << serialize(d);
  }
}

TEST(AugmentTest, SingleBlock) {
  const auto scripts = bfs_augment(GridDesign::from_cells({{0, 0}}), 3, 1);
  ASSERT_EQ(scripts.size(), 3u);
  for (const auto& s : scripts) EXPECT_EQ(to_text(s), "robot with 1 blocks:\nblock b0 at origin.");
  EXPECT_THROW(bfs_augment(GridDesign{}, 3, 1), EmptyDesign);
}

TEST(AugmentTest, ClosureOnSampledDesigns) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GridDesign d = sample_design({5, 5}, {1, 25}, seed);
    const CanonicalForm key = canonical_key(d);
    for (const DesignScript& s : bfs_augment(d, 3, seed)) {
      ASSERT_EQ(canonical_key(execute(parse(to_text(s)))), key) << "seed " << seed;
    }
  }
}

TEST(SampleTest, Examples) {
  EXPECT_EQ(sample_design({1, 1}, {1, 1}, 9).cells(), (std::vector<Cell>{{0, 0}}));
  EXPECT_THROW(sample_design({2, 2}, {3, 5}, 0), InfeasibleRange);
  EXPECT_THROW(sample_design({2, 2}, {3, 2}, 0), InfeasibleRange);
  EXPECT_EQ(serialize(sample_design({5, 5}, {3, 25}, 42)), serialize(sample_design({5, 5}, {3, 25}, 42)));
}

TEST(SampleTest, ThreeThousandDrawsStayLegalAndInBounds) {
  std::set<CanonicalForm> distinct;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    const GridDesign d = sample_design({5, 5}, {3, 25}, seed);
    ASSERT_TRUE(validate(d, GridBound{5, 5}).legal) << "seed " << seed;
    ASSERT_GE(d.size(), 3u);
    ASSERT_LE(d.size(), 25u);
    distinct.insert(canonical_key(d));
  }
  EXPECT_GT(distinct.size(), 2000u);
}

TEST(CheckTextTest, ReportsParseAndValidityErrors) {
  const TextVerdict bad = check_text("robot with 2 blocks:\nblock b0 at origin.");
  EXPECT_FALSE(bad.legal);
  ASSERT_TRUE(bad.parse_error.has_value());
  EXPECT_EQ(*bad.parse_error, ErrorKind::kCountMismatch);
  const TextVerdict ok = check_text(serialize(GridDesign::from_cells({{0, 0}, {0, 1}})));
  EXPECT_TRUE(ok.legal);
  EXPECT_EQ(ok.design->size(), 2u);
}

}  // namespace
}  // namespace softmod
