#include <algorithm>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "softmod/datagen.hpp"
#include "softmod/rng.hpp"

namespace softmod {
namespace {

DatasetRecord make(int id, Objective o, std::optional<double> time, const std::string& text, int n,
                   double distance = 3.0) {
  DatasetRecord r;
  r.id = id;
  r.objective = o;
  r.environment = o == Objective::kDownstairs ? Environment::kStairs : Environment::kFlatPlane;
  r.time_cost = time;
  r.design_text = text;
  r.n_blocks = n;
  r.max_distance = distance;
  return r;
}

std::string chain(int n) {
  std::vector<Cell> cells;
  for (int i = 0; i < n; ++i) cells.push_back({i, 0});
  return serialize(GridDesign::from_cells(cells));
}

TEST(TemplateTest, Phrases) {
  EXPECT_EQ(task_phrase(Objective::kUni), "unidirectional locomotion from left to right");
  EXPECT_EQ(environment_phrase(Environment::kFlatPlane, {}), "a flat plane");
  StairsParams s;
  s.n_steps = 4;
  EXPECT_EQ(environment_phrase(Environment::kStairs, s), "a staircase of 4 steps");
  EXPECT_EQ(distance_phrase(4), "at least 4 block lengths");
  EXPECT_EQ(distance_phrase(2.5), "at least 2.5 block lengths");
  EXPECT_EQ(blocks_phrase(7), "at most 7");
}

TEST(TemplateTest, ClmShapes) {
  const DatasetRecord r = make(3, Objective::kUni, 2.0, chain(3), 3, 4.0);
  const std::set<std::string> allowed{
      "Design a soft modular robot to achieve unidirectional locomotion from left to right within a flat plane.",
      "Design a soft modular robot to achieve unidirectional locomotion from left to right over a distance of at "
      "least 4 block lengths within a flat plane.",
      "Design a soft modular robot to achieve unidirectional locomotion from left to right within a flat plane "
      "using at most 3 blocks.",
      "Design a soft modular robot to achieve unidirectional locomotion from left to right over a distance of at "
      "least 4 block lengths within a flat plane using at most 3 blocks."};
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const PromptRecord p = render_clm(r, s);
    EXPECT_TRUE(allowed.contains(p.prompt)) << p.prompt;
    EXPECT_EQ(p.completion, r.design_text);
    EXPECT_EQ(p.source_ids, std::vector<int>{3});
    seen.insert(p.prompt);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(TemplateTest, ClauseInclusionRate) {
  const DatasetRecord r = make(0, Objective::kBackForth, 1.0, chain(2), 2);
  int distance = 0, blocks = 0, both = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const std::string p = render_clm(r, derive_seed(11, {static_cast<std::uint64_t>(i)})).prompt;
    const bool d = p.find("over a distance") != std::string::npos;
    const bool b = p.find("using at most") != std::string::npos;
    distance += d;
    blocks += b;
    both += d && b;
  }
  EXPECT_NEAR(distance / double(n), 0.5, 0.05);
  EXPECT_NEAR(blocks / double(n), 0.5, 0.05);
  EXPECT_NEAR(both / double(n), 0.25, 0.05);
}

TEST(CompareTest, WinnerIsFaster) {
  const DatasetRecord fast = make(1, Objective::kUni, 2.0, chain(2), 2, 5.0);
  const DatasetRecord slow = make(2, Objective::kUni, 3.0, chain(4), 4, 3.0);
  bool saw_swap = false, saw_plain = false;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const PromptRecord p = render_compare(fast, slow, s);
    EXPECT_EQ(p.completion, fast.design_text);
    const auto designs = extract_designs(p);
    ASSERT_EQ(designs.size(), 2u);
    const bool swapped = p.source_ids[0] == 2;
    (swapped ? saw_swap : saw_plain) = true;
    EXPECT_EQ(designs[0], swapped ? slow.design_text : fast.design_text);
    EXPECT_EQ(designs[1], swapped ? fast.design_text : slow.design_text);
    if (p.prompt.find("over a distance") != std::string::npos) {
      EXPECT_NE(p.prompt.find("at least 3 block lengths"), std::string::npos);
    }
    if (p.prompt.find("using") != std::string::npos) {
      EXPECT_NE(p.prompt.find("using at most 4 blocks"), std::string::npos);
    }
    EXPECT_EQ(p.prompt.rfind("For achieving unidirectional locomotion", 0), 0u);
  }
  EXPECT_TRUE(saw_swap && saw_plain);
}

TEST(CompareTest, TiesGoToFirstShown) {
  const DatasetRecord a = make(1, Objective::kUni, 2.0, chain(2), 2);
  const DatasetRecord b = make(2, Objective::kUni, 2.0, chain(3), 3);
  for (std::uint64_t s = 0; s < 16; ++s) {
    const PromptRecord p = render_compare(a, b, s);
    EXPECT_EQ(p.completion, extract_designs(p)[0]);
  }
}

TEST(CompareTest, Incomparable) {
  const DatasetRecord uni = make(1, Objective::kUni, 2.0, chain(2), 2);
  const DatasetRecord bf = make(2, Objective::kBackForth, 2.0, chain(2), 2);
  const DatasetRecord stuck = make(3, Objective::kUni, std::nullopt, chain(2), 2);
  EXPECT_THROW(render_compare(uni, bf, 0), IncomparablePair);
  EXPECT_THROW(render_compare(uni, stuck, 0), IncomparablePair);
}

std::vector<DatasetRecord> pool() {
  std::vector<DatasetRecord> d;
  const Objective objs[] = {Objective::kUni, Objective::kBackForth, Objective::kDownstairs};
  for (int i = 0; i < 30; ++i) {
    const std::optional<double> t = i % 4 == 3 ? std::nullopt : std::optional(1.0 + i);
    d.push_back(make(i, objs[i % 3], t, chain(2), 2));
  }
  return d;
}

TEST(PairSamplerTest, MatchesBruteForcePool) {
  const auto d = pool();
  std::set<std::pair<int, int>> all;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (d[i].time_cost && d[j].time_cost && d[i].objective == d[j].objective &&
          d[i].environment == d[j].environment) {
        all.insert({d[i].id, d[j].id});
      }
    }
  }
  const auto everything = pair_sampler(d, 10000, 1);
  EXPECT_EQ(std::set(everything.begin(), everything.end()), all);
  EXPECT_EQ(everything.size(), all.size());

  const auto some = pair_sampler(d, 20, 2);
  EXPECT_EQ(some.size(), 20u);
  EXPECT_EQ(std::set(some.begin(), some.end()).size(), 20u);
  for (const auto& pr : some) EXPECT_TRUE(all.contains(pr));
  EXPECT_EQ(pair_sampler(d, 20, 2), some);
  EXPECT_TRUE(pair_sampler({}, 5, 0).empty());
}

TEST(PairSamplerTest, RoughlyUniform) {
  const auto d = pool();
  std::map<std::pair<int, int>, int> hits;
  const int rounds = 2000;
  std::size_t total = 0;
  for (int r = 0; r < rounds; ++r) {
    for (const auto& p : pair_sampler(d, 5, derive_seed(9, {static_cast<std::uint64_t>(r)}))) ++hits[p];
  }
  for (const auto& [p, n] : hits) total += n;
  const double expected = double(total) / double(pair_sampler(d, 10000, 0).size());
  for (const auto& [p, n] : hits) EXPECT_NEAR(n, expected, 0.5 * expected);
}

TEST(DatasetTest, SmallBuildIsValidAndDeterministic) {
  DatasetConfig cfg;
  cfg.n_configs = 4;
  cfg.grid = {4, 4};
  cfg.blocks = {2, 5};
  cfg.settings.sim.n_steps = 200;
  cfg.settings.opt.budget = 2;
  cfg.settings.opt.period_steps = 50;
  cfg.settings.timing.rounds = 2;
  cfg.settings.seed = 17;
  const auto data = build_dataset(cfg);
  ASSERT_EQ(data.size(), 12u);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const DatasetRecord& r = data[k];
    EXPECT_EQ(r.id, static_cast<int>(k));
    EXPECT_EQ(r.config_index, static_cast<int>(k / 3));
    EXPECT_TRUE(check_text(r.design_text, cfg.grid).legal) << r.design_text;
    const GridDesign g = execute(parse(r.design_text));
    EXPECT_EQ(static_cast<int>(g.size()), r.n_blocks);
    EXPECT_GE(r.n_blocks, 2);
    EXPECT_LE(r.n_blocks, 5);
    EXPECT_EQ(canonical_key(g), r.canonical_key);
    if (r.objective == Objective::kDownstairs) {
      EXPECT_EQ(r.environment, Environment::kStairs);
    } else {
      EXPECT_GE(r.max_distance, 2.0);
      EXPECT_LE(r.max_distance, 6.0);
    }
    EXPECT_TRUE(r.failure.empty()) << r.failure;
  }
  // Same config, three tasks: same shape.
  EXPECT_EQ(data[0].canonical_key, data[1].canonical_key);

  cfg.workers = 1;
  const auto again = build_dataset(cfg);
  for (std::size_t k = 0; k < data.size(); ++k) {
    EXPECT_EQ(record_to_json(again[k]).dump(), record_to_json(data[k]).dump());
  }
  for (const DatasetRecord& r : data) {
    const PromptRecord p = render_clm(r, derive_seed(5, {static_cast<std::uint64_t>(r.id)}));
    EXPECT_EQ(extract_designs(p), std::vector<std::string>{r.design_text});
    const nlohmann::json j = prompt_to_json(p);
    EXPECT_EQ(j["kind"], "clm");
  }
}

TEST(DatasetTest, RejectsBadRanges) {
  DatasetConfig cfg;
  cfg.min_distance = 5;
  cfg.max_distance = 3;
  EXPECT_THROW(build_dataset(cfg), std::invalid_argument);
  cfg = {};
  cfg.tasks.clear();
  EXPECT_THROW(build_dataset(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace softmod
