// Runs the softmod executable; the working directory is the source tree.
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "softmod/controller.hpp"
#include "softmod/design.hpp"

#ifndef SOFTMOD_CLI_PATH
#error "SOFTMOD_CLI_PATH must name the softmod executable"
#endif

namespace softmod {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("softmod_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + SOFTMOD_CLI_PATH + "\" " + args + " >\"" +
                            (dir_ / "stdout.txt").string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
  }

  fs::path write(const std::string& name, const std::string& body) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<nlohmann::json> lines(const fs::path& p) {
    std::vector<nlohmann::json> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
  }

  std::string q(const fs::path& p) const { return "\"" + p.string() + "\""; }

  fs::path dir_;
};

const char* kTwoLeg =
    "robot with 5 blocks:\nblock b0 at origin.\nattach block b1 to the top of block b0.\n"
    "attach block b2 to the right of block b1.\nattach block b3 to the right of block b2.\n"
    "attach block b4 to the bottom of block b3.\n";

TEST_F(CliTest, EvaluateMatchesGoldenReport) {
  const fs::path out = dir_ / "report.json";
  const CliRun r = run(
      "evaluate --generations data/fixtures/generations.jsonl --training data/fixtures/training.jsonl "
      "--outcomes data/fixtures/outcomes.jsonl --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out), slurp("data/fixtures/report.golden.json"));
}

TEST_F(CliTest, GenConfigsWritesLegalDesigns) {
  const fs::path out = dir_ / "d.jsonl";
  ASSERT_EQ(run("gen-configs --count 20 --grid 4x3 --blocks 2..6 --seed 5 --out " + q(out)).code, 0);
  const auto rows = lines(out);
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_TRUE(rows[0].contains("header"));
  EXPECT_EQ(rows[0]["header"]["seed"], "5");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto v = check_text(rows[i]["text"].get<std::string>(), GridBound{4, 3});
    EXPECT_TRUE(v.legal);
    EXPECT_GE(v.design->size(), 2u);
    EXPECT_LE(v.design->size(), 6u);
  }
  const fs::path again = dir_ / "e.jsonl";
  ASSERT_EQ(run("gen-configs --count 20 --grid 4x3 --blocks 2..6 --seed 5 --out " + q(again)).code, 0);
  EXPECT_EQ(slurp(out), slurp(again));

  ASSERT_EQ(run("gen-configs --count 0 --out " + q(out)).code, 0);
  EXPECT_EQ(lines(out).size(), 1u);
}

TEST_F(CliTest, AugmentKeepsTheShape) {
  const fs::path design = write("two_leg.txt", kTwoLeg);
  const fs::path out = dir_ / "aug.jsonl";
  ASSERT_EQ(run("augment --design " + q(design) + " -k 5 --out " + q(out)).code, 0);
  const auto rows = lines(out);
  ASSERT_EQ(rows.size(), 6u);
  const CanonicalForm key = canonical_key(execute(parse(kTwoLeg)));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(canonical_key(execute(parse(rows[i]["text"].get<std::string>()))), key);
  }
}

TEST_F(CliTest, OptimizeThenSimulateWithFrames) {
  const fs::path design = write("two_leg.txt", kTwoLeg);
  const fs::path ctrl = dir_ / "ctrl.json";
  const fs::path summary = dir_ / "summary.json";
  ASSERT_EQ(run("optimize --design " + q(design) + " --iters 2 --set sim.steps=200 --out " + q(ctrl)).code, 0);
  const nlohmann::json c = nlohmann::json::parse(slurp(ctrl));
  EXPECT_TRUE(c.contains("header"));
  const fs::path again = dir_ / "again.json";
  ASSERT_EQ(run("optimize --design " + q(design) + " --iters 2 --set sim.steps=200 --out " + q(again)).code, 0);
  EXPECT_EQ(slurp(again), slurp(ctrl));

  const fs::path frames = dir_ / "frames";
  const CliRun r = run("simulate --design " + q(design) + " --controller " + q(ctrl) +
                    " --set sim.steps=200 --steps 250 --stride 100 --dump-frames " + q(frames) +
                    " --summary " + q(summary));
  ASSERT_EQ(r.code, 0) << r.err;
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(frames)) names.insert(e.path().filename().string());
  // Initial pose, steps 100 and 200, and the final step.
  EXPECT_EQ(names, (std::set<std::string>{"frame_000000.svg", "frame_000001.svg", "frame_000002.svg",
                                          "frame_000003.svg"}));
  EXPECT_NE(slurp(frames / "frame_000000.svg").find("<svg"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(slurp(summary)).is_object());
}

TEST_F(CliTest, DatasetSmokeRun) {
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(run("dataset --n-configs 10 --out " + q(dir_ / "ds")).code, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 120.0);
  const auto records = lines(dir_ / "ds" / "dataset.jsonl");
  ASSERT_EQ(records.size(), 31u);
  EXPECT_EQ(records[0]["header"]["n_configs"], "10");
  const auto clm = lines(dir_ / "ds" / "clm.jsonl");
  EXPECT_EQ(clm.size(), 31u);
  for (std::size_t i = 1; i < clm.size(); ++i) {
    const std::string text = clm[i]["completion"].get<std::string>();
    EXPECT_EQ(canonical_key(execute(parse(text))).key, records[i]["canonical_key"]);
  }
}

TEST_F(CliTest, ExitCodes) {
  const fs::path design = write("two_leg.txt", kTwoLeg);
  const fs::path out = dir_ / "out.jsonl";
  auto error_of = [](const CliRun& r) { return nlohmann::json::parse(r.err); };

  // 1: input files
  CliRun r = run("simulate --design " + q(dir_ / "missing.txt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_of(r)["error"], "IoError");
  const fs::path junk = write("junk.jsonl", "{\"task\": \"uni\"\n");
  r = run("evaluate --generations " + q(junk) + " --training " + q(junk) + " --out " + q(out));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_of(r)["error"], "FileFormatError");
  const fs::path cfg = write("bad.cfg", "sim.dt 0.1\n");
  EXPECT_EQ(run("simulate --config " + q(cfg) + " --design " + q(design)).code, 1);

  // 2: usage
  r = run("gen-configs --count 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "usage");
  r = run("gen-configs --count 2 --out " + q(out) + " --frobnicate");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(error_of(r)["usage"].get<std::string>().find("--blocks"), std::string::npos);
  EXPECT_EQ(run("gen-configs --count 2 --out " + q(out) + " --set nosuch.key=1").code, 2);
  EXPECT_EQ(run("simulate --design " + q(design) + " --task downstairs --terrain flat").code, 2);
  EXPECT_EQ(run("nosuchcommand").code, 2);

  // 3: domain
  r = run("gen-configs --count 2 --blocks 30..40 --out " + q(out));
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_of(r)["error"], "InfeasibleRange");
  const fs::path overlap = write("overlap.txt",
                                 "robot with 3 blocks:\nblock b0 at origin.\n"
                                 "attach block b1 to the right of block b0.\n"
                                 "attach block b2 to the left of block b1.\n");
  r = run("simulate --design " + q(overlap));
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_of(r)["error"], "OverlapError");
  EXPECT_EQ(run("optimize --design " + q(design) + " --iters 0 --out " + q(out)).code, 3);

  // 4: numerical blow-up
  r = run("simulate --design " + q(design) + " --set sim.dt=0.1");
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(error_of(r)["error"], "NonFiniteState");
  EXPECT_EQ(error_of(r)["exit_code"], 4);
}

}  // namespace
}  // namespace softmod
