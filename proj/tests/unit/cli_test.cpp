#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "skillrrt/io.hpp"

namespace fs = std::filesystem;
using skillrrt::cli::RunCli;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("skillrrt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "run.toml").string();
    std::ofstream(config_) << "domain = \"builtin:cardflip2d\"\n"
                              "seed = 3\n"
                              "[plan]\nproblems = 4\n"
                              "[mine]\nproblems = 4\n"
                              "[filter]\nreplays = 20\nm = 0.5\n"
                              "[export]\ntrajectories = 2\n"
                              "[bench]\nproblems = 2\nbatch_size = 8\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string& cmd, const fs::path& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{cmd, "--config", config_, "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return RunCli(args);
  }
  static std::string Slurp(const fs::path& p) { return skillrrt::ReadTextFile(p.string()); }
  // CSV text without the trailing wall-time column.
  static std::string WithoutWallTime(const fs::path& p) {
    std::istringstream in(Slurp(p));
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  }

  fs::path dir_;
  std::string config_;
};

}  // namespace

TEST_F(Cli, PipelineProducesArtifacts) {
  const fs::path out = dir_ / "a";
  for (const char* cmd : {"plan", "mine", "filter", "export"}) ASSERT_EQ(Run(cmd, out), 0) << cmd;
  EXPECT_TRUE(fs::exists(out / "plan_summary.csv"));
  EXPECT_TRUE(fs::exists(out / "connector_problems.jsonl"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "dataset.jsonl"));
  std::size_t plans = 0;
  for (const auto& e : fs::directory_iterator(out / "plans")) plans += e.path().extension() == ".json";
  EXPECT_EQ(plans, 4u);
  for (const auto& e : fs::directory_iterator(out / "reports")) {
    EXPECT_EQ(skillrrt::ReplayReportFromJson(Slurp(e.path())).n_replays, 20u);
  }
  const auto kept = skillrrt::ManifestFromJson(Slurp(out / "manifest.json"));
  const auto lines = skillrrt::ReadLines((out / "dataset.jsonl").string());
  if (!kept.empty()) EXPECT_FALSE(lines.empty());
  for (const auto& l : lines) EXPECT_NE(std::find(kept.begin(), kept.end(), skillrrt::DatasetRecordFromJsonLine(l).plan_id), kept.end());
}

TEST_F(Cli, RerunsAreByteIdentical) {
  for (const char* name : {"a", "b"}) {
    for (const char* cmd : {"plan", "mine", "filter", "export"}) ASSERT_EQ(Run(cmd, dir_ / name), 0) << cmd;
  }
  for (const auto& e : fs::directory_iterator(dir_ / "a" / "plans")) {
    EXPECT_EQ(Slurp(e.path()), Slurp(dir_ / "b" / "plans" / e.path().filename()));
  }
  for (const char* f : {"connector_problems.jsonl", "manifest.json", "dataset.jsonl"}) {
    EXPECT_EQ(Slurp(dir_ / "a" / f), Slurp(dir_ / "b" / f)) << f;
  }
  for (const char* f : {"plan_summary.csv", "filter_summary.csv", "export_summary.csv"}) {
    EXPECT_EQ(WithoutWallTime(dir_ / "a" / f), WithoutWallTime(dir_ / "b" / f)) << f;
  }
}

TEST_F(Cli, OverridesApply) {
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("plan", out, {"--n-max", "50"}), 0);
  ASSERT_EQ(Run("filter", out, {"--replays", "7", "--m", "0.2"}), 0);
  for (const auto& e : fs::directory_iterator(out / "reports")) {
    EXPECT_EQ(skillrrt::ReplayReportFromJson(Slurp(e.path())).n_replays, 7u);
  }
  EXPECT_NE(Slurp(out / "manifest.json").find("0.2"), std::string::npos);
}

TEST_F(Cli, BenchWritesOneRowPerMethod) {
  const fs::path out = dir_ / "bench";
  ASSERT_EQ(Run("bench", out), 0);
  const auto lines = skillrrt::ReadLines((out / "bench.csv").string());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1].rfind("skill_rrt,", 0), 0u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(RunCli({"plan", "--config", (dir_ / "missing.toml").string()}), 2);
  EXPECT_EQ(RunCli({"launch", "--config", config_}), 2);
  EXPECT_EQ(RunCli({"plan"}), 2);
  EXPECT_EQ(RunCli({"plan", "--config", config_, "--m", "2"}), 2);
  std::ofstream(dir_ / "bad.toml") << "domain = \"builtin:cardflip2d\"\nfoo = 1\n";
  EXPECT_EQ(RunCli({"plan", "--config", (dir_ / "bad.toml").string()}), 2);
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(Run("plan", dir_ / "blocker" / "out"), 3);
  EXPECT_EQ(Run("filter", dir_ / "empty"), 3);
}
