#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skillrrt/domain_io.hpp"
#include "skillrrt/planner.hpp"

namespace skillrrt::cli {

struct PlanSection {
  std::size_t problems = 50;
  bool connectors = true;
};

struct MineSection {
  std::size_t problems = 50;
};

struct FilterSection {
  std::string plans_dir;  // defaults to <out>/plans
  std::size_t replays = 400;
  double m = 0.9;
};

struct ExportSection {
  std::string plans_dir;  // defaults to <out>/plans
  std::string manifest;   // defaults to <out>/manifest.json
  std::size_t trajectories = 30;
};

struct BenchSection {
  std::size_t problems = 50;
  int batch_size = 64;
  int flat_horizon = 10;
};

/// Values given on the command line; they win over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> batch_size;
  std::optional<int> n_max;
  std::optional<double> m;
  std::optional<std::size_t> replays;
};

struct RunConfig {
  std::string domain_source;  // "builtin:<name>" or a resolved path
  DomainBundle bundle;
  std::uint64_t seed = 0;
  std::string out = "out";
  PlannerParams planner;
  PlanSection plan;
  MineSection mine;
  FilterSection filter;
  ExportSection export_;
  BenchSection bench;
  /// FNV-1a over the run config text followed by the domain text.
  std::string config_hash;
};

/// Reads a run configuration. Missing or unreadable config and domain files
/// are configuration errors; so are unknown keys and out-of-range values.
RunConfig LoadRunConfig(const std::string& path, const Overrides& overrides);
RunConfig ParseRunConfig(const std::string& text, const std::string& base_dir,
                         const Overrides& overrides);

/// Base seeds of the problem suite and of the planner runs; problem i is
/// planned with DeriveSeed(PlannerRunSeed(seed), i).
std::uint64_t ProblemSuiteSeed(std::uint64_t seed);
std::uint64_t PlannerRunSeed(std::uint64_t seed);

}  // namespace skillrrt::cli
