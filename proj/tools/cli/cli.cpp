#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "skillrrt/error.hpp"
#include "skillrrt/io.hpp"

namespace skillrrt::cli {

namespace {

void SetupLogging() {
  static bool done = false;
  if (!done) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("skillrrt"));
    spdlog::set_pattern("[%l] %v");
    done = true;
  }
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SKILLRRT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int RunCli(const std::vector<std::string>& args) {
  SetupLogging();
  CLI::App app{"Skill-RRT planning, connector mining, replay filtering and dataset export", "skillrrt"};
  app.set_version_flag("--version", ToolVersion());

  std::string command;
  std::string config_path;
  Overrides ov;
  std::uint64_t seed = 0;
  std::string out;
  int batch_size = 0, n_max = 0;
  double m = 0.0;
  std::size_t replays = 0;

  app.add_option("command", command, "plan | mine | filter | export | bench")
      ->required()
      ->check(CLI::IsMember({"plan", "mine", "filter", "export", "bench"}));
  app.add_option("--config", config_path, "run configuration file")->required();
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_batch = app.add_option("--batch-size", batch_size, "planner batch size")->check(CLI::PositiveNumber);
  auto* o_nmax = app.add_option("--n-max", n_max, "planner iteration budget")->check(CLI::PositiveNumber);
  auto* o_m = app.add_option("--m", m, "replay success threshold")->check(CLI::Range(0.0, 1.0));
  auto* o_rep = app.add_option("--replays", replays, "replays per plan")->check(CLI::PositiveNumber);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (*o_seed) ov.seed = seed;
  if (*o_out) ov.out = out;
  if (*o_batch) ov.batch_size = batch_size;
  if (*o_nmax) ov.n_max = n_max;
  if (*o_m) ov.m = m;
  if (*o_rep) ov.replays = replays;

  try {
    const RunConfig rc = LoadRunConfig(config_path, ov);
    spdlog::info("{}: domain {} seed {} out {}", command, rc.domain_source, rc.seed, rc.out);
    if (command == "plan") CmdPlan(rc);
    if (command == "mine") CmdMine(rc);
    if (command == "filter") CmdFilter(rc);
    if (command == "export") CmdExport(rc);
    if (command == "bench") CmdBench(rc);
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("I/O error: {}", e.what());
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace skillrrt::cli
