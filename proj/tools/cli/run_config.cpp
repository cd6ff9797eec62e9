#include "run_config.hpp"

#include <filesystem>

#include "skillrrt/config.hpp"
#include "skillrrt/error.hpp"
#include "skillrrt/io.hpp"

namespace skillrrt::cli {

namespace fs = std::filesystem;
using config::AllowKeys;
using config::Value;

namespace {

std::size_t Count(const Value& v, std::size_t min) {
  const std::int64_t n = v.as_int();
  if (n < static_cast<std::int64_t>(min)) v.Fail("must be >= " + std::to_string(min));
  return static_cast<std::size_t>(n);
}

std::string ReadConfigFile(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " not found: " + path);
  }
  try {
    return ReadTextFile(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string(what) + " unreadable: " + path);
  }
}

}  // namespace

std::uint64_t ProblemSuiteSeed(std::uint64_t seed) { return DeriveSeed(seed, 0); }
std::uint64_t PlannerRunSeed(std::uint64_t seed) { return DeriveSeed(seed, 1); }

RunConfig ParseRunConfig(const std::string& text, const std::string& base_dir,
                         const Overrides& overrides) {
  const Value root = config::Parse(text);
  AllowKeys(root, {"domain", "seed", "out", "noise", "plan", "mine", "filter", "export", "bench"});
  RunConfig rc;

  const std::string domain = root.at("domain").as_string();
  std::string domain_text;
  if (domain.rfind("builtin:", 0) == 0) {
    rc.domain_source = domain;
    try {
      domain_text = BuiltinDomainText(domain.substr(8));
    } catch (const ConfigError&) {
      root.at("domain").Fail("unknown built-in domain '" + domain.substr(8) + "'");
    }
  } else {
    fs::path p(domain);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    rc.domain_source = p.string();
    domain_text = ReadConfigFile(rc.domain_source, "domain file");
  }
  rc.bundle = LoadDomainText(domain_text);
  rc.config_hash = ConfigHash(text + domain_text);

  rc.seed = root.contains("seed") ? root.at("seed").as_uint() : 0;
  rc.out = root.string_or("out", "out");
  if (root.contains("noise")) rc.bundle.noise = LoadNoise(root.at("noise"), rc.bundle.noise);

  PlannerParams& pp = rc.planner;
  if (root.contains("plan")) {
    const Value& t = root.at("plan");
    AllowKeys(t, {"problems", "n_max", "p_g", "delta_obj", "delta_goal", "alpha", "batch_size",
                  "connectors"});
    if (t.contains("problems")) rc.plan.problems = Count(t.at("problems"), 0);
    pp.n_max = static_cast<int>(t.int_or("n_max", pp.n_max));
    pp.p_g = t.number_or("p_g", pp.p_g);
    pp.delta_obj = t.number_or("delta_obj", pp.delta_obj);
    pp.delta_goal = t.number_or("delta_goal", pp.delta_goal);
    pp.alpha = t.number_or("alpha", pp.alpha);
    pp.batch_size = static_cast<int>(t.int_or("batch_size", pp.batch_size));
    rc.plan.connectors = t.bool_or("connectors", rc.plan.connectors);
  }
  if (root.contains("mine")) {
    const Value& t = root.at("mine");
    AllowKeys(t, {"problems"});
    if (t.contains("problems")) rc.mine.problems = Count(t.at("problems"), 0);
  }
  if (root.contains("filter")) {
    const Value& t = root.at("filter");
    AllowKeys(t, {"plans", "replays", "m"});
    rc.filter.plans_dir = t.string_or("plans", "");
    if (t.contains("replays")) rc.filter.replays = Count(t.at("replays"), 1);
    rc.filter.m = t.number_or("m", rc.filter.m);
  }
  if (root.contains("export")) {
    const Value& t = root.at("export");
    AllowKeys(t, {"plans", "manifest", "trajectories"});
    rc.export_.plans_dir = t.string_or("plans", "");
    rc.export_.manifest = t.string_or("manifest", "");
    if (t.contains("trajectories")) rc.export_.trajectories = Count(t.at("trajectories"), 1);
  }
  if (root.contains("bench")) {
    const Value& t = root.at("bench");
    AllowKeys(t, {"problems", "batch_size", "flat_horizon"});
    if (t.contains("problems")) rc.bench.problems = Count(t.at("problems"), 0);
    rc.bench.batch_size = static_cast<int>(t.int_or("batch_size", rc.bench.batch_size));
    rc.bench.flat_horizon = static_cast<int>(t.int_or("flat_horizon", rc.bench.flat_horizon));
  }

  if (overrides.seed) rc.seed = *overrides.seed;
  if (overrides.out) rc.out = *overrides.out;
  if (overrides.batch_size) {
    pp.batch_size = *overrides.batch_size;
    rc.bench.batch_size = *overrides.batch_size;
  }
  if (overrides.n_max) pp.n_max = *overrides.n_max;
  if (overrides.m) rc.filter.m = *overrides.m;
  if (overrides.replays) rc.filter.replays = *overrides.replays;

  if (rc.out.empty()) throw ConfigError("out must not be empty");
  if (rc.filter.plans_dir.empty()) rc.filter.plans_dir = (fs::path(rc.out) / "plans").string();
  if (rc.export_.plans_dir.empty()) rc.export_.plans_dir = (fs::path(rc.out) / "plans").string();
  if (rc.export_.manifest.empty()) rc.export_.manifest = (fs::path(rc.out) / "manifest.json").string();
  if (!(rc.filter.m >= 0.0 && rc.filter.m <= 1.0)) throw ConfigError("m must lie in [0, 1]");
  if (rc.filter.replays < 1) throw ConfigError("replays must be >= 1");
  if (rc.bench.batch_size < 1) throw ConfigError("bench batch_size must be >= 1");
  if (rc.bench.flat_horizon < 1) throw ConfigError("bench flat_horizon must be >= 1");
  try {
    pp.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("planner parameters: ") + e.what());
  }
  return rc;
}

RunConfig LoadRunConfig(const std::string& path, const Overrides& overrides) {
  const std::string text = ReadConfigFile(path, "config file");
  return ParseRunConfig(text, fs::path(path).parent_path().string(), overrides);
}

}  // namespace skillrrt::cli
