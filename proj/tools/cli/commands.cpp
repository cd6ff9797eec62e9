#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include "skillrrt/connector.hpp"
#include "skillrrt/error.hpp"
#include "skillrrt/filtering.hpp"
#include "skillrrt/io.hpp"
#include "skillrrt/problem.hpp"

namespace skillrrt::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFilterStream = 2;
constexpr std::uint64_t kExportStream = 3;

ArtifactMeta Meta(const RunConfig& rc) { return {rc.seed, rc.config_hash, ToolVersion()}; }

std::string MetaColumns(const RunConfig& rc) {
  return std::to_string(rc.seed) + "," + rc.config_hash + "," + CsvField(ToolVersion());
}

constexpr const char* kMetaHeader = "seed,config_hash,tool_version";

void MakeDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string Seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

class Stopwatch {
 public:
  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<Problem> Suite(const RunConfig& rc, std::size_t count) {
  return GenerateProblems(rc.bundle.domain, count, ProblemSuiteSeed(rc.seed));
}

PlannerParams ParamsFor(const RunConfig& rc, std::size_t problem_index) {
  PlannerParams p = rc.planner;
  p.seed = DeriveSeed(PlannerRunSeed(rc.seed), problem_index);
  return p;
}

std::vector<fs::path> PlanFiles(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("plan directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  if (ec) throw IoError("cannot list '" + dir + "': " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

LoadedPlan LoadPlanFile(const fs::path& path) {
  try {
    return PlanFromJson(ReadTextFile(path.string()));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string PlanId(std::size_t problem_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%04zu", problem_index);
  return buf;
}

void CmdPlan(const RunConfig& rc) {
  const Domain& domain = rc.bundle.domain;
  const fs::path out(rc.out);
  const fs::path plans = out / "plans";
  MakeDir(plans);
  for (const auto& f : PlanFiles(plans.string())) fs::remove(f);

  const ConnectorSet connectors = rc.plan.connectors ? ConnectorSet::Scripted(domain) : ConnectorSet::Empty();
  const auto problems = Suite(rc, rc.plan.problems);
  const ArtifactMeta meta = Meta(rc);
  std::ostringstream csv;
  csv << "problem,plan_id,start_class,goal_class,solved,iterations,tree_size,steps,skill_steps,sim_steps,"
      << kMetaHeader << ",wall_time_s\n";
  std::size_t solved = 0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const Problem& pr = problems[i];
    const PlannerParams params = ParamsFor(rc, i);
    Stopwatch sw;
    SkillRrt planner(domain, connectors, params);
    const PlanResult r = params.batch_size > 1 ? planner.SolveBatch(pr.s0, pr.goal) : planner.Solve(pr.s0, pr.goal);
    const double wall = sw.Elapsed();
    const std::string id = PlanId(i);
    std::size_t steps = 0, skill_steps = 0;
    if (r.plan) {
      ++solved;
      steps = r.plan->steps.size();
      skill_steps = r.plan->skill_steps();
      WriteTextFile((plans / (id + ".json")).string(), PlanToJson(*r.plan, id, meta));
    }
    spdlog::debug("problem {}: solved={} iterations={} tree={}", i, r.plan.has_value(), r.iterations,
                  r.tree_size);
    csv << i << "," << id << "," << pr.start_class << "," << pr.goal_class << "," << (r.plan ? 1 : 0)
        << "," << r.iterations << "," << r.tree_size << "," << steps << "," << skill_steps << ","
        << r.sim_steps << "," << MetaColumns(rc) << "," << Seconds(wall) << "\n";
  }
  WriteTextFile((out / "plan_summary.csv").string(), csv.str());
  spdlog::info("plan: solved {}/{} problems", solved, problems.size());
}

void CmdMine(const RunConfig& rc) {
  const fs::path out(rc.out);
  MakeDir(out);
  PlannerParams params = rc.planner;
  params.seed = PlannerRunSeed(rc.seed);
  const auto problems = Suite(rc, rc.mine.problems);
  const MiningSummary summary = MineConnectorProblems(problems, rc.bundle.domain, params);
  const ArtifactMeta meta = Meta(rc);
  std::string lines;
  for (const auto& p : summary.problems) lines += ConnectorProblemToJsonLine(p, meta) + "\n";
  WriteTextFile((out / "connector_problems.jsonl").string(), lines);
  std::ostringstream csv;
  csv << "problems,solved,unsolved,teleport_nodes,triplets," << kMetaHeader << "\n";
  csv << problems.size() << "," << summary.solved << "," << summary.unsolved << "," << summary.teleport_nodes
      << "," << summary.problems.size() << "," << MetaColumns(rc) << "\n";
  WriteTextFile((out / "mine_summary.csv").string(), csv.str());
  spdlog::info("mine: {} triplets from {} solved problems", summary.problems.size(), summary.solved);
}

void CmdFilter(const RunConfig& rc) {
  const fs::path out(rc.out);
  const fs::path reports_dir = out / "reports";
  MakeDir(reports_dir);
  const auto files = PlanFiles(rc.filter.plans_dir);
  const ArtifactMeta meta = Meta(rc);
  const std::uint64_t base = DeriveSeed(rc.seed, kFilterStream);

  std::vector<ReplayReport> reports;
  std::vector<std::size_t> steps;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const LoadedPlan lp = LoadPlanFile(files[k]);
    ReplayReport r = ReplayPlan(lp.plan, rc.bundle.domain, rc.bundle.noise, rc.filter.replays,
                                DeriveSeed(base, k), lp.id);
    WriteTextFile((reports_dir / (lp.id + ".json")).string(), ReplayReportToJson(r, meta));
    spdlog::debug("filter: {} success rate {}", lp.id, r.success_rate);
    steps.push_back(lp.plan.steps.size());
    reports.push_back(std::move(r));
  }
  const auto kept = FilterPlans(reports, rc.filter.m);
  WriteTextFile((out / "manifest.json").string(), ManifestToJson(kept, rc.filter.m, rc.filter.replays, meta));

  std::ostringstream csv;
  csv << "plan_id,success_rate,steps,n_replays,n_success,kept," << kMetaHeader << "\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    csv << CsvField(r.plan_id) << "," << FormatDouble(r.success_rate) << "," << steps[k] << "," << r.n_replays
        << "," << r.n_success << "," << (r.success_rate > rc.filter.m ? 1 : 0) << "," << MetaColumns(rc) << "\n";
  }
  WriteTextFile((out / "filter_summary.csv").string(), csv.str());
  spdlog::info("filter: kept {}/{} plans at m={}", kept.size(), reports.size(), rc.filter.m);
}

void CmdExport(const RunConfig& rc) {
  const fs::path out(rc.out);
  MakeDir(out);
  const auto ids = ManifestFromJson(ReadTextFile(rc.export_.manifest));
  std::vector<NamedPlan> plans;
  for (const auto& id : ids) {
    const LoadedPlan lp = LoadPlanFile(fs::path(rc.export_.plans_dir) / (id + ".json"));
    plans.push_back({lp.id, lp.plan});
  }
  const ExportResult res = ExportDataset(plans, rc.bundle.domain, rc.bundle.noise, rc.export_.trajectories,
                                         DeriveSeed(rc.seed, kExportStream));
  const ArtifactMeta meta = Meta(rc);
  std::string lines;
  for (const auto& r : res.records) lines += DatasetRecordToJsonLine(r, meta) + "\n";
  WriteTextFile((out / "dataset.jsonl").string(), lines);

  std::ostringstream csv;
  csv << "plan_id,success_rate,steps,requested,collected,attempts,shortfall,records," << kMetaHeader << "\n";
  std::size_t shortfall = 0;
  for (std::size_t k = 0; k < res.summaries.size(); ++k) {
    const auto& s = res.summaries[k];
    const std::size_t n_steps = plans[k].plan.steps.size();
    const double rate = s.attempts ? static_cast<double>(s.collected) / static_cast<double>(s.attempts) : 0.0;
    csv << CsvField(s.plan_id) << "," << FormatDouble(rate) << "," << n_steps << "," << s.requested << ","
        << s.collected << "," << s.attempts << "," << s.shortfall << "," << s.collected * n_steps << ","
        << MetaColumns(rc) << "\n";
    if (s.shortfall) spdlog::warn("export: {} short by {} trajectories", s.plan_id, s.shortfall);
    shortfall += s.shortfall;
  }
  WriteTextFile((out / "export_summary.csv").string(), csv.str());
  spdlog::info("export: {} records from {} plans, total shortfall {}", res.records.size(), plans.size(),
               shortfall);
}

void CmdBench(const RunConfig& rc) {
  const fs::path out(rc.out);
  MakeDir(out);
  const Domain& domain = rc.bundle.domain;
  const auto problems = Suite(rc, rc.bench.problems);
  const ConnectorSet scripted = ConnectorSet::Scripted(domain);

  struct Method {
    const char* name;
    std::function<PlanResult(const Problem&, const PlannerParams&)> run;
  };
  const std::vector<Method> methods = {
      {"skill_rrt",
       [&](const Problem& p, const PlannerParams& params) {
         return SkillRrt(domain, scripted, params).Solve(p.s0, p.goal);
       }},
      {"skill_rrt_batch",
       [&](const Problem& p, PlannerParams params) {
         params.batch_size = rc.bench.batch_size;
         return SkillRrt(domain, scripted, params).SolveBatch(p.s0, p.goal);
       }},
      {"no_connector",
       [&](const Problem& p, PlannerParams params) {
         params.forbid_teleport = true;
         return SkillRrt(domain, ConnectorSet::Empty(), params).Solve(p.s0, p.goal);
       }},
      {"flat_random",
       [&](const Problem& p, const PlannerParams& params) {
         return FlatRandomSolve(p.s0, p.goal, domain, params, rc.bench.flat_horizon);
       }},
  };

  std::ostringstream csv;
  csv << "method,problems,solved,success_rate,mean_iterations,n_max," << kMetaHeader << ",mean_wall_time_s\n";
  for (const auto& m : methods) {
    std::size_t solved = 0;
    double iterations = 0.0, wall = 0.0;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      Stopwatch sw;
      const PlanResult r = m.run(problems[i], ParamsFor(rc, i));
      wall += sw.Elapsed();
      iterations += r.iterations;
      if (r.plan) ++solved;
    }
    const double n = problems.empty() ? 1.0 : static_cast<double>(problems.size());
    csv << m.name << "," << problems.size() << "," << solved << "," << FormatDouble(solved / n) << ","
        << FormatDouble(iterations / n) << "," << rc.planner.n_max << "," << MetaColumns(rc) << ","
        << Seconds(wall / n) << "\n";
    spdlog::info("bench: {} solved {}/{}", m.name, solved, problems.size());
  }
  WriteTextFile((out / "bench.csv").string(), csv.str());
}

}  // namespace skillrrt::cli
