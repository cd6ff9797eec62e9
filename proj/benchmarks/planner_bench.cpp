#include <benchmark/benchmark.h>

#include "skillrrt/domain_io.hpp"
#include "skillrrt/planner.hpp"
#include "skillrrt/problem.hpp"

using namespace skillrrt;

namespace {

const DomainBundle& Card() {
  static const DomainBundle b = LoadDomainText(BuiltinDomainText("cardflip2d"));
  return b;
}

void BM_SkillRrtSolve(benchmark::State& state) {
  const Domain& d = Card().domain;
  const auto problems = GenerateProblems(d, 16, 7);
  const ConnectorSet connectors = ConnectorSet::Scripted(d);
  std::size_t i = 0;
  for (auto _ : state) {
    const Problem& p = problems[i % problems.size()];
    PlannerParams params;
    params.seed = i++;
    params.batch_size = static_cast<int>(state.range(0));
    auto r = params.batch_size == 1 ? SkillRrtSolve(p.s0, p.goal, d, connectors, params)
                                    : SkillRrtBatchSolve(p.s0, p.goal, d, connectors, params);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SkillRrtSolve)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LazySolve(benchmark::State& state) {
  const Domain& d = Card().domain;
  const auto problems = GenerateProblems(d, 16, 7);
  std::size_t i = 0;
  for (auto _ : state) {
    const Problem& p = problems[i % problems.size()];
    PlannerParams params;
    params.seed = i++;
    benchmark::DoNotOptimize(SkillRrtSolve(p.s0, p.goal, d, ConnectorSet::Empty(), params));
  }
}
BENCHMARK(BM_LazySolve)->Unit(benchmark::kMillisecond);

}  // namespace
