#include <benchmark/benchmark.h>

#include "bench_common.hpp"

using namespace opeval;

namespace {

void BM_OfflineAssign(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), state.range(1));
  AssignmentProblem problem = build_assignment_problem(
      f.population.dataset, f.population.predictions);
  for (auto _ : state) {
    PolicyAssignment policy = offline_assign(f.population.dataset, problem);
    benchmark::DoNotOptimize(policy.case_location.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OfflineAssign)
    ->Args({200, 5})
    ->Args({1000, 10})
    ->Args({2000, 10})
    ->Unit(benchmark::kMillisecond);

void BM_OnlineAssign(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 10);
  AssignmentProblem problem = build_assignment_problem(
      f.population.dataset, f.population.predictions);
  for (auto _ : state) {
    PolicyAssignment policy = online_assign(f.population.dataset, problem);
    benchmark::DoNotOptimize(policy.case_location.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OnlineAssign)->Arg(1000)->Arg(10000);

}  // namespace
