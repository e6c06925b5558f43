#include <benchmark/benchmark.h>

#include "bench_common.hpp"

using namespace opeval;

namespace {

void BM_MonteCarlo(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 10);
  const std::size_t replications = state.range(1);
  for (auto _ : state) {
    MonteCarloResult result = monte_carlo(
        f.population.dataset, f.population.table, f.population.predictions,
        f.policy, f.population.pi, replications, 7);
    benchmark::DoNotOptimize(result.aipw.mean_point);
  }
  state.SetItemsProcessed(state.iterations() * replications);
}
BENCHMARK(BM_MonteCarlo)
    ->Args({500, 200})
    ->Args({2000, 2000})
    ->Unit(benchmark::kMillisecond);

void BM_EnumerateDesign(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 2, 99);
  for (auto _ : state) {
    DesignExpectation exact = enumerate_design(
        f.population.dataset, f.population.table, f.population.predictions,
        f.policy, f.population.pi);
    benchmark::DoNotOptimize(exact.aipw.mean);
  }
}
BENCHMARK(BM_EnumerateDesign)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_GeneratePopulation(benchmark::State& state) {
  SyntheticConfig config;
  config.n = state.range(0);
  config.k = 10;
  config.covariate_dim = 3;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = ++seed;
    SyntheticPopulation pop = generate_population(config);
    benchmark::DoNotOptimize(pop.table.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePopulation)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
