#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "opeval/estimators.hpp"

using namespace opeval;

namespace {

void BM_AipwEstimate(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 10);
  PropensityModel pi = empirical_propensities(f.population.dataset);
  for (auto _ : state) {
    EstimateReport report = aipw_estimate(
        f.population.dataset, pi, f.population.predictions, f.policy);
    benchmark::DoNotOptimize(report.point);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AipwEstimate)->Arg(1000)->Arg(10000);

void BM_IpwEstimate(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 10);
  PropensityModel pi = empirical_propensities(f.population.dataset);
  for (auto _ : state) {
    EstimateReport report = ipw_estimate(f.population.dataset, pi, f.policy);
    benchmark::DoNotOptimize(report.point);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IpwEstimate)->Arg(1000)->Arg(10000);

void BM_AipwlEstimate(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 10);
  for (auto _ : state) {
    EstimateReport report =
        aipwl_estimate(f.population.dataset, f.population.predictions,
                       f.policy);
    benchmark::DoNotOptimize(report.point);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AipwlEstimate)->Arg(1000)->Arg(10000);

void BM_EstimatePropensities(benchmark::State& state) {
  bench::Fixture f = bench::make_fixture(state.range(0), 5);
  for (auto _ : state) {
    PropensityModel model = estimate_propensities(f.population.dataset, {});
    benchmark::DoNotOptimize(model.conditional.data());
  }
}
BENCHMARK(BM_EstimatePropensities)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
