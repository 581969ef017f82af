#include <benchmark/benchmark.h>

#include "p2psched/model.hpp"
#include "p2psched/scenario.hpp"

// Sampling and reduction benchmarks at the scale the pipeline uses.

namespace {

p2psched::model::EvDistribution bench_dist() {
  p2psched::model::EvDistribution d;
  d.arrival_mean = 9.0;
  d.arrival_stddev = 1.5;
  d.departure_mean = 17.0;
  d.departure_stddev = 1.5;
  d.soc_mean = 0.45;
  d.soc_stddev = 0.10;
  d.seed = 7;
  return d;
}

void BM_SampleScenarios(benchmark::State& state) {
  const auto dist = bench_dist();
  for (auto _ : state) {
    auto sample =
        p2psched::scenario::sample_scenarios(dist, state.range(0), 24);
    benchmark::DoNotOptimize(sample.size());
  }
}
BENCHMARK(BM_SampleScenarios)->Arg(100)->Arg(1000);

void BM_KmeansReduce(benchmark::State& state) {
  const auto sample =
      p2psched::scenario::sample_scenarios(bench_dist(), state.range(0), 24);
  for (auto _ : state) {
    auto red = p2psched::scenario::kmeans_reduce(sample, 3, 42);
    benchmark::DoNotOptimize(red.inertia);
  }
}
BENCHMARK(BM_KmeansReduce)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
