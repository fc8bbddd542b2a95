#include "witsopt/witsopt.hpp"

#include <benchmark/benchmark.h>

using namespace witsopt;

namespace {

const ModelParams kRef{0.8, 0.1};

void BM_BruteForce(benchmark::State& state) {
  BruteForceOptions o;
  o.resolution = 1.0 / static_cast<double>(state.range(0));
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_min(0.3, kRef, o).estimation);
}
BENCHMARK(BM_BruteForce)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_TwoPointCosts(benchmark::State& state) {
  double a = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(two_point_costs(a, kRef).estimation);
    a = a > 1.5 ? 0.1 : a + 0.01;
  }
}
BENCHMARK(BM_TwoPointCosts);

void BM_ClosedFormPoint(benchmark::State& state) {
  const CorrelationPoint p{0.3, -0.6, 0.2, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimation_cost(p, 0.3, kRef));
    benchmark::DoNotOptimize(info_constraint_value(p, 0.3, kRef));
  }
}
BENCHMARK(BM_ClosedFormPoint);

void BM_LogDetPoint(benchmark::State& state) {
  const CorrelationPoint p{0.3, -0.6, 0.2, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimation_cost_via_schur(p, 0.3, kRef));
    benchmark::DoNotOptimize(info_constraint_via_mi(p, 0.3, kRef));
  }
}
BENCHMARK(BM_LogDetPoint);

void BM_Simulate(benchmark::State& state) {
  SimConfig c;
  c.samples = static_cast<std::uint64_t>(state.range(0));
  c.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(TimeShareStrategy{0.3}, kRef, c).estimation_hat);
    ++c.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
