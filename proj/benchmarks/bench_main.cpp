#include <benchmark/benchmark.h>

#include "mlfd/datasets.h"
#include "mlfd/distribution.h"
#include "mlfd/inference.h"
#include "mlfd/queue_sim.h"
#include "mlfd/special_functions.h"

using namespace mlfd;

static void BM_Mlf(benchmark::State& state) {
  const double z = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(special::log_mlf(0.7, 1.3, z));
}
BENCHMARK(BM_Mlf)->Arg(1)->Arg(10)->Arg(100)->Arg(1000);

static void BM_PmfTable(benchmark::State& state) {
  const MlfdParams p(5.0, 0.5, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(pmf_table(p, static_cast<std::uint64_t>(state.range(0))));
}
BENCHMARK(BM_PmfTable)->Arg(20)->Arg(200);

static void BM_Variance(benchmark::State& state) {
  const MlfdParams p(8.0, 0.2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(variance(p));
}
BENCHMARK(BM_Variance);

static void BM_Loglik(benchmark::State& state) {
  const auto data = data::embedded_fixture("lundberg");
  const MlfdParams p(1.3, 0.46, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(inference::loglik(p, data));
}
BENCHMARK(BM_Loglik);

static void BM_FitFull(benchmark::State& state) {
  const auto data = data::embedded_fixture("taylor");
  inference::FitOptions opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(inference::fit(data, inference::ModelKind::Full, opts));
}
BENCHMARK(BM_FitFull)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Simulate(benchmark::State& state) {
  queue::QueueConfig c;
  c.arrival_rate = 4.0;
  c.pressure = 2;
  c.measure_time = 1e4;
  for (auto _ : state) benchmark::DoNotOptimize(queue::simulate(c));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
