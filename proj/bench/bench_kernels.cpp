// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "collide1d/elastic.hpp"
#include "collide1d/event_sim.hpp"
#include "collide1d/farm.hpp"

namespace {

using namespace collide1d;

const DistributionSpec kNormal = DistributionSpec::normal(0, 1);

void BM_OrderStatsSerial(benchmark::State& state) {
  const auto e = make_ensemble(kNormal, kNormal, static_cast<std::size_t>(state.range(0)), {1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(order_stats(e).system_final);
  state.SetComplexityN(state.range(0));
}

void BM_OrderStatsOmp(benchmark::State& state) {
  const auto e = make_ensemble(kNormal, kNormal, static_cast<std::size_t>(state.range(0)), {1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(order_stats_omp(e).system_final);
  state.SetComplexityN(state.range(0));
}

void elastic_trial(std::uint64_t k, std::span<double> row) {
  const auto e = make_ensemble(kNormal, kNormal, 50, {7, k});
  row[0] = order_stats(e).system_final;
}

void BM_FarmSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(farm_trials_serial(0, 2000, 1, elastic_trial).data());
}

void BM_FarmOmp(benchmark::State& state) {
  const int workers = resolve_workers();
  for (auto _ : state) benchmark::DoNotOptimize(farm_trials(0, 2000, 1, elastic_trial, workers).data());
}

void BM_Simulate(benchmark::State& state) {
  const auto e = make_ensemble(kNormal, kNormal, static_cast<std::size_t>(state.range(0)), {3, 0});
  SimOptions opts;
  opts.record_events = false;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(e, {0.001, 0.0}, opts).system_final);
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_OrderStatsSerial)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_OrderStatsOmp)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_FarmSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FarmOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->RangeMultiplier(2)->Range(50, 400)->Complexity();

BENCHMARK_MAIN();
