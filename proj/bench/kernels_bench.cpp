#include <benchmark/benchmark.h>

#include <random>

#include "ucode/heatmap.hpp"
#include "ucode/romgrid.hpp"
#include "ucode/toyrom.hpp"
#include "ucode/uisa.hpp"

using namespace ucode;

namespace {

std::vector<std::uint64_t> random_words(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<std::uint64_t> words(n);
  for (auto& w : words) w = rng();
  return words;
}

void BM_RoundTrip(benchmark::State& state) {
  const auto words = random_words(1 << 18);
  for (auto _ : state) benchmark::DoNotOptimize(count_roundtrip_failures(words));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.size()));
}

void BM_RoundTripSerial(benchmark::State& state) {
  const auto words = random_words(1 << 18);
  for (auto _ : state) benchmark::DoNotOptimize(count_roundtrip_failures_serial(words));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.size()));
}

void BM_HeatmapDiv(benchmark::State& state) {
  const auto store = toy::build_toy_rom();
  const auto runner = make_runner(toy::default_state(), toy::div_context());
  for (auto _ : state) benchmark::DoNotOptimize(generate_raw_heatmap(store, runner, {0, kRomTriads}, "div"));
}

void BM_HeatmapDivSerial(benchmark::State& state) {
  const auto store = toy::build_toy_rom();
  const auto runner = make_runner(toy::default_state(), toy::div_context());
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_raw_heatmap_serial(store, runner, {0, kRomTriads}, "div"));
  }
}

void BM_RomgridPipeline(benchmark::State& state) {
  GridPipeline config;
  config.segment_boundaries = {64, 192};
  config.subarray_count = 4;
  config.order = {2, 0, 3, 1};
  const auto words = random_words(64 * 4);
  const auto grid = synthesize_grid(words, 256, config);
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(grid, config));
}

}  // namespace

BENCHMARK(BM_RoundTrip)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RoundTripSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HeatmapDiv)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HeatmapDivSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RomgridPipeline)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
