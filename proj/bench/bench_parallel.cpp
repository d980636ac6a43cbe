#include <benchmark/benchmark.h>

#include "wiplus/coexsim/coexsim.hpp"
#include "wiplus/core/window.hpp"
#include "wiplus/detect/detector.hpp"
#include "wiplus/io/config.hpp"

using namespace wiplus;

namespace {

const std::vector<SampleWindow>& windows() {
  static const std::vector<SampleWindow> w = [] {
    io::SynthConfig cfg = io::synth_config_from_preset("exp1-csat80-duty33");
    cfg.duration_s = 16.0;
    const auto trace = io::run_synth(cfg);
    return detect::split_window(snapshots_to_window(trace.snapshots), 2000);
  }();
  return w;
}

coexsim::MonteCarloConfig mc_config(benchmark::State& state) {
  coexsim::MonteCarloConfig c;
  c.n_drops = static_cast<std::size_t>(state.range(0));
  return c;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const auto c = mc_config(state);
  for (auto _ : state) benchmark::DoNotOptimize(coexsim::run_monte_carlo_serial(c).rmse_pp);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const auto c = mc_config(state);
  for (auto _ : state) benchmark::DoNotOptimize(coexsim::run_monte_carlo(c).rmse_pp);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DetectBatchSerial(benchmark::State& state) {
  const auto& w = windows();
  for (auto _ : state) benchmark::DoNotOptimize(detect::detect_batch_serial(w, 1).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}

void BM_DetectBatchParallel(benchmark::State& state) {
  const auto& w = windows();
  for (auto _ : state) benchmark::DoNotOptimize(detect::detect_batch(w, 1).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectBatchParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
