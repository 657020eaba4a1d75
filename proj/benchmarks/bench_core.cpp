#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "powertrace/detect.hpp"
#include "powertrace/learn.hpp"
#include "powertrace/sigproc.hpp"
#include "powertrace/synth.hpp"
#include "powertrace/tcn.hpp"

namespace pt = powertrace;

namespace {

std::vector<double> steps(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(n);
  double level = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 100 == 0) level = 5.0 * noise(rng);
    x[i] = level + noise(rng);
  }
  return x;
}

}  // namespace

static void BM_Pelt(benchmark::State& state) {
  const auto x = steps(static_cast<std::size_t>(state.range(0)), 1);
  const double pen = 2.0 * std::log(static_cast<double>(x.size()));
  for (auto _ : state) benchmark::DoNotOptimize(pt::detect::pelt(x, pen));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Pelt)->RangeMultiplier(2)->Range(250, 8000)->Complexity();

static void BM_OptimalPartition(benchmark::State& state) {
  const auto x = steps(static_cast<std::size_t>(state.range(0)), 1);
  const double pen = 2.0 * std::log(static_cast<double>(x.size()));
  for (auto _ : state) benchmark::DoNotOptimize(pt::detect::optimal_partition_oracle(x, pen));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalPartition)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

static void BM_Sma(benchmark::State& state) {
  const auto x = steps(100000, 2);
  const auto w = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pt::sigproc::sma(x, w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Sma)->Arg(17)->Arg(50);

static void BM_ModifiedZscore(benchmark::State& state) {
  const auto x = steps(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(pt::detect::detect_anomalies(x));
}
BENCHMARK(BM_ModifiedZscore)->Arg(5000)->Arg(50000);

static void BM_SynthDrive(benchmark::State& state) {
  const auto meta = pt::synth::preset_meta("drive-noload", pt::telemetry::PowerConfig::Hybrid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pt::synth::generate_scenario(meta, {}, ++seed));
}
BENCHMARK(BM_SynthDrive)->Unit(benchmark::kMillisecond);

static void BM_TrainForest(benchmark::State& state) {
  std::vector<pt::telemetry::Run> runs;
  for (const char* name : {"static-25", "static-50", "static-75", "static-100"}) {
    auto meta = pt::synth::preset_meta(name, pt::telemetry::PowerConfig::BatteryOnly);
    meta.duration_s = 150.0;
    runs.push_back(pt::synth::generate_scenario(meta, {}, 7).run);
  }
  const auto ds = pt::learn::build_dataset(runs);
  const auto x = pt::learn::FeatureMatrix::from_rows(ds.rows);
  for (auto _ : state) benchmark::DoNotOptimize(pt::learn::train_rf(x, ds.labels, {}));
  state.counters["rows"] = static_cast<double>(x.rows());
}
BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);

static void BM_TcnForward(benchmark::State& state) {
  pt::tcn::TcnConfig config;  // seq 40, 64 filters, kernel 2, 2 blocks
  config.filters = static_cast<std::size_t>(state.range(0));
  auto model = pt::tcn::make_model(config);
  pt::tcn::init_uniform(model, 1);
  const auto window = steps(config.seq_len, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pt::tcn::tcn_forward(model, window));
}
BENCHMARK(BM_TcnForward)->Arg(16)->Arg(64);

static void BM_TcnForwardBackward(benchmark::State& state) {
  pt::tcn::TcnConfig config;
  auto model = pt::tcn::make_model(config);
  pt::tcn::init_uniform(model, 1);
  const auto window = steps(config.seq_len, 5);
  std::vector<double> grad(model.parameter_count());
  for (auto _ : state) {
    pt::tcn::ForwardTrace trace;
    const double y = pt::tcn::tcn_forward(model, window, trace);
    pt::tcn::tcn_backward(model, trace, 2.0 * y, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_TcnForwardBackward);

BENCHMARK_MAIN();
