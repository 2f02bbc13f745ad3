#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sqa/heads.hpp"
#include "sqa/metrics.hpp"
#include "sqa/pitch.hpp"
#include "sqa/sgd.hpp"
#include "sqa/spectral.hpp"

namespace {

sqa::AudioClip tone(double seconds) {
  constexpr int sr = 16000;
  sqa::AudioClip clip{std::vector<double>(static_cast<std::size_t>(seconds * sr)), sr};
  for (std::size_t n = 0; n < clip.samples.size(); ++n) {
    const double t = static_cast<double>(n) / sr;
    clip.samples[n] = 0.4 * std::sin(2 * std::numbers::pi * (330.0 + 20.0 * std::sin(2 * std::numbers::pi * 5 * t)) * t);
  }
  return clip;
}

void BM_TrackPitch(benchmark::State& state) {
  const auto clip = tone(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sqa::track_pitch(clip));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrackPitch)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& state) {
  const auto clip = tone(5.0);
  sqa::SpectralOptions opt;
  opt.fft_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sqa::stft_amplitude_phase(clip, opt));
}
BENCHMARK(BM_Stft)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

std::pair<std::vector<double>, std::vector<double>> random_pair(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::round(4 * g(rng));
    y[i] = x[i] + g(rng);
  }
  return {x, y};
}

void BM_Srcc(benchmark::State& state) {
  const auto [x, y] = random_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sqa::srcc(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Srcc)->RangeMultiplier(8)->Range(64, 32768)->Complexity();

void BM_Ktau(benchmark::State& state) {
  const auto [x, y] = random_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sqa::ktau(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ktau)->RangeMultiplier(8)->Range(64, 32768)->Complexity();

// One epoch of head training on pooled 768-d embeddings.
void BM_TrainEpoch(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::vector<sqa::LabeledExample> train, val;
  for (int i = 0; i < 600; ++i) {
    sqa::PooledFeatures x;
    x.fixed.resize(768);
    for (auto& v : x.fixed) v = g(rng);
    (i < 500 ? train : val).push_back({x, 3.0 + 0.3 * x.fixed[0], "s" + std::to_string(i % 10)});
  }
  sqa::TrainConfig cfg;
  cfg.max_epochs = 1;
  const auto config = sqa::make_head_config(sqa::HeadVariant::plain, 768);
  for (auto _ : state) benchmark::DoNotOptimize(sqa::train_head(config, train, val, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
