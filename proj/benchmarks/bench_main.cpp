#include <benchmark/benchmark.h>

#include <vector>

#include "asclens/attention.hpp"
#include "asclens/fixtures.hpp"
#include "asclens/gdv.hpp"
#include "asclens/probe.hpp"
#include "asclens/projection.hpp"
#include "asclens/rng.hpp"

using namespace asclens;

namespace {

Matrix noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_Gdv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  LabeledPointCloud cloud{noise(n, 768, 1), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) cloud.labels[i] = static_cast<int>(i % 4);
  for (auto _ : state) benchmark::DoNotOptimize(gdv(cloud));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gdv)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ClassicalMds(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dist = pairwise_distances(noise(n, 768, 2));
  for (auto _ : state) benchmark::DoNotOptimize(classical_mds(dist));
}
BENCHMARK(BM_ClassicalMds)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix points = noise(n, 64, 3);
  TsneParams params;
  params.perplexity = 30.0;
  for (auto _ : state) benchmark::DoNotOptimize(tsne(points, params));
}
BENCHMARK(BM_Tsne)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Probe(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix features = noise(n, 768, 4);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % 4;
  for (auto _ : state) benchmark::DoNotOptimize(train_probe(features, labels));
}
BENCHMARK(BM_Probe)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_AttentionSweep(benchmark::State& state) {
  FixtureSpec spec;
  spec.sentences_per_class = 250;
  spec.hidden_size = 8;
  spec.n_layers = 12;
  spec.n_heads = 12;
  const auto archive = synth_archive(spec);
  const std::vector<TokenRole> roles(kDefaultRoles.begin(), kDefaultRoles.end());
  for (auto _ : state) benchmark::DoNotOptimize(attention_sweep(archive, roles));
}
BENCHMARK(BM_AttentionSweep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
