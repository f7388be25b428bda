#include <benchmark/benchmark.h>

#include "dagvae/canonical.hpp"
#include "dagvae/decoder.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/enumerate.hpp"
#include "dagvae/gp.hpp"
#include "dagvae/rng.hpp"
#include "dagvae/trainer.hpp"

using namespace dagvae;

namespace {

ArchGraph seven_node() {
  return ArchGraph::from_edges({0, 2, 2, 2, 2, 3, 4},
                               {{0, 1}, {0, 2}, {0, 3}, {0, 5}, {1, 6}, {2, 6}, {3, 4}, {4, 6}, {5, 6}});
}

ModelConfig desk() {
  ModelConfig c;
  c.d_node = 32;
  c.d_z = 16;
  c.d_hidden = 64;
  c.predictor_widths = {64, 64, 32};
  return c;
}

void BM_Canonicalize(benchmark::State& state) {
  const ArchGraph g = seven_node();
  for (auto _ : state) benchmark::DoNotOptimize(canonical_hash(g));
}
BENCHMARK(BM_Canonicalize);

void BM_EnumerateMini(benchmark::State& state) {
  const auto spec = presets::mini();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_space(spec).size());
}
BENCHMARK(BM_EnumerateMini)->Unit(benchmark::kMillisecond);

void BM_ExpandSeven(benchmark::State& state) {
  const auto spec = presets::nb101_like();
  const ArchGraph g = seven_node();
  for (auto _ : state) benchmark::DoNotOptimize(expand_graph(g, 8, spec).size());
}
BENCHMARK(BM_ExpandSeven)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const Model m(presets::nb101_like(), desk(), 1);
  const ArchGraph g = seven_node();
  for (auto _ : state) benchmark::DoNotOptimize(encode(m, g).mean[0]);
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMicrosecond);

void BM_DecodeGreedy(benchmark::State& state) {
  const Model m(presets::nb101_like(), desk(), 1);
  Rng rng(2);
  const Vector z = standard_normal(desk().d_z, rng);
  for (auto _ : state) benchmark::DoNotOptimize(decode(m, z, DecodeMode::Greedy, rng).node_count());
}
BENCHMARK(BM_DecodeGreedy)->Unit(benchmark::kMicrosecond);

void BM_GraphLossStep(benchmark::State& state) {
  Model m(presets::nb101_like(), desk(), 1);
  Rng rng(3);
  const ArchGraph g = canonicalize(seven_node());
  const Vector eps = standard_normal(desk().d_z, rng);
  for (auto _ : state) {
    Tape t(&m.params());
    GraphLoss gl = graph_loss(t, m, g, eps, 0.005);
    t.backward(gl.total);
    benchmark::DoNotOptimize(gl.parts.total);
  }
}
BENCHMARK(BM_GraphLossStep)->Unit(benchmark::kMicrosecond);

void BM_GpFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
  Rng rng(4);
  std::vector<Vector> x;
  std::vector<double> y;
  for (int i = 0; i < n; ++i) {
    x.push_back(standard_normal(16, rng));
    y.push_back(x.back().sum() + 0.1 * rng.normal());
  }
  GpConfig c;
  c.m_inducing = m;
  c.hyper_iters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(GpSurrogate::fit(x, y, c).objective());
}
BENCHMARK(BM_GpFit)->Args({100, 500})->Args({500, 100})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
