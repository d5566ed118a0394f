// Parallel vs serial reference kernels on one E-step / M-step / full fit.
// Args: n, d, k.

#include <benchmark/benchmark.h>

#include "clustab/gmm.hpp"
#include "clustab/synthetic.hpp"

namespace {

using namespace clustab;

struct Fixture {
  synthetic::LabeledData blobs;
  gmm::MixtureModel model;
  gmm::Responsibilities resp;
};

Fixture make(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  Fixture f{synthetic::separated_blobs(n, d, k, 10.0, 1.0, 7), {}, {}};
  gmm::GmmConfig cfg;
  cfg.k = k;
  cfg.max_iter = 1;
  f.model = gmm::fit(f.blobs.data, cfg).model;
  f.resp = gmm::e_step(f.model, f.blobs.data).resp;
  return f;
}

void e_step(benchmark::State& state, gmm::KernelPath path) {
  const auto f = make(state);
  for (auto _ : state) benchmark::DoNotOptimize(gmm::e_step(f.model, f.blobs.data, path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void m_step(benchmark::State& state, gmm::KernelPath path) {
  const auto f = make(state);
  for (auto _ : state) benchmark::DoNotOptimize(gmm::m_step(f.resp, f.blobs.data, 1e-6, path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void full_fit(benchmark::State& state, gmm::KernelPath path) {
  const auto f = make(state);
  gmm::GmmConfig cfg;
  cfg.k = f.model.k;
  for (auto _ : state) benchmark::DoNotOptimize(gmm::fit(f.blobs.data, cfg, path));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({2000, 64, 4})->Args({5000, 128, 8})->Args({20000, 384, 20});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_CAPTURE(e_step, parallel, gmm::KernelPath::Parallel)->Apply(shapes);
BENCHMARK_CAPTURE(e_step, reference, gmm::KernelPath::Reference)->Apply(shapes);
BENCHMARK_CAPTURE(m_step, parallel, gmm::KernelPath::Parallel)->Apply(shapes);
BENCHMARK_CAPTURE(m_step, reference, gmm::KernelPath::Reference)->Apply(shapes);
BENCHMARK_CAPTURE(full_fit, parallel, gmm::KernelPath::Parallel)->Args({2000, 64, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(full_fit, reference, gmm::KernelPath::Reference)->Args({2000, 64, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
