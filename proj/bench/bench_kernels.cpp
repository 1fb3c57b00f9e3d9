// SPDX-License-Identifier: Apache-2.0
// OpenMP kernels against their serial counterparts.
#include <benchmark/benchmark.h>

#include <numeric>

#include "doorinet/nn/architecture.hpp"
#include "doorinet/nn/network.hpp"
#include "doorinet/nn/parallel.hpp"
#include "doorinet/reference.hpp"
#include "support/oracles.hpp"

using namespace doorinet;
using namespace doorinet::nn;

namespace {

Architecture bench_arch(int model) {
  return model == 0 ? scaled_down(g_doorinet(), 4) : scaled_down(ag_doorinet(), 4);
}

const char* label(int model) { return model == 0 ? "G/4" : "AG/4"; }

void BM_predict_omp(benchmark::State& state) {
  const Architecture arch = bench_arch(static_cast<int>(state.range(0)));
  const Network<double> net = Network<double>::initialized(arch, 1);
  const auto windows = oracle::random_windows(static_cast<std::size_t>(state.range(1)), arch.window_len, 2);
  for (auto _ : state) benchmark::DoNotOptimize(predict(net, std::span<const WindowSample>(windows)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.SetLabel(label(static_cast<int>(state.range(0))));
}

void BM_predict_reference(benchmark::State& state) {
  const Architecture arch = bench_arch(static_cast<int>(state.range(0)));
  const Network<double> net = Network<double>::initialized(arch, 1);
  const auto windows = oracle::random_windows(static_cast<std::size_t>(state.range(1)), arch.window_len, 2);
  const std::span<const double> params(net.parameters().data(), net.parameters().size());
  for (auto _ : state) benchmark::DoNotOptimize(reference::predict(arch, params, windows));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.SetLabel(label(static_cast<int>(state.range(0))));
}

template <bool Parallel>
void BM_gradient(benchmark::State& state) {
  const Architecture arch = bench_arch(static_cast<int>(state.range(0)));
  const Network<float> net = Network<float>::initialized(arch, 1);
  const auto windows = oracle::random_windows(static_cast<std::size_t>(state.range(1)), arch.window_len, 3);
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<float> grad(net.parameter_count());
  for (auto _ : state) {
    const std::span<const WindowSample> w(windows);
    const double loss = Parallel ? batch_gradient(net, w, idx, 9, 16, true, std::span<float>(grad))
                                 : batch_gradient_serial(net, w, idx, 9, 16, true, std::span<float>(grad));
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.SetLabel(label(static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_predict_omp)->ArgsProduct({{0, 1}, {256}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_reference)->ArgsProduct({{0, 1}, {256}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gradient<true>)->Name("BM_gradient_omp")->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gradient<false>)->Name("BM_gradient_serial")->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
