// Serial reference vs OpenMP vs FFT kernels. Run with OMP_NUM_THREADS set to
// compare thread counts; the FFT path wins once the template is large.

#include <benchmark/benchmark.h>

#include "decaylab/kernels.hpp"
#include "decaylab/rng.hpp"

using namespace decaylab;

namespace {

Grid random_grid(int rows, int cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Grid g(rows, cols);
  for (double& v : g.values) v = rng.uniform();
  return g;
}

// Args: region side, template side.
void ncc_args(benchmark::internal::Benchmark* b) {
  for (auto [r, t] : {std::pair{48, 8}, std::pair{96, 32}, std::pair{192, 64}}) b->Args({r, t});
}

template <Grid (*Fn)(const Grid&, const Grid&)>
void BM_ncc(benchmark::State& state) {
  const Grid region = random_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
  const Grid tmpl = random_grid(static_cast<int>(state.range(1)), static_cast<int>(state.range(1)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(region, tmpl));
}

template <kernels::Tensor3 (*Fn)(const kernels::Tensor3&, std::span<const double>, int, int)>
void BM_conv(benchmark::State& state) {
  const int in_ch = static_cast<int>(state.range(0)), out_ch = static_cast<int>(state.range(1));
  kernels::Tensor3 in(in_ch, 30, 30);
  SplitMix64 rng(3);
  for (double& v : in.values) v = rng.normal();
  std::vector<double> w(static_cast<std::size_t>(out_ch) * in_ch * 9);
  for (double& v : w) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(in, w, out_ch, 3));
}

}  // namespace

BENCHMARK(BM_ncc<kernels::ncc_map_reference>)->Apply(ncc_args)->Name("ncc/reference");
BENCHMARK(BM_ncc<kernels::ncc_map_parallel>)->Apply(ncc_args)->Name("ncc/openmp");
BENCHMARK(BM_ncc<kernels::ncc_map_fft>)->Apply(ncc_args)->Name("ncc/fft");
BENCHMARK(BM_conv<kernels::conv2d_valid_reference>)->Args({1, 8})->Args({8, 16})->Name("conv/reference");
BENCHMARK(BM_conv<kernels::conv2d_valid_parallel>)->Args({1, 8})->Args({8, 16})->Name("conv/openmp");

BENCHMARK_MAIN();
