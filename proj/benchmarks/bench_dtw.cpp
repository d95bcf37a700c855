// How matching cost scales with sequence length and band width. Sequences
// are synthetic but sized like real captures: a 21-channel signature at
// 200 Hz runs 400-2000 samples, reduced to 5-8 channels before matching.

#include <benchmark/benchmark.h>

#include <cstddef>

#include "sigverify/matcher.hpp"
#include "sigverify/matrix.hpp"
#include "sigverify/rng.hpp"

namespace {

sigverify::Matrix random_sequence(std::size_t rows, std::size_t cols,
                                  std::uint64_t seed) {
  sigverify::Rng rng(seed);
  sigverify::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(-2.0, 2.0);
  return m;
}

void BM_DtwUnconstrained(benchmark::State& state) {
  const auto cols = static_cast<std::size_t>(state.range(0));
  const auto a = random_sequence(7, cols, 11);
  const auto b = random_sequence(7, cols + cols / 10, 12);
  for (auto _ : state)
    benchmark::DoNotOptimize(sigverify::dtw_distance(a, b));
  state.SetComplexityN(state.range(0));
}

void BM_DtwBanded(benchmark::State& state) {
  const auto cols = static_cast<std::size_t>(state.range(0));
  const auto a = random_sequence(7, cols, 11);
  const auto b = random_sequence(7, cols + cols / 10, 12);
  sigverify::DtwOptions opt;
  opt.band = static_cast<std::size_t>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(sigverify::dtw_distance(a, b, opt));
}

}  // namespace

BENCHMARK(BM_DtwUnconstrained)->Arg(200)->Arg(400)->Arg(800)->Arg(1600)
    ->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DtwBanded)
    ->Args({800, 32})->Args({800, 120})->Args({1600, 32})->Args({1600, 120})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
