// Cost of the greedy lognormal analysis as signatures get busier. The
// stroke count is the complexity detector's whole input, so this is the
// enrollment pipeline's dominant term.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sigverify/lognormal.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/synthesis.hpp"

namespace {

void BM_Decompose(benchmark::State& state) {
  const int strokes = static_cast<int>(state.range(0));
  const double rate = 200.0;

  sigverify::Rng rng(strokes);
  const auto arch = sigverify::make_archetype(rng, strokes);
  double t_end = 0.0;
  for (const auto& s : arch)
    t_end = std::max(t_end, s.t0 + std::exp(s.mu + 6.0 * s.sigma));
  std::vector<double> grid;
  for (std::size_t n = 0; n * (1.0 / rate) <= t_end; ++n)
    grid.push_back(static_cast<double>(n) / rate);
  const auto speed = sigverify::synthesize_profile(arch, grid);

  for (auto _ : state)
    benchmark::DoNotOptimize(sigverify::decompose(speed, 1.0 / rate));
  state.counters["samples"] = static_cast<double>(speed.size());
}

}  // namespace

BENCHMARK(BM_Decompose)->Arg(10)->Arg(25)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
