// Preprocessing throughput: spline resampling to the working rate plus
// per-axis normalization, and the 21-channel feature stack on top.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstddef>

#include "sigverify/preprocess.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/time_functions.hpp"
#include "sigverify/types.hpp"

namespace {

// A wandering pen track with slightly uneven timestamps, like hardware
// delivers them.
sigverify::RawSignature wandering_track(std::size_t samples, std::uint64_t seed) {
  sigverify::Rng rng(seed);
  sigverify::RawSignature sig;
  sig.samples.reserve(samples);
  double t = 0.0, x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    t += 0.01 * (1.0 + 0.2 * rng.uniform(-1.0, 1.0));
    x += rng.uniform(-1.0, 1.0);
    y += rng.uniform(-1.0, 1.0);
    sigverify::SamplePoint p;
    p.t = t;
    p.x = x;
    p.y = y;
    p.pressure = 0.5;
    sig.samples.push_back(p);
  }
  return sig;
}

void BM_Preprocess(benchmark::State& state) {
  const auto raw = wandering_track(static_cast<std::size_t>(state.range(0)), 17);
  sigverify::PreprocessOptions opt;
  opt.rate_hz = 200.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sigverify::preprocess(raw, opt));
}

void BM_TimeFunctions(benchmark::State& state) {
  const auto raw = wandering_track(static_cast<std::size_t>(state.range(0)), 17);
  const auto processed = sigverify::preprocess(raw);
  for (auto _ : state)
    benchmark::DoNotOptimize(sigverify::compute_time_functions(processed));
  state.counters["grid_len"] = static_cast<double>(processed.length());
}

}  // namespace

BENCHMARK(BM_Preprocess)->Arg(250)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TimeFunctions)->Arg(250)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
