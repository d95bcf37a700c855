#include "sigverify/lognormal.hpp"

#include "sigverify/errors.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sigverify/preprocess.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/synthesis.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace sigverify;

namespace {

double naive_velocity(const LogNormalStroke& s, double t) {
  const double tau = t - s.t0;
  if (tau <= 0.0) return 0.0;
  const double z = std::log(tau) - s.mu;
  return s.D / (s.sigma * tau * std::sqrt(2.0 * std::numbers::pi)) *
         std::exp(-z * z / (2.0 * s.sigma * s.sigma));
}

std::vector<double> uniform_grid(double t_end, double dt) {
  std::vector<double> g;
  for (double t = 0.0; t <= t_end + dt; t += dt) g.push_back(t);
  return g;
}

LogNormalStroke random_stroke(Rng& rng) {
  LogNormalStroke s;
  s.D = rng.uniform(0.3, 2.0);
  s.t0 = rng.uniform(0.0, 1.0);
  s.mu = rng.uniform(-2.5, -1.0);
  s.sigma = rng.uniform(0.1, 0.6);
  return s;
}

}  // namespace

TEST_CASE("velocity matches the textbook formula away from underflow") {
  Rng rng(101);
  for (int k = 0; k < 200; ++k) {
    const LogNormalStroke s = random_stroke(rng);
    const double t = s.t0 + rng.uniform(1e-4, 3.0);
    const double naive = naive_velocity(s, t);
    if (naive > 1e-290)
      REQUIRE(lognormal_velocity(s, t) == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("velocity is zero at and before onset") {
  const LogNormalStroke s{1.0, 0.5, -2.0, 0.2, 0.0, 0.0};
  REQUIRE(lognormal_velocity(s, 0.5) == 0.0);
  REQUIRE(lognormal_velocity(s, 0.1) == 0.0);
  REQUIRE(lognormal_velocity(s, -3.0) == 0.0);
}

TEST_CASE("analytic peak matches a dense grid search") {
  Rng rng(55);
  for (int k = 0; k < 20; ++k) {
    const LogNormalStroke s = random_stroke(rng);
    const double tp = stroke_peak_time(s);
    REQUIRE(tp == doctest::Approx(s.t0 + std::exp(s.mu - s.sigma * s.sigma))
                      .epsilon(1e-14));
    const double vp = stroke_peak_speed(s);
    REQUIRE(vp == doctest::Approx(lognormal_velocity(s, tp)).epsilon(1e-10));
    // No sampled point beats the analytic maximum.
    for (double t = s.t0 + 1e-4; t < s.t0 + 3.0; t += 1e-3)
      REQUIRE(lognormal_velocity(s, t) <= vp * (1.0 + 1e-9));
  }
}

TEST_CASE("distance fraction is the lognormal CDF") {
  const LogNormalStroke s{1.7, 0.3, -1.8, 0.25, 0.0, 0.0};
  REQUIRE(stroke_distance_fraction(s, s.t0) == 0.0);
  REQUIRE(stroke_distance_fraction(s, s.t0 - 1.0) == 0.0);
  // The median of a lognormal sits at exp(mu) after onset.
  REQUIRE(stroke_distance_fraction(s, s.t0 + std::exp(s.mu)) ==
          doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(stroke_distance_fraction(s, s.t0 + 100.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
  // The speed peak comes before half the distance is covered.
  REQUIRE(stroke_distance_fraction(s, stroke_peak_time(s)) < 0.5);
}

TEST_CASE("each bell's quadrature mass equals its D") {
  Rng rng(77);
  for (int k = 0; k < 25; ++k) {
    const LogNormalStroke s = random_stroke(rng);
    const double hi = s.t0 + std::exp(s.mu + 8.0 * s.sigma);
    const double mass = test_support::simpson(
        [&](double t) { return lognormal_velocity(s, t); }, s.t0, hi, 40000);
    REQUIRE(mass == doctest::Approx(s.D).epsilon(1e-4));
  }
}

TEST_CASE("synthesize_profile sums the bells pointwise") {
  Rng rng(9);
  std::vector<LogNormalStroke> strokes{random_stroke(rng), random_stroke(rng)};
  const auto grid = uniform_grid(4.0, 0.01);
  const auto prof = synthesize_profile(strokes, grid);
  REQUIRE(prof.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double want = lognormal_velocity(strokes[0], grid[i]) +
                        lognormal_velocity(strokes[1], grid[i]);
    REQUIRE(prof[i] == doctest::Approx(want).epsilon(1e-14));
  }

  std::vector<double> bad_grid{0.0, 0.1, 0.1, 0.2};
  REQUIRE_THROWS_AS(synthesize_profile(strokes, bad_grid), Error);
}

TEST_CASE("decompose recovers an isolated bell almost exactly") {
  const LogNormalStroke truth{1.2, 0.3, -2.1, 0.2, 0.0, 0.0};
  const double dt = 1.0 / 200.0;
  const auto grid = uniform_grid(truth.t0 + std::exp(truth.mu + 4.5 * truth.sigma), dt);
  const auto prof = synthesize_profile(std::vector{truth}, grid);

  const auto dec = decompose(prof, dt);
  REQUIRE(count_strokes(dec) == 1);
  REQUIRE(dec.strokes[0].D == doctest::Approx(truth.D).epsilon(1e-6));
  REQUIRE(dec.strokes[0].t0 == doctest::Approx(truth.t0).epsilon(1e-6));
  REQUIRE(dec.strokes[0].mu == doctest::Approx(truth.mu).epsilon(1e-6));
  REQUIRE(dec.strokes[0].sigma == doctest::Approx(truth.sigma).epsilon(1e-6));
  REQUIRE(dec.snr_db > 100.0);
  REQUIRE(dec.diagnostics.snr_trace_db.size() == 1);
}

TEST_CASE("decompose separates two bells at the generator's minimum gap") {
  std::vector<LogNormalStroke> truth{{1.2, 0.3, -2.1, 0.2, 0.0, 0.0},
                                     {1.0, 0.0, -2.1, 0.2, 0.0, 0.0}};
  truth[1].t0 = truth[0].t0 + 2.2 * std::exp(-2.1 + 0.2);
  const double dt = 1.0 / 200.0;
  const auto grid =
      uniform_grid(truth[1].t0 + std::exp(truth[1].mu + 4.5 * truth[1].sigma), dt);
  const auto dec = decompose(synthesize_profile(truth, grid), dt);

  REQUIRE(count_strokes(dec) == 2);
  // Strokes come back sorted by onset.
  REQUIRE(dec.strokes[0].t0 < dec.strokes[1].t0);
  REQUIRE(dec.strokes[0].D == doctest::Approx(truth[0].D).epsilon(1e-3));
  REQUIRE(dec.strokes[1].D == doctest::Approx(truth[1].D).epsilon(1e-3));
  REQUIRE(dec.snr_db >= 25.0);
}

TEST_CASE("scalar roundtrip holds over a random batch") {
  Rng seq(2024);
  const double dt = 1.0 / 200.0;
  for (int trial = 0; trial < 25; ++trial) {
    const int k = 5 + static_cast<int>(seq.uniform_int(0, 25));
    Rng rng(Rng::mix(909, static_cast<std::uint64_t>(trial)));
    const auto strokes = make_archetype(rng, k);
    double t_end = 0.0;
    for (const auto& s : strokes)
      t_end = std::max(t_end, s.t0 + std::exp(s.mu + 4.5 * s.sigma));
    const auto prof = synthesize_profile(strokes, uniform_grid(t_end, dt));
    const auto dec = decompose(prof, dt);
    REQUIRE(std::abs(count_strokes(dec) - k) <= 1);
    REQUIRE(dec.snr_db >= 25.0);
  }
}

TEST_CASE("snr trace never decreases") {
  Rng rng(606);
  const auto strokes = make_archetype(rng, 12);
  const double dt = 1.0 / 200.0;
  double t_end = 0.0;
  for (const auto& s : strokes)
    t_end = std::max(t_end, s.t0 + std::exp(s.mu + 4.5 * s.sigma));
  const auto dec = decompose(synthesize_profile(strokes, uniform_grid(t_end, dt)), dt);
  const auto& trace = dec.diagnostics.snr_trace_db;
  REQUIRE_FALSE(trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i)
    REQUIRE(trace[i] >= trace[i - 1] - 1e-9);
}

TEST_CASE("decompose rejects unusable input") {
  std::vector<double> tiny{0.0, 1.0, 2.0, 1.0, 0.5, 0.2, 0.1};
  REQUIRE_THROWS_AS(decompose(tiny, 0.005), ProfileTooShort);
  std::vector<double> enough(32, 0.5);
  REQUIRE_THROWS_AS(decompose(enough, 0.0), Error);
  REQUIRE_THROWS_AS(decompose(enough, -0.1), Error);
}

TEST_CASE("count_strokes can recount at a different floor") {
  LogNormalDecomposition dec;
  dec.strokes.push_back({2.0, 0.0, -2.0, 0.2, 0.0, 0.0});   // tall
  dec.strokes.push_back({0.2, 0.5, -2.0, 0.2, 0.0, 0.0});   // 10x smaller
  dec.strokes.push_back({0.02, 1.0, -2.0, 0.2, 0.0, 0.0});  // 100x smaller
  REQUIRE(count_strokes(dec) == 3);
  REQUIRE(count_strokes(dec, 0.05) == 2);
  REQUIRE(count_strokes(dec, 0.5) == 1);
}

TEST_CASE("decomposition text round-trips bit-exactly") {
  LogNormalDecomposition dec;
  dec.snr_db = 31.25;
  dec.strokes.push_back({1.25, 0.375, -2.0625, 0.1875, 0.5, -0.25});
  dec.strokes.push_back({0.8125, 1.5, -1.75, 0.25, -1.0, 0.125});
  const std::string text = write_decomposition(dec);
  const auto back = parse_decomposition(text);
  REQUIRE(back.snr_db == dec.snr_db);
  REQUIRE(back.strokes.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(back.strokes[i].D == dec.strokes[i].D);
    REQUIRE(back.strokes[i].t0 == dec.strokes[i].t0);
    REQUIRE(back.strokes[i].mu == dec.strokes[i].mu);
    REQUIRE(back.strokes[i].sigma == dec.strokes[i].sigma);
    REQUIRE(back.strokes[i].theta_s == dec.strokes[i].theta_s);
    REQUIRE(back.strokes[i].theta_e == dec.strokes[i].theta_e);
  }
  REQUIRE(write_decomposition(back) == text);
}

TEST_CASE("parsed strokes are re-sorted by onset") {
  const auto dec = parse_decomposition(
      "SLN1 2 20\n"
      "1.0 1.5 -2.0 0.2 0 0\n"
      "1.0 0.5 -2.0 0.2 0 0\n");
  REQUIRE(dec.strokes[0].t0 == 0.5);
  REQUIRE(dec.strokes[1].t0 == 1.5);
}

TEST_CASE("decomposition parse rejects malformed input") {
  REQUIRE_THROWS_AS(parse_decomposition(""), MalformedHeader);
  REQUIRE_THROWS_AS(parse_decomposition("SLN2 0 10\n"), MalformedHeader);
  REQUIRE_THROWS_AS(parse_decomposition("SLN1 0 nan\n"), MalformedHeader);
  REQUIRE_THROWS_AS(parse_decomposition("SLN1 2 10\n1 0 0 0.2 0 0\n"),
                    SampleCountMismatch);
  REQUIRE_THROWS_AS(parse_decomposition("SLN1 1 10\n1 0 0 0.2 0\n"),
                    ValueOutOfRange);
  REQUIRE_THROWS_AS(parse_decomposition("SLN1 1 10\n-1 0 0 0.2 0 0\n"),
                    ValueOutOfRange);
  REQUIRE_THROWS_AS(parse_decomposition("SLN1 1 10\n1 0 0 -0.2 0 0\n"),
                    ValueOutOfRange);
}

TEST_CASE("decomposition files go through the filesystem") {
  test_support::TempDir dir("sln");
  LogNormalDecomposition dec;
  dec.snr_db = 28.0;
  dec.strokes.push_back({1.0, 0.25, -2.0, 0.2, 0.0, 1.0});
  const auto path = dir / "a.sln";
  save_decomposition_file(path, dec);
  const auto back = load_decomposition_file(path);
  REQUIRE(write_decomposition(back) == write_decomposition(dec));
  REQUIRE_THROWS_AS(load_decomposition_file(dir / "nope.sln"), Error);
}

TEST_CASE("synthesized signatures are pen captures that never lift") {
  Rng rng(31);
  const auto strokes = make_archetype(rng, 10);
  const RawSignature sig = synthesize_signature(strokes, 200.0, "u03", 2);
  REQUIRE(sig.modality == Modality::Pen);
  REQUIRE(sig.user_id == "u03");
  REQUIRE(sig.session == 2);
  REQUIRE(sig.source_format == SourceFormat::Synthetic);
  REQUIRE(sig.samples.size() >= 8);
  for (const auto& p : sig.samples) {
    REQUIRE(p.pen_state == PenState::Down);
    REQUIRE(p.pressure.has_value());
    REQUIRE(*p.pressure == 1.0);
  }

  REQUIRE_THROWS_AS(synthesize_signature({}, 200.0), EmptyStrokeList);
  REQUIRE_THROWS_AS(synthesize_signature(strokes, 0.0), Error);
}

TEST_CASE("signature-level roundtrip recovers the stroke count") {
  Rng rng(47);
  const auto strokes = make_archetype(rng, 14);
  const RawSignature sig = synthesize_signature(strokes, 200.0);
  const ProcessedSignature pre = preprocess(sig);
  const auto dec = decompose(pre);
  REQUIRE(std::abs(count_strokes(dec) - 14) <= 1);
}
