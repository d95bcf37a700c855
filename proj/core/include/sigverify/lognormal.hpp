#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sigverify/preprocess.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

// One ballistic stroke. The speed bell is a lognormal in elapsed time:
//
//   v(t) = D / (sigma * (t - t0) * sqrt(2*pi))
//          * exp(-(ln(t - t0) - mu)^2 / (2 * sigma^2))      for t > t0,
//   v(t) = 0                                                otherwise.
//
// D is the stroke's path length, so v integrates to D over (t0, inf).
// theta_s and theta_e are the start and end headings; the heading sweeps
// linearly in the fraction of distance covered, tracing a circular arc.
struct LogNormalStroke {
  double D = 1.0;
  double t0 = 0.0;
  double mu = 0.0;
  double sigma = 0.3;
  double theta_s = 0.0;
  double theta_e = 0.0;
};

double lognormal_velocity(const LogNormalStroke& stroke, double t);

// Time of the speed maximum, t0 + exp(mu - sigma^2).
double stroke_peak_time(const LogNormalStroke& stroke);
// Speed at the maximum, D / (sigma * sqrt(2*pi)) * exp(sigma^2 / 2 - mu).
double stroke_peak_speed(const LogNormalStroke& stroke);
// Fraction of D covered by time t (the lognormal CDF).
double stroke_distance_fraction(const LogNormalStroke& stroke, double t);

struct DecompositionDiagnostics {
  // Fit quality after each accepted stroke; non-decreasing by construction.
  std::vector<double> snr_trace_db;
  int fit_failures = 0;          // solver diverged, peak masked
  int discarded_small = 0;       // fitted stroke under the amplitude floor
  int rejected_nonimproving = 0; // stroke would have worsened the residual
};

struct LogNormalDecomposition {
  std::vector<LogNormalStroke> strokes;  // sorted by t0
  // 10*log10(signal energy / residual energy); +infinity when the residual
  // is identically zero (the "clean" case).
  double snr_db = 0.0;
  double residual_energy = 0.0;
  DecompositionDiagnostics diagnostics;
};

struct DecomposeOptions {
  double snr_target_db = 25.0;
  std::size_t max_strokes = 60;
  // Strokes peaking below this fraction of the profile's global maximum
  // are dropped rather than counted.
  double amp_threshold = 0.025;
};

// Pointwise sum of the strokes' speed bells over the given time grid.
std::vector<double> synthesize_profile(std::span<const LogNormalStroke> strokes,
                                       std::span<const double> grid);

// Integrates the strokes' vector velocities (speed bell along the sweeping
// heading) on a uniform grid from t = 0 until every bell has decayed.
// Produces a pen-modality signature, full pressure, never lifting.
RawSignature synthesize_signature(std::span<const LogNormalStroke> strokes,
                                  double rate_hz,
                                  const std::string& user_id = "synthetic",
                                  int session = 1, Label label = Label::Genuine);

// Speed profile of a preprocessed signature from central-difference
// velocities.
std::vector<double> speed_profile(const ProcessedSignature& sig);

// Greedy analysis: repeatedly fit one lognormal to the largest residual
// bump (characteristic-point start, bounded damped least squares refine),
// subtract it, and stop once the reconstruction reaches the SNR target or
// the stroke budget. Entirely deterministic.
LogNormalDecomposition decompose(std::span<const double> speed, double dt,
                                 const DecomposeOptions& options = {});
LogNormalDecomposition decompose(const ProcessedSignature& sig,
                                 const DecomposeOptions& options = {});

// Stroke count as used by the complexity detector: strokes surviving the
// amplitude threshold (already applied during decomposition).
int count_strokes(const LogNormalDecomposition& dec);
// Recount against a different relative amplitude floor, measured against
// the decomposition's own largest stroke peak.
int count_strokes(const LogNormalDecomposition& dec, double amp_threshold);

// Line format: header "SLN1 <count> <snr_db>", then one stroke per line as
// "D t0 mu sigma theta_s theta_e". Numbers round-trip exactly.
std::string write_decomposition(const LogNormalDecomposition& dec);
LogNormalDecomposition parse_decomposition(std::string_view text);
LogNormalDecomposition load_decomposition_file(const std::filesystem::path& path);
void save_decomposition_file(const std::filesystem::path& path,
                             const LogNormalDecomposition& dec);

}  // namespace sigverify
