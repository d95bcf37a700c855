#include "sigverify/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

// Second derivatives of the natural cubic spline through (t, v): zero
// curvature at both ends, tridiagonal system solved by forward elimination.
std::vector<double> spline_second_derivatives(std::span<const double> t,
                                              std::span<const double> v) {
  const std::size_t n = t.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;

  std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
  }
  for (std::size_t i = 1; i + 1 < n - 1; ++i) {
    const double lower = t[i + 1] - t[i];  // sub-diagonal entry of row i
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    const double up = i + 1 < n - 1 ? upper[i - 1] * m[i + 1] : 0.0;
    m[i] = (rhs[i - 1] - up) / diag[i - 1];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(std::span<const double> t, std::span<const double> v,
                   std::span<const double> m, std::size_t seg, double tq) {
  const double h = t[seg + 1] - t[seg];
  const double a = (t[seg + 1] - tq) / h;
  const double b = (tq - t[seg]) / h;
  return a * v[seg] + b * v[seg + 1] +
         ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * (h * h) / 6.0;
}

}  // namespace

std::vector<double> resample_uniform(std::span<const double> t,
                                     std::span<const double> v, double rate_hz) {
  if (t.size() != v.size()) throw Error("resample: t and v lengths differ");
  if (t.size() < 2) throw TooFewSamples("resample needs at least two samples");
  if (!(rate_hz > 0.0)) throw Error("resample: rate must be positive");

  const double t0 = t.front();
  const double span = t.back() - t0;
  const auto n_out =
      static_cast<std::size_t>(std::floor(span * rate_hz)) + 1;

  std::vector<double> out(n_out);
  if (t.size() < 4) {
    // Too short for a cubic; straight lines between the support points.
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
      const double tq = std::min(t0 + static_cast<double>(k) / rate_hz, t.back());
      while (seg + 2 < t.size() && t[seg + 1] < tq) ++seg;
      const double w = (tq - t[seg]) / (t[seg + 1] - t[seg]);
      out[k] = v[seg] + w * (v[seg + 1] - v[seg]);
    }
    return out;
  }

  const auto m = spline_second_derivatives(t, v);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double tq = std::min(t0 + static_cast<double>(k) / rate_hz, t.back());
    while (seg + 2 < t.size() && t[seg + 1] < tq) ++seg;
    out[k] = spline_eval(t, v, m, seg, tq);
  }
  return out;
}

bool zscore_inplace(std::span<double> values) {
  if (values.empty()) return false;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;

  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / n);

  // Spread at the level of accumulated rounding noise counts as none.
  const double floor_ = 1e-12 * std::max(1.0, std::abs(mean));
  if (stddev <= floor_) {
    for (double& v : values) v -= mean;
    return false;
  }
  for (double& v : values) v = (v - mean) / stddev;
  return true;
}

ProcessedSignature preprocess(const RawSignature& sig,
                              const PreprocessOptions& options) {
  std::vector<double> t, x, y;
  t.reserve(sig.samples.size());
  x.reserve(sig.samples.size());
  y.reserve(sig.samples.size());
  for (const auto& p : sig.samples) {
    if (p.pen_state != PenState::Down) continue;
    t.push_back(p.t);
    x.push_back(p.x);
    y.push_back(p.y);
  }
  if (t.size() < 2)
    throw TooFewSamples("fewer than two on-surface samples (" +
                        std::to_string(t.size()) + ")");

  ProcessedSignature out;
  out.dt = 1.0 / options.rate_hz;
  out.user_id = sig.user_id;
  out.session = sig.session;
  out.label = sig.label;
  out.modality = sig.modality;

  if (options.normalize_first) {
    out.zero_variance_x = !zscore_inplace(x);
    out.zero_variance_y = !zscore_inplace(y);
  }

  out.x = resample_uniform(t, x, options.rate_hz);
  out.y = resample_uniform(t, y, options.rate_hz);

  if (!options.normalize_first) {
    out.zero_variance_x = !zscore_inplace(out.x);
    out.zero_variance_y = !zscore_inplace(out.y);
  }

  // The derived-channel windows need a handful of points to make sense.
  if (out.length() < 8)
    throw TooFewSamples("resampled signal has only " +
                        std::to_string(out.length()) + " samples");
  return out;
}

}  // namespace sigverify
