#include "sigverify/lognormal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "detail/text.hpp"
#include "sigverify/errors.hpp"
#include "sigverify/time_functions.hpp"

namespace sigverify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Half of the log-domain distance between the two half-height crossings of
// a lognormal bell is sigma * sqrt(2 ln 2).
const double kHalfWidthFactor = std::sqrt(2.0 * std::numbers::ln2);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

constexpr double kSigmaLo = 0.05, kSigmaHi = 1.5;
constexpr double kMuLo = -4.0, kMuHi = 2.0;
constexpr double kDFloor = 1e-6;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double snr_from_energies(double signal, double residual) {
  if (residual <= 1e-300) return kInf;
  return 10.0 * std::log10(signal / residual);
}

std::vector<double> smooth7(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 3 ? i - 3 : 0;
    const std::size_t hi = std::min(i + 3, n - 1);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct FitParams {
  double D, t0, mu, sigma;
};

double model_speed(const FitParams& p, double t) {
  const double tau = t - p.t0;
  if (!(tau > 0.0) || p.D <= 0.0) return 0.0;
  const double z = (std::log(tau) - p.mu) / p.sigma;
  const double ln_v = std::log(p.D) - std::log(p.sigma) - std::log(tau) -
                      0.5 * kLog2Pi - 0.5 * z * z;
  return ln_v < -700.0 ? 0.0 : std::exp(ln_v);
}

// Solves a 4x4 linear system in place by Gaussian elimination with partial
// pivoting. Returns false on a (near-)singular matrix.
bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b,
            std::array<double, 4>& x) {
  std::array<int, 4> piv = {0, 1, 2, 3};
  for (int col = 0; col < 4; ++col) {
    int best = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[piv[r]][col]) > std::abs(a[piv[best]][col])) best = r;
    std::swap(piv[col], piv[best]);
    const double pivot = a[piv[col]][col];
    if (std::abs(pivot) < 1e-300) return false;
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[piv[r]][col] / pivot;
      if (f == 0.0) continue;
      for (int c = col; c < 4; ++c) a[piv[r]][c] -= f * a[piv[col]][c];
      b[piv[r]] -= f * b[piv[col]];
    }
  }
  for (int row = 3; row >= 0; --row) {
    double acc = b[piv[row]];
    for (int c = row + 1; c < 4; ++c) acc -= a[piv[row]][c] * x[c];
    x[row] = acc / a[piv[row]][row];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]) &&
         std::isfinite(x[3]);
}

struct FitWindow {
  std::span<const double> target;  // residual values inside the window
  std::size_t first_index;         // grid index of target[0]
  double dt;
  double peak_time;  // detected bump apex, upper bound for t0
};

double fit_cost(const FitParams& p, const FitWindow& w) {
  double sse = 0.0;
  for (std::size_t i = 0; i < w.target.size(); ++i) {
    const double t = static_cast<double>(w.first_index + i) * w.dt;
    const double e = model_speed(p, t) - w.target[i];
    sse += e * e;
  }
  return sse;
}

FitParams project(FitParams p, const FitWindow& w) {
  const double window_start = static_cast<double>(w.first_index) * w.dt;
  p.D = std::clamp(p.D, kDFloor, 1e9);
  p.t0 = std::clamp(p.t0, window_start - 2.0, w.peak_time - 1e-4);
  p.mu = std::clamp(p.mu, kMuLo, kMuHi);
  p.sigma = std::clamp(p.sigma, kSigmaLo, kSigmaHi);
  return p;
}

// Damped least squares with box projection; initialization is supplied by
// the characteristic-point estimate so 200 iterations are plenty.
FitParams refine_fit(FitParams p, const FitWindow& w) {
  p = project(p, w);
  double sse = fit_cost(p, w);
  double lambda = 1e-3;

  for (int iter = 0; iter < 200; ++iter) {
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};

    for (std::size_t i = 0; i < w.target.size(); ++i) {
      const double t = static_cast<double>(w.first_index + i) * w.dt;
      const double tau = t - p.t0;
      if (!(tau > 0.0)) continue;
      const double v = model_speed(p, t);
      if (v == 0.0) continue;
      const double z = (std::log(tau) - p.mu) / p.sigma;
      const std::array<double, 4> grad = {
          v / p.D,                        // dD
          v * (1.0 + z / p.sigma) / tau,  // dt0
          v * z / p.sigma,                // dmu
          v * (z * z - 1.0) / p.sigma,    // dsigma
      };
      const double res = v - w.target[i];
      for (int r = 0; r < 4; ++r) {
        jtr[r] += grad[r] * res;
        for (int c = r; c < 4; ++c) jtj[r][c] += grad[r] * grad[c];
      }
    }
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < r; ++c) jtj[r][c] = jtj[c][r];

    bool stepped = false;
    for (int attempt = 0; attempt < 25 && !stepped; ++attempt) {
      auto a = jtj;
      for (int d = 0; d < 4; ++d)
        a[d][d] += lambda * std::max(jtj[d][d], 1e-12);
      auto rhs = jtr;
      for (auto& val : rhs) val = -val;
      std::array<double, 4> delta{};
      if (solve4(a, rhs, delta)) {
        const FitParams cand = project(
            {p.D + delta[0], p.t0 + delta[1], p.mu + delta[2], p.sigma + delta[3]},
            w);
        const double cand_sse = fit_cost(cand, w);
        if (cand_sse < sse) {
          const double improvement = (sse - cand_sse) / std::max(sse, 1e-300);
          p = cand;
          sse = cand_sse;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          if (improvement < 1e-10) return p;
        }
      }
      if (!stepped) {
        lambda *= 4.0;
        if (lambda > 1e14) return p;
      }
    }
    if (!stepped) break;
    if (sse < 1e-18) break;
  }
  return p;
}

struct HalfSupport {
  double t1, tm, t2;       // left crossing, apex, right crossing (seconds)
  std::size_t i1, i2;      // grid indices bracketing the support
};

HalfSupport half_support(std::span<const double> rs, double dt, std::size_t ipk) {
  const std::size_t n = rs.size();
  const double half = rs[ipk] / 2.0;
  HalfSupport hs;
  hs.tm = static_cast<double>(ipk) * dt;

  std::size_t j = ipk;
  while (j > 0 && rs[j - 1] >= half) --j;
  if (j == 0) {
    hs.t1 = 0.0;
    hs.i1 = 0;
  } else {
    const double f = (rs[j] - half) / (rs[j] - rs[j - 1]);
    hs.t1 = (static_cast<double>(j) - f) * dt;
    hs.i1 = j - 1;
  }

  std::size_t k = ipk;
  while (k + 1 < n && rs[k + 1] >= half) ++k;
  if (k + 1 >= n) {
    hs.t2 = static_cast<double>(n - 1) * dt;
    hs.i2 = n - 1;
  } else {
    const double f = (rs[k] - half) / (rs[k] - rs[k + 1]);
    hs.t2 = (static_cast<double>(k) + f) * dt;
    hs.i2 = k + 1;
  }

  // Keep the three points strictly ordered even on plateau-like bumps.
  hs.t1 = std::min(hs.t1, hs.tm - 0.25 * dt);
  hs.t2 = std::max(hs.t2, hs.tm + 0.25 * dt);
  return hs;
}

// Builds full starting parameters from the half-height support once the
// apex-to-onset delay tau_m = tm - t0 has been chosen.
FitParams init_from_support(const HalfSupport& hs,
                            std::span<const double> residual, double dt,
                            double tau_m) {
  const double t1 = hs.t1, tm = hs.tm, t2 = hs.t2;
  const double t0 = tm - tau_m;

  const double sigma = std::clamp(
      std::log((t2 - t0) / (t1 - t0)) / (2.0 * kHalfWidthFactor), kSigmaLo, kSigmaHi);
  const double mu = std::clamp(std::log(tau_m) + sigma * sigma, kMuLo, kMuHi);

  // Area between the crossings, scaled by the mass a lognormal keeps there.
  double area = 0.0;
  for (std::size_t j = hs.i1; j < hs.i2; ++j)
    area += 0.5 * (std::max(residual[j], 0.0) + std::max(residual[j + 1], 0.0)) * dt;
  const double z1 = (std::log(std::max(t1 - t0, 1e-12)) - mu) / sigma;
  const double z2 = (std::log(std::max(t2 - t0, 1e-12)) - mu) / sigma;
  const double frac = std::max(norm_cdf(z2) - norm_cdf(z1), 0.05);
  const double d = std::max(area / frac, 1e-4);

  return {d, t0, mu, sigma};
}

// Apex-to-onset delay from the lognormal's log-symmetric geometry:
// (t1-t0)(t2-t0) = (tm-t0)^2, so tm-t0 = a*b/(b-a) with a = tm-t1 and
// b = t2-tm.  The denominator is a difference of two similar widths, so
// measurement noise can flip its sign or blow the ratio up; outside the
// range a real bell can produce (tm-t0 between ~0.2 and ~8.5 support
// widths across the sigma box), fall back to a fixed lead-in instead of
// handing the refiner garbage.
double analytic_tau_m(const HalfSupport& hs) {
  const double a = hs.tm - hs.t1, b = hs.t2 - hs.tm, width = hs.t2 - hs.t1;
  double tau_m = b - a > 1e-9 ? a * b / (b - a) : kInf;
  if (!std::isfinite(tau_m) || tau_m < 0.05 * width || tau_m > 12.0 * width)
    tau_m = a + std::max(0.25 * width, 1e-3);
  return tau_m;
}

// Delay a bell of the given shape parameter would need to spread its
// half-height crossings across the measured support width.
double tau_m_for_sigma(const HalfSupport& hs, double sigma) {
  return (hs.t2 - hs.t1) / (2.0 * std::sinh(kHalfWidthFactor * sigma));
}

// Grid index range covering [t1, t2] plus a margin proportional to the
// support width, widened to at least 8 samples so four parameters stay
// well determined.
std::pair<std::size_t, std::size_t> window_bounds(double t1, double t2,
                                                  double dt, std::size_t n) {
  const double margin = 0.75 * (t2 - t1);
  const auto lo_f = std::floor((t1 - margin) / dt);
  std::size_t w_lo = lo_f > 0.0 ? static_cast<std::size_t>(lo_f) : 0;
  std::size_t w_hi =
      std::min(static_cast<std::size_t>(std::ceil((t2 + margin) / dt)), n - 1);
  w_lo = std::min(w_lo, w_hi);
  while (w_hi - w_lo + 1 < 8 && (w_lo > 0 || w_hi < n - 1)) {
    if (w_lo > 0) --w_lo;
    if (w_hi < n - 1) ++w_hi;
  }
  return {w_lo, w_hi};
}

LogNormalStroke fit_one_stroke(std::span<const double> residual, double dt,
                               const HalfSupport& hs) {
  const std::size_t n = residual.size();
  const auto [w_lo, w_hi] = window_bounds(hs.t1, hs.t2, dt, n);

  FitWindow window{residual.subspan(w_lo, w_hi - w_lo + 1), w_lo, dt, hs.tm};

  // The analytic inversion is exact on clean data but noise can park it in
  // the wrong basin (a narrow bell with a long dead-time lead-in fits the
  // apex hump yet misses both tails).  Refine from it and from a
  // moderate-shape start, and keep whichever explains the window better.
  const FitParams init = init_from_support(hs, residual, dt, analytic_tau_m(hs));
  FitParams fitted = refine_fit(init, window);
  const FitParams alt_init =
      init_from_support(hs, residual, dt, tau_m_for_sigma(hs, 0.3));
  const FitParams alt = refine_fit(alt_init, window);
  if (fit_cost(alt, window) < fit_cost(fitted, window)) fitted = alt;

  LogNormalStroke stroke;
  stroke.D = fitted.D;
  stroke.t0 = fitted.t0;
  stroke.mu = fitted.mu;
  stroke.sigma = fitted.sigma;

  if (!std::isfinite(stroke.D) || !std::isfinite(stroke.t0) ||
      !std::isfinite(stroke.mu) || !std::isfinite(stroke.sigma) ||
      stroke_peak_speed(stroke) < 1e-12)
    throw FitDiverged("stroke fit produced no usable bell");

  // A bell that leaves its own window essentially untouched is a refiner
  // dead end (typically parked outside the window), not a stroke.
  double window_energy = 0.0;
  for (const double v : window.target) window_energy += v * v;
  if (fit_cost(fitted, window) >= 0.95 * window_energy)
    throw FitDiverged("stroke fit explains none of its window");
  return stroke;
}

LogNormalDecomposition decompose_impl(std::span<const double> speed, double dt,
                                      const DecomposeOptions& options,
                                      std::span<const double> headings) {
  if (speed.size() < 8)
    throw ProfileTooShort("speed profile has " + std::to_string(speed.size()) +
                          " samples, need at least 8");
  if (!(dt > 0.0)) throw Error("decompose: dt must be positive");

  const std::size_t n = speed.size();
  LogNormalDecomposition dec;

  double signal_energy = 0.0, global_peak = 0.0;
  for (const double v : speed) {
    signal_energy += v * v;
    global_peak = std::max(global_peak, v);
  }
  const double amp_floor = options.amp_threshold * global_peak;

  std::vector<double> residual(speed.begin(), speed.end());
  double residual_energy = signal_energy;
  std::vector<char> masked(n, 0);

  auto heading_at = [&](double t) {
    if (headings.empty()) return 0.0;
    const auto i = static_cast<std::size_t>(
        std::clamp(std::llround(t / dt), 0LL, static_cast<long long>(n - 1)));
    return headings[i];
  };

  // Greedy extraction fits each bell against a residual that still contains
  // its neighbours' shoulders, biasing the early fits.  After every
  // acceptance, revisit each stroke with the others subtracted: add it back
  // into the residual, re-run the refiner from its current parameters, and
  // keep whichever version leaves less energy behind.
  auto backfit = [&] {
    if (dec.strokes.size() < 2) return;
    for (auto& s : dec.strokes) {
      for (std::size_t i = 0; i < n; ++i)
        residual[i] += lognormal_velocity(s, static_cast<double>(i) * dt);

      const double log_peak = s.mu - s.sigma * s.sigma;
      const double t1 = s.t0 + std::exp(log_peak - s.sigma * kHalfWidthFactor);
      const double t2 = s.t0 + std::exp(log_peak + s.sigma * kHalfWidthFactor);
      const auto [w_lo, w_hi] = window_bounds(t1, t2, dt, n);
      const FitWindow window{
          std::span<const double>(residual).subspan(w_lo, w_hi - w_lo + 1),
          w_lo, dt, s.t0 + std::exp(log_peak)};
      const FitParams seed{s.D, s.t0, s.mu, s.sigma};
      const FitParams ref = refine_fit(seed, window);

      double e_ref = 0.0, e_seed = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double dr = residual[i] - model_speed(ref, t);
        const double ds = residual[i] - model_speed(seed, t);
        e_ref += dr * dr;
        e_seed += ds * ds;
      }
      const bool keep_ref = e_ref <= e_seed && std::isfinite(e_ref) &&
                            stroke_peak_speed({ref.D, ref.t0, ref.mu,
                                               ref.sigma, 0.0, 0.0}) >= 1e-12;
      const FitParams& best = keep_ref ? ref : seed;
      if (keep_ref) {
        s.D = ref.D;
        s.t0 = ref.t0;
        s.mu = ref.mu;
        s.sigma = ref.sigma;
        if (!headings.empty()) {
          const double lp = ref.mu - ref.sigma * ref.sigma;
          s.theta_s = heading_at(ref.t0 + std::exp(lp - ref.sigma * kHalfWidthFactor));
          s.theta_e = heading_at(ref.t0 + std::exp(lp + ref.sigma * kHalfWidthFactor));
        }
      }
      for (std::size_t i = 0; i < n; ++i)
        residual[i] -= model_speed(best, static_cast<double>(i) * dt);
      residual_energy = keep_ref ? e_ref : e_seed;
    }
  };

  while (dec.strokes.size() < options.max_strokes) {
    if (snr_from_energies(signal_energy, residual_energy) >= options.snr_target_db)
      break;

    const auto smoothed = smooth7(residual);
    std::size_t ipk = n;
    double peak = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (masked[i]) continue;
      if (smoothed[i] > peak) {
        peak = smoothed[i];
        ipk = i;
      }
    }
    // Everything left is below the floor a stroke would need to survive.
    if (ipk == n || peak < std::max(amp_floor, 1e-12)) break;

    const auto hs = half_support(smoothed, dt, ipk);
    auto mask_bump = [&] {
      for (std::size_t i = hs.i1; i <= hs.i2; ++i) masked[i] = 1;
      masked[ipk] = 1;
    };

    LogNormalStroke stroke;
    try {
      stroke = fit_one_stroke(residual, dt, hs);
    } catch (const FitDiverged&) {
      mask_bump();
      ++dec.diagnostics.fit_failures;
      continue;
    }

    if (stroke_peak_speed(stroke) < amp_floor) {
      mask_bump();
      ++dec.diagnostics.discarded_small;
      continue;
    }

    double new_energy = 0.0;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = residual[i] - lognormal_velocity(stroke, static_cast<double>(i) * dt);
      new_energy += next[i] * next[i];
    }
    // Demand a measurable energy drop: a bell whose on-grid contribution is
    // negligible would otherwise be re-accepted forever once masks clear.
    if (new_energy >= residual_energy * (1.0 - 1e-4)) {
      mask_bump();
      ++dec.diagnostics.rejected_nonimproving;
      continue;
    }

    stroke.theta_s = heading_at(hs.t1);
    stroke.theta_e = heading_at(hs.t2);
    dec.strokes.push_back(stroke);
    residual.swap(next);
    residual_energy = new_energy;
    backfit();
    dec.diagnostics.snr_trace_db.push_back(
        snr_from_energies(signal_energy, residual_energy));
    // Regions masked while other bumps dominated may fit cleanly now.
    std::fill(masked.begin(), masked.end(), 0);
  }

  dec.snr_db = snr_from_energies(signal_energy, residual_energy);
  dec.residual_energy = residual_energy;
  std::stable_sort(dec.strokes.begin(), dec.strokes.end(),
                   [](const LogNormalStroke& a, const LogNormalStroke& b) {
                     return a.t0 < b.t0;
                   });
  return dec;
}

}  // namespace

double lognormal_velocity(const LogNormalStroke& stroke, double t) {
  return model_speed({stroke.D, stroke.t0, stroke.mu, stroke.sigma}, t);
}

double stroke_peak_time(const LogNormalStroke& stroke) {
  return stroke.t0 + std::exp(stroke.mu - stroke.sigma * stroke.sigma);
}

double stroke_peak_speed(const LogNormalStroke& stroke) {
  return stroke.D / (stroke.sigma * std::sqrt(2.0 * std::numbers::pi)) *
         std::exp(0.5 * stroke.sigma * stroke.sigma - stroke.mu);
}

double stroke_distance_fraction(const LogNormalStroke& stroke, double t) {
  const double tau = t - stroke.t0;
  if (!(tau > 0.0)) return 0.0;
  return norm_cdf((std::log(tau) - stroke.mu) / stroke.sigma);
}

std::vector<double> synthesize_profile(std::span<const LogNormalStroke> strokes,
                                       std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw Error("synthesize_profile: grid must be strictly increasing");

  std::vector<double> out(grid.size(), 0.0);
  for (const auto& stroke : strokes)
    for (std::size_t i = 0; i < grid.size(); ++i)
      out[i] += lognormal_velocity(stroke, grid[i]);
  return out;
}

RawSignature synthesize_signature(std::span<const LogNormalStroke> strokes,
                                  double rate_hz, const std::string& user_id,
                                  int session, Label label) {
  if (strokes.empty())
    throw EmptyStrokeList("cannot synthesize a signature from zero strokes");
  if (!(rate_hz > 0.0)) throw Error("synthesize_signature: rate must be positive");

  double t_end = 0.0;
  for (const auto& s : strokes) {
    if (s.t0 < 0.0) throw Error("synthesize_signature: stroke starts before t=0");
    // 4.5 log-widths past the delay covers all but ~3e-6 of the mass.
    t_end = std::max(t_end, s.t0 + std::exp(s.mu + 4.5 * s.sigma));
  }

  const double dt = 1.0 / rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(t_end * rate_hz)) + 2;

  std::vector<double> vx(n, 0.0), vy(n, 0.0);
  for (const auto& s : strokes) {
    const double sweep = s.theta_e - s.theta_s;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      const double v = lognormal_velocity(s, t);
      if (v == 0.0) continue;
      const double phi = s.theta_s + sweep * stroke_distance_fraction(s, t);
      vx[i] += v * std::cos(phi);
      vy[i] += v * std::sin(phi);
    }
  }

  RawSignature sig;
  sig.modality = Modality::Pen;
  sig.user_id = user_id;
  sig.session = session;
  sig.label = label;
  sig.source_format = SourceFormat::Synthetic;
  sig.samples.resize(n);

  double x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      x += 0.5 * (vx[i - 1] + vx[i]) * dt;
      y += 0.5 * (vy[i - 1] + vy[i]) * dt;
    }
    sig.samples[i] = {static_cast<double>(i) * dt, x, y, 1.0, PenState::Down};
  }
  return sig;
}

std::vector<double> speed_profile(const ProcessedSignature& sig) {
  const auto dx = derivative(sig.x, sig.dt);
  const auto dy = derivative(sig.y, sig.dt);
  std::vector<double> v(dx.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::hypot(dx[i], dy[i]);
  return v;
}

LogNormalDecomposition decompose(std::span<const double> speed, double dt,
                                 const DecomposeOptions& options) {
  return decompose_impl(speed, dt, options, {});
}

LogNormalDecomposition decompose(const ProcessedSignature& sig,
                                 const DecomposeOptions& options) {
  const auto v = speed_profile(sig);
  const auto dx = derivative(sig.x, sig.dt);
  const auto dy = derivative(sig.y, sig.dt);
  std::vector<double> headings(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (dx[i] == 0.0 && dy[i] == 0.0)
      headings[i] = i > 0 ? headings[i - 1] : 0.0;
    else
      headings[i] = std::atan2(dy[i], dx[i]);
  }
  return decompose_impl(v, sig.dt, options, headings);
}

int count_strokes(const LogNormalDecomposition& dec) {
  return static_cast<int>(dec.strokes.size());
}

int count_strokes(const LogNormalDecomposition& dec, double amp_threshold) {
  double peak = 0.0;
  for (const auto& s : dec.strokes) peak = std::max(peak, stroke_peak_speed(s));
  int count = 0;
  for (const auto& s : dec.strokes)
    if (stroke_peak_speed(s) >= amp_threshold * peak) ++count;
  return count;
}

std::string write_decomposition(const LogNormalDecomposition& dec) {
  std::string out = "SLN1 " + std::to_string(dec.strokes.size()) + ' ' +
                    detail::fmt_g17(dec.snr_db) + '\n';
  for (const auto& s : dec.strokes) {
    out += detail::fmt_g17(s.D);
    out += ' ';
    out += detail::fmt_g17(s.t0);
    out += ' ';
    out += detail::fmt_g17(s.mu);
    out += ' ';
    out += detail::fmt_g17(s.sigma);
    out += ' ';
    out += detail::fmt_g17(s.theta_s);
    out += ' ';
    out += detail::fmt_g17(s.theta_e);
    out += '\n';
  }
  return out;
}

LogNormalDecomposition parse_decomposition(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw MalformedHeader("empty decomposition", 1);

  const auto header = detail::split_fields(lines[0]);
  if (header.size() != 3 || header[0] != "SLN1")
    throw MalformedHeader("expected 'SLN1 <count> <snr_db>'", 1);

  const auto count = detail::parse_int(header[1]);
  if (!count || *count < 0)
    throw MalformedHeader("stroke count must be a non-negative integer", 1);

  const auto snr = detail::parse_double(header[2]);
  if (!snr || std::isnan(*snr)) throw MalformedHeader("bad snr_db value", 1);

  if (lines.size() - 1 != static_cast<std::size_t>(*count))
    throw SampleCountMismatch(
        "header declares " + std::to_string(*count) + " strokes but file has " +
            std::to_string(lines.size() - 1),
        2 + std::min<std::size_t>(*count, lines.size() - 1));

  LogNormalDecomposition dec;
  dec.snr_db = *snr;
  dec.strokes.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 6)
      throw ValueOutOfRange("expected 6 fields 'D t0 mu sigma theta_s theta_e'",
                            line_no);
    std::array<double, 6> vals{};
    for (std::size_t k = 0; k < 6; ++k) {
      const auto v = detail::parse_double(f[k]);
      if (!v || !std::isfinite(*v))
        throw ValueOutOfRange("stroke parameter is not a finite number", line_no);
      vals[k] = *v;
    }
    if (vals[0] <= 0.0) throw ValueOutOfRange("D must be positive", line_no);
    if (vals[3] <= 0.0) throw ValueOutOfRange("sigma must be positive", line_no);
    dec.strokes.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]});
  }
  std::stable_sort(dec.strokes.begin(), dec.strokes.end(),
                   [](const LogNormalStroke& a, const LogNormalStroke& b) {
                     return a.t0 < b.t0;
                   });
  return dec;
}

LogNormalDecomposition load_decomposition_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open decomposition file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_decomposition(buf.str());
}

void save_decomposition_file(const std::filesystem::path& path,
                             const LogNormalDecomposition& dec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write decomposition file: " + path.string());
  out << write_decomposition(dec);
  if (!out) throw Error("short write: " + path.string());
}

}  // namespace sigverify
