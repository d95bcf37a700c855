#include "sigverify/time_functions.hpp"

#include <algorithm>
#include <cmath>

#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

constexpr double kEps = 1e-6;

constexpr std::array<const char*, kChannelCount> kChannelNames = {
    "x",       "y",       "theta",   "v",           "rho",       "a",
    "dx",      "dy",      "dtheta",  "dv",          "drho",      "da",
    "ddx",     "ddy",     "v_ratio", "alpha",       "dalpha",    "sin_alpha",
    "cos_alpha", "len_width_5", "len_width_7"};

// Clamped centered window [i-half, i+half] over a sequence of length n.
struct Window {
  std::size_t lo, hi;  // inclusive
};

Window clamped(std::size_t i, std::size_t half, std::size_t n) {
  return {i >= half ? i - half : 0, std::min(i + half, n - 1)};
}

}  // namespace

const char* channel_name(std::size_t index_1based) {
  if (index_1based < 1 || index_1based > kChannelCount)
    throw IndexOutOfRange("channel index " + std::to_string(index_1based) +
                          " outside [1," + std::to_string(kChannelCount) + "]");
  return kChannelNames[index_1based - 1];
}

std::vector<double> derivative(std::span<const double> f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (f[1] - f[0]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  d[n - 1] = (f[n - 1] - f[n - 2]) / dt;
  return d;
}

TimeFunctionMatrix compute_time_functions(const ProcessedSignature& sig,
                                          ChannelScaling scaling) {
  const std::size_t n = sig.length();
  if (n < 8)
    throw SignatureTooShort("time functions need at least 8 samples, got " +
                            std::to_string(n));
  const double dt = sig.dt;
  const auto& x = sig.x;
  const auto& y = sig.y;

  const auto dx = derivative(x, dt);
  const auto dy = derivative(y, dt);

  std::vector<double> theta(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    // A stationary sample has no direction of its own; carry the last one.
    if (dx[i] == 0.0 && dy[i] == 0.0)
      theta[i] = i > 0 ? theta[i - 1] : 0.0;
    else
      theta[i] = std::atan2(dy[i], dx[i]);
    v[i] = std::hypot(dx[i], dy[i]);
  }

  const auto dtheta = derivative(theta, dt);
  const auto dv = derivative(v, dt);

  std::vector<double> rho(n), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Both sides clamped at eps so the log stays finite at rest points.
    rho[i] = std::log(std::max(v[i], kEps) / std::max(std::abs(dtheta[i]), kEps));
    a[i] = std::hypot(dv[i], v[i] * dtheta[i]);
  }

  const auto drho = derivative(rho, dt);
  const auto da = derivative(a, dt);
  const auto ddx = derivative(dx, dt);
  const auto ddy = derivative(dy, dt);

  std::vector<double> v_ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = clamped(i, 2, n);
    double lo = v[w.lo], hi = v[w.lo];
    for (std::size_t j = w.lo + 1; j <= w.hi; ++j) {
      lo = std::min(lo, v[j]);
      hi = std::max(hi, v[j]);
    }
    v_ratio[i] = lo / std::max(hi, kEps);
  }

  std::vector<double> alpha(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    alpha[i] = std::atan2(y[i + 1] - y[i], x[i + 1] - x[i]);
  alpha[n - 1] = alpha[n - 2];

  const auto dalpha = derivative(alpha, dt);

  std::vector<double> sin_a(n), cos_a(n);
  for (std::size_t i = 0; i < n; ++i) {
    sin_a[i] = std::sin(alpha[i]);
    cos_a[i] = std::cos(alpha[i]);
  }

  auto len_width = [&](std::size_t half) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = clamped(i, half, n);
      double len = 0.0, xmin = x[w.lo], xmax = x[w.lo];
      for (std::size_t j = w.lo; j <= w.hi; ++j) {
        if (j > w.lo) len += std::hypot(x[j] - x[j - 1], y[j] - y[j - 1]);
        xmin = std::min(xmin, x[j]);
        xmax = std::max(xmax, x[j]);
      }
      r[i] = len / std::max(xmax - xmin, kEps);
    }
    return r;
  };
  const auto r5 = len_width(2);
  const auto r7 = len_width(3);

  TimeFunctionMatrix out;
  out.channels = Matrix(kChannelCount, n);
  const std::array<const std::vector<double>*, kChannelCount> rows = {
      &x,   &y,   &theta,   &v,     &rho,    &a,     &dx,    &dy,   &dtheta,
      &dv,  &drho, &da,     &ddx,   &ddy,    &v_ratio, &alpha, &dalpha,
      &sin_a, &cos_a, &r5,  &r7};
  for (std::size_t r = 0; r < kChannelCount; ++r)
    std::copy(rows[r]->begin(), rows[r]->end(), out.channels.row(r).begin());

  if (scaling == ChannelScaling::ZScored)
    for (std::size_t r = 0; r < kChannelCount; ++r) zscore_inplace(out.channels.row(r));

  return out;
}

FeatureSubset::FeatureSubset(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw EmptySubset("feature subset must not be empty");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw IndexOutOfRange("duplicate channel index in feature subset");
  for (const int i : indices_)
    if (i < 1 || i > static_cast<int>(kChannelCount))
      throw IndexOutOfRange("channel index " + std::to_string(i) + " outside [1," +
                            std::to_string(kChannelCount) + "]");
}

bool FeatureSubset::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

std::string FeatureSubset::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(indices_[i]);
  }
  return out;
}

FeatureSubset FeatureSubset::from_csv(std::string_view csv) {
  std::vector<int> indices;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string_view::npos) comma = csv.size();
    const std::string tok(csv.substr(pos, comma - pos));
    if (tok.empty()) throw IndexOutOfRange("empty entry in subset list '" +
                                           std::string(csv) + "'");
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw IndexOutOfRange("bad channel index '" + tok + "'");
    }
    if (used != tok.size()) throw IndexOutOfRange("bad channel index '" + tok + "'");
    indices.push_back(value);
    if (comma == csv.size()) break;
    pos = comma + 1;
  }
  return FeatureSubset(std::move(indices));
}

FeatureSubset FeatureSubset::all() {
  std::vector<int> indices(kChannelCount);
  for (std::size_t i = 0; i < kChannelCount; ++i) indices[i] = static_cast<int>(i + 1);
  return FeatureSubset(std::move(indices));
}

Matrix select_channels(const TimeFunctionMatrix& m, const FeatureSubset& subset) {
  if (subset.size() == 0) throw EmptySubset("feature subset must not be empty");
  Matrix out(subset.size(), m.channels.cols());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    const auto src = m.channels.row(static_cast<std::size_t>(subset.indices()[r]) - 1);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace sigverify
