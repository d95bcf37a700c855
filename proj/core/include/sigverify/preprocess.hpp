#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sigverify/types.hpp"

namespace sigverify {

struct PreprocessOptions {
  double rate_hz = 200.0;
  // Normalize coordinates before resampling instead of after.
  bool normalize_first = false;
};

// Pen-up samples and the pressure channel are gone by this point; x and y
// sit on a uniform time grid and are z-scored per axis.
struct ProcessedSignature {
  std::vector<double> x;
  std::vector<double> y;
  double dt = 1.0 / 200.0;

  std::string user_id;
  int session = 1;
  Label label = Label::Genuine;
  Modality modality = Modality::Pen;

  // An axis with no spread is centered but left unscaled.
  bool zero_variance_x = false;
  bool zero_variance_y = false;

  std::size_t length() const { return x.size(); }
  double duration() const { return x.empty() ? 0.0 : dt * static_cast<double>(x.size() - 1); }
};

// Natural cubic spline interpolation of (t, v) onto a uniform grid that
// starts at t.front() and steps by 1/rate_hz; the grid has
// floor((t.back() - t.front()) * rate_hz) + 1 points. Falls back to linear
// interpolation when fewer than four support points exist.
std::vector<double> resample_uniform(std::span<const double> t,
                                     std::span<const double> v, double rate_hz);

// Center to zero mean and scale to unit population standard deviation.
// Returns false when the values have no spread, in which case they are
// centered but not scaled.
bool zscore_inplace(std::span<double> values);

// Throws TooFewSamples when fewer than two pen-down samples exist or the
// resampled signal is too short for the downstream derivative windows.
ProcessedSignature preprocess(const RawSignature& sig,
                              const PreprocessOptions& options = {});

}  // namespace sigverify
