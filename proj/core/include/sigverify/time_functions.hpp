#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sigverify/matrix.hpp"
#include "sigverify/preprocess.hpp"

namespace sigverify {

// The 21 per-sample channels computed from a preprocessed signature, in
// their canonical 1-based order:
//
//    1 x        8 dy        15 v_ratio (min/max speed, 5-window)
//    2 y        9 dtheta    16 alpha   (inter-sample direction)
//    3 theta   10 dv        17 dalpha
//    4 v       11 drho      18 sin_alpha
//    5 rho     12 da        19 cos_alpha
//    6 a       13 ddx       20 len_width_5 (path length / x-extent)
//    7 dx      14 ddy       21 len_width_7
//
// theta is the velocity direction, v the speed, rho the log radius of
// curvature, a the magnitude of tangential plus centripetal acceleration.
inline constexpr std::size_t kChannelCount = 21;

const char* channel_name(std::size_t index_1based);

struct TimeFunctionMatrix {
  Matrix channels;  // kChannelCount x L

  std::size_t length() const { return channels.cols(); }
};

enum class ChannelScaling {
  ZScored,  // each channel standardized per signature (the matcher's input)
  Raw       // physical values, used by tests and diagnostics
};

// L must be at least 8 (the widest window is 7 samples). Throws
// TooFewSamples otherwise.
TimeFunctionMatrix compute_time_functions(const ProcessedSignature& sig,
                                          ChannelScaling scaling = ChannelScaling::ZScored);

// Ascending, duplicate-free, 1-based channel indices.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(std::vector<int> indices);  // validates, sorts, throws

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(int index) const;

  std::string to_csv() const;                     // "1,5,12"
  static FeatureSubset from_csv(std::string_view csv);
  static FeatureSubset all();                     // {1..21}

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;

 private:
  std::vector<int> indices_;
};

// Rows of the reduced matrix follow ascending channel index.
Matrix select_channels(const TimeFunctionMatrix& m, const FeatureSubset& subset);

// Derivative used throughout: central differences inside, one-sided at the
// two ends. Exposed for oracle tests.
std::vector<double> derivative(std::span<const double> f, double dt);

}  // namespace sigverify
