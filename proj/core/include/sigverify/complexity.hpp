#pragma once

#include <span>

namespace sigverify {

// Ordered: Low < Medium < High.
enum class ComplexityLevel { Low, Medium, High };

const char* to_string(ComplexityLevel level);

struct ComplexityThresholds {
  int low_max = 17;             // counts <= this are Low
  int high_min_exclusive = 27;  // counts > this are High
};

ComplexityLevel classify_signature(int n_lognormals,
                                   const ComplexityThresholds& th = {});

// Per-signature levels, then majority vote. A tied vote resolves to the
// lowest tied level: low complexity means the most forgeable signature, so
// the tie is broken toward the conservative assumption.
ComplexityLevel classify_user(std::span<const int> enrollment_counts,
                              const ComplexityThresholds& th = {});

struct StabilityStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

StabilityStats enrollment_stability(std::span<const int> enrollment_counts);

}  // namespace sigverify
