#include "sigverify/complexity.hpp"

#include <array>
#include <cmath>

#include "sigverify/errors.hpp"

namespace sigverify {

const char* to_string(ComplexityLevel level) {
  switch (level) {
    case ComplexityLevel::Low:
      return "low";
    case ComplexityLevel::Medium:
      return "medium";
    default:
      return "high";
  }
}

ComplexityLevel classify_signature(int n_lognormals, const ComplexityThresholds& th) {
  if (n_lognormals <= th.low_max) return ComplexityLevel::Low;
  if (n_lognormals > th.high_min_exclusive) return ComplexityLevel::High;
  return ComplexityLevel::Medium;
}

ComplexityLevel classify_user(std::span<const int> enrollment_counts,
                              const ComplexityThresholds& th) {
  if (enrollment_counts.empty())
    throw EmptyEnrollment("majority vote needs at least one enrollment count");

  std::array<int, 3> votes = {0, 0, 0};
  for (const int n : enrollment_counts)
    ++votes[static_cast<std::size_t>(classify_signature(n, th))];

  // Scanning Low to High returns the lowest level on a tied vote.
  std::size_t winner = 0;
  for (std::size_t level = 1; level < votes.size(); ++level)
    if (votes[level] > votes[winner]) winner = level;
  return static_cast<ComplexityLevel>(winner);
}

StabilityStats enrollment_stability(std::span<const int> enrollment_counts) {
  if (enrollment_counts.empty())
    throw EmptyEnrollment("stability stats need at least one enrollment count");

  const double n = static_cast<double>(enrollment_counts.size());
  double mean = 0.0;
  for (const int c : enrollment_counts) mean += static_cast<double>(c);
  mean /= n;

  double ss = 0.0;
  for (const int c : enrollment_counts) {
    const double d = static_cast<double>(c) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / n)};
}

}  // namespace sigverify
