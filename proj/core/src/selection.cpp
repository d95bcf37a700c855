#include "sigverify/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

double checked_eval(const SubsetEvaluator& eval, const FeatureSubset& subset) {
  double value;
  try {
    value = eval(subset);
  } catch (const std::exception& e) {
    throw EvaluatorFailure("subset {" + subset.to_csv() + "} failed: " + e.what());
  }
  if (!std::isfinite(value))
    throw EvaluatorFailure("subset {" + subset.to_csv() +
                           "} evaluated to a non-finite EER");
  return value;
}

FeatureSubset with_feature(const std::vector<int>& base, int feature) {
  auto indices = base;
  indices.push_back(feature);
  return FeatureSubset(std::move(indices));
}

FeatureSubset without_feature(const std::vector<int>& base, int feature) {
  std::vector<int> indices;
  indices.reserve(base.size() - 1);
  for (const int f : base)
    if (f != feature) indices.push_back(f);
  return FeatureSubset(std::move(indices));
}

}  // namespace

SelectionResult sffs(const FeatureSubset& candidates, const SubsetEvaluator& dev_eval,
                     std::size_t max_size) {
  if (candidates.size() == 0) throw EmptySubset("no candidate channels");
  if (max_size == 0) throw Error("sffs: max_size must be positive");

  std::vector<int> current;
  double current_eer = std::numeric_limits<double>::infinity();
  SelectionResult result;
  int step = 0;

  while (current.size() < max_size) {
    // Forward: best strictly-improving addition, lowest index on ties.
    int best_feature = 0;
    double best_eer = std::numeric_limits<double>::infinity();
    for (const int f : candidates.indices()) {
      if (std::binary_search(current.begin(), current.end(), f)) continue;
      const double eer = checked_eval(dev_eval, with_feature(current, f));
      if (eer < best_eer) {
        best_eer = eer;
        best_feature = f;
      }
    }
    if (best_feature == 0 || !(best_eer < current_eer)) break;

    current.push_back(best_feature);
    std::sort(current.begin(), current.end());
    current_eer = best_eer;
    result.trace.push_back({++step, SelectionAction::Add, best_feature, current_eer});

    // Floating: drop features while that is at least as good, preferring
    // the smaller subset on ties.
    while (current.size() >= 2) {
      int drop_feature = 0;
      double drop_eer = std::numeric_limits<double>::infinity();
      for (const int f : current) {
        const double eer = checked_eval(dev_eval, without_feature(current, f));
        if (eer < drop_eer) {
          drop_eer = eer;
          drop_feature = f;
        }
      }
      if (drop_feature == 0 || !(drop_eer <= current_eer)) break;
      current.erase(std::find(current.begin(), current.end(), drop_feature));
      current_eer = drop_eer;
      result.trace.push_back(
          {++step, SelectionAction::Remove, drop_feature, current_eer});
    }
  }

  if (current.empty()) {
    // No addition ever improved on infinity; evaluator rejected everything.
    throw EvaluatorFailure("selection made no progress from the empty set");
  }
  result.subset = FeatureSubset(std::move(current));
  result.dev_eer = current_eer;
  return result;
}

FeatureSubset default_subsets(DeviceProfile profile, ComplexityLevel level) {
  // Building blocks per device family; indices follow the channel table.
  const std::vector<int> office_all = {12, 15};
  const std::vector<int> office_high = {10, 14, 17};
  const std::vector<int> office_low = {19};
  const std::vector<int> mobile_all = {2, 7};
  const std::vector<int> mobile_high = {8, 9, 15};
  const std::vector<int> mobile_low = {1, 18};

  const auto& all = profile == DeviceProfile::Office ? office_all : mobile_all;
  const auto& high = profile == DeviceProfile::Office ? office_high : mobile_high;
  const auto& low = profile == DeviceProfile::Office ? office_low : mobile_low;

  std::vector<int> indices = all;
  if (level != ComplexityLevel::Low)
    indices.insert(indices.end(), high.begin(), high.end());
  if (level != ComplexityLevel::High)
    indices.insert(indices.end(), low.begin(), low.end());
  return FeatureSubset(std::move(indices));
}

}  // namespace sigverify
