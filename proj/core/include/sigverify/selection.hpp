#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sigverify/complexity.hpp"
#include "sigverify/time_functions.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

// Maps a candidate channel subset to its development-set EER. Must be
// deterministic; evaluations may be repeated for identical subsets.
using SubsetEvaluator = std::function<double(const FeatureSubset&)>;

enum class SelectionAction { Add, Remove };

struct SelectionStep {
  int step = 0;
  SelectionAction action = SelectionAction::Add;
  int index = 0;   // 1-based channel index
  double eer = 0;  // evaluator value after the step
};

struct SelectionResult {
  FeatureSubset subset;
  double dev_eer = 0.0;
  std::vector<SelectionStep> trace;
};

// Sequential forward floating selection. Adds the best strictly-improving
// candidate, then floats: removes features as long as removal does not
// worsen the EER (ties resolve toward the smaller subset). Equal-EER
// candidates resolve to the lowest channel index. Stops when no addition
// strictly improves or the subset reaches max_size.
SelectionResult sffs(const FeatureSubset& candidates, const SubsetEvaluator& dev_eval,
                     std::size_t max_size = 10);

// The shipped per-level channel sets. Three building blocks exist per
// device profile: channels useful at every complexity, channels for
// medium-and-high writers, channels for medium-and-low writers. A level's
// runtime set is the union of the blocks that cover it, so Medium uses all
// three.
FeatureSubset default_subsets(DeviceProfile profile, ComplexityLevel level);

}  // namespace sigverify
