#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "sigverify/complexity.hpp"
#include "sigverify/matrix.hpp"
#include "sigverify/time_functions.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

enum class DtwNormalization {
  PathNodes,  // divide accumulated cost by the number of path cells
  PathSteps   // divide by the number of transitions (cells - 1)
};

struct DtwOptions {
  DtwNormalization normalization = DtwNormalization::PathNodes;
  // Sakoe-Chiba half-width; unconstrained when absent. Widened internally
  // to keep unequal-length pairs reachable.
  std::optional<std::size_t> band;
};

struct DtwResult {
  double distance = 0.0;     // accumulated cost / path length
  double accumulated = 0.0;  // optimal accumulated cost
  std::size_t path_nodes = 0;
};

// Classic dynamic time warping between two channel-major sequences
// (rows = channels, columns = time). Local cost is the Euclidean distance
// between column vectors; the three transitions all weigh 1. Among
// cost-equal predecessors the backtrack prefers the diagonal, which picks
// the shortest optimal path. Exactly symmetric in its arguments.
DtwResult dtw_distance(const Matrix& a, const Matrix& b, const DtwOptions& options = {});

struct ComparisonScore {
  double s = 1.0;             // exp(-d_normalized), in (0, 1]
  double d_normalized = 0.0;
};

ComparisonScore score(const Matrix& a, const Matrix& b, const DtwOptions& options = {});

// Everything needed to verify claims against one enrolled user: the four
// first-session references reduced to the complexity-conditioned channels.
struct UserTemplate {
  std::string user_id;
  std::array<Matrix, 4> references;
  ComplexityLevel complexity = ComplexityLevel::Medium;
  FeatureSubset subset;
  DeviceProfile profile = DeviceProfile::Office;
};

struct VerifyResult {
  double final_score = 0.0;  // mean of the four one-to-one scores
  std::array<double, 4> per_reference{};
};

// The probe must already be reduced to the template's channel subset.
VerifyResult verify(const UserTemplate& tmpl, const Matrix& probe,
                    const DtwOptions& options = {});

// Template file: header "TPL1 <user_id> <complexity> <profile> <subset>",
// then four blocks "REF <rows> <cols>" followed by rows lines of cols
// numbers each. Values round-trip bit-exactly.
std::string write_template(const UserTemplate& tmpl);
UserTemplate parse_template(std::string_view text);
UserTemplate load_template_file(const std::filesystem::path& path);
void save_template_file(const std::filesystem::path& path, const UserTemplate& tmpl);

}  // namespace sigverify
