#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigverify/complexity.hpp"
#include "sigverify/lognormal.hpp"
#include "sigverify/matcher.hpp"
#include "sigverify/preprocess.hpp"
#include "sigverify/signal_io.hpp"
#include "sigverify/time_functions.hpp"

namespace sigverify {

struct ScoreEntry {
  std::string user_id;  // the claimed identity (template owner)
  std::string probe;    // probe path relative to the dataset root
  double score = 0.0;   // mean of the four one-to-one similarities
};

// Lists are sorted by (user_id, probe) so downstream reports are
// byte-identical no matter how the comparisons were scheduled.
struct ScoreSet {
  std::vector<ScoreEntry> genuine;
  std::vector<ScoreEntry> skilled;
  std::vector<ScoreEntry> random;
};

struct ProtocolConfig {
  Split split = Split::Eval;
  Modality train_modality = Modality::Pen;
  Modality test_modality = Modality::Pen;
  DeviceProfile profile = DeviceProfile::Office;
  ComplexityThresholds thresholds{};
  // When set, every user matches on these channels instead of the
  // complexity-conditioned defaults.
  std::optional<FeatureSubset> subset_override;
  PreprocessOptions preprocess{};
  DecomposeOptions decompose{};
  DtwOptions dtw{};
  int jobs = 1;
  std::uint64_t seed = 0;  // not consumed here; echoed into every report
};

struct ProtocolResult {
  ScoreSet scores;
  std::map<std::string, ComplexityLevel> user_levels;   // evaluated users
  std::map<std::string, std::vector<int>> user_counts;  // enrollment strokes
  std::vector<std::string> skipped_users;  // too few enrollment signatures
};

// One verification batch over a manifest's chosen split. Per user: a
// template from the first four first-session genuine signatures of the
// training modality, then genuine probes (later sessions, test modality),
// that user's skilled forgeries (test modality), and the first genuine
// test-modality signature of every other user of the split as random
// forgeries. Users with fewer than four enrollment signatures are skipped
// and recorded. Throws EmptyEvaluationSplit when no comparison happens at
// all. Deterministic for any jobs value.
ProtocolResult run_protocol(const DatasetManifest& manifest,
                            const ProtocolConfig& config);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Threshold sweep over the union of observed scores: an impostor is
// accepted when its score >= threshold, a genuine rejected when its score
// < threshold. When no swept threshold makes the two rates exactly equal,
// the crossing is interpolated linearly between the adjacent sweep points
// (an always-reject point one unit past the largest score caps the sweep).
EerResult compute_eer(std::span<const double> genuine,
                      std::span<const double> impostor);

struct FarFrrPoint {
  double far_target = 0.0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

// Operating points at the edge of a FAR budget, one per target: the
// largest swept threshold whose FAR still reaches the target. A target of
// zero asks for the first threshold rejecting every impostor; a target of
// one (or more) is the accept-everything operating point.
std::vector<FarFrrPoint> far_frr_curve(std::span<const double> genuine,
                                       std::span<const double> impostor,
                                       std::span<const double> far_grid);

struct CurvePoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

// Full sweep over every distinct score plus the final always-reject point;
// FAR is non-increasing and FRR non-decreasing along the result.
std::vector<CurvePoint> score_curve(std::span<const double> genuine,
                                    std::span<const double> impostor);

struct LevelCell {
  int n_users = 0;  // distinct claimed identities scored in this cell
  std::size_t n_genuine = 0;
  std::size_t n_skilled = 0;
  std::size_t n_random = 0;
  std::size_t n_comparisons = 0;  // one-to-one matches: 4 per final score
  // Absent when a score list is empty; absence is not zero.
  std::optional<EerResult> eer_skilled;
  std::optional<EerResult> eer_random;
};

struct EvaluationReport {
  std::map<ComplexityLevel, LevelCell> per_level;  // only levels present
  LevelCell pooled;
  std::vector<CurvePoint> skilled_curve;  // pooled genuine vs skilled
  std::vector<CurvePoint> random_curve;   // pooled genuine vs random
  ProtocolConfig config;                  // echoed verbatim into renderings
};

// Splits the score set by each claimed user's complexity level and fills
// per-level and pooled cells. Throws MissingLevel when a scored user has
// no level.
EvaluationReport report(const ScoreSet& scores,
                        const std::map<std::string, ComplexityLevel>& levels,
                        const ProtocolConfig& config);

// Renderings are byte-deterministic for identical inputs.
std::string render_report_text(const EvaluationReport& report);
std::string render_report_json(const EvaluationReport& report);
std::string render_curve_csv(std::span<const CurvePoint> curve);

}  // namespace sigverify
