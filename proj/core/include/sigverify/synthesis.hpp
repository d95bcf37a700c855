#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sigverify/complexity.hpp"
#include "sigverify/lognormal.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

struct StrokeCountRange {
  int lo = 10;  // inclusive
  int hi = 15;  // inclusive
};

// Per-stroke wobble widths used when deriving one signature from a user's
// archetype. Each width multiplies a unit normal draw; "rel" widths scale
// the archetype value, "abs" widths add to it.
struct JitterSpec {
  double d_rel = 0.06;
  double mu_abs = 0.02;
  double sigma_rel = 0.03;
  double gap_rel = 0.02;    // applied to inter-onset gaps, not t0 directly
  double angle_abs = 0.08;  // radians, on both headings
};

struct SynthesisOptions {
  int n_users = 12;
  int dev_users = 0;  // this many leading users are tagged dev, the rest eval
  int sessions = 2;   // session 1 provides the enrollment signatures
  int genuine_per_session = 4;
  int skilled_count = 6;
  std::vector<Modality> modalities = {Modality::Pen};
  // Ground-truth stroke-count ranges per complexity level; users cycle
  // low, medium, high. Defaults keep every level at least two recovery
  // errors away from the classification boundaries.
  StrokeCountRange low{10, 15};
  StrokeCountRange medium{20, 25};
  StrokeCountRange high{30, 36};
  JitterSpec genuine_jitter{};
  // Forgeries reuse the genuine jitter widths scaled by this factor — the
  // same factor at every complexity level. These are synthetic stand-ins
  // for human skilled forgeries, not a model of them.
  double forgery_scale = 2.5;
  double rate_hz = 200.0;
  std::uint64_t seed = 0;
};

struct SyntheticUserTruth {
  std::string user_id;
  ComplexityLevel level = ComplexityLevel::Low;
  int stroke_count = 0;  // archetype ground truth
};

struct SynthesisResult {
  std::filesystem::path root;
  std::vector<SyntheticUserTruth> users;
};

// Writes <out_dir>/manifest.tsv, <out_dir>/ground_truth.tsv (user_id,
// level, stroke_count) and one signature file per manifest row. Every byte
// is a pure function of the options, so equal options give byte-identical
// datasets. Throws Error on nonsensical options and IoFailure when the
// directory or a file cannot be written.
SynthesisResult synthesize_dataset(const std::filesystem::path& out_dir,
                                   const SynthesisOptions& options);

// One user's signing habit: stroke parameters drawn from ranges that keep
// neighbouring speed bells separated (onset gaps at least 2.2 times the
// wider neighbour's exp(mu + sigma)), so analysis can recover the count.
std::vector<LogNormalStroke> make_archetype(Rng& rng, int stroke_count);

// One realization of the archetype: per-stroke parameter wobble plus gap
// wobble, widths scaled by `scale` (1 for genuine attempts, the forgery
// factor for impostor attempts). Onset order is preserved.
std::vector<LogNormalStroke> jitter_strokes(
    std::span<const LogNormalStroke> archetype, Rng& rng,
    const JitterSpec& jitter, double scale);

}  // namespace sigverify
