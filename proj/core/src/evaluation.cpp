#include "sigverify/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <unordered_map>
#include <utility>

#include "json.hpp"

#include "sigverify/errors.hpp"
#include "sigverify/selection.hpp"
#include "detail/text.hpp"

namespace sigverify {

namespace {

// ---------------------------------------------------------------------------
// Rate machinery shared by compute_eer, far_frr_curve and score_curve.
//
// Acceptance rule: an attempt is accepted when its score >= threshold. So
// FAR(t) is the fraction of impostor scores >= t (non-increasing in t) and
// FRR(t) the fraction of genuine scores < t (non-decreasing). Sweeping the
// union of observed scores visits every distinct operating point; the
// "always reject" endpoint one unit past the largest score closes both
// curves at (FAR 0, FRR 1).

struct RateSweep {
  std::vector<double> thresholds;  // ascending, distinct, observed only
  std::vector<double> far;
  std::vector<double> frr;
  double reject_all_threshold = 0.0;
};

RateSweep sweep_rates(std::span<const double> genuine,
                      std::span<const double> impostor) {
  if (genuine.empty())
    throw EmptyScoreList("score sweep: genuine score list is empty");
  if (impostor.empty())
    throw EmptyScoreList("score sweep: impostor score list is empty");

  std::vector<double> gen(genuine.begin(), genuine.end());
  std::vector<double> imp(impostor.begin(), impostor.end());
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  RateSweep sweep;
  sweep.thresholds.reserve(gen.size() + imp.size());
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(),
             std::back_inserter(sweep.thresholds));
  sweep.thresholds.erase(
      std::unique(sweep.thresholds.begin(), sweep.thresholds.end()),
      sweep.thresholds.end());

  const double n_gen = static_cast<double>(gen.size());
  const double n_imp = static_cast<double>(imp.size());
  sweep.far.reserve(sweep.thresholds.size());
  sweep.frr.reserve(sweep.thresholds.size());
  for (double t : sweep.thresholds) {
    auto imp_below = std::lower_bound(imp.begin(), imp.end(), t) - imp.begin();
    auto gen_below = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    sweep.far.push_back(static_cast<double>(imp.size() - imp_below) / n_imp);
    sweep.frr.push_back(static_cast<double>(gen_below) / n_gen);
  }
  sweep.reject_all_threshold = sweep.thresholds.back() + 1.0;
  return sweep;
}

}  // namespace

EerResult compute_eer(std::span<const double> genuine,
                      std::span<const double> impostor) {
  RateSweep sweep = sweep_rates(genuine, impostor);

  // diff = FAR - FRR is non-increasing, starts at +1 (at the global minimum
  // every impostor is accepted and no genuine rejected) and ends at -1 on
  // the appended always-reject point, so a sign change always exists.
  std::vector<double> thr = std::move(sweep.thresholds);
  std::vector<double> far = std::move(sweep.far);
  std::vector<double> frr = std::move(sweep.frr);
  thr.push_back(sweep.reject_all_threshold);
  far.push_back(0.0);
  frr.push_back(1.0);

  std::size_t k = 0;
  for (; k + 1 < thr.size(); ++k) {
    double diff_here = far[k] - frr[k];
    double diff_next = far[k + 1] - frr[k + 1];
    if (diff_here >= 0.0 && diff_next < 0.0) break;
  }
  const double diff_k = far[k] - frr[k];
  if (diff_k == 0.0) return {far[k], thr[k]};

  const double diff_next = far[k + 1] - frr[k + 1];
  const double x = diff_k / (diff_k - diff_next);
  EerResult out;
  out.eer = far[k] + x * (far[k + 1] - far[k]);
  out.threshold = thr[k] + x * (thr[k + 1] - thr[k]);
  return out;
}

std::vector<FarFrrPoint> far_frr_curve(std::span<const double> genuine,
                                       std::span<const double> impostor,
                                       std::span<const double> far_grid) {
  for (double t : far_grid) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0)
      throw Error("far_frr_curve: FAR target " + detail::fmt_g17(t) +
                  " outside [0, 1]");
  }
  RateSweep sweep = sweep_rates(genuine, impostor);

  std::vector<FarFrrPoint> out;
  out.reserve(far_grid.size());
  for (double target : far_grid) {
    FarFrrPoint p;
    p.far_target = target;
    if (target == 0.0) {
      // First operating point rejecting every impostor.
      std::size_t k = 0;
      while (k < sweep.thresholds.size() && sweep.far[k] != 0.0) ++k;
      if (k == sweep.thresholds.size()) {
        p.threshold = sweep.reject_all_threshold;
        p.far = 0.0;
        p.frr = 1.0;
      } else {
        p.threshold = sweep.thresholds[k];
        p.far = sweep.far[k];
        p.frr = sweep.frr[k];
      }
    } else if (target >= 1.0) {
      // Accept everything: the lowest observed score admits every attempt.
      p.threshold = sweep.thresholds.front();
      p.far = sweep.far.front();
      p.frr = sweep.frr.front();
    } else {
      // Largest threshold whose FAR still reaches the budget; FAR is
      // non-increasing so scan from the strict end backwards.
      std::size_t k = sweep.thresholds.size();
      while (k > 0 && sweep.far[k - 1] < target) --k;
      // k >= 1 always: FAR at the smallest threshold is 1.
      p.threshold = sweep.thresholds[k - 1];
      p.far = sweep.far[k - 1];
      p.frr = sweep.frr[k - 1];
    }
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> score_curve(std::span<const double> genuine,
                                    std::span<const double> impostor) {
  RateSweep sweep = sweep_rates(genuine, impostor);
  std::vector<CurvePoint> curve;
  curve.reserve(sweep.thresholds.size() + 1);
  for (std::size_t k = 0; k < sweep.thresholds.size(); ++k)
    curve.push_back({sweep.thresholds[k], sweep.far[k], sweep.frr[k]});
  curve.push_back({sweep.reject_all_threshold, 0.0, 1.0});
  return curve;
}

// ---------------------------------------------------------------------------
// Protocol runner.

namespace {

struct UserPlan {
  const ManifestUser* user = nullptr;
  std::vector<const ManifestEntry*> enrollment;  // exactly 4 when viable
  std::vector<const ManifestEntry*> genuine_probes;
  std::vector<const ManifestEntry*> skilled_probes;
  std::vector<const ManifestEntry*> random_probes;
};

struct Precomputed {
  ProcessedSignature processed;
  TimeFunctionMatrix functions;
};

struct UserOutcome {
  ComplexityLevel level = ComplexityLevel::Medium;
  std::vector<int> counts;
  std::vector<ScoreEntry> genuine;
  std::vector<ScoreEntry> skilled;
  std::vector<ScoreEntry> random;
  std::exception_ptr error;
};

std::string probe_key(const ManifestEntry& entry,
                      const std::filesystem::path& root) {
  std::filesystem::path rel = entry.path.lexically_relative(root);
  if (rel.empty()) rel = entry.path;
  return rel.generic_string();
}

// The first genuine test-modality signature of a user, ordered by session
// and then by manifest position: the deterministic random-forgery probe.
const ManifestEntry* first_genuine_probe(const ManifestUser& user,
                                         Modality modality) {
  const ManifestEntry* best = nullptr;
  for (const ManifestEntry& e : user.entries) {
    if (e.modality != modality || e.label != Label::Genuine) continue;
    if (best == nullptr || e.session < best->session) best = &e;
  }
  return best;
}

}  // namespace

ProtocolResult run_protocol(const DatasetManifest& manifest,
                            const ProtocolConfig& config) {
  std::vector<const ManifestUser*> split_users;
  for (const ManifestUser& u : manifest.users)
    if (u.split == config.split) split_users.push_back(&u);
  if (split_users.empty())
    throw EmptyEvaluationSplit("run_protocol: manifest has no users in the " +
                               std::string(to_string(config.split)) +
                               " split");

  ProtocolResult result;

  // Plan every comparison up front so the whole batch can be preloaded
  // once and the per-user work becomes pure computation.
  std::vector<UserPlan> plans;
  for (const ManifestUser* user : split_users) {
    UserPlan plan;
    plan.user = user;
    for (const ManifestEntry& e : user->entries) {
      if (plan.enrollment.size() < 4 && e.modality == config.train_modality &&
          e.session == 1 && e.label == Label::Genuine)
        plan.enrollment.push_back(&e);
      if (e.modality == config.test_modality && e.label == Label::Genuine &&
          e.session >= 2)
        plan.genuine_probes.push_back(&e);
      if (e.modality == config.test_modality && e.label == Label::Skilled)
        plan.skilled_probes.push_back(&e);
    }
    if (plan.enrollment.size() < 4) {
      result.skipped_users.push_back(user->user_id);
      continue;
    }
    for (const ManifestUser* other : split_users) {
      if (other == user) continue;
      if (const ManifestEntry* probe =
              first_genuine_probe(*other, config.test_modality))
        plan.random_probes.push_back(probe);
    }
    plans.push_back(std::move(plan));
  }
  if (plans.empty())
    throw EmptyEvaluationSplit(
        "run_protocol: every user of the split lacks the four first-session "
        "enrollment signatures");

  // Load, resample and featurize each distinct file once, sequentially;
  // the parallel phase below only reads this table.
  std::unordered_map<std::string, Precomputed> table;
  auto preload = [&](const ManifestEntry* entry) {
    std::string key = entry->path.string();
    if (table.count(key) != 0) return;
    try {
      RawSignature raw = load_signature_file(entry->path);
      Precomputed pre;
      pre.processed = preprocess(raw, config.preprocess);
      pre.functions = compute_time_functions(pre.processed);
      table.emplace(std::move(key), std::move(pre));
    } catch (const ParseError&) {
      throw;  // already carries the file path
    } catch (const Error& e) {
      throw Error(entry->path.string() + ": " + e.what());
    }
  };
  for (const UserPlan& plan : plans) {
    for (const ManifestEntry* e : plan.enrollment) preload(e);
    for (const ManifestEntry* e : plan.genuine_probes) preload(e);
    for (const ManifestEntry* e : plan.skilled_probes) preload(e);
    for (const ManifestEntry* e : plan.random_probes) preload(e);
  }

  auto evaluate_user = [&](const UserPlan& plan) {
    UserOutcome out;
    const std::string& uid = plan.user->user_id;

    out.counts.reserve(plan.enrollment.size());
    for (const ManifestEntry* e : plan.enrollment) {
      const Precomputed& pre = table.at(e->path.string());
      LogNormalDecomposition dec = decompose(pre.processed, config.decompose);
      out.counts.push_back(count_strokes(dec));
    }
    out.level = classify_user(out.counts, config.thresholds);

    FeatureSubset subset = config.subset_override
                               ? *config.subset_override
                               : default_subsets(config.profile, out.level);

    UserTemplate tmpl;
    tmpl.user_id = uid;
    tmpl.complexity = out.level;
    tmpl.subset = subset;
    tmpl.profile = config.profile;
    for (std::size_t k = 0; k < 4; ++k)
      tmpl.references[k] = select_channels(
          table.at(plan.enrollment[k]->path.string()).functions, subset);

    auto score_probe = [&](const ManifestEntry* probe) {
      Matrix reduced =
          select_channels(table.at(probe->path.string()).functions, subset);
      VerifyResult v = verify(tmpl, reduced, config.dtw);
      return ScoreEntry{uid, probe_key(*probe, manifest.root), v.final_score};
    };
    for (const ManifestEntry* p : plan.genuine_probes)
      out.genuine.push_back(score_probe(p));
    for (const ManifestEntry* p : plan.skilled_probes)
      out.skilled.push_back(score_probe(p));
    for (const ManifestEntry* p : plan.random_probes)
      out.random.push_back(score_probe(p));
    return out;
  };

  // Users are independent; each worker writes only its own slot, so any
  // worker count assembles into the same result.
  std::vector<UserOutcome> outcomes(plans.size());
  const std::size_t workers = std::min<std::size_t>(
      plans.size(), static_cast<std::size_t>(std::max(1, config.jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < plans.size(); ++i)
      outcomes[i] = evaluate_user(plans[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto drain = [&] {
      for (;;) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= plans.size()) return;
        try {
          outcomes[i] = evaluate_user(plans[i]);
        } catch (...) {
          outcomes[i].error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
    for (const UserOutcome& out : outcomes)
      if (out.error) std::rethrow_exception(out.error);
  }

  for (std::size_t i = 0; i < plans.size(); ++i) {
    const std::string& uid = plans[i].user->user_id;
    UserOutcome& out = outcomes[i];
    result.user_levels.emplace(uid, out.level);
    result.user_counts.emplace(uid, std::move(out.counts));
    auto append = [](std::vector<ScoreEntry>& dst, std::vector<ScoreEntry>& src) {
      dst.insert(dst.end(), std::make_move_iterator(src.begin()),
                 std::make_move_iterator(src.end()));
    };
    append(result.scores.genuine, out.genuine);
    append(result.scores.skilled, out.skilled);
    append(result.scores.random, out.random);
  }

  auto order = [](const ScoreEntry& a, const ScoreEntry& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.probe < b.probe;
  };
  std::stable_sort(result.scores.genuine.begin(), result.scores.genuine.end(), order);
  std::stable_sort(result.scores.skilled.begin(), result.scores.skilled.end(), order);
  std::stable_sort(result.scores.random.begin(), result.scores.random.end(), order);

  if (result.scores.genuine.empty() && result.scores.skilled.empty() &&
      result.scores.random.empty())
    throw EmptyEvaluationSplit(
        "run_protocol: no comparison possible; no probe in the split matches "
        "the test modality (" +
        std::string(to_string(config.test_modality)) + ")");
  return result;
}

// ---------------------------------------------------------------------------
// Report assembly and rendering.

namespace {

struct CellScores {
  std::set<std::string> users;
  std::vector<double> genuine;
  std::vector<double> skilled;
  std::vector<double> random;
};

LevelCell make_cell(const CellScores& s) {
  LevelCell cell;
  cell.n_users = static_cast<int>(s.users.size());
  cell.n_genuine = s.genuine.size();
  cell.n_skilled = s.skilled.size();
  cell.n_random = s.random.size();
  cell.n_comparisons = 4 * (s.genuine.size() + s.skilled.size() + s.random.size());
  if (!s.genuine.empty() && !s.skilled.empty())
    cell.eer_skilled = compute_eer(s.genuine, s.skilled);
  if (!s.genuine.empty() && !s.random.empty())
    cell.eer_random = compute_eer(s.genuine, s.random);
  return cell;
}

const char* to_string(DtwNormalization n) {
  return n == DtwNormalization::PathNodes ? "path-nodes" : "path-steps";
}

}  // namespace

EvaluationReport report(const ScoreSet& scores,
                        const std::map<std::string, ComplexityLevel>& levels,
                        const ProtocolConfig& config) {
  std::map<ComplexityLevel, CellScores> grouped;
  CellScores pooled;

  auto level_of = [&](const std::string& user_id) {
    auto it = levels.find(user_id);
    if (it == levels.end())
      throw MissingLevel("report: no complexity level stored for user \"" +
                         user_id + "\"");
    return it->second;
  };
  auto fold = [&](const std::vector<ScoreEntry>& entries,
                  std::vector<double> CellScores::*list) {
    for (const ScoreEntry& e : entries) {
      CellScores& cell = grouped[level_of(e.user_id)];
      cell.users.insert(e.user_id);
      (cell.*list).push_back(e.score);
      pooled.users.insert(e.user_id);
      (pooled.*list).push_back(e.score);
    }
  };
  fold(scores.genuine, &CellScores::genuine);
  fold(scores.skilled, &CellScores::skilled);
  fold(scores.random, &CellScores::random);

  EvaluationReport rep;
  rep.config = config;
  for (const auto& [level, cell] : grouped)
    rep.per_level.emplace(level, make_cell(cell));
  rep.pooled = make_cell(pooled);
  if (!pooled.genuine.empty() && !pooled.skilled.empty())
    rep.skilled_curve = score_curve(pooled.genuine, pooled.skilled);
  if (!pooled.genuine.empty() && !pooled.random.empty())
    rep.random_curve = score_curve(pooled.genuine, pooled.random);
  return rep;
}

namespace {

std::string fmt_eer(const std::optional<EerResult>& eer) {
  if (!eer) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f%% @ %.6f", eer->eer * 100.0,
                eer->threshold);
  return buf;
}

std::string config_lines(const ProtocolConfig& c, const char* indent) {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%-19s %s\n", indent, key, value.c_str());
    out += buf;
  };
  kv("split", to_string(c.split));
  kv("train-modality", to_string(c.train_modality));
  kv("test-modality", to_string(c.test_modality));
  kv("profile", to_string(c.profile));
  kv("complexity-low-max", std::to_string(c.thresholds.low_max));
  kv("complexity-high-min", std::to_string(c.thresholds.high_min_exclusive + 1));
  kv("channel-subset", c.subset_override ? c.subset_override->to_csv()
                                         : std::string("complexity defaults"));
  kv("resample-rate-hz", detail::fmt_g17(c.preprocess.rate_hz));
  kv("normalize-first", c.preprocess.normalize_first ? "yes" : "no");
  kv("snr-target-db", detail::fmt_g17(c.decompose.snr_target_db));
  kv("max-strokes", std::to_string(c.decompose.max_strokes));
  kv("amp-threshold", detail::fmt_g17(c.decompose.amp_threshold));
  kv("dtw-normalization", to_string(c.dtw.normalization));
  kv("dtw-band", c.dtw.band ? std::to_string(*c.dtw.band)
                            : std::string("unlimited"));
  // The worker count is an execution detail, not part of the protocol:
  // reports must come out byte-identical for any --jobs value.
  kv("seed", std::to_string(c.seed));
  return out;
}

}  // namespace

std::string render_report_text(const EvaluationReport& report) {
  std::string out;
  out += "signature verification report\n";
  out += "=============================\n\n";
  out += "config\n";
  out += config_lines(report.config, "  ");
  out += "\nresults\n";

  char buf[256];
  std::snprintf(buf, sizeof buf, "  %-8s %6s %8s %8s %7s %8s  %-22s %-22s\n",
                "level", "users", "genuine", "skilled", "random", "matches",
                "eer-skilled", "eer-random");
  out += buf;
  auto row = [&](const std::string& name, const LevelCell& cell) {
    std::snprintf(buf, sizeof buf, "  %-8s %6d %8zu %8zu %7zu %8zu  %-22s %-22s\n",
                  name.c_str(), cell.n_users, cell.n_genuine, cell.n_skilled,
                  cell.n_random, cell.n_comparisons,
                  fmt_eer(cell.eer_skilled).c_str(),
                  fmt_eer(cell.eer_random).c_str());
    out += buf;
  };
  for (const auto& [level, cell] : report.per_level) row(to_string(level), cell);
  row("pooled", report.pooled);
  return out;
}

namespace {

nlohmann::ordered_json cell_json(const LevelCell& cell) {
  nlohmann::ordered_json j;
  j["users"] = cell.n_users;
  j["genuine"] = cell.n_genuine;
  j["skilled"] = cell.n_skilled;
  j["random"] = cell.n_random;
  j["comparisons"] = cell.n_comparisons;
  auto eer_json = [](const std::optional<EerResult>& e) -> nlohmann::ordered_json {
    if (!e) return nullptr;
    return {{"eer", e->eer}, {"threshold", e->threshold}};
  };
  j["eer_skilled"] = eer_json(cell.eer_skilled);
  j["eer_random"] = eer_json(cell.eer_random);
  return j;
}

nlohmann::ordered_json curve_json(std::span<const CurvePoint> curve) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CurvePoint& p : curve)
    arr.push_back({{"threshold", p.threshold}, {"far", p.far}, {"frr", p.frr}});
  return arr;
}

}  // namespace

std::string render_report_json(const EvaluationReport& report) {
  const ProtocolConfig& c = report.config;
  nlohmann::ordered_json j;
  j["config"] = {
      {"split", to_string(c.split)},
      {"train_modality", to_string(c.train_modality)},
      {"test_modality", to_string(c.test_modality)},
      {"profile", to_string(c.profile)},
      {"complexity_low_max", c.thresholds.low_max},
      {"complexity_high_min", c.thresholds.high_min_exclusive + 1},
      {"channel_subset", c.subset_override
                             ? nlohmann::ordered_json(c.subset_override->to_csv())
                             : nlohmann::ordered_json(nullptr)},
      {"resample_rate_hz", c.preprocess.rate_hz},
      {"normalize_first", c.preprocess.normalize_first},
      {"snr_target_db", c.decompose.snr_target_db},
      {"max_strokes", c.decompose.max_strokes},
      {"amp_threshold", c.decompose.amp_threshold},
      {"dtw_normalization", to_string(c.dtw.normalization)},
      {"dtw_band", c.dtw.band ? nlohmann::ordered_json(*c.dtw.band)
                              : nlohmann::ordered_json(nullptr)},
      {"seed", c.seed},
  };
  nlohmann::ordered_json levels = nlohmann::ordered_json::object();
  for (const auto& [level, cell] : report.per_level)
    levels[to_string(level)] = cell_json(cell);
  j["per_level"] = levels;
  j["pooled"] = cell_json(report.pooled);
  j["curves"] = {{"skilled", curve_json(report.skilled_curve)},
                 {"random", curve_json(report.random_curve)}};
  return j.dump(2) + "\n";
}

std::string render_curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "threshold,far,frr\n";
  for (const CurvePoint& p : curve) {
    out += detail::fmt_g17(p.threshold);
    out += ',';
    out += detail::fmt_g17(p.far);
    out += ',';
    out += detail::fmt_g17(p.frr);
    out += '\n';
  }
  return out;
}

}  // namespace sigverify
