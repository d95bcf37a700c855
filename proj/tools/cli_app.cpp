#include "cli_app.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sigverify/complexity.hpp"
#include "sigverify/errors.hpp"
#include "sigverify/evaluation.hpp"
#include "sigverify/lognormal.hpp"
#include "sigverify/matcher.hpp"
#include "sigverify/preprocess.hpp"
#include "sigverify/selection.hpp"
#include "sigverify/signal_io.hpp"
#include "sigverify/synthesis.hpp"
#include "sigverify/time_functions.hpp"

namespace sigverify::cli {

namespace {

// Options shared by every subcommand; each run_* helper converts them into
// the per-module option structs.
struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string profile = "office";
  int cx_low_max = 17;
  int cx_high_min = 28;  // smallest stroke count classified high
  std::string dtw_norm = "nodes";
  std::int64_t dtw_band = -1;  // negative = unconstrained
  double ln_amp_threshold = 0.025;
  double ln_snr_target = 25.0;
  double rate_hz = 200.0;
};

DeviceProfile device_profile(const GlobalOptions& g) {
  return g.profile == "mobile" ? DeviceProfile::Mobile : DeviceProfile::Office;
}

ComplexityThresholds thresholds(const GlobalOptions& g) {
  return {g.cx_low_max, g.cx_high_min - 1};
}

DtwOptions dtw_options(const GlobalOptions& g) {
  DtwOptions opt;
  opt.normalization = g.dtw_norm == "steps" ? DtwNormalization::PathSteps
                                            : DtwNormalization::PathNodes;
  if (g.dtw_band >= 0) opt.band = static_cast<std::size_t>(g.dtw_band);
  return opt;
}

DecomposeOptions decompose_options(const GlobalOptions& g) {
  DecomposeOptions opt;
  opt.snr_target_db = g.ln_snr_target;
  opt.amp_threshold = g.ln_amp_threshold;
  return opt;
}

PreprocessOptions preprocess_options(const GlobalOptions& g) {
  PreprocessOptions opt;
  opt.rate_hz = g.rate_hz;
  return opt;
}

Modality modality_from(const std::string& name) {
  return name == "finger" ? Modality::Finger : Modality::Pen;
}

void scenario_modalities(const std::string& scenario, Modality& train,
                         Modality& test) {
  const auto dash = scenario.find('-');
  train = modality_from(scenario.substr(0, dash));
  test = modality_from(scenario.substr(dash + 1));
}

std::string fmt_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoFailure("cannot open " + path.string() + " for writing");
  file << text;
  file.flush();
  if (!file) throw IoFailure("failed while writing " + path.string());
}

StrokeCountRange parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("range", "expected lo:hi, got \"" + text + "\"");
  try {
    StrokeCountRange r{std::stoi(text.substr(0, colon)),
                       std::stoi(text.substr(colon + 1))};
    if (r.lo < 1 || r.hi < r.lo)
      throw CLI::ValidationError("range", "need 1 <= lo <= hi in \"" + text + "\"");
    return r;
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("range", "expected integers lo:hi, got \"" + text + "\"");
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  int users = 12;
  int dev_users = 0;
  int sessions = 2;
  int genuine_per_session = 4;
  int skilled = 6;
  std::string modalities = "pen";
  std::string low = "10:15";
  std::string medium = "20:25";
  std::string high = "30:36";
  double forgery_scale = 2.5;
  std::string out_dir;
};

int run_synth(const GlobalOptions& g, const SynthArgs& a, std::ostream& out) {
  SynthesisOptions opt;
  opt.n_users = a.users;
  opt.dev_users = a.dev_users;
  opt.sessions = a.sessions;
  opt.genuine_per_session = a.genuine_per_session;
  opt.skilled_count = a.skilled;
  opt.modalities.clear();
  for (std::size_t pos = 0; pos < a.modalities.size();) {
    auto comma = a.modalities.find(',', pos);
    if (comma == std::string::npos) comma = a.modalities.size();
    opt.modalities.push_back(modality_from(a.modalities.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  opt.low = parse_range(a.low);
  opt.medium = parse_range(a.medium);
  opt.high = parse_range(a.high);
  opt.forgery_scale = a.forgery_scale;
  opt.rate_hz = g.rate_hz;
  opt.seed = g.seed;

  SynthesisResult result = synthesize_dataset(a.out_dir, opt);
  out << "wrote " << result.users.size() << " users under "
      << result.root.generic_string() << " (seed " << g.seed << ")\n";
  for (const SyntheticUserTruth& u : result.users)
    out << u.user_id << ' ' << to_string(u.level) << ' ' << u.stroke_count
        << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// decompose / complexity

int run_decompose(const GlobalOptions& g, const std::string& sig_path,
                  const std::string& out_path, std::ostream& out) {
  RawSignature raw = load_signature_file(sig_path);
  ProcessedSignature processed = preprocess(raw, preprocess_options(g));
  LogNormalDecomposition dec = decompose(processed, decompose_options(g));
  std::string text = write_decomposition(dec);
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: %d strokes, snr %.2f dB -> %s\n",
                  sig_path.c_str(), count_strokes(dec), dec.snr_db,
                  out_path.c_str());
    out << buf;
  }
  return 0;
}

int run_complexity(const GlobalOptions& g,
                   const std::vector<std::string>& paths, std::ostream& out) {
  for (const std::string& path : paths) {
    RawSignature raw = load_signature_file(path);
    ProcessedSignature processed = preprocess(raw, preprocess_options(g));
    LogNormalDecomposition dec = decompose(processed, decompose_options(g));
    const int n = count_strokes(dec);
    out << path << ' ' << n << ' '
        << to_string(classify_signature(n, thresholds(g))) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// enroll / verify

int run_enroll(const GlobalOptions& g, const std::string& user_id,
               const std::vector<std::string>& sig_paths,
               const std::string& out_path, std::ostream& out) {
  if (sig_paths.size() != 4)
    throw InsufficientEnrollment("enroll: exactly 4 signatures are required, got " +
                                 std::to_string(sig_paths.size()));

  std::vector<int> counts;
  std::vector<TimeFunctionMatrix> functions;
  for (const std::string& path : sig_paths) {
    RawSignature raw = load_signature_file(path);
    ProcessedSignature processed = preprocess(raw, preprocess_options(g));
    counts.push_back(count_strokes(decompose(processed, decompose_options(g))));
    functions.push_back(compute_time_functions(processed));
  }

  UserTemplate tmpl;
  tmpl.user_id = user_id;
  tmpl.complexity = classify_user(counts, thresholds(g));
  tmpl.profile = device_profile(g);
  tmpl.subset = default_subsets(tmpl.profile, tmpl.complexity);
  for (std::size_t k = 0; k < 4; ++k)
    tmpl.references[k] = select_channels(functions[k], tmpl.subset);
  save_template_file(out_path, tmpl);

  out << "enrolled " << user_id << ": complexity " << to_string(tmpl.complexity)
      << ", channels " << tmpl.subset.to_csv() << ", strokes";
  for (int n : counts) out << ' ' << n;
  out << " -> " << out_path << '\n';
  return 0;
}

int run_verify(const GlobalOptions& g, bool profile_given,
               const std::string& template_path, const std::string& probe_path,
               double threshold, std::ostream& out) {
  UserTemplate tmpl = load_template_file(template_path);
  if (profile_given && tmpl.profile != device_profile(g))
    throw ProfileMismatch("verify: template was enrolled for the " +
                          std::string(to_string(tmpl.profile)) +
                          " profile but --profile requests " + g.profile);

  RawSignature raw = load_signature_file(probe_path);
  ProcessedSignature processed = preprocess(raw, preprocess_options(g));
  Matrix probe = select_channels(compute_time_functions(processed), tmpl.subset);
  VerifyResult result = verify(tmpl, probe, dtw_options(g));

  out << tmpl.user_id << ' ' << fmt_score(result.final_score) << ' '
      << (result.final_score >= threshold ? "accept" : "reject") << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
  std::string manifest_dir;
  std::string scenario = "pen-pen";
  std::string candidates;  // csv, empty = all 21
  std::size_t max_size = 10;
};

// Feature selection re-scores the same probes under many candidate
// subsets, so the per-file channel matrices are computed once here and
// only select_channels + DTW run inside the evaluator. Complexity levels
// are irrelevant under a subset override and are never computed.
int run_select(const GlobalOptions& g, const SelectArgs& a, std::ostream& out,
               std::ostream& err) {
  DatasetManifest manifest = load_manifest(a.manifest_dir);
  Modality train = Modality::Pen;
  Modality test = Modality::Pen;
  scenario_modalities(a.scenario, train, test);

  struct Planned {
    std::vector<const ManifestEntry*> enrollment;
    std::vector<const ManifestEntry*> genuine;
    std::vector<const ManifestEntry*> skilled;
    std::vector<const ManifestEntry*> random;
  };
  std::vector<const ManifestUser*> dev_users;
  for (const ManifestUser& u : manifest.users)
    if (u.split == Split::Dev) dev_users.push_back(&u);
  if (dev_users.empty())
    throw EmptyEvaluationSplit("select: manifest has no dev-split users");

  auto first_genuine = [&](const ManifestUser& user) -> const ManifestEntry* {
    const ManifestEntry* best = nullptr;
    for (const ManifestEntry& e : user.entries)
      if (e.modality == test && e.label == Label::Genuine &&
          (best == nullptr || e.session < best->session))
        best = &e;
    return best;
  };

  std::vector<Planned> plans;
  for (const ManifestUser* user : dev_users) {
    Planned plan;
    for (const ManifestEntry& e : user->entries) {
      if (plan.enrollment.size() < 4 && e.modality == train && e.session == 1 &&
          e.label == Label::Genuine)
        plan.enrollment.push_back(&e);
      if (e.modality == test && e.label == Label::Genuine && e.session >= 2)
        plan.genuine.push_back(&e);
      if (e.modality == test && e.label == Label::Skilled)
        plan.skilled.push_back(&e);
    }
    if (plan.enrollment.size() < 4) {
      err << "skipped " << user->user_id
          << ": fewer than 4 enrollment signatures\n";
      continue;
    }
    for (const ManifestUser* other : dev_users)
      if (other != user)
        if (const ManifestEntry* probe = first_genuine(*other))
          plan.random.push_back(probe);
    plans.push_back(std::move(plan));
  }
  if (plans.empty())
    throw EmptyEvaluationSplit("select: no dev user has 4 enrollment signatures");

  std::map<std::string, TimeFunctionMatrix> cache;
  auto functions_of = [&](const ManifestEntry* e) -> const TimeFunctionMatrix& {
    auto it = cache.find(e->path.string());
    if (it == cache.end()) {
      RawSignature raw = load_signature_file(e->path);
      it = cache.emplace(e->path.string(),
                         compute_time_functions(
                             preprocess(raw, preprocess_options(g))))
               .first;
    }
    return it->second;
  };
  for (const Planned& plan : plans) {
    for (const ManifestEntry* e : plan.enrollment) functions_of(e);
    for (const ManifestEntry* e : plan.genuine) functions_of(e);
    for (const ManifestEntry* e : plan.skilled) functions_of(e);
    for (const ManifestEntry* e : plan.random) functions_of(e);
  }

  const DtwOptions dtw = dtw_options(g);
  SubsetEvaluator evaluator = [&](const FeatureSubset& subset) {
    std::vector<double> genuine;
    std::vector<double> impostor_skilled;
    std::vector<double> impostor_random;
    for (const Planned& plan : plans) {
      std::vector<Matrix> refs;
      refs.reserve(4);
      for (const ManifestEntry* e : plan.enrollment)
        refs.push_back(select_channels(functions_of(e), subset));
      auto mean_score = [&](const ManifestEntry* probe) {
        Matrix reduced = select_channels(functions_of(probe), subset);
        double sum = 0.0;
        for (const Matrix& ref : refs) sum += score(ref, reduced, dtw).s;
        return sum / static_cast<double>(refs.size());
      };
      for (const ManifestEntry* p : plan.genuine)
        genuine.push_back(mean_score(p));
      for (const ManifestEntry* p : plan.skilled)
        impostor_skilled.push_back(mean_score(p));
      for (const ManifestEntry* p : plan.random)
        impostor_random.push_back(mean_score(p));
    }
    const std::vector<double>& impostor =
        impostor_skilled.empty() ? impostor_random : impostor_skilled;
    return compute_eer(genuine, impostor).eer;
  };

  FeatureSubset candidates =
      a.candidates.empty() ? FeatureSubset::all()
                           : FeatureSubset::from_csv(a.candidates);
  SelectionResult result = sffs(candidates, evaluator, a.max_size);

  for (const SelectionStep& step : result.trace)
    out << "step " << step.step << ' '
        << (step.action == SelectionAction::Add ? "add" : "remove") << ' '
        << step.index << " (" << channel_name(step.index) << ") dev-eer "
        << fmt_score(step.eer) << '\n';
  out << "selected " << result.subset.to_csv() << " dev-eer "
      << fmt_score(result.dev_eer) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string manifest_dir;
  std::string out_dir;
  std::string scenario = "pen-pen";
  std::string split = "eval";
  std::string subset;  // csv override, empty = per-complexity defaults
  int jobs = 1;
};

int run_evaluate(const GlobalOptions& g, const EvaluateArgs& a,
                 std::ostream& out, std::ostream& err) {
  ProtocolConfig config;
  config.split = a.split == "dev" ? Split::Dev : Split::Eval;
  scenario_modalities(a.scenario, config.train_modality, config.test_modality);
  config.profile = device_profile(g);
  config.thresholds = thresholds(g);
  if (!a.subset.empty())
    config.subset_override = FeatureSubset::from_csv(a.subset);
  config.preprocess = preprocess_options(g);
  config.decompose = decompose_options(g);
  config.dtw = dtw_options(g);
  config.jobs = a.jobs;
  config.seed = g.seed;

  DatasetManifest manifest = load_manifest(a.manifest_dir);
  ProtocolResult result = run_protocol(manifest, config);
  for (const std::string& user : result.skipped_users)
    err << "skipped " << user << ": fewer than 4 enrollment signatures\n";

  EvaluationReport rep = report(result.scores, result.user_levels, config);

  const std::filesystem::path dir(a.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoFailure("evaluate: cannot create " + dir.string() + ": " +
                    ec.message());
  const std::string text = render_report_text(rep);
  write_text_file(dir / "report.txt", text);
  write_text_file(dir / "report.json", render_report_json(rep));
  write_text_file(dir / "curve_skilled.csv", render_curve_csv(rep.skilled_curve));
  write_text_file(dir / "curve_random.csv", render_curve_csv(rep.random_curve));
  out << text;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"complexity-adapted on-line signature verification"};
  app.name("sigverify");
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed for synthetic generation");
  app.add_option("--profile", g.profile, "Acquisition device profile")
      ->check(CLI::IsMember({"office", "mobile"}));
  app.add_option("--cx-low-max", g.cx_low_max,
                 "Largest stroke count still classified low");
  app.add_option("--cx-high-min", g.cx_high_min,
                 "Smallest stroke count classified high");
  app.add_option("--dtw-norm", g.dtw_norm, "Path-length normalization")
      ->check(CLI::IsMember({"nodes", "steps"}));
  app.add_option("--dtw-band", g.dtw_band,
                 "Sakoe-Chiba half-width (negative = unconstrained)");
  app.add_option("--ln-amp-threshold", g.ln_amp_threshold,
                 "Stroke amplitude floor, fraction of the profile peak");
  app.add_option("--ln-snr-target", g.ln_snr_target,
                 "Decomposition SNR target in dB");
  app.add_option("--rate-hz", g.rate_hz, "Resampling rate in Hz");

  int exit_code = 0;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto synth_args = std::make_shared<SynthArgs>();
  synth->add_option("--users", synth_args->users, "Number of users");
  synth->add_option("--dev-users", synth_args->dev_users,
                    "Leading users tagged as the dev split");
  synth->add_option("--sessions", synth_args->sessions, "Genuine sessions");
  synth->add_option("--genuine-per-session", synth_args->genuine_per_session,
                    "Genuine signatures per session");
  synth->add_option("--skilled", synth_args->skilled,
                    "Skilled forgeries per user");
  synth->add_option("--modalities", synth_args->modalities,
                    "Comma list of pen,finger");
  synth->add_option("--low", synth_args->low, "Stroke range lo:hi for low");
  synth->add_option("--medium", synth_args->medium,
                    "Stroke range lo:hi for medium");
  synth->add_option("--high", synth_args->high, "Stroke range lo:hi for high");
  synth->add_option("--forgery-scale", synth_args->forgery_scale,
                    "Forgery jitter multiplier");
  synth->add_option("--out", synth_args->out_dir, "Output directory")
      ->required();
  synth->callback([&, synth_args] {
    if (synth_args->users < 1)
      throw CLI::ValidationError("--users", "must be at least 1");
    exit_code = run_synth(g, *synth_args, out);
  });

  auto* decompose_cmd =
      app.add_subcommand("decompose", "Fit the stroke model to one signature");
  auto decompose_sig = std::make_shared<std::string>();
  auto decompose_out = std::make_shared<std::string>();
  decompose_cmd->add_option("signature", *decompose_sig, "Signature file")
      ->required();
  decompose_cmd->add_option("--out", *decompose_out,
                            "Write the stroke list here instead of stdout");
  decompose_cmd->callback([&, decompose_sig, decompose_out] {
    exit_code = run_decompose(g, *decompose_sig, *decompose_out, out);
  });

  auto* complexity_cmd = app.add_subcommand(
      "complexity", "Print stroke count and complexity level per file");
  auto complexity_paths = std::make_shared<std::vector<std::string>>();
  complexity_cmd->add_option("signatures", *complexity_paths, "Signature files")
      ->required();
  complexity_cmd->callback([&, complexity_paths] {
    exit_code = run_complexity(g, *complexity_paths, out);
  });

  auto* enroll = app.add_subcommand("enroll", "Build a user template");
  auto enroll_user = std::make_shared<std::string>();
  auto enroll_out = std::make_shared<std::string>();
  auto enroll_sigs = std::make_shared<std::vector<std::string>>();
  enroll->add_option("--user", *enroll_user, "User id")->required();
  enroll->add_option("--out", *enroll_out, "Template output path")->required();
  enroll->add_option("signatures", *enroll_sigs,
                     "Exactly four enrollment signatures")
      ->expected(4);
  enroll->callback([&, enroll_user, enroll_out, enroll_sigs] {
    exit_code = run_enroll(g, *enroll_user, *enroll_sigs, *enroll_out, out);
  });

  auto* verify_cmd =
      app.add_subcommand("verify", "Score a probe against a template");
  auto verify_template = std::make_shared<std::string>();
  auto verify_probe = std::make_shared<std::string>();
  auto verify_threshold = std::make_shared<double>(0.5);
  verify_cmd->add_option("template", *verify_template, "Template file")
      ->required();
  verify_cmd->add_option("probe", *verify_probe, "Probe signature")->required();
  verify_cmd->add_option("--threshold", *verify_threshold,
                         "Acceptance threshold on the similarity score")
      ->required();
  verify_cmd->callback([&, verify_template, verify_probe, verify_threshold] {
    const bool profile_given = app.count("--profile") > 0;
    exit_code = run_verify(g, profile_given, *verify_template, *verify_probe,
                           *verify_threshold, out);
  });

  auto* select = app.add_subcommand(
      "select", "Search a channel subset minimizing dev-split EER");
  auto select_args = std::make_shared<SelectArgs>();
  select->add_option("--manifest", select_args->manifest_dir,
                     "Dataset directory containing manifest.tsv")
      ->required();
  select->add_option("--scenario", select_args->scenario,
                     "train-test writing tools")
      ->check(CLI::IsMember(
          {"pen-pen", "pen-finger", "finger-pen", "finger-finger"}));
  select->add_option("--candidates", select_args->candidates,
                     "Candidate channels as csv (default: all 21)");
  select->add_option("--max-size", select_args->max_size,
                     "Largest subset size to consider");
  select->callback([&, select_args] {
    exit_code = run_select(g, *select_args, out, err);
  });

  auto* evaluate = app.add_subcommand(
      "evaluate", "Run the verification protocol over a manifest");
  auto evaluate_args = std::make_shared<EvaluateArgs>();
  evaluate->add_option("--manifest", evaluate_args->manifest_dir,
                       "Dataset directory containing manifest.tsv")
      ->required();
  evaluate->add_option("--out-dir", evaluate_args->out_dir,
                       "Directory for report and curve files")
      ->required();
  evaluate->add_option("--scenario", evaluate_args->scenario,
                       "train-test writing tools")
      ->check(CLI::IsMember(
          {"pen-pen", "pen-finger", "finger-pen", "finger-finger"}));
  evaluate->add_option("--split", evaluate_args->split, "Manifest split to run")
      ->check(CLI::IsMember({"dev", "eval"}));
  evaluate->add_option("--subset", evaluate_args->subset,
                       "Fixed channel subset csv overriding the defaults");
  evaluate->add_option("--jobs", evaluate_args->jobs, "Worker threads");
  evaluate->callback([&, evaluate_args] {
    exit_code = run_evaluate(g, *evaluate_args, out, err);
  });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("sigverify");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sigverify: " << e.what() << '\n';
    return 1;
  } catch (const ProfileMismatch& e) {
    err << "sigverify: " << e.what() << '\n';
    return 1;
  } catch (const InsufficientEnrollment& e) {
    err << "sigverify: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "sigverify: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "sigverify: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}

}  // namespace sigverify::cli
