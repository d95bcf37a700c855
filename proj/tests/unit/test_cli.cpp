#include "cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sigverify/lognormal.hpp"
#include "sigverify/matcher.hpp"
#include "sigverify/signal_io.hpp"
#include "support/temp_dir.hpp"

using sigverify::cli::run_cli;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A small pen-only corpus; callers pick the split tagging.
CliRun synth_corpus(const std::filesystem::path& dir, const std::string& seed,
                    int dev_users) {
  return cli({"--seed", seed, "--rate-hz", "150", "synth", "--users", "3",
              "--dev-users", std::to_string(dev_users), "--sessions", "2",
              "--genuine-per-session", "4", "--skilled", "2", "--out",
              dir.string()});
}

// The first four session-1 genuine pen files of a user, via the manifest.
std::vector<std::string> enrollment_paths(const sigverify::DatasetManifest& m,
                                          const std::string& uid) {
  std::vector<std::string> paths;
  const sigverify::ManifestUser* user = m.find_user(uid);
  REQUIRE(user != nullptr);
  for (const sigverify::ManifestEntry& e : user->entries)
    if (paths.size() < 4 && e.session == 1 && e.label == sigverify::Label::Genuine &&
        e.modality == sigverify::Modality::Pen)
      paths.push_back(e.path.string());
  REQUIRE(paths.size() == 4);
  return paths;
}

const sigverify::ManifestEntry& probe_entry(const sigverify::DatasetManifest& m,
                                            const std::string& uid, int session) {
  const sigverify::ManifestUser* user = m.find_user(uid);
  REQUIRE(user != nullptr);
  for (const sigverify::ManifestEntry& e : user->entries)
    if (e.session == session && e.label == sigverify::Label::Genuine) return e;
  REQUIRE(false);
  return user->entries.front();
}

}  // namespace

TEST_CASE("help and usage errors") {
  const CliRun help = cli({"--help"});
  REQUIRE(help.code == 0);
  REQUIRE(help.out.find("sigverify") != std::string::npos);
  for (const char* name :
       {"synth", "decompose", "complexity", "enroll", "verify", "select", "evaluate"})
    REQUIRE(help.out.find(name) != std::string::npos);

  REQUIRE(cli({}).code == 1);
  REQUIRE(cli({"frobnicate"}).code == 1);
  REQUIRE(cli({"verify"}).code == 1);  // missing required arguments
}

TEST_CASE("synthetic corpus generation from the command line") {
  test_support::TempDir a("cli_synth_a"), b("cli_synth_b");

  const CliRun first = synth_corpus(a.path(), "7", 0);
  REQUIRE(first.code == 0);
  REQUIRE(first.out.find("wrote 3 users") != std::string::npos);
  REQUIRE(std::filesystem::exists(a / "manifest.tsv"));
  REQUIRE(std::filesystem::exists(a / "ground_truth.tsv"));

  // Same seed, fresh directory: identical bytes and identical console lines.
  const CliRun second = synth_corpus(b.path(), "7", 0);
  REQUIRE(second.code == 0);
  REQUIRE(slurp(a / "manifest.tsv") == slurp(b / "manifest.tsv"));
  REQUIRE(slurp(a / "ground_truth.tsv") == slurp(b / "ground_truth.tsv"));

  const CliRun zero = cli({"synth", "--users", "0", "--out", (a / "x").string()});
  REQUIRE(zero.code == 1);
  REQUIRE_FALSE(zero.err.empty());
}

TEST_CASE("decompose and complexity commands on one corpus") {
  test_support::TempDir dir("cli_decomp");
  REQUIRE(synth_corpus(dir.path(), "21", 0).code == 0);
  const auto manifest = sigverify::load_manifest(dir.path());
  const std::string sig_path =
      manifest.users.front().entries.front().path.string();

  SUBCASE("stroke list lands on stdout by default") {
    const CliRun run = cli({"--rate-hz", "150", "decompose", sig_path});
    REQUIRE(run.code == 0);
    const auto dec = sigverify::parse_decomposition(run.out);
    REQUIRE(sigverify::count_strokes(dec) >= 1);
    REQUIRE(dec.snr_db >= 25.0);
  }

  SUBCASE("--out redirects the stroke list to a file") {
    const auto out_path = dir / "strokes.sln";
    const CliRun run =
        cli({"--rate-hz", "150", "decompose", sig_path, "--out", out_path.string()});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("strokes") != std::string::npos);
    const auto dec = sigverify::parse_decomposition(slurp(out_path));
    REQUIRE(sigverify::count_strokes(dec) >= 1);
  }

  SUBCASE("complexity prints one line per input") {
    const std::string other =
        manifest.users.back().entries.front().path.string();
    const CliRun run = cli({"--rate-hz", "150", "complexity", sig_path, other});
    REQUIRE(run.code == 0);

    std::istringstream lines(run.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
      std::istringstream fields(line);
      std::string path, level;
      int count = 0;
      fields >> path >> count >> level;
      REQUIRE(count >= 1);
      REQUIRE((level == "low" || level == "medium" || level == "high"));
      ++rows;
    }
    REQUIRE(rows == 2);
  }

  SUBCASE("missing inputs exit with the data failure code") {
    REQUIRE(cli({"decompose", (dir / "absent.sig").string()}).code == 2);
    REQUIRE(cli({"complexity", (dir / "absent.sig").string()}).code == 2);
  }
}

TEST_CASE("enroll and verify round trip") {
  test_support::TempDir dir("cli_verify");
  REQUIRE(synth_corpus(dir.path(), "33", 0).code == 0);
  const auto manifest = sigverify::load_manifest(dir.path());
  const std::string low_user = manifest.users.front().user_id;    // u01: low
  const std::string high_user = manifest.users.back().user_id;    // u03: high
  const auto enroll_sigs = enrollment_paths(manifest, low_user);
  const auto tpl_path = dir / "low_user.tpl";

  std::vector<std::string> enroll_cmd{"--rate-hz", "150",       "enroll", "--user",
                                      low_user,    "--out",     tpl_path.string()};
  enroll_cmd.insert(enroll_cmd.end(), enroll_sigs.begin(), enroll_sigs.end());
  const CliRun enrolled = cli(enroll_cmd);
  REQUIRE(enrolled.code == 0);
  REQUIRE(enrolled.out.find("enrolled " + low_user) != std::string::npos);

  const auto tmpl = sigverify::load_template_file(tpl_path);
  REQUIRE(tmpl.user_id == low_user);
  REQUIRE(tmpl.complexity == sigverify::ComplexityLevel::Low);

  SUBCASE("a genuine later-session probe is accepted") {
    const std::string probe = probe_entry(manifest, low_user, 2).path.string();
    const CliRun run = cli({"--rate-hz", "150", "verify", tpl_path.string(), probe,
                            "--threshold", "0.5"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find(low_user) == 0);
    REQUIRE(run.out.find(" accept") != std::string::npos);
  }

  SUBCASE("another writer's signature is rejected") {
    const std::string probe = probe_entry(manifest, high_user, 2).path.string();
    const CliRun run = cli({"--rate-hz", "150", "verify", tpl_path.string(), probe,
                            "--threshold", "0.5"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find(" reject") != std::string::npos);
  }

  SUBCASE("requesting the wrong device profile is a contract error") {
    const std::string probe = probe_entry(manifest, low_user, 2).path.string();
    const CliRun run = cli({"--profile", "mobile", "--rate-hz", "150", "verify",
                            tpl_path.string(), probe, "--threshold", "0.5"});
    REQUIRE(run.code == 1);
    REQUIRE(run.err.find("profile") != std::string::npos);
  }

  SUBCASE("wrong enrollment cardinality is a usage error") {
    std::vector<std::string> three{"enroll", "--user", low_user, "--out",
                                   (dir / "t3.tpl").string()};
    three.insert(three.end(), enroll_sigs.begin(), enroll_sigs.begin() + 3);
    REQUIRE(cli(three).code == 1);
  }

  SUBCASE("a missing probe file is a data error") {
    REQUIRE(cli({"verify", tpl_path.string(), (dir / "gone.sig").string(),
                 "--threshold", "0.5"})
                .code == 2);
  }
}

TEST_CASE("channel selection searches the dev split deterministically") {
  test_support::TempDir dir("cli_select");
  REQUIRE(synth_corpus(dir.path(), "91", 3).code == 0);  // all three users dev

  const std::vector<std::string> cmd{
      "--rate-hz", "100",       "--dtw-band", "32",        "select",
      "--manifest", dir.path().string(),      "--candidates", "4,9",
      "--max-size", "2"};
  const CliRun first = cli(cmd);
  REQUIRE(first.code == 0);
  REQUIRE(first.out.find("selected ") != std::string::npos);
  REQUIRE(first.out.find("dev-eer") != std::string::npos);
  REQUIRE(first.out.find("step 1 add") != std::string::npos);

  const CliRun again = cli(cmd);
  REQUIRE(again.out == first.out);

  // No dev users at all: the search has nothing to run on.
  test_support::TempDir eval_only("cli_select_eval");
  REQUIRE(synth_corpus(eval_only.path(), "91", 0).code == 0);
  const CliRun empty = cli({"select", "--manifest", eval_only.path().string()});
  REQUIRE(empty.code == 2);
}

TEST_CASE("evaluation reports are byte-identical for any worker count") {
  test_support::TempDir dir("cli_eval");
  REQUIRE(synth_corpus(dir.path(), "55", 0).code == 0);

  auto evaluate = [&](const std::string& tag, const std::string& jobs) {
    const auto out_dir = dir / tag;
    return std::pair{cli({"--rate-hz", "100", "--dtw-band", "32", "evaluate",
                          "--manifest", dir.path().string(), "--out-dir",
                          out_dir.string(), "--jobs", jobs}),
                     out_dir};
  };

  const auto [serial, serial_dir] = evaluate("rep1", "1");
  REQUIRE(serial.code == 0);
  for (const char* name :
       {"report.txt", "report.json", "curve_skilled.csv", "curve_random.csv"})
    REQUIRE(std::filesystem::exists(serial_dir / name));

  // The console mirrors the text report.
  REQUIRE(serial.out == slurp(serial_dir / "report.txt"));
  REQUIRE(serial.out.find("signature verification report") != std::string::npos);

  const auto j = nlohmann::json::parse(slurp(serial_dir / "report.json"));
  REQUIRE(j.at("pooled").at("genuine").get<int>() == 12);
  REQUIRE(j.at("pooled").at("skilled").get<int>() == 6);
  REQUIRE(j.at("pooled").at("random").get<int>() == 6);

  const auto [parallel, parallel_dir] = evaluate("rep2", "3");
  REQUIRE(parallel.code == 0);
  for (const char* name :
       {"report.txt", "report.json", "curve_skilled.csv", "curve_random.csv"})
    REQUIRE(slurp(parallel_dir / name) == slurp(serial_dir / name));

  // A scenario with no matching probes cannot produce a report.
  const CliRun impossible =
      cli({"--rate-hz", "100", "evaluate", "--manifest", dir.path().string(),
           "--out-dir", (dir / "rep3").string(), "--scenario", "pen-finger"});
  REQUIRE(impossible.code == 2);
}
