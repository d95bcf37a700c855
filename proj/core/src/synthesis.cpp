#include "sigverify/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "sigverify/errors.hpp"
#include "sigverify/signal_io.hpp"

namespace sigverify {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_options(const SynthesisOptions& o) {
  auto fail = [](const std::string& msg) {
    throw Error("synthesize_dataset: " + msg);
  };
  if (o.n_users < 1) fail("n_users must be at least 1");
  if (o.dev_users < 0 || o.dev_users > o.n_users)
    fail("dev_users must lie in [0, n_users]");
  if (o.sessions < 1) fail("sessions must be at least 1");
  if (o.genuine_per_session < 1) fail("genuine_per_session must be at least 1");
  if (o.skilled_count < 0) fail("skilled_count must be non-negative");
  if (o.modalities.empty()) fail("at least one modality is required");
  for (const StrokeCountRange* r : {&o.low, &o.medium, &o.high})
    if (r->lo < 1 || r->hi < r->lo)
      fail("stroke-count ranges need 1 <= lo <= hi");
  if (!(o.forgery_scale > 0.0)) fail("forgery_scale must be positive");
  if (!(o.rate_hz > 0.0)) fail("rate_hz must be positive");
}

const StrokeCountRange& range_for(const SynthesisOptions& o,
                                  ComplexityLevel level) {
  switch (level) {
    case ComplexityLevel::Low: return o.low;
    case ComplexityLevel::Medium: return o.medium;
    case ComplexityLevel::High: return o.high;
  }
  throw Error("synthesize_dataset: unknown complexity level");
}

std::string padded(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", std::clamp(width, 1, 12), value);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoFailure("failed while writing " + path.string());
}

}  // namespace

std::vector<LogNormalStroke> make_archetype(Rng& rng, int stroke_count) {
  if (stroke_count < 1)
    throw Error("make_archetype: stroke count must be positive");

  std::vector<LogNormalStroke> strokes(static_cast<std::size_t>(stroke_count));
  for (LogNormalStroke& s : strokes) {
    s.mu = rng.uniform(-2.4, -1.9);
    s.sigma = rng.uniform(0.12, 0.25);
    s.D = rng.uniform(0.8, 1.5);
  }
  strokes.front().theta_s = rng.uniform(-kPi, kPi);
  strokes.front().theta_e = strokes.front().theta_s + rng.uniform(-1.0, 1.0);
  for (std::size_t i = 1; i < strokes.size(); ++i) {
    strokes[i].theta_s = strokes[i - 1].theta_e + rng.uniform(-0.5, 0.5);
    strokes[i].theta_e = strokes[i].theta_s + rng.uniform(-1.0, 1.0);
  }
  strokes.front().t0 = 0.08;
  for (std::size_t i = 1; i < strokes.size(); ++i) {
    const double reach = std::max(
        std::exp(strokes[i - 1].mu + strokes[i - 1].sigma),
        std::exp(strokes[i].mu + strokes[i].sigma));
    strokes[i].t0 = strokes[i - 1].t0 + rng.uniform(2.2, 2.8) * reach;
  }
  return strokes;
}

std::vector<LogNormalStroke> jitter_strokes(
    std::span<const LogNormalStroke> archetype, Rng& rng,
    const JitterSpec& jitter, double scale) {
  if (archetype.empty())
    throw EmptyStrokeList("jitter_strokes: archetype has no strokes");
  if (!(scale > 0.0))
    throw Error("jitter_strokes: scale must be positive");

  std::vector<LogNormalStroke> out(archetype.begin(), archetype.end());
  for (LogNormalStroke& s : out) {
    // Multiplicative factors are floored away from zero so a large draw
    // can never flip a length or collapse a width.
    s.D *= std::max(0.05, 1.0 + scale * jitter.d_rel * rng.normal());
    s.mu += scale * jitter.mu_abs * rng.normal();
    s.sigma *= std::max(0.2, 1.0 + scale * jitter.sigma_rel * rng.normal());
    s.sigma = std::clamp(s.sigma, 0.08, 0.6);
    s.theta_s += scale * jitter.angle_abs * rng.normal();
    s.theta_e += scale * jitter.angle_abs * rng.normal();
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double gap = archetype[i].t0 - archetype[i - 1].t0;
    const double factor =
        std::max(0.55, 1.0 + scale * jitter.gap_rel * rng.normal());
    out[i].t0 = out[i - 1].t0 + gap * factor;
  }
  return out;
}

SynthesisResult synthesize_dataset(const std::filesystem::path& out_dir,
                                   const SynthesisOptions& o) {
  validate_options(o);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw IoFailure("synthesize_dataset: cannot create " + out_dir.string() +
                    ": " + ec.message());

  SynthesisResult result;
  result.root = out_dir;

  const int id_width = std::max<int>(2, std::to_string(o.n_users).size());
  std::string manifest_text;
  std::string truth_text;

  for (int u = 0; u < o.n_users; ++u) {
    const ComplexityLevel level = static_cast<ComplexityLevel>(u % 3);
    const Split split = u < o.dev_users ? Split::Dev : Split::Eval;
    const std::string uid = "u" + padded(u + 1, id_width);

    Rng user_rng(Rng::mix(o.seed, static_cast<std::uint64_t>(u)));
    const StrokeCountRange& range = range_for(o, level);
    const int stroke_count = static_cast<int>(
        user_rng.uniform_int(range.lo, range.hi));
    const std::vector<LogNormalStroke> archetype =
        make_archetype(user_rng, stroke_count);

    result.users.push_back({uid, level, stroke_count});
    truth_text += uid;
    truth_text += '\t';
    truth_text += to_string(level);
    truth_text += '\t';
    truth_text += std::to_string(stroke_count);
    truth_text += '\n';

    std::filesystem::create_directories(out_dir / uid, ec);
    if (ec)
      throw IoFailure("synthesize_dataset: cannot create " +
                      (out_dir / uid).string() + ": " + ec.message());

    std::uint64_t sig_counter = 0;
    auto emit = [&](Modality modality, int session, Label label, int index) {
      Rng sig_rng(Rng::mix(Rng::mix(o.seed, static_cast<std::uint64_t>(u)),
                           ++sig_counter));
      const double scale = label == Label::Genuine ? 1.0 : o.forgery_scale;
      const std::vector<LogNormalStroke> strokes =
          jitter_strokes(archetype, sig_rng, o.genuine_jitter, scale);

      RawSignature sig =
          synthesize_signature(strokes, o.rate_hz, uid, session, label);
      sig.modality = modality;
      if (modality == Modality::Finger)
        for (SamplePoint& p : sig.samples) p.pressure.reset();

      std::string name = std::string(to_string(modality)) + '_';
      if (label == Label::Genuine)
        name += "g_s" + std::to_string(session) + '_';
      else
        name += "f_";
      name += padded(index, 2);
      name += ".sig";

      save_signature_file(out_dir / uid / name, sig);

      manifest_text += uid;
      manifest_text += '\t';
      manifest_text += to_string(split);
      manifest_text += '\t';
      manifest_text += uid + "/" + name;
      manifest_text += '\t';
      manifest_text += to_string(modality);
      manifest_text += '\t';
      manifest_text += std::to_string(session);
      manifest_text += '\t';
      manifest_text += to_string(label);
      manifest_text += '\n';
    };

    for (Modality modality : o.modalities) {
      for (int session = 1; session <= o.sessions; ++session)
        for (int k = 1; k <= o.genuine_per_session; ++k)
          emit(modality, session, Label::Genuine, k);
      for (int k = 1; k <= o.skilled_count; ++k)
        emit(modality, 1, Label::Skilled, k);
    }
  }

  write_text_file(out_dir / "manifest.tsv", manifest_text);
  write_text_file(out_dir / "ground_truth.tsv", truth_text);
  return result;
}

}  // namespace sigverify
