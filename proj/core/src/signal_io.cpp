#include "sigverify/signal_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "detail/text.hpp"

namespace sigverify {

namespace {

using detail::parse_double;
using detail::parse_int;
using detail::split_fields;
using detail::split_lines;

double require_finite(std::string_view tok, std::size_t line, const char* what) {
  const auto v = parse_double(tok);
  if (!v || !std::isfinite(*v))
    throw ValueOutOfRange(std::string(what) + " is not a finite number: '" +
                              std::string(tok) + "'",
                          line);
  return *v;
}

PenState parse_pen_state(std::string_view tok, std::size_t line) {
  if (tok == "1") return PenState::Down;
  if (tok == "0") return PenState::Up;
  throw ValueOutOfRange("pen_state must be 0 or 1, got '" + std::string(tok) + "'",
                        line);
}

void check_count(std::size_t declared, std::size_t got, std::size_t first_row_line) {
  if (got == declared) return;
  // Points at the first surplus row, or at the line where a row is missing.
  const std::size_t line = first_row_line + std::min(declared, got);
  throw SampleCountMismatch("header declares " + std::to_string(declared) +
                                " samples but file has " + std::to_string(got),
                            line);
}

void check_times(std::vector<SamplePoint>& samples, std::size_t first_row_line) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].t < 0.0)
      throw ValueOutOfRange("negative timestamp", first_row_line + i);
    if (i > 0 && samples[i].t <= samples[i - 1].t)
      throw NonMonotonicTime("timestamps must be strictly increasing",
                             first_row_line + i);
  }
}

RawSignature parse_canonical(const std::vector<std::string_view>& lines) {
  const auto header = split_fields(lines[0]);
  if (header.size() != 6 || header[0] != "SIGV1")
    throw MalformedHeader(
        "expected 'SIGV1 <modality> <count> <user_id> <session> <label>'", 1);

  RawSignature sig;
  sig.source_format = SourceFormat::Canonical;

  if (header[1] == "pen")
    sig.modality = Modality::Pen;
  else if (header[1] == "finger")
    sig.modality = Modality::Finger;
  else
    throw MalformedHeader("unknown modality '" + std::string(header[1]) + "'", 1);

  const auto count = parse_int(header[2]);
  if (!count || *count < 0)
    throw MalformedHeader("sample count must be a non-negative integer", 1);

  sig.user_id = std::string(header[3]);

  const auto session = parse_int(header[4]);
  if (!session || *session < 1)
    throw MalformedHeader("session must be a positive integer", 1);
  sig.session = static_cast<int>(*session);

  if (header[5] == "genuine")
    sig.label = Label::Genuine;
  else if (header[5] == "skilled")
    sig.label = Label::Skilled;
  else
    throw MalformedHeader("unknown label '" + std::string(header[5]) + "'", 1);

  check_count(static_cast<std::size_t>(*count), lines.size() - 1, 2);

  sig.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto f = split_fields(lines[i]);
    if (f.size() != 5)
      throw ValueOutOfRange("expected 5 fields 't x y pressure pen_state'", line_no);

    SamplePoint p;
    p.t = require_finite(f[0], line_no, "t");
    p.x = require_finite(f[1], line_no, "x");
    p.y = require_finite(f[2], line_no, "y");

    const double pr = require_finite(f[3], line_no, "pressure");
    if (pr == -1.0) {
      if (sig.modality == Modality::Pen)
        throw ValueOutOfRange("pen samples must carry a pressure value in [0,1]",
                              line_no);
      p.pressure = std::nullopt;
    } else {
      if (sig.modality == Modality::Finger)
        throw ValueOutOfRange("finger samples carry no pressure, expected -1",
                              line_no);
      if (pr < 0.0 || pr > 1.0)
        throw ValueOutOfRange("pressure outside [0,1]", line_no);
      p.pressure = pr;
    }

    p.pen_state = parse_pen_state(f[4], line_no);
    if (sig.modality == Modality::Finger && p.pen_state == PenState::Up)
      throw ValueOutOfRange("finger samples must be on-surface (pen_state 1)",
                            line_no);

    sig.samples.push_back(p);
  }

  check_times(sig.samples, 2);
  return sig;
}

RawSignature parse_svc(const std::vector<std::string_view>& lines) {
  const auto header = split_fields(lines[0]);
  const auto count = header.size() == 1 ? parse_int(header[0]) : std::nullopt;
  if (!count || *count < 0)
    throw MalformedHeader("expected a bare sample count on the first line", 1);

  check_count(static_cast<std::size_t>(*count), lines.size() - 1, 2);

  RawSignature sig;
  sig.source_format = SourceFormat::SvcStyle;
  sig.modality = Modality::Pen;

  std::int64_t t_origin = 0;
  sig.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto f = split_fields(lines[i]);
    if (f.size() != 4)
      throw ValueOutOfRange("expected 4 fields 'x y t button'", line_no);

    SamplePoint p;
    p.x = require_finite(f[0], line_no, "x");
    p.y = require_finite(f[1], line_no, "y");

    const auto t_ms = parse_int(f[2]);
    if (!t_ms)
      throw ValueOutOfRange("timestamp must be integer milliseconds", line_no);
    if (i == 1) t_origin = *t_ms;
    p.t = static_cast<double>(*t_ms - t_origin) / 1000.0;

    // Lifted rows keep coordinates but report no contact force.
    if (f[3] == "1") {
      p.pen_state = PenState::Down;
      p.pressure = 1.0;
    } else if (f[3] == "0") {
      p.pen_state = PenState::Up;
      p.pressure = 0.0;
    } else {
      throw ValueOutOfRange("button must be 0 or 1", line_no);
    }
    sig.samples.push_back(p);
  }

  check_times(sig.samples, 2);
  return sig;
}

}  // namespace

RawSignature parse_signature(std::string_view text,
                             std::optional<SourceFormat> format_hint) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw MalformedHeader("empty input", 1);

  SourceFormat format;
  if (format_hint) {
    format = *format_hint;
  } else {
    format = lines[0].starts_with("SIGV1") ? SourceFormat::Canonical
                                           : SourceFormat::SvcStyle;
  }

  switch (format) {
    case SourceFormat::Canonical:
      return parse_canonical(lines);
    case SourceFormat::SvcStyle:
      return parse_svc(lines);
    default:
      throw MalformedHeader("no parser for the requested format", 1);
  }
}

void validate_signature(const RawSignature& sig) {
  if (sig.user_id.empty() ||
      std::any_of(sig.user_id.begin(), sig.user_id.end(),
                  [](unsigned char c) { return std::isspace(c); }))
    throw Error("user_id must be non-empty and whitespace-free");
  if (sig.session < 1) throw Error("session must be positive");

  for (std::size_t i = 0; i < sig.samples.size(); ++i) {
    const auto& p = sig.samples[i];
    const std::string at = " at sample " + std::to_string(i);
    if (!std::isfinite(p.t) || !std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error("non-finite sample value" + at);
    if (p.t < 0.0) throw Error("negative timestamp" + at);
    if (i > 0 && p.t <= sig.samples[i - 1].t)
      throw Error("timestamps must be strictly increasing" + at);
    if (sig.modality == Modality::Pen) {
      if (!p.pressure || *p.pressure < 0.0 || *p.pressure > 1.0)
        throw Error("pen samples need pressure in [0,1]" + at);
    } else {
      if (p.pressure) throw Error("finger samples carry no pressure" + at);
      if (p.pen_state == PenState::Up)
        throw Error("finger samples must be on-surface" + at);
    }
  }
}

std::string write_signature(const RawSignature& sig) {
  validate_signature(sig);

  std::string out;
  out.reserve(64 + sig.samples.size() * 48);
  out += "SIGV1 ";
  out += to_string(sig.modality);
  out += ' ';
  out += std::to_string(sig.samples.size());
  out += ' ';
  out += sig.user_id;
  out += ' ';
  out += std::to_string(sig.session);
  out += ' ';
  out += to_string(sig.label);
  out += '\n';

  for (const auto& p : sig.samples) {
    out += detail::fmt_fixed(p.t, 6);  // microsecond resolution
    out += ' ';
    out += detail::fmt_g17(p.x);
    out += ' ';
    out += detail::fmt_g17(p.y);
    out += ' ';
    out += p.pressure ? detail::fmt_g17(*p.pressure) : "-1";
    out += ' ';
    out += p.pen_state == PenState::Down ? '1' : '0';
    out += '\n';
  }
  return out;
}

RawSignature load_signature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open signature file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_signature(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void save_signature_file(const std::filesystem::path& path, const RawSignature& sig) {
  const std::string text = write_signature(sig);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write signature file: " + path.string());
  out << text;
  if (!out) throw Error("short write: " + path.string());
}

const ManifestUser* DatasetManifest::find_user(std::string_view user_id) const {
  const auto it = std::lower_bound(
      users.begin(), users.end(), user_id,
      [](const ManifestUser& u, std::string_view id) { return u.user_id < id; });
  if (it == users.end() || it->user_id != user_id) return nullptr;
  return &*it;
}

std::size_t DatasetManifest::total_entries() const {
  std::size_t n = 0;
  for (const auto& u : users) n += u.entries.size();
  return n;
}

DatasetManifest load_manifest(const std::filesystem::path& root) {
  const auto manifest_path = root / "manifest.tsv";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in)
    throw MissingManifestFile("no manifest.tsv under " + root.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  DatasetManifest manifest;
  manifest.root = root;

  std::map<std::string, ManifestUser> by_user;
  std::map<std::string, std::size_t> first_seen_line;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_fields(lines[i], '\t');
    if (f.size() != 6)
      throw ValueOutOfRange(
          "expected 6 tab-separated fields "
          "'user_id split path modality session label'",
          line_no);

    ManifestEntry e;
    e.user_id = std::string(f[0]);
    if (e.user_id.empty()) throw ValueOutOfRange("empty user_id", line_no);

    if (f[1] == "dev")
      e.split = Split::Dev;
    else if (f[1] == "eval")
      e.split = Split::Eval;
    else
      throw ValueOutOfRange("split must be 'dev' or 'eval'", line_no);

    e.path = root / std::filesystem::path(std::string(f[2]));
    if (!std::filesystem::exists(e.path))
      throw DanglingReference("manifest references missing file " + e.path.string(),
                              line_no);

    if (f[3] == "pen")
      e.modality = Modality::Pen;
    else if (f[3] == "finger")
      e.modality = Modality::Finger;
    else
      throw ValueOutOfRange("modality must be 'pen' or 'finger'", line_no);

    const auto session = parse_int(f[4]);
    if (!session || *session < 1)
      throw ValueOutOfRange("session must be a positive integer", line_no);
    e.session = static_cast<int>(*session);

    if (f[5] == "genuine")
      e.label = Label::Genuine;
    else if (f[5] == "skilled")
      e.label = Label::Skilled;
    else
      throw ValueOutOfRange("label must be 'genuine' or 'skilled'", line_no);

    auto [it, inserted] = by_user.try_emplace(e.user_id);
    if (inserted) {
      it->second.user_id = e.user_id;
      it->second.split = e.split;
      first_seen_line[e.user_id] = line_no;
    } else if (it->second.split != e.split) {
      throw DuplicateUserId("user '" + e.user_id + "' listed in both splits (first at line " +
                                std::to_string(first_seen_line[e.user_id]) + ")",
                            line_no);
    }
    it->second.entries.push_back(std::move(e));
  }

  manifest.users.reserve(by_user.size());
  for (auto& [id, user] : by_user) manifest.users.push_back(std::move(user));
  return manifest;
}

}  // namespace sigverify
