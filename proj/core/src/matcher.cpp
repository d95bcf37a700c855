#include "sigverify/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "detail/text.hpp"
#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Total preorder on matrices in which equivalence implies bitwise identity.
// Used to pick a canonical operand order so that swapped arguments walk the
// transposed cost matrix with a mirrored tie preference and land on the
// transposed optimal path.
bool canonical_order(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  for (std::size_t c = 0; c < a.cols(); ++c)
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double va = a(r, c), vb = b(r, c);
      if (va != vb) return va < vb;
    }
  return true;  // identical contents, either order works
}

double local_cost(const Matrix& a, const Matrix& b, std::size_t ia, std::size_t ib) {
  double ss = 0.0;
  for (std::size_t c = 0; c < a.rows(); ++c) {
    const double d = a(c, ia) - b(c, ib);
    ss += d * d;
  }
  return std::sqrt(ss);
}

}  // namespace

DtwResult dtw_distance(const Matrix& a_in, const Matrix& b_in,
                       const DtwOptions& options) {
  if (a_in.rows() != b_in.rows())
    throw ChannelMismatch("channel counts differ: " + std::to_string(a_in.rows()) +
                          " vs " + std::to_string(b_in.rows()));
  if (a_in.rows() == 0) throw ChannelMismatch("sequences need at least one channel");
  if (a_in.cols() == 0 || b_in.cols() == 0)
    throw EmptySequence("cannot align an empty sequence");

  const bool swapped = !canonical_order(a_in, b_in);
  const Matrix& a = swapped ? b_in : a_in;
  const Matrix& b = swapped ? a_in : b_in;

  const std::size_t n = a.cols(), m = b.cols();

  std::size_t band = std::max(n, m);  // wide enough to disable the constraint
  if (options.band) {
    const std::size_t spread = n > m ? n - m : m - n;
    band = std::max(*options.band, spread);
  }

  // Accumulated cost, row-major over (n+1) x (m+1); the infinite border
  // anchors the alignment at (1,1) via the zero at (0,0).
  std::vector<double> g((n + 1) * (m + 1), kInf);
  auto G = [&](std::size_t i, std::size_t j) -> double& { return g[i * (m + 1) + j]; };
  G(0, 0) = 0.0;

  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t j_lo = i > band ? i - band : 1;
    const std::size_t j_hi = std::min(m, i + band);
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const double best = std::min({G(i - 1, j - 1), G(i - 1, j), G(i, j - 1)});
      if (best == kInf) continue;
      G(i, j) = best + local_cost(a, b, i - 1, j - 1);
    }
  }

  const double accumulated = G(n, m);

  // Backtrack one optimal path to count its cells. Preference among
  // cost-equal predecessors: diagonal first, then the move that advances
  // the canonical first operand. Under a swap the matrix transposes, so
  // the two non-diagonal preferences swap with it.
  std::size_t i = n, j = m, nodes = 1;
  while (!(i == 1 && j == 1)) {
    const double diag = (i > 1 && j > 1) ? G(i - 1, j - 1) : kInf;
    const double up = i > 1 ? G(i - 1, j) : kInf;      // advances a
    const double left = j > 1 ? G(i, j - 1) : kInf;    // advances b
    const double best = std::min({diag, up, left});
    if (diag == best) {
      --i;
      --j;
    } else if (!swapped) {
      if (up == best)
        --i;
      else
        --j;
    } else {
      if (left == best)
        --j;
      else
        --i;
    }
    ++nodes;
  }

  DtwResult result;
  result.accumulated = accumulated;
  result.path_nodes = nodes;
  const double denom =
      options.normalization == DtwNormalization::PathNodes
          ? static_cast<double>(nodes)
          : static_cast<double>(std::max<std::size_t>(nodes - 1, 1));
  result.distance = accumulated / denom;
  return result;
}

ComparisonScore score(const Matrix& a, const Matrix& b, const DtwOptions& options) {
  const auto dtw = dtw_distance(a, b, options);
  return {std::exp(-dtw.distance), dtw.distance};
}

VerifyResult verify(const UserTemplate& tmpl, const Matrix& probe,
                    const DtwOptions& options) {
  if (probe.rows() != tmpl.references[0].rows())
    throw SubsetMismatch("probe has " + std::to_string(probe.rows()) +
                         " channels, template uses " +
                         std::to_string(tmpl.references[0].rows()));

  VerifyResult result;
  double sum = 0.0;
  for (std::size_t r = 0; r < tmpl.references.size(); ++r) {
    result.per_reference[r] = score(tmpl.references[r], probe, options).s;
    sum += result.per_reference[r];
  }
  result.final_score = sum / static_cast<double>(tmpl.references.size());
  return result;
}

std::string write_template(const UserTemplate& tmpl) {
  if (tmpl.subset.size() == 0) throw EmptySubset("template subset must not be empty");
  for (const auto& ref : tmpl.references) {
    if (ref.rows() != tmpl.subset.size())
      throw SubsetMismatch("reference channel count does not match the subset");
    if (ref.cols() == 0) throw EmptySequence("template reference is empty");
  }

  std::string out = "TPL1 " + tmpl.user_id + ' ' + to_string(tmpl.complexity) + ' ' +
                    to_string(tmpl.profile) + ' ' + tmpl.subset.to_csv() + '\n';
  for (const auto& ref : tmpl.references) {
    out += "REF " + std::to_string(ref.rows()) + ' ' + std::to_string(ref.cols()) + '\n';
    for (std::size_t r = 0; r < ref.rows(); ++r) {
      for (std::size_t c = 0; c < ref.cols(); ++c) {
        if (c) out += ' ';
        out += detail::fmt_g17(ref(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

UserTemplate parse_template(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw MalformedHeader("empty template", 1);

  const auto header = detail::split_fields(lines[0]);
  if (header.size() != 5 || header[0] != "TPL1")
    throw MalformedHeader(
        "expected 'TPL1 <user_id> <complexity> <profile> <subset>'", 1);

  UserTemplate tmpl;
  tmpl.user_id = std::string(header[1]);

  if (header[2] == "low")
    tmpl.complexity = ComplexityLevel::Low;
  else if (header[2] == "medium")
    tmpl.complexity = ComplexityLevel::Medium;
  else if (header[2] == "high")
    tmpl.complexity = ComplexityLevel::High;
  else
    throw MalformedHeader("unknown complexity '" + std::string(header[2]) + "'", 1);

  if (header[3] == "office")
    tmpl.profile = DeviceProfile::Office;
  else if (header[3] == "mobile")
    tmpl.profile = DeviceProfile::Mobile;
  else
    throw MalformedHeader("unknown profile '" + std::string(header[3]) + "'", 1);

  try {
    tmpl.subset = FeatureSubset::from_csv(header[4]);
  } catch (const Error& e) {
    throw MalformedHeader(std::string("bad subset: ") + e.what(), 1);
  }

  std::size_t line_idx = 1;
  for (std::size_t ref_no = 0; ref_no < 4; ++ref_no) {
    if (line_idx >= lines.size())
      throw SampleCountMismatch("template needs 4 REF blocks, found " +
                                    std::to_string(ref_no),
                                lines.size() + 1);
    const auto ref_header = detail::split_fields(lines[line_idx]);
    const std::size_t ref_line = line_idx + 1;
    if (ref_header.size() != 3 || ref_header[0] != "REF")
      throw MalformedHeader("expected 'REF <rows> <cols>'", ref_line);
    const auto rows = detail::parse_int(ref_header[1]);
    const auto cols = detail::parse_int(ref_header[2]);
    if (!rows || !cols || *rows < 1 || *cols < 1)
      throw MalformedHeader("REF dimensions must be positive integers", ref_line);
    if (static_cast<std::size_t>(*rows) != tmpl.subset.size())
      throw ValueOutOfRange("REF row count does not match the subset size", ref_line);
    ++line_idx;

    Matrix ref(static_cast<std::size_t>(*rows), static_cast<std::size_t>(*cols));
    for (std::size_t r = 0; r < ref.rows(); ++r, ++line_idx) {
      if (line_idx >= lines.size())
        throw SampleCountMismatch("REF block truncated", lines.size() + 1);
      const auto f = detail::split_fields(lines[line_idx]);
      if (f.size() != ref.cols())
        throw ValueOutOfRange("expected " + std::to_string(ref.cols()) +
                                  " values in matrix row",
                              line_idx + 1);
      for (std::size_t c = 0; c < ref.cols(); ++c) {
        const auto v = detail::parse_double(f[c]);
        if (!v || !std::isfinite(*v))
          throw ValueOutOfRange("matrix value is not a finite number", line_idx + 1);
        ref(r, c) = *v;
      }
    }
    tmpl.references[ref_no] = std::move(ref);
  }
  if (line_idx != lines.size())
    throw SampleCountMismatch("trailing content after the fourth REF block",
                              line_idx + 1);
  return tmpl;
}

UserTemplate load_template_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open template file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_template(buf.str());
}

void save_template_file(const std::filesystem::path& path, const UserTemplate& tmpl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write template file: " + path.string());
  out << write_template(tmpl);
  if (!out) throw Error("short write: " + path.string());
}

}  // namespace sigverify
