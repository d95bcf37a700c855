#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigverify/errors.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

// Canonical signature file, one sample per row:
//
//   SIGV1 <pen|finger> <count> <user_id> <session> <genuine|skilled>
//   <t_seconds> <x> <y> <pressure|-1> <pen_state 0|1>
//
// Pressure is a number in [0,1] for pen captures and the sentinel -1 for
// finger captures (touchscreens report none). pen_state 1 means on-surface.
// A second accepted input is the SVC-style layout: a count line followed by
// "x y t button" rows with integer millisecond timestamps, which are
// offset so the first sample sits at t = 0 and converted to seconds.

RawSignature parse_signature(std::string_view text,
                             std::optional<SourceFormat> format_hint = std::nullopt);

std::string write_signature(const RawSignature& sig);

RawSignature load_signature_file(const std::filesystem::path& path);
void save_signature_file(const std::filesystem::path& path, const RawSignature& sig);

// Throws unless the signature satisfies every structural invariant:
// strictly increasing non-negative timestamps, finite coordinates, pressure
// present in [0,1] exactly for pen samples, finger samples all on-surface,
// whitespace-free non-empty user id, positive session.
void validate_signature(const RawSignature& sig);

// ---------------------------------------------------------------------------
// Dataset manifests. <root>/manifest.tsv holds one signature file per row:
//
//   user_id  split  path  modality  session  label
//
// with split in {dev,eval}, modality in {pen,finger}, label in
// {genuine,skilled} and path relative to the manifest's directory.

struct ManifestEntry {
  std::string user_id;
  Split split = Split::Dev;
  std::filesystem::path path;  // resolved against the root directory
  Modality modality = Modality::Pen;
  int session = 1;
  Label label = Label::Genuine;
};

struct ManifestUser {
  std::string user_id;
  Split split = Split::Dev;
  std::vector<ManifestEntry> entries;  // manifest row order preserved
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestUser> users;  // sorted by user_id

  const ManifestUser* find_user(std::string_view user_id) const;
  std::size_t total_entries() const;
};

DatasetManifest load_manifest(const std::filesystem::path& root);

}  // namespace sigverify
