#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqa/feature.hpp"

namespace sqa {

struct UtteranceRecord {
  std::string utt_id;
  std::string system_id;
  std::optional<std::filesystem::path> wav_path;
  std::map<FeatureKind, std::filesystem::path> feature_paths;
  std::optional<double> mos_label;

  [[nodiscard]] std::optional<std::filesystem::path> feature_path(FeatureKind kind) const;
};

// Header of the manifest CSV; empty cells mean "absent".
inline constexpr const char* kManifestHeader =
    "utt_id,system_id,wav_path,mos,emb_path,spec_path,pitch_path";

// Loads a manifest CSV. Relative paths are resolved against the manifest's
// directory. Rows keep file order.
std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path);

// Parses manifest text; `base_dir` anchors relative paths and `source` names
// the input in error messages.
std::vector<UtteranceRecord> parse_manifest(const std::string& text,
                                            const std::filesystem::path& base_dir,
                                            const std::string& source = "manifest");

// Writes a manifest with absolute, normalized paths.
void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceRecord>& records);

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sqa
