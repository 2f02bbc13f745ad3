#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sqa/bias_correction.hpp"
#include "sqa/fusion.hpp"
#include "sqa/heads.hpp"

namespace sqa {

// A trained head plus its optional bias-correction branch.
struct ModelFile {
  PredictorHead head;
  std::optional<BiasBranch> bias_branch;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

// Line-oriented text: "key value..." per line, weights as 9-significant-digit
// decimals (exact for float32), optional "bias_branch 1" section, "end".
std::string serialize_model(const ModelFile& model);
ModelFile parse_model(std::string_view text);

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// Score of one utterance through the head and, if present, the branch.
double model_score(const ModelFile& model, const PooledFeatures& pooled);

std::string serialize_fusion(const FusionModel& model);
FusionModel parse_fusion(std::string_view text);

void save_fusion(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_fusion(const std::filesystem::path& path);

// "fnv1a64:<16 hex digits>" over the bytes of a file.
std::string file_digest(const std::filesystem::path& path);
std::string content_digest(std::string_view bytes);

// Resolves member ids against `base_dir` and checks each member file's
// digest. Throws FormatError naming the first stale member.
void verify_members(const FusionModel& model, const std::filesystem::path& base_dir);

// True when the text starts with the fusion-model header.
bool is_fusion_text(std::string_view text);

}  // namespace sqa
