#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace sqa {

enum class FeatureKind : std::uint8_t { embedding = 0, spectral = 1, pitch = 2 };

std::string_view to_string(FeatureKind kind);

// Frame-level feature matrix (frames x dims, row-major float32).
//
// Instances are immutable once built; the factory checks that the shape is
// non-empty, the entries finite and the frame shift positive.
class FeatureSequence {
 public:
  FeatureSequence(std::size_t frames, std::size_t dims, std::vector<float> data,
                  double frame_shift, FeatureKind kind);

  [[nodiscard]] std::size_t frames() const { return frames_; }
  [[nodiscard]] std::size_t dims() const { return dims_; }
  [[nodiscard]] double frame_shift() const { return frame_shift_; }
  [[nodiscard]] FeatureKind kind() const { return kind_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }

  [[nodiscard]] std::span<const float> row(std::size_t frame) const {
    return std::span<const float>(data_).subspan(frame * dims_, dims_);
  }
  [[nodiscard]] float at(std::size_t frame, std::size_t dim) const {
    return data_[frame * dims_ + dim];
  }

  // Keeps the first `frames` rows.
  [[nodiscard]] FeatureSequence truncated(std::size_t frames) const;

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;

 private:
  std::size_t frames_;
  std::size_t dims_;
  std::vector<float> data_;
  double frame_shift_;
  FeatureKind kind_;
};

// SQAF binary layout (all little-endian):
//   "SQAF" | u8 version (1) | u8 kind | f64 frame_shift | u32 frames | u32 dims
//   | frames*dims f32 row-major
inline constexpr std::uint8_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 1 + 1 + 8 + 4 + 4;

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(std::span<const std::uint8_t> bytes);

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence read_feature_file(const std::filesystem::path& path);

}  // namespace sqa
