#include "sqa/feature.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "byte_io.hpp"
#include "sqa/error.hpp"

namespace sqa {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::embedding: return "embedding";
    case FeatureKind::spectral: return "spectral";
    case FeatureKind::pitch: return "pitch";
  }
  return "unknown";
}

FeatureSequence::FeatureSequence(std::size_t frames, std::size_t dims, std::vector<float> data,
                                 double frame_shift, FeatureKind kind)
    : frames_(frames), dims_(dims), data_(std::move(data)), frame_shift_(frame_shift), kind_(kind) {
  if (frames_ == 0 || dims_ == 0) throw DimensionError("feature sequence needs frames >= 1 and dims >= 1");
  if (data_.size() != frames_ * dims_) {
    throw DimensionError("feature data has " + std::to_string(data_.size()) + " values, expected " +
                         std::to_string(frames_ * dims_));
  }
  if (!(frame_shift_ > 0.0) || !std::isfinite(frame_shift_)) {
    throw InvalidArgument("frame_shift must be positive");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("feature sequence contains non-finite values");
  }
}

FeatureSequence FeatureSequence::truncated(std::size_t frames) const {
  if (frames == 0 || frames > frames_) throw DimensionError("invalid truncation length");
  std::vector<float> head(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(frames * dims_));
  return {frames, dims_, std::move(head), frame_shift_, kind_};
}

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq) {
  if (seq.frames() > std::numeric_limits<std::uint32_t>::max() ||
      seq.dims() > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("feature matrix too large for SQAF");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + seq.data().size() * 4);
  for (char c : std::string_view("SQAF")) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kFeatureFileVersion);
  out.push_back(static_cast<std::uint8_t>(seq.kind()));
  detail::put_f64(out, seq.frame_shift());
  detail::put_u32(out, static_cast<std::uint32_t>(seq.frames()));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.dims()));
  for (float v : seq.data()) detail::put_f32(out, v);
  return out;
}

FeatureSequence decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFeatureHeaderBytes) throw FormatError("SQAF: truncated header");
  const std::uint8_t* p = bytes.data();
  if (p[0] != 'S' || p[1] != 'Q' || p[2] != 'A' || p[3] != 'F') throw FormatError("SQAF: bad magic");
  if (p[4] != kFeatureFileVersion) {
    throw FormatError("SQAF: unsupported version " + std::to_string(p[4]));
  }
  if (p[5] > static_cast<std::uint8_t>(FeatureKind::pitch)) {
    throw FormatError("SQAF: unknown kind code " + std::to_string(p[5]));
  }
  const auto kind = static_cast<FeatureKind>(p[5]);
  const double frame_shift = detail::get_f64(p + 6);
  const std::uint64_t frames = detail::get_u32(p + 14);
  const std::uint64_t dims = detail::get_u32(p + 18);
  const std::uint64_t payload = bytes.size() - kFeatureHeaderBytes;
  if (payload != frames * dims * 4) {
    throw FormatError("SQAF: header claims " + std::to_string(frames) + "x" + std::to_string(dims) +
                      " but payload holds " + std::to_string(payload / 4) + " floats");
  }
  std::vector<float> data(frames * dims);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = detail::get_f32(p + kFeatureHeaderBytes + 4 * i);
    if (!std::isfinite(data[i])) throw FormatError("SQAF: non-finite value at index " + std::to_string(i));
  }
  if (!(frame_shift > 0.0) || !std::isfinite(frame_shift)) throw FormatError("SQAF: invalid frame_shift");
  if (frames == 0 || dims == 0) throw FormatError("SQAF: empty matrix");
  return {frames, dims, std::move(data), frame_shift, kind};
}

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_features(seq));
}

FeatureSequence read_feature_file(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return decode_features(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace sqa
