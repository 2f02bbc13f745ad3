#include "sqa/audio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "byte_io.hpp"
#include "sqa/error.hpp"

namespace sqa {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct WavFormat {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

bool has_tag(const std::uint8_t* p, const char* tag) {
  return std::equal(tag, tag + 4, p, [](char a, std::uint8_t b) {
    return static_cast<std::uint8_t>(a) == b;
  });
}

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  if (clip.samples.empty()) throw InvalidArgument("audio clip is empty");
  for (double s : clip.samples) {
    if (!std::isfinite(s)) throw InvalidArgument("audio clip contains non-finite samples");
  }
}

AudioClip read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  const auto where = path.string();
  if (bytes.size() < 12 || !has_tag(bytes.data(), "RIFF") || !has_tag(bytes.data() + 8, "WAVE")) {
    throw FormatError(where + ": not a RIFF/WAVE file");
  }

  WavFormat fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = detail::get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (has_tag(chunk, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) throw FormatError(where + ": truncated fmt chunk");
      const std::uint8_t* p = bytes.data() + body;
      fmt.format = detail::get_u16(p);
      fmt.channels = detail::get_u16(p + 2);
      fmt.sample_rate = detail::get_u32(p + 4);
      fmt.block_align = detail::get_u16(p + 12);
      fmt.bits = detail::get_u16(p + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 26) throw FormatError(where + ": truncated WAVE_FORMAT_EXTENSIBLE header");
        // First two bytes of the sub-format GUID carry the actual codec.
        fmt.format = detail::get_u16(p + 24);
      }
      have_fmt = true;
    } else if (has_tag(chunk, "data")) {
      if (body + size > bytes.size()) throw FormatError(where + ": truncated data chunk");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw FormatError(where + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(where + ": missing data chunk");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw FormatError(where + ": unsupported codec (format " + std::to_string(fmt.format) +
                      ", " + std::to_string(fmt.bits) + " bits)");
  }
  if (fmt.channels != 1 && fmt.channels != 2) {
    throw FormatError(where + ": unsupported channel count " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) throw FormatError(where + ": zero sample rate");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (data_size % frame_bytes != 0) throw FormatError(where + ": truncated sample frame");
  const std::size_t frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(detail::get_u16(p)) / 32768.0;
      } else {
        acc += detail::get_f32(p);
      }
    }
    clip.samples[i] = acc / fmt.channels;
  }
  validate(clip);
  return clip;
}

void write_wav_channels(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& channels, int sample_rate,
                        WavEncoding encoding) {
  if (channels.empty() || channels.size() > 2) throw InvalidArgument("1 or 2 channels supported");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) throw DimensionError("channel lengths differ");
  }
  if (sample_rate <= 0) throw InvalidArgument("sample rate must be positive");

  const std::uint16_t n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(n_ch * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * block_align);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
  detail::put_u16(out, n_ch);
  detail::put_u32(out, static_cast<std::uint32_t>(sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(sample_rate) * block_align);
  detail::put_u16(out, block_align);
  detail::put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_size);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      if (encoding == WavEncoding::pcm16) {
        const double scaled = std::round(std::clamp(ch[i], -1.0, 1.0) * 32768.0);
        const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        detail::put_u16(out, static_cast<std::uint16_t>(s));
      } else {
        detail::put_f32(out, static_cast<float>(ch[i]));
      }
    }
  }
  detail::write_file_bytes(path, out);
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
  write_wav_channels(path, {clip.samples}, clip.sample_rate, encoding);
}

}  // namespace sqa
