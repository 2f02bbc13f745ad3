#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sqa {

// Mono audio, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  [[nodiscard]] double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Checks the AudioClip invariants (non-empty, finite, positive rate).
void validate(const AudioClip& clip);

// Reads a linear-PCM WAV file (16-bit integer or 32-bit float, 1 or 2
// channels). Stereo is downmixed by averaging; no resampling is done.
AudioClip read_wav(const std::filesystem::path& path);

enum class WavEncoding : std::uint8_t { pcm16, float32 };

// Writes a mono WAV file. pcm16 clips to [-1, 1] and rounds to nearest.
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::pcm16);

// Writes interleaved multi-channel data; `channels[c][i]` is sample i of
// channel c. Used to produce stereo fixtures.
void write_wav_channels(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& channels,
                        int sample_rate, WavEncoding encoding);

}  // namespace sqa
