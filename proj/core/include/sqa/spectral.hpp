#pragma once

#include <cstddef>

#include "sqa/audio.hpp"
#include "sqa/feature.hpp"

namespace sqa {

inline constexpr double kSpectralFloorDb = -80.0;

struct SpectralOptions {
  double frame_shift = 0.02;  // seconds; the Hann window spans 2 * frame_shift
  std::size_t fft_size = 1024;
};

// Per-frame [log-amplitude (dB re. utterance peak, floored at -80) |
// phase in (-pi, pi]], each fft_size / 2 + 1 values. The frame grid matches
// track_pitch for the same clip and frame shift.
FeatureSequence stft_amplitude_phase(const AudioClip& clip, const SpectralOptions& options = {});

}  // namespace sqa
