#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sqa/audio.hpp"
#include "sqa/feature.hpp"

namespace sqa {

inline constexpr std::size_t kHistogramBins = 120;
inline constexpr double kReferenceHz = 440.0;  // A4
inline constexpr double kDefaultFrameShift = 0.02;

// Per-frame f0 estimates. Unvoiced frames carry f0 = 0.
struct PitchTrack {
  std::vector<double> f0_hz;
  std::vector<bool> voiced;
  double frame_shift = kDefaultFrameShift;

  [[nodiscard]] std::size_t size() const { return f0_hz.size(); }
};

// Throws InvalidArgument when lengths differ, the track is empty, or the
// voicing flags disagree with f0 (voiced <=> f0 > 0).
void validate(const PitchTrack& track);

struct PitchTrackerOptions {
  double frame_shift = kDefaultFrameShift;  // seconds
  double f0_min = 60.0;                     // Hz
  double f0_max = 1100.0;                   // Hz
  double window = 0.040;                    // seconds
  double voicing_threshold = 0.3;           // on the cumulative-mean-normalized difference
};

// YIN-style tracker: cumulative-mean-normalized difference function over a
// 40 ms window, first dip under the threshold, parabolic refinement.
PitchTrack track_pitch(const AudioClip& clip, const PitchTrackerOptions& options = {});

// 1200 * log2(f / 440). Throws InvalidArgument for f <= 0 or non-finite f.
double hz_to_cent(double f_hz);

// (cents / 10) mod 120 with floored modulo; the result is in [0, 120).
double fold_to_octave(double cents);

enum class HistogramNorm { voiced, all };

struct PitchHistogram {
  std::array<double, kHistogramBins> bins{};  // bins[j - 1] holds P_j
  std::size_t voiced_frames = 0;
  std::size_t total_frames = 0;
};

// Bin j (1-based) counts voiced frames with j - 1 <= I(cents) < j, divided by
// the voiced-frame count (HistogramNorm::voiced) or all frames (::all).
PitchHistogram compute_histogram(const PitchTrack& track, HistogramNorm norm = HistogramNorm::voiced);

// Negative Shannon entropy (nats) of the histogram, renormalized to unit mass.
// 0 for a one-hot histogram, -log(120) for a uniform one.
double histogram_sharpness(const PitchHistogram& hist);

// Pitch tracks persist as SQAF kind=pitch with two columns (f0_hz, voiced).
FeatureSequence to_features(const PitchTrack& track);
PitchTrack pitch_track_from_features(const FeatureSequence& seq);

}  // namespace sqa
