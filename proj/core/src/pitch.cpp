#include "sqa/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sqa/error.hpp"
#include "sqa/framing.hpp"

namespace sqa {
namespace {

// Lag of the first dip of the normalized difference below `threshold`,
// refined to the bottom of that dip; 0 when no lag qualifies.
std::size_t first_dip(const std::vector<double>& cmnd, std::size_t tau_min, std::size_t tau_max,
                      double threshold) {
  for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
    if (cmnd[tau] < threshold) {
      while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
      return tau;
    }
  }
  return 0;
}

double parabolic_offset(const std::vector<double>& y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return 0.0;
  const double a = y[i - 1];
  const double b = y[i];
  const double c = y[i + 1];
  const double denom = a - 2.0 * b + c;
  if (denom <= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
}

}  // namespace

void validate(const PitchTrack& track) {
  if (track.f0_hz.empty()) throw InvalidArgument("pitch track is empty");
  if (track.f0_hz.size() != track.voiced.size()) {
    throw DimensionError("pitch track: f0 and voicing lengths differ");
  }
  if (!(track.frame_shift > 0.0)) throw InvalidArgument("pitch track: frame_shift must be positive");
  for (std::size_t n = 0; n < track.size(); ++n) {
    const double f = track.f0_hz[n];
    if (!std::isfinite(f)) throw InvalidArgument("pitch track: non-finite f0 at frame " + std::to_string(n));
    if (track.voiced[n] ? !(f > 0.0) : f != 0.0) {
      throw InvalidArgument("pitch track: voicing flag disagrees with f0 at frame " + std::to_string(n));
    }
  }
}

PitchTrack track_pitch(const AudioClip& clip, const PitchTrackerOptions& options) {
  validate(clip);
  const double sr = clip.sample_rate;
  if (!(options.frame_shift > 0.0)) throw InvalidArgument("frame_shift must be positive");
  if (!(options.f0_min > 0.0 && options.f0_min < options.f0_max && options.f0_max < sr / 2.0)) {
    throw InvalidArgument("pitch range must satisfy 0 < f0_min < f0_max < sample_rate / 2");
  }
  const auto window = static_cast<std::size_t>(std::lround(options.window * sr));
  const auto tau_max = static_cast<std::size_t>(std::ceil(sr / options.f0_min));
  const auto tau_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / options.f0_max)));
  if (window < 2 * tau_max) {
    throw InvalidArgument("f0_min " + std::to_string(options.f0_min) +
                          " Hz needs more than two periods inside the analysis window");
  }
  if (clip.samples.size() < window) {
    throw InvalidArgument("clip shorter than one analysis window (" + std::to_string(window) + " samples)");
  }
  const std::size_t integration = window - tau_max;

  const FrameGrid grid{clip.samples.size(), clip.sample_rate, options.frame_shift};
  const std::size_t frames = grid.frame_count();

  PitchTrack track;
  track.frame_shift = options.frame_shift;
  track.f0_hz.assign(frames, 0.0);
  track.voiced.assign(frames, false);

  std::vector<double> diff(tau_max + 1);
  std::vector<double> cmnd(tau_max + 1);
  for (std::size_t n = 0; n < frames; ++n) {
    const double* x = clip.samples.data() + grid.window_start(n, window);

    diff[0] = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < integration; ++j) {
        const double d = x[j] - x[j + tau];
        acc += d * d;
      }
      diff[tau] = acc;
    }
    cmnd[0] = 1.0;
    double running = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
    }

    const std::size_t tau = first_dip(cmnd, tau_min, tau_max, options.voicing_threshold);
    if (tau == 0) continue;
    const double f0 = sr / (static_cast<double>(tau) + parabolic_offset(cmnd, tau));
    if (f0 < options.f0_min || f0 > options.f0_max) continue;
    track.f0_hz[n] = f0;
    track.voiced[n] = true;
  }
  return track;
}

double hz_to_cent(double f_hz) {
  if (!(f_hz > 0.0) || !std::isfinite(f_hz)) {
    throw InvalidArgument("hz_to_cent needs a positive finite frequency");
  }
  return 1200.0 * std::log2(f_hz / kReferenceHz);
}

double fold_to_octave(double cents) {
  if (!std::isfinite(cents)) throw InvalidArgument("fold_to_octave needs a finite value");
  constexpr double kBins = static_cast<double>(kHistogramBins);
  double folded = std::fmod(cents / 10.0, kBins);
  if (folded < 0.0) folded += kBins;
  // -tiny + 120 rounds to 120.0 in double arithmetic.
  if (folded >= kBins) folded = 0.0;
  return folded;
}

PitchHistogram compute_histogram(const PitchTrack& track, HistogramNorm norm) {
  validate(track);
  PitchHistogram hist;
  hist.total_frames = track.size();
  for (std::size_t n = 0; n < track.size(); ++n) {
    if (!track.voiced[n]) continue;
    const double folded = fold_to_octave(hz_to_cent(track.f0_hz[n]));
    const auto bin = std::min(static_cast<std::size_t>(folded), kHistogramBins - 1);
    hist.bins[bin] += 1.0;
    ++hist.voiced_frames;
  }
  const std::size_t normalizer = norm == HistogramNorm::voiced ? hist.voiced_frames : hist.total_frames;
  if (normalizer > 0) {
    for (double& b : hist.bins) b /= static_cast<double>(normalizer);
  }
  return hist;
}

double histogram_sharpness(const PitchHistogram& hist) {
  const double mass = std::accumulate(hist.bins.begin(), hist.bins.end(), 0.0);
  if (!(mass > 0.0)) throw InvalidArgument("histogram_sharpness: histogram is all zero");
  double neg_entropy = 0.0;
  for (double b : hist.bins) {
    if (b < 0.0) throw InvalidArgument("histogram_sharpness: negative bin");
    if (b > 0.0) {
      const double p = b / mass;
      neg_entropy += p * std::log(p);
    }
  }
  return neg_entropy;
}

FeatureSequence to_features(const PitchTrack& track) {
  validate(track);
  std::vector<float> data;
  data.reserve(track.size() * 2);
  for (std::size_t n = 0; n < track.size(); ++n) {
    data.push_back(static_cast<float>(track.f0_hz[n]));
    data.push_back(track.voiced[n] ? 1.0f : 0.0f);
  }
  return {track.size(), 2, std::move(data), track.frame_shift, FeatureKind::pitch};
}

PitchTrack pitch_track_from_features(const FeatureSequence& seq) {
  if (seq.kind() != FeatureKind::pitch) throw FormatError("expected a pitch feature sequence");
  if (seq.dims() != 2) throw FormatError("pitch feature sequence must have 2 columns");
  PitchTrack track;
  track.frame_shift = seq.frame_shift();
  track.f0_hz.resize(seq.frames());
  track.voiced.resize(seq.frames());
  for (std::size_t n = 0; n < seq.frames(); ++n) {
    const bool voiced = seq.at(n, 1) > 0.5f;
    track.voiced[n] = voiced;
    track.f0_hz[n] = voiced ? static_cast<double>(seq.at(n, 0)) : 0.0;
  }
  try {
    validate(track);
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
  return track;
}

}  // namespace sqa
