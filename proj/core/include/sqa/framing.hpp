#pragma once

#include <cstddef>

namespace sqa {

// Frame grid shared by the pitch tracker and the spectral extractor so that
// both produce the same number of frames for the same clip and frame shift.
struct FrameGrid {
  std::size_t num_samples = 0;
  int sample_rate = 0;
  double frame_shift = 0.0;  // seconds

  // floor(duration / frame_shift) + 1
  [[nodiscard]] std::size_t frame_count() const;

  // Sample index at which frame n is centered.
  [[nodiscard]] std::size_t center(std::size_t frame) const;

  // Start index of a `window`-sample analysis window centered on the frame,
  // clamped so the window lies entirely inside the clip. Requires
  // window <= num_samples.
  [[nodiscard]] std::size_t window_start(std::size_t frame, std::size_t window) const;
};

}  // namespace sqa
