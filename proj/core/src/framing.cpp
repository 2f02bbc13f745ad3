#include "sqa/framing.hpp"

#include <algorithm>
#include <cmath>

namespace sqa {

std::size_t FrameGrid::frame_count() const {
  const double duration = static_cast<double>(num_samples) / sample_rate;
  // The epsilon keeps exact multiples (1 s / 20 ms) from losing a frame to rounding.
  return static_cast<std::size_t>(std::floor(duration / frame_shift + 1e-9)) + 1;
}

std::size_t FrameGrid::center(std::size_t frame) const {
  const double pos = std::round(static_cast<double>(frame) * frame_shift * sample_rate);
  return std::min(static_cast<std::size_t>(pos), num_samples == 0 ? 0 : num_samples - 1);
}

std::size_t FrameGrid::window_start(std::size_t frame, std::size_t window) const {
  const std::size_t c = center(frame);
  const std::size_t half = window / 2;
  const std::size_t start = c > half ? c - half : 0;
  return std::min(start, num_samples - window);
}

}  // namespace sqa
