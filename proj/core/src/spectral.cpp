#include "sqa/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "sqa/error.hpp"
#include "sqa/framing.hpp"

namespace sqa {
namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (!in_ || !out_) throw Error("fftw_malloc failed");
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("cannot create FFT plan");
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute_dft_r2c(plan_, in_.get(), out_.get()); }

 private:
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

// Rounds a phase in [-pi, pi] to float while keeping it inside (-pi, pi].
float phase_to_float(double phase) {
  constexpr float kPiBelow = 3.14159250f;  // largest float < pi
  const auto f = static_cast<float>(phase);
  if (static_cast<double>(f) > std::numbers::pi) return kPiBelow;
  if (static_cast<double>(f) <= -std::numbers::pi) return -kPiBelow;
  return f;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

FeatureSequence stft_amplitude_phase(const AudioClip& clip, const SpectralOptions& options) {
  validate(clip);
  const std::size_t fft_size = options.fft_size;
  if (fft_size < 64 || !is_power_of_two(fft_size)) {
    throw InvalidArgument("fft_size must be a power of two >= 64, got " + std::to_string(fft_size));
  }
  if (!(options.frame_shift > 0.0)) throw InvalidArgument("frame_shift must be positive");
  const auto window = static_cast<std::size_t>(std::lround(2.0 * options.frame_shift * clip.sample_rate));
  if (window < 2) throw InvalidArgument("frame_shift too small for the sample rate");
  if (window > fft_size) {
    throw InvalidArgument("analysis window (" + std::to_string(window) + " samples) exceeds fft_size " +
                          std::to_string(fft_size));
  }
  if (clip.samples.size() < window) {
    throw InvalidArgument("clip shorter than one analysis window (" + std::to_string(window) + " samples)");
  }

  std::vector<double> hann(window);
  for (std::size_t i = 0; i < window; ++i) {
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / window));
  }

  const FrameGrid grid{clip.samples.size(), clip.sample_rate, options.frame_shift};
  const std::size_t frames = grid.frame_count();
  const std::size_t bins = fft_size / 2 + 1;
  const std::size_t dims = 2 * bins;

  std::vector<double> magnitude(frames * bins);
  std::vector<double> phase(frames * bins);
  RealFft fft(fft_size);
  double peak = 0.0;
  for (std::size_t n = 0; n < frames; ++n) {
    const std::size_t start = grid.window_start(n, window);
    double* in = fft.input();
    for (std::size_t i = 0; i < window; ++i) in[i] = clip.samples[start + i] * hann[i];
    std::fill(in + window, in + fft_size, 0.0);
    fft.execute();
    const fftw_complex* out = fft.output();
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out[k][0];
      const double im = out[k][1];
      const double mag = std::hypot(re, im);
      double ph = std::atan2(im, re);
      if (ph <= -std::numbers::pi) ph = std::numbers::pi;
      magnitude[n * bins + k] = mag;
      phase[n * bins + k] = ph;
      peak = std::max(peak, mag);
    }
  }

  std::vector<float> data(frames * dims);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t k = 0; k < bins; ++k) {
      double db = kSpectralFloorDb;
      if (peak > 0.0 && magnitude[n * bins + k] > 0.0) {
        db = std::max(kSpectralFloorDb, 20.0 * std::log10(magnitude[n * bins + k] / peak));
      }
      data[n * dims + k] = static_cast<float>(db);
      data[n * dims + bins + k] = phase_to_float(phase[n * bins + k]);
    }
  }
  return {frames, dims, std::move(data), options.frame_shift, FeatureKind::spectral};
}

}  // namespace sqa
