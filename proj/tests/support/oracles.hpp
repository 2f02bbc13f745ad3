// Independent reference implementations used by the tests. These favour
// obviousness over speed and share no code with the library.
#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <unistd.h>
#include <vector>

namespace sqa::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sqa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline double oracle_mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = oracle_mean(x);
  const double my = oracle_mean(y);
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Rank of x_i = 1 + #{x_j < x_i} + (#{x_j == x_i, j != i}) / 2, by pair counting.
inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      if (x[j] < x[i]) less += 1;
      if (x[j] == x[i]) equal += 1;
    }
    r[i] = 1.0 + less + equal / 2.0;
  }
  return r;
}

inline double oracle_srcc(const std::vector<double>& x, const std::vector<double>& y) {
  return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

// Tau-b by enumerating all pairs.
inline double oracle_ktau(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      pairs += 1;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0) tie_x += 1;
      if (dy == 0) tie_y += 1;
      if (dx * dy > 0) concordant += 1;
      if (dx * dy < 0) discordant += 1;
    }
  }
  return (concordant - discordant) / std::sqrt((pairs - tie_x) * (pairs - tie_y));
}

// 1-based histogram bin of a frequency, straight from the definitions.
inline int oracle_bin(double hz) {
  const double cents = 1200.0 * std::log(hz / 440.0) / std::log(2.0);
  double idx = cents / 10.0 - 120.0 * std::floor(cents / 1200.0);
  if (idx >= 120.0) idx -= 120.0;
  if (idx < 0.0) idx += 120.0;
  return static_cast<int>(std::floor(idx)) + 1;
}

// |X[k]| of a real signal by the DFT sum.
inline std::vector<double> oracle_dft_magnitude(const std::vector<double>& x, std::size_t n_fft) {
  std::vector<double> out(n_fft / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / n_fft);
    }
    out[k] = std::abs(acc);
  }
  return out;
}

// Period (Hz) of the strongest normalized autocorrelation peak in [f_lo, f_hi].
inline double oracle_autocorr_f0(const std::vector<double>& x, int sample_rate, double f_lo, double f_hi) {
  const auto lag_min = static_cast<std::size_t>(sample_rate / f_hi);
  const auto lag_max = static_cast<std::size_t>(sample_rate / f_lo);
  double best = -1;
  std::size_t best_lag = lag_min;
  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t lag = lag_min; lag <= lag_max + 1 && lag < x.size(); ++lag) {
    double acc = 0;
    for (std::size_t n = 0; n + lag < x.size(); ++n) acc += x[n] * x[n + lag];
    r[lag] = acc / static_cast<double>(x.size() - lag);
  }
  // Peaks at multiples of the period are nearly as tall as the first one, so
  // take the shortest lag whose peak is within 10% of the tallest.
  for (std::size_t lag = lag_min + 1; lag <= lag_max; ++lag) {
    if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) best = std::max(best, r[lag]);
  }
  for (std::size_t lag = lag_min + 1; lag <= lag_max; ++lag) {
    if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.9 * best) {
      best_lag = lag;
      break;
    }
  }
  // Parabolic refinement around the peak.
  const double a = r[best_lag - 1], b = r[best_lag], c = r[best_lag + 1];
  const double shift = 0.5 * (a - c) / (a - 2 * b + c);
  return sample_rate / (static_cast<double>(best_lag) + shift);
}

inline std::vector<double> sine(double hz, double seconds, int sample_rate, double amplitude = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(std::lround(seconds * sample_rate)));
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sample_rate);
  }
  return x;
}

}  // namespace sqa::testing
