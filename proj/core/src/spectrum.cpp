#include "paultrap/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "paultrap/errors.hpp"

namespace paultrap {

namespace {

// Smallest length >= n whose only prime factors are 2, 3 and 5.
std::size_t smooth_length(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace

std::size_t Spectrum::bin_of(double f_hz) const {
  if (frequency_hz.empty()) throw DomainError("spectrum: empty");
  const double idx = std::round(f_hz / bin_width_hz);
  return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(frequency_hz.size() - 1)));
}

Spectrum amplitude_spectrum(std::span<const double> samples, double dt, bool hann) {
  const std::size_t n = samples.size();
  if (n < 4) throw DomainError("amplitude_spectrum: need at least 4 samples");
  if (!(dt > 0.0)) throw DomainError("amplitude_spectrum: dt must be positive");

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);

  const std::size_t padded = smooth_length(n);
  std::vector<double> x(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = hann ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                  static_cast<double>(n - 1)))
                          : 1.0;
    x[i] = w * (samples[i] - mean);
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, x);

  Spectrum s;
  const std::size_t half = padded / 2 + 1;
  s.bin_width_hz = 1.0 / (static_cast<double>(padded) * dt);
  s.frequency_hz.resize(half);
  s.amplitude.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    s.frequency_hz[k] = static_cast<double>(k) * s.bin_width_hz;
    s.amplitude[k] = std::abs(out[k]) / static_cast<double>(n);
  }
  return s;
}

std::size_t peak_bin(const Spectrum& s, double f_lo_hz, double f_hi_hz) {
  std::size_t best = s.frequency_hz.size();
  double best_a = -1.0;
  for (std::size_t k = 0; k < s.frequency_hz.size(); ++k) {
    const double f = s.frequency_hz[k];
    if (f < f_lo_hz || f > f_hi_hz) continue;
    if (s.amplitude[k] > best_a) {
      best_a = s.amplitude[k];
      best = k;
    }
  }
  if (best == s.frequency_hz.size()) throw DomainError("peak_bin: no bins in the requested band");
  return best;
}

double peak_frequency(const Spectrum& s, double f_lo_hz, double f_hi_hz) {
  return s.frequency_hz[peak_bin(s, f_lo_hz, f_hi_hz)];
}

double peak_prominence(const Spectrum& s, double f_hz, double half_width_hz) {
  std::vector<double> sorted = s.amplitude;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double median = *mid;
  const double peak = s.amplitude[peak_bin(s, f_hz - half_width_hz, f_hz + half_width_hz)];
  return median > 0.0 ? peak / median : INFINITY;
}

}  // namespace paultrap
