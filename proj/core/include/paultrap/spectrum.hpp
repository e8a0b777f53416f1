#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace paultrap {

/// One-sided amplitude spectrum of a uniformly sampled real signal.
struct Spectrum {
  double bin_width_hz = 0.0;
  std::vector<double> frequency_hz;
  std::vector<double> amplitude;

  std::size_t bin_of(double f_hz) const;
};

/// Mean-removed, Hann-windowed FFT; sample spacing dt in seconds.
/// The signal is zero-padded to the next 2-3-5-smooth length; amplitudes are
/// normalized by the unpadded sample count.
Spectrum amplitude_spectrum(std::span<const double> samples, double dt, bool hann = true);

/// Index of the largest amplitude with frequency in [f_lo, f_hi].
std::size_t peak_bin(const Spectrum& s, double f_lo_hz, double f_hi_hz);

double peak_frequency(const Spectrum& s, double f_lo_hz, double f_hi_hz);

/// Largest amplitude within +-half_width_hz of f_hz divided by the median
/// amplitude of the whole spectrum.
double peak_prominence(const Spectrum& s, double f_hz, double half_width_hz);

}  // namespace paultrap
