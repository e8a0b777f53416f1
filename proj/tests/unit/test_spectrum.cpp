#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "paultrap/errors.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/spectrum.hpp"

namespace paultrap {
namespace {

std::vector<double> sampled_sine(double f_hz, double amplitude, double dt, std::size_t n, double offset = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = offset + amplitude * std::sin(kTwoPi * f_hz * static_cast<double>(i) * dt);
  return x;
}

TEST(Spectrum, BinGrid) {
  const Spectrum s = amplitude_spectrum(std::vector<double>(1000, 0.0), 1e-9);
  EXPECT_DOUBLE_EQ(s.bin_width_hz, 1e6);
  ASSERT_EQ(s.frequency_hz.size(), 501u);
  EXPECT_DOUBLE_EQ(s.frequency_hz.back(), 500e6);
  EXPECT_EQ(s.bin_of(3.4e6), 3u);
  EXPECT_EQ(s.bin_of(1e12), 500u);
  // 1009 is prime; the transform runs on the next 2-3-5-smooth length.
  const Spectrum padded = amplitude_spectrum(std::vector<double>(1009, 0.0), 1e-9);
  EXPECT_DOUBLE_EQ(padded.bin_width_hz, 1e9 / 1024.0);
  EXPECT_EQ(padded.frequency_hz.size(), 513u);
}

TEST(Spectrum, OnBinSineAmplitude) {
  const double dt = 1e-9;
  const std::size_t n = 1024;
  const double f = 64.0 / (static_cast<double>(n) * dt);
  const auto x = sampled_sine(f, 3.0, dt, n, 7.0);
  const Spectrum raw = amplitude_spectrum(x, dt, false);
  EXPECT_EQ(peak_bin(raw, 0.0, 1e12), 64u);
  EXPECT_NEAR(raw.amplitude[64], 1.5, 1e-12);
  EXPECT_NEAR(raw.amplitude[0], 0.0, 1e-12);  // mean removed
  const Spectrum hann = amplitude_spectrum(x, dt, true);
  EXPECT_EQ(peak_bin(hann, 0.0, 1e12), 64u);
  EXPECT_NEAR(hann.amplitude[64], 0.75, 0.75 * 2e-3);
}

TEST(Spectrum, OffBinPeakWithinOneBin) {
  const double dt = 1e-11;
  const std::size_t n = 4096;
  const auto x = sampled_sine(300e6, 1.0, dt, n);
  const Spectrum s = amplitude_spectrum(x, dt);
  const double f = peak_frequency(s, 1e6, 1e12);
  EXPECT_LE(std::abs(f - 300e6), s.bin_width_hz);
  EXPECT_GT(peak_prominence(s, 300e6, 2.0 * s.bin_width_hz), 100.0);
}

TEST(Spectrum, RejectsBadInput) {
  EXPECT_THROW(amplitude_spectrum(std::vector<double>(3, 0.0), 1e-9), DomainError);
  EXPECT_THROW(amplitude_spectrum(std::vector<double>(8, 0.0), 0.0), DomainError);
  const Spectrum s = amplitude_spectrum(std::vector<double>(8, 1.0), 1.0);
  EXPECT_THROW(peak_bin(s, 10.0, 20.0), DomainError);
}

TEST(Spectrum, TrappedElectronAxialLine) {
  const TrapConfig trap = default_trap();
  ForceStack stack;
  stack.add(TrapTerm(trap));
  SystemState s;
  s.pos[0] = Vec3(1e-8, 0.0, 1e-7);
  IntegratorConfig cfg;
  cfg.dt = rf_aligned_dt(trap.omega_rf, 1e-13);
  cfg.t_end = 200e-9;
  cfg.record_stride = 10;
  const RunRecord r = run_simulation(s, stack, cfg);
  std::vector<double> z;
  for (const auto& st : r.trajectory) z.push_back(st.pos[0].z());
  const Spectrum spec = amplitude_spectrum(z, 10 * cfg.dt);
  EXPECT_LE(std::abs(peak_frequency(spec, 50e6, 5e9) - 300e6), spec.bin_width_hz);
}

}  // namespace
}  // namespace paultrap
