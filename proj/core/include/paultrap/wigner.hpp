#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paultrap/fitting.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

enum class ScanDirection { axial, radial };

std::string_view direction_name(ScanDirection d);
ScanDirection parse_direction(std::string_view name);

/// Mode whose energy a scan varies: axial stretch or radial (x) stretch.
ModeId scanned_mode(ScanDirection d);

/// Earliest time at which the two particles have swapped axial order. Uses the
/// per-step event when the run recorded one, otherwise the trajectory samples.
/// Throws DomainError for single-particle records.
std::optional<double> detect_reordering(const RunRecord& record);

struct LifetimeRecord {
  double energy_k = 0.0;     // 2E/kB of the scanned mode
  double spectator_k = 0.0;  // every other mode
  double lifetime_s = 0.0;   // first reorder, or t_end when censored
  double rate = 0.0;         // 1/lifetime, never below 1/t_end
  bool censored = false;
  bool diverged = false;
  std::uint64_t seed = 0;
  double dt = 0.0;
};

struct LifetimeScanConfig {
  ScanDirection direction = ScanDirection::axial;
  double spectator_k = 0.4;
  TrapConfig trap = default_trap();
  Method method = Method::rk3;
  double dt = 1e-13;
  double t_end = 100e-6;
  /// Mean reorder rate that defines the threshold: a 1 ms crystal lifetime.
  double target_rate = 1e3;
  std::uint64_t base_seed = 1;
  PhaseConvention phase = PhaseConvention::fixed_sign;
  std::size_t jobs = 1;
  /// Called after each finished point with (finished, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// One run at the given scanned-mode energy; stops at the first reorder.
LifetimeRecord run_lifetime(double energy_k, const LifetimeScanConfig& cfg, std::uint64_t seed);

/// One record per energy (seed base_seed + index), run on cfg.jobs threads.
std::vector<LifetimeRecord> lifetime_scan(std::span<const double> energies_k, const LifetimeScanConfig& cfg);

struct MeanRatePoint {
  double temperature_k = 0.0;
  double rate = 0.0;
};

struct ThresholdScanResult {
  ScanDirection direction = ScanDirection::axial;
  double spectator_k = 0.0;
  double t_end = 0.0;
  double target_rate = 0.0;
  std::vector<LifetimeRecord> records;
  std::optional<DoubleExpFit> fit;
  std::vector<MeanRatePoint> mean_rate_curve;
  std::optional<double> threshold_k;
  std::vector<std::string> warnings;
};

/// Fits the uncensored, non-diverged records (f0 pinned to ln(1/t_end)), builds
/// the Boltzmann-mean curve on curve_temperatures and bisects for the
/// temperature where the mean rate equals target_rate (default cfg.target_rate),
/// bracketed by [1e-4 K, highest fitted energy].
ThresholdScanResult analyze_scan(std::vector<LifetimeRecord> records, const LifetimeScanConfig& cfg,
                                 std::span<const double> curve_temperatures_k,
                                 std::optional<double> target_rate = std::nullopt);

ThresholdScanResult threshold_scan(std::span<const double> energies_k, const LifetimeScanConfig& cfg,
                                   std::span<const double> curve_temperatures_k,
                                   std::optional<double> target_rate = std::nullopt);

/// Coulomb-barrier bound 0.5 (q^2 / 2 pi eps0)^(2/3) (m omega_z^2)^(1/3), J.
double coulomb_barrier_energy(double omega_z, const PhysicalConstants& c = kCodata2018);

/// Energy label 2E/kB in kelvin.
inline double kelvin_label(double energy_j, const PhysicalConstants& c = kCodata2018) {
  return 2.0 * energy_j / c.boltzmann;
}

}  // namespace paultrap
