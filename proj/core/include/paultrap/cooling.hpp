#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paultrap/forces.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

/// Secular coordinate whose energy is estimated. For one particle only the
/// *_com entries apply and mean the bare x, y or z motion.
struct SecularMode {
  ModeId id = ModeId::axial_com;
  double omega = 0.0;  // rad/s, secular frequency of the coordinate
};

/// Secular energy (J) of one mode at every boxcar sample:
/// E = M/2 (vbar^2 + omega^2 xbar^2) / sinc^2(omega T_block / 2), where xbar, vbar
/// are block means of the mode displacement from equilibrium_z and velocity.
std::vector<double> secular_energy_series(const RunRecord& record, const SecularMode& mode,
                                          double equilibrium_spacing = 0.0,
                                          const PhysicalConstants& c = kCodata2018);

struct TemperatureEstimate {
  std::string mode;
  double window_start_s = 0.0;
  double window_end_s = 0.0;
  double temperature_k = 0.0;  // <E_secular> / kB
  std::size_t samples = 0;
};

/// Mean secular energy over [t_from, t_to] in kelvin. Throws DomainError if the
/// window is empty or outside the recorded samples.
TemperatureEstimate secular_temperature(const RunRecord& record, const SecularMode& mode, double t_from,
                                        double t_to, double equilibrium_spacing = 0.0,
                                        const PhysicalConstants& c = kCodata2018);

struct EnsembleStats {
  double mean = 0.0;
  double stddev = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

EnsembleStats ensemble_stats(std::span<const double> values);

/// Decimated energy-vs-time curve in kelvin, one column per mode.
struct CoolingCurve {
  std::vector<std::string> modes;
  std::vector<double> t;
  std::vector<std::vector<double>> energy_k;  // [mode][sample]
};

// ---------------------------------------------------------------------------
// Resistive cooling of one particle
// ---------------------------------------------------------------------------

struct ResistiveCoolingConfig {
  TrapConfig trap = default_trap();
  TankCircuit circuit;
  Axis axis = kZ;
  double initial_k = 4.0;  // every axis, 2E_kin/kB
  bool noise = true;
  Method method = Method::rk3;
  double dt = 1.9e-12;  // clamped to the RF stability limit and aligned to the period
  /// Run length in units of the damping time 1/gamma.
  double duration_tau = 12.0;
  /// Equilibrium window: the last `window_tau` damping times.
  double window_tau = 6.0;
  std::uint64_t seed = 1;
  std::size_t curve_points = 2000;
};

struct ResistiveCoolingResult {
  double damping_time_s = 0.0;    // 1/gamma
  double fitted_decay_time_s = 0.0;  // log-energy regression over [1, 6] damping times
  TemperatureEstimate equilibrium;
  CoolingCurve curve;
  RunStatus status = RunStatus::completed;
  std::uint64_t seed = 0;
  double dt = 0.0;
};

/// Throws ConfigError for velocity Verlet (damping is velocity dependent).
ResistiveCoolingResult run_resistive_cooling(const ResistiveCoolingConfig& cfg);

// ---------------------------------------------------------------------------
// Parametric rz cooling of one particle
// ---------------------------------------------------------------------------

struct ParametricCoolingConfig {
  TrapConfig trap = default_trap();
  TankCircuit circuit;
  double amplitude_scale = 5.2e-6;
  /// Drive frequency; default is the resonance omega_x - omega_z with the
  /// Floquet secular frequency for omega_x.
  std::optional<double> omega_p;
  Axis radial_axis = kX;
  double initial_radial_k = 4.0;
  double initial_axial_k = 4.0;
  double dt = 1.9e-12;  // clamped to the RF stability limit and aligned to the period
  double duration = 200e-6;
  double window = 100e-6;  // final window for the equilibrium averages
  std::uint64_t seed = 1;
  std::size_t curve_points = 2000;
};

struct ParametricCoolingResult {
  double omega_radial = 0.0;  // Floquet secular frequency of the driven axis
  double omega_axial = 0.0;
  double omega_p = 0.0;
  double coupling = 0.0;      // g_rz, rad/s
  std::vector<std::string> warnings;
  TemperatureEstimate radial;
  TemperatureEstimate axial;
  CoolingCurve curve;
  RunStatus status = RunStatus::completed;
  std::uint64_t seed = 0;
  double dt = 0.0;
};

ParametricCoolingResult run_parametric_single(const ParametricCoolingConfig& cfg);

// ---------------------------------------------------------------------------
// Parametric z^3 cooling of the two-particle axial stretch mode
// ---------------------------------------------------------------------------

struct StretchCoolingConfig {
  TrapConfig trap = default_trap();
  TankCircuit circuit;
  double amplitude_scale = 10.0;
  std::optional<double> omega_p;  // default omega_s - omega_c
  double initial_com_k = 4.0;
  double initial_stretch_k = 8.0;
  double initial_radial_k = 0.0;
  double dt = 1.9e-12;  // clamped to the RF stability limit and aligned to the period
  double duration = 300e-6;
  double window = 150e-6;
  std::uint64_t seed = 1;
  std::size_t curve_points = 2000;
};

struct StretchCoolingResult {
  double omega_com = 0.0;
  double omega_stretch = 0.0;
  double omega_p = 0.0;
  double coupling = 0.0;  // rad/s
  /// Analytic floor T_res omega_s / omega_c.
  double stretch_floor_k = 0.0;
  std::vector<std::string> warnings;
  TemperatureEstimate com;
  TemperatureEstimate stretch;
  CoolingCurve curve;
  RunStatus status = RunStatus::completed;
  std::uint64_t seed = 0;
  double dt = 0.0;
};

StretchCoolingResult run_stretch_cooling(const StretchCoolingConfig& cfg);

/// Ensembles: member i uses seed base_seed + i and runs on up to `jobs` threads.
std::vector<ResistiveCoolingResult> resistive_ensemble(ResistiveCoolingConfig cfg, std::size_t runs,
                                                       std::size_t jobs);
std::vector<ParametricCoolingResult> parametric_ensemble(ParametricCoolingConfig cfg, std::size_t runs,
                                                         std::size_t jobs);
std::vector<StretchCoolingResult> stretch_ensemble(StretchCoolingConfig cfg, std::size_t runs, std::size_t jobs);

}  // namespace paultrap
