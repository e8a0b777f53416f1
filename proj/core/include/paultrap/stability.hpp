#pragma once

#include <cstddef>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "paultrap/forces.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Linear time-periodic system for u = (x, y, z, vx, vy, vz):
///   dv/dt = -(k_static + k_drive cos(omega_rf t + phase)) x + coupling v
/// with per-axis stiffnesses (1/s^2) and a velocity-coupling matrix (1/s).
struct LinearPeriodicSystem {
  double omega_rf = 0.0;
  double phase = 0.0;
  Eigen::Vector3d k_static = Eigen::Vector3d::Zero();
  Eigen::Vector3d k_drive = Eigen::Vector3d::Zero();
  Eigen::Matrix3d coupling = Eigen::Matrix3d::Zero();

  double period() const { return kTwoPi / omega_rf; }
  Matrix6 at(double t) const;

  /// Linearized single-particle motion in the trap with a uniform magnetic field.
  static LinearPeriodicSystem from_trap(const TrapConfig& cfg, const MagneticField& field = {},
                                        const PhysicalConstants& c = kCodata2018);

  /// x'' + (a - 2q cos 2s) x = 0 with s = omega_rf t / 2, on all three axes
  /// (y carries -q so the x/y pair mirrors the radial trap).
  static LinearPeriodicSystem mathieu(double a, double q, double omega_rf = 1.0);
};

/// One-period state-transition matrix by fourth-order Magnus steps, in the
/// coordinates (x, y, z, vx/omega_rf, vy/omega_rf, vz/omega_rf).
/// Throws DomainError for fewer than 200 steps, NumericalError on non-finite results.
Matrix6 monodromy(const LinearPeriodicSystem& system, std::size_t steps_per_period = 400);

struct FloquetSpectrum {
  double exponent = 0.0;  // ln max |mu|, per RF period
  Eigen::Matrix<std::complex<double>, 6, 1> multipliers;
  Eigen::Matrix<std::complex<double>, 6, 6> vectors;
};

FloquetSpectrum floquet_spectrum(const Matrix6& monodromy);

inline double floquet_exponent(const Matrix6& m) { return floquet_spectrum(m).exponent; }

inline constexpr double kDefaultStabilityThreshold = 1e-10;

/// Radial Mathieu a parameter with a transverse field, (omega_ce^2 - 2 omega_z^2) / omega_rf^2.
inline double magnetized_a_radial(double omega_ce, double omega_z, double omega_rf) {
  return (omega_ce * omega_ce - 2.0 * omega_z * omega_z) / (omega_rf * omega_rf);
}

struct BetaEstimate {
  double value = 0.0;
  /// Set when two multiplier pairs carry comparable x-position weight.
  bool ambiguous = false;
};

/// beta_x = arg(mu_x)/pi. Without a reference the x-like multiplier is the one
/// whose eigenvector is most x-position dominated and the principal value in
/// [0, 1] is returned; this is reliable where x is decoupled (no field). With a
/// reference (the value at a nearby parameter point) the x-like multiplier is
/// followed by continuity: every multiplier whose eigenvector lies mainly in the
/// x-z plane (the cyclotron plane of a field along y) is lifted to the branch
/// nearest the reference (beta + 2k or 2k - beta) and the nearest one is taken.
BetaEstimate beta_x(const Matrix6& monodromy, std::optional<double> reference = std::nullopt);

/// Largest omega_ce increment used when following beta_x: omega_rf / 200.
inline double beta_track_step(double omega_rf) { return omega_rf / 200.0; }

/// Follows beta_x from (omega_from, beta_from) to omega_to in steps of at most
/// max_step (0 selects beta_track_step) along the field strength at fixed trap voltages.
double continue_beta_x(const TrapConfig& trap, double omega_from, double beta_from, double omega_to,
                       std::size_t steps_per_period = 400, double max_step = 0.0);

/// Field-free secular frequency of the x motion, beta_x Omega_rf / 2 (rad/s).
double floquet_secular_frequency(const TrapConfig& cfg, std::size_t steps_per_period = 400);

/// Mathieu-boundary search: smallest q in (q_lo, q_hi) at which the exponent
/// crosses the threshold, by bisection to q_tolerance.
double mathieu_boundary_q(double a, double q_lo, double q_hi, double threshold = kDefaultStabilityThreshold,
                          double q_tolerance = 1e-6, std::size_t steps_per_period = 400);

struct StabilityGrid {
  std::vector<double> q_x;
  std::vector<double> omega_ce;  // rad/s
  /// Row-major [i_q * omega_ce.size() + i_ce].
  std::vector<double> lambda;
  std::vector<double> beta_x;
  std::vector<bool> ambiguous;
  double threshold = kDefaultStabilityThreshold;

  std::size_t index(std::size_t iq, std::size_t ice) const { return iq * omega_ce.size() + ice; }
  bool stable(std::size_t iq, std::size_t ice) const { return lambda[index(iq, ice)] < threshold; }
};

struct StabilityMapConfig {
  double omega_rf = kTwoPi * 10.6e9;
  double omega_z = kTwoPi * 300e6;
  TrapGeometry geometry;
  std::size_t steps_per_period = 400;
  double threshold = kDefaultStabilityThreshold;
  std::size_t jobs = 1;
};

/// lambda and beta_x on the q_x x omega_ce grid at fixed omega_rf and omega_z.
/// beta_x is followed along omega_ce in each row from the field-free value, with
/// intermediate points wherever the grid step exceeds beta_track_step.
StabilityGrid stability_map(std::span<const double> q_x, std::span<const double> omega_ce,
                            const StabilityMapConfig& cfg);

/// Stable/unstable transition along omega_ce, refined by bisection.
struct BoundaryPoint {
  double q_x = 0.0;
  double omega_ce = 0.0;  // stable side, rad/s
  double beta_x = 0.0;    // followed from the neighbouring stable grid cell
};

/// One point per adjacent stable/unstable cell pair in each grid row.
std::vector<BoundaryPoint> stability_boundaries(const StabilityGrid& grid, const StabilityMapConfig& cfg,
                                               double omega_tolerance);

struct LineCutPoint {
  double omega_ce = 0.0;     // rad/s
  double max_energy_ev = 0.0;
  bool capped = false;       // reached the cap: unstable in the time domain
  double lambda = 0.0;
  bool lambda_stable = true;
};

struct LineCutConfig {
  double omega_rf = kTwoPi * 10.6e9;
  double omega_z = kTwoPi * 300e6;
  double q_x = 0.53;
  TrapGeometry geometry;
  double t_end = 25e-6;
  double dt = 1e-13;
  double energy_cap_ev = 1.0;
  double initial_temperature_k = 0.4;
  std::uint64_t seed = 1;
  std::size_t steps_per_period = 400;
  double threshold = kDefaultStabilityThreshold;
  std::size_t jobs = 1;
};

/// Radial energy of one particle: kinetic plus DC potential, J.
double radial_energy(const SystemState& s, double omega_z, const PhysicalConstants& c = kCodata2018);

/// Time-domain maximum radial energy (capped) next to the monodromy verdict.
std::vector<LineCutPoint> max_energy_linecut(std::span<const double> omega_ce, const LineCutConfig& cfg);

}  // namespace paultrap
