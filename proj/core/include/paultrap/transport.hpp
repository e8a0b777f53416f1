#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/schedules.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

/// (E_after - E_before) / (hbar omega). Throws DomainError unless omega > 0.
double quanta_change(double e_before, double e_after, double omega, const PhysicalConstants& c = kCodata2018);

/// Axial frequency of one particle in the quadratic part |q| alpha z^2 of the splitting potential.
double split_well_frequency(double alpha, const PhysicalConstants& c = kCodata2018);

/// Axial COM and stretch energies of a pair in the potential |q|(alpha z^2 + beta z^4)
/// plus Coulomb, measured from the symmetric equilibrium at separation d.
/// COM is harmonic (mass 2m); stretch is the exact relative energy along z.
struct AxialPairEnergy {
  double com = 0.0;      // J
  double stretch = 0.0;  // J
};
AxialPairEnergy axial_pair_energy(const SystemState& s, const SplitCoefficients& k,
                                  const PhysicalConstants& c = kCodata2018);

struct SplitRunConfig {
  TrapConfig trap = default_trap();  // supplies the radial RF confinement
  Method method = Method::rk3;
  double dt = 1e-13;
  /// Samples kept for the trajectory output; 0 keeps none.
  std::size_t trajectory_points = 0;
  /// Rotation of the axial COM and stretch phase-space points before the run, rad.
  double initial_phase = 0.0;
};

struct SplitResult {
  RunStatus status = RunStatus::completed;
  std::string message;
  double tau_s = 0.0;
  double omega_initial = 0.0;  // single-particle axial frequency of the initial well
  double omega_final = 0.0;    // same for the final well
  AxialPairEnergy initial_energy;
  AxialPairEnergy final_energy;
  double dn_com = 0.0;
  double dn_stretch = 0.0;
  /// Largest |z1 - z2| - d(t) and |z1 + z2|/2 seen along the run, m.
  double max_stretch_deviation = 0.0;
  double max_com_deviation = 0.0;
  std::vector<SystemState> trajectory;
  double dt = 0.0;
};

/// Two particles under the RF quadrupole, the splitting potential and Coulomb,
/// started at the initial equilibrium with the given mode temperatures.
/// Quanta are counted against each mode's own frequency: omega for COM and
/// sqrt(3) omega for the stretch, in the initial and final wells respectively.
SplitResult run_split(const SplitSchedule& schedule, const ModeTemperatureSpec& initial,
                      const SplitRunConfig& cfg = {});

/// Mean quanta change over `phases` equally spaced initial phases.
struct SplitPhaseAverage {
  double dn_com = 0.0;
  double dn_stretch = 0.0;
  std::vector<SplitResult> runs;
};
SplitPhaseAverage run_split_phase_average(const SplitSchedule& schedule, const ModeTemperatureSpec& initial,
                                          std::size_t phases, const SplitRunConfig& cfg = {},
                                          std::size_t jobs = 1);

struct ShuttleRunConfig {
  Method method = Method::rk3;
  double dt = 1e-12;
};

struct ShuttleResult {
  RunStatus status = RunStatus::completed;
  double tau_t = 0.0;
  double displacement = 0.0;
  double final_energy = 0.0;  // co-moving frame, J
  double dn = 0.0;
  double dt = 0.0;
};

/// One particle at rest in a harmonic well of frequency omega_z moved along z;
/// quanta gained in the co-moving frame at t = tau_t.
ShuttleResult run_shuttle(const ShuttleSchedule& schedule, double omega_z, const ShuttleRunConfig& cfg = {},
                          const PhysicalConstants& c = kCodata2018);

/// CSV with columns t_s, alpha_vpm2, beta_vpm4, d_m.
void write_split_schedule_csv(std::ostream& out, const SplitSchedule& schedule, std::size_t samples);
/// CSV with columns t_s, zc_m, vc_mps.
void write_shuttle_schedule_csv(std::ostream& out, const ShuttleSchedule& schedule, std::size_t samples);

}  // namespace paultrap
