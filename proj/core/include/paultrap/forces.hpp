#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "paultrap/constants.hpp"
#include "paultrap/schedules.hpp"
#include "paultrap/state.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

// ---------------------------------------------------------------------------
// Parameter blocks
// ---------------------------------------------------------------------------

/// Lumped tank circuit; on resonance it acts as a resistor R = Q sqrt(L/C).
struct TankCircuit {
  double inductance = 250e-9;  // H
  double capacitance = 1e-12;  // F
  double quality = 1000.0;
  double temperature_k = 0.4;  // K

  double resistance() const;
  double resonance() const;
};

/// Damping rate gamma = q^2 R / (m d_eff^2) of the circuit-coupled axis, 1/s.
double damping_rate(const TankCircuit& circuit, double d_eff, const PhysicalConstants& c = kCodata2018);

/// White Johnson-noise voltage V(t) = alpha Gamma(t), alpha = sqrt(2 kB T R).
struct NoiseProcess {
  double alpha = 0.0;  // V s^1/2
  std::uint64_t rng_seed = 1;

  static NoiseProcess johnson(const TankCircuit& circuit, std::uint64_t seed,
                              const PhysicalConstants& c = kCodata2018);
  /// Two-sided power spectral density S_V = 2 alpha^2.
  double spectral_density() const { return 2.0 * alpha * alpha; }
};

/// Seeded Gaussian stream n ~ Normal(0, 1/dt).
class NoiseSampler {
 public:
  explicit NoiseSampler(std::uint64_t seed) : rng_(seed) {}
  double operator()(double dt) { return normal_(rng_) / std::sqrt(dt); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct MagneticField {
  Vec3 b = Vec3::Zero();  // T

  static MagneticField along_y(double tesla) { return {Vec3(0.0, tesla, 0.0)}; }
  /// Field along y with cyclotron frequency omega_ce = e B / m.
  static MagneticField from_cyclotron(double omega_ce, const PhysicalConstants& c = kCodata2018);
  double omega_ce(const PhysicalConstants& c = kCodata2018) const;
};

enum class DriveKind { rz, z3 };

/// Parametric RF drive. rz: Phi = V1 cos(w_p t) r z / r0^2 with V1 = A_p V0.
/// z3: Phi = (V2/r0^3) cos(w_p t) z^3 with V2 = A_p V0 r0.
struct ParametricDrive {
  DriveKind kind = DriveKind::rz;
  double amplitude_scale = 0.0;  // A_p
  double omega_p = 0.0;          // rad/s
  Axis radial_axis = kX;         // rz only
};

/// Coupling strength g_rz = A_p Omega_rf sqrt(omega_r / (2 omega_z)) / 2.
double rz_coupling(double amplitude_scale, double omega_rf, double omega_r, double omega_z);

/// Coupling strength of the z^3 drive between axial COM and stretch modes,
/// 3 l q V2 / (4 m r0^3 sqrt(omega_s omega_c)).
double z3_coupling(double amplitude_scale, const TrapConfig& cfg, const PhysicalConstants& c = kCodata2018);

// ---------------------------------------------------------------------------
// Force terms
// ---------------------------------------------------------------------------

/// -q grad(Phi_dc + Phi_rf). With include_dc = false only the RF quadrupole acts.
struct TrapTerm {
  TrapTerm(const TrapConfig& cfg, bool include_dc = true, const PhysicalConstants& c = kCodata2018);

  static constexpr std::string_view name = "trap";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  double dc_coeff;   // q kappa U_dc / z0^2
  double rf_coeff;   // q V0 / r0^2
  double omega_rf;
  double phase;
};

struct CoulombTerm {
  explicit CoulombTerm(const PhysicalConstants& c = kCodata2018) : k(c.coulomb_constant_q2()) {}

  static constexpr std::string_view name = "coulomb";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  double k;  // q^2 / (4 pi eps0)
};

/// F = -gamma m v along one axis. With two particles the image current carries
/// the summed velocity, so each particle feels -gamma m (v1 + v2).
struct DampingTerm {
  DampingTerm(const TankCircuit& circuit, double d_eff, Axis axis = kZ,
              const PhysicalConstants& c = kCodata2018);

  static constexpr std::string_view name = "damping";
  static constexpr bool velocity_dependent = true;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState&) const { return 0.0; }

  double gamma_m;  // gamma * m
  Axis axis;
};

/// F = -(q/d_eff) alpha n, n ~ Normal(0, 1/dt) redrawn once per step and held
/// constant across the step. The same voltage acts on every particle.
struct JohnsonNoiseTerm {
  JohnsonNoiseTerm(const NoiseProcess& noise, double d_eff, Axis axis = kZ,
                   const PhysicalConstants& c = kCodata2018, int charge_sign = -1);

  static constexpr std::string_view name = "johnson_noise";
  static constexpr bool velocity_dependent = false;
  void begin_step(double dt);
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState&) const { return 0.0; }

  double scale;  // -(q/d_eff) alpha
  Axis axis;
  NoiseSampler sampler;
  double current = 0.0;
};

/// F = q v x B.
struct LorentzTerm {
  LorentzTerm(const MagneticField& field, int charge_sign = -1, const PhysicalConstants& c = kCodata2018);

  static constexpr std::string_view name = "lorentz";
  static constexpr bool velocity_dependent = true;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState&) const { return 0.0; }

  Vec3 qb;
};

struct ParametricRzTerm {
  ParametricRzTerm(const ParametricDrive& drive, const TrapConfig& cfg,
                   const PhysicalConstants& c = kCodata2018);

  static constexpr std::string_view name = "parametric_rz";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  double coeff;  // q V1 / r0^2
  double omega_p;
  Axis radial_axis;
};

struct ParametricZ3Term {
  ParametricZ3Term(const ParametricDrive& drive, const TrapConfig& cfg,
                   const PhysicalConstants& c = kCodata2018);

  static constexpr std::string_view name = "parametric_z3";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  double coeff;  // q V2 / r0^3
  double omega_p;
};

/// Splitting potential |q|[alpha(t)(z^2 - (x^2 + y^2)/2) + beta(t) z^4]. Meant to
/// replace the DC part of the trap (use TrapTerm with include_dc = false).
struct SplitTerm {
  explicit SplitTerm(SplitSchedule schedule, const PhysicalConstants& c = kCodata2018)
      : schedule(std::move(schedule)), charge(c.elementary_charge) {}

  static constexpr std::string_view name = "split_potential";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  SplitSchedule schedule;
  double charge;  // |q|
};

/// Moving axial harmonic well: F_z = -m omega^2 (z - z_c(t)).
struct ShuttleTerm {
  ShuttleTerm(ShuttleSchedule schedule, double omega_z, const PhysicalConstants& c = kCodata2018)
      : schedule(schedule), stiffness(c.electron_mass * omega_z * omega_z) {}

  static constexpr std::string_view name = "shuttle_potential";
  static constexpr bool velocity_dependent = false;
  void add(const SystemState& s, ForceArray& f) const;
  double potential_energy(const SystemState& s) const;

  ShuttleSchedule schedule;
  double stiffness;
};

using ForceTerm = std::variant<TrapTerm, CoulombTerm, DampingTerm, JohnsonNoiseTerm, LorentzTerm,
                               ParametricRzTerm, ParametricZ3Term, SplitTerm, ShuttleTerm>;

std::string_view term_name(const ForceTerm& term);

/// Ordered set of force terms. The total force is the plain sum of the terms.
class ForceStack {
 public:
  explicit ForceStack(double particle_mass = kCodata2018.electron_mass) : mass_(particle_mass) {}

  ForceStack& add(ForceTerm term);

  bool velocity_dependent() const;
  bool has_noise() const;
  double mass() const { return mass_; }
  std::span<const ForceTerm> terms() const { return terms_; }
  std::span<ForceTerm> terms() { return terms_; }

  /// Draws this step's stochastic samples; call once before the stages of a step.
  void begin_step(double dt);

  /// Total force at (s.pos, s.vel, s.t).
  void forces(const SystemState& s, ForceArray& out) const;
  ForceArray forces(const SystemState& s) const {
    ForceArray f;
    forces(s, f);
    return f;
  }

  /// Potential energy of the conservative terms at s.t (J).
  double potential_energy(const SystemState& s) const;

 private:
  std::vector<ForceTerm> terms_;
  double mass_;
};

// ---------------------------------------------------------------------------
// Single-term evaluations
// ---------------------------------------------------------------------------

/// Electric potential of the trap, Phi_dc + Phi_rf (V).
double trap_potential(const Vec3& r, double t, const TrapConfig& cfg);
ForceArray trap_force(const SystemState& s, const TrapConfig& cfg, const PhysicalConstants& c = kCodata2018);

/// Throws DomainError unless the state has two particles with non-zero separation.
ForceArray coulomb_force(const SystemState& s, const PhysicalConstants& c = kCodata2018);
/// U = q^2 / (4 pi eps0 |r1 - r2|).
double coulomb_energy(const Vec3& r1, const Vec3& r2, const PhysicalConstants& c = kCodata2018);

Vec3 damping_force(const Vec3& velocity, const TankCircuit& circuit, double d_eff, Axis axis = kZ,
                   const PhysicalConstants& c = kCodata2018);

/// Force from one noise sample n (already ~ Normal(0, 1/dt)).
Vec3 johnson_noise_force(const NoiseProcess& noise, double sample, double d_eff, Axis axis = kZ,
                         int charge_sign = -1, const PhysicalConstants& c = kCodata2018);

Vec3 lorentz_force(const Vec3& velocity, const MagneticField& field, int charge_sign = -1,
                   const PhysicalConstants& c = kCodata2018);

/// Electric potential of the parametric drive (V).
double parametric_potential(const Vec3& r, double t, const ParametricDrive& drive, const TrapConfig& cfg);
ForceArray parametric_force(const SystemState& s, const ParametricDrive& drive, const TrapConfig& cfg,
                            const PhysicalConstants& c = kCodata2018);

/// Potential energy per unit |q| of the splitting potential (V).
double split_potential(const Vec3& r, double t, const SplitSchedule& schedule);
ForceArray split_potential_force(const SystemState& s, const SplitSchedule& schedule,
                                 const PhysicalConstants& c = kCodata2018);

}  // namespace paultrap
