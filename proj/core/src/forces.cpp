#include "paultrap/forces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "paultrap/errors.hpp"

namespace paultrap {

double TankCircuit::resistance() const { return quality * std::sqrt(inductance / capacitance); }

double TankCircuit::resonance() const { return 1.0 / std::sqrt(inductance * capacitance); }

double damping_rate(const TankCircuit& circuit, double d_eff, const PhysicalConstants& c) {
  const double e = c.elementary_charge;
  return e * e * circuit.resistance() / (c.electron_mass * d_eff * d_eff);
}

NoiseProcess NoiseProcess::johnson(const TankCircuit& circuit, std::uint64_t seed,
                                   const PhysicalConstants& c) {
  if (circuit.temperature_k < 0.0) throw DomainError("noise: circuit temperature must be >= 0");
  return {std::sqrt(2.0 * c.boltzmann * circuit.temperature_k * circuit.resistance()), seed};
}

MagneticField MagneticField::from_cyclotron(double omega_ce, const PhysicalConstants& c) {
  return along_y(omega_ce * c.electron_mass / c.elementary_charge);
}

double MagneticField::omega_ce(const PhysicalConstants& c) const {
  return c.elementary_charge * b.norm() / c.electron_mass;
}

double rz_coupling(double amplitude_scale, double omega_rf, double omega_r, double omega_z) {
  return 0.5 * amplitude_scale * omega_rf * std::sqrt(omega_r / (2.0 * omega_z));
}

double z3_coupling(double amplitude_scale, const TrapConfig& cfg, const PhysicalConstants& c) {
  const DerivedTrapParams p = derive_trap_params(cfg, c);
  const double l = equilibrium_spacing(p.omega_z, c);
  const double q_v2_over_r03 = std::abs(particle_charge(cfg, c) * amplitude_scale * cfg.v0) / (cfg.r0 * cfg.r0);
  const double omega_c = p.omega_z;
  const double omega_s = std::sqrt(3.0) * p.omega_z;
  return 3.0 * l * q_v2_over_r03 / (4.0 * c.electron_mass * std::sqrt(omega_s * omega_c));
}

// --- TrapTerm ---------------------------------------------------------------

TrapTerm::TrapTerm(const TrapConfig& cfg, bool include_dc, const PhysicalConstants& c) {
  validate(cfg, c);
  const double q = particle_charge(cfg, c);
  dc_coeff = include_dc ? q * cfg.kappa * cfg.u_dc / (cfg.z0 * cfg.z0) : 0.0;
  rf_coeff = q * cfg.v0 / (cfg.r0 * cfg.r0);
  omega_rf = cfg.omega_rf;
  phase = cfg.rf_phase;
}

void TrapTerm::add(const SystemState& s, ForceArray& f) const {
  const double rf = rf_coeff * std::cos(omega_rf * s.t + phase);
  for (std::size_t i = 0; i < s.n; ++i) {
    const Vec3& r = s.pos[i];
    f[i].x() += (dc_coeff - rf) * r.x();
    f[i].y() += (dc_coeff + rf) * r.y();
    f[i].z() -= 2.0 * dc_coeff * r.z();
  }
}

double TrapTerm::potential_energy(const SystemState& s) const {
  const double rf = rf_coeff * std::cos(omega_rf * s.t + phase);
  double u = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const Vec3& r = s.pos[i];
    u += 0.5 * dc_coeff * (2.0 * r.z() * r.z() - r.x() * r.x() - r.y() * r.y()) +
         0.5 * rf * (r.x() * r.x() - r.y() * r.y());
  }
  return u;
}

// --- CoulombTerm ------------------------------------------------------------

void CoulombTerm::add(const SystemState& s, ForceArray& f) const {
  if (s.n < 2) return;
  const Vec3 d = s.pos[0] - s.pos[1];
  const double r2 = d.squaredNorm();
  if (!(r2 > 0.0)) throw NumericalError("coulomb: particles at zero separation");
  const double inv_r = 1.0 / std::sqrt(r2);
  const Vec3 fc = (k * inv_r * inv_r * inv_r) * d;
  f[0] += fc;
  f[1] -= fc;
}

double CoulombTerm::potential_energy(const SystemState& s) const {
  if (s.n < 2) return 0.0;
  return k / (s.pos[0] - s.pos[1]).norm();
}

// --- Damping / noise --------------------------------------------------------

DampingTerm::DampingTerm(const TankCircuit& circuit, double d_eff, Axis axis_, const PhysicalConstants& c)
    : gamma_m(damping_rate(circuit, d_eff, c) * c.electron_mass), axis(axis_) {}

void DampingTerm::add(const SystemState& s, ForceArray& f) const {
  // The image current is driven by the summed velocity of all particles.
  double v = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) v += s.vel[i][axis];
  for (std::size_t i = 0; i < s.n; ++i) f[i][axis] -= gamma_m * v;
}

JohnsonNoiseTerm::JohnsonNoiseTerm(const NoiseProcess& noise, double d_eff, Axis axis_,
                                   const PhysicalConstants& c, int charge_sign)
    : scale(-(charge_sign * c.elementary_charge / d_eff) * noise.alpha),
      axis(axis_),
      sampler(noise.rng_seed) {}

void JohnsonNoiseTerm::begin_step(double dt) { current = scale * sampler(dt); }

void JohnsonNoiseTerm::add(const SystemState& s, ForceArray& f) const {
  for (std::size_t i = 0; i < s.n; ++i) f[i][axis] += current;
}

// --- Lorentz ----------------------------------------------------------------

LorentzTerm::LorentzTerm(const MagneticField& field, int charge_sign, const PhysicalConstants& c)
    : qb(charge_sign * c.elementary_charge * field.b) {}

void LorentzTerm::add(const SystemState& s, ForceArray& f) const {
  for (std::size_t i = 0; i < s.n; ++i) f[i] += s.vel[i].cross(qb);
}

// --- Parametric drives ------------------------------------------------------

ParametricRzTerm::ParametricRzTerm(const ParametricDrive& drive, const TrapConfig& cfg,
                                   const PhysicalConstants& c)
    : coeff(particle_charge(cfg, c) * drive.amplitude_scale * cfg.v0 / (cfg.r0 * cfg.r0)),
      omega_p(drive.omega_p),
      radial_axis(drive.radial_axis) {
  if (drive.kind != DriveKind::rz) throw ConfigError("parametric_rz: drive kind must be rz");
  if (radial_axis == kZ) throw ConfigError("parametric_rz: radial axis must be x or y");
}

void ParametricRzTerm::add(const SystemState& s, ForceArray& f) const {
  const double a = coeff * std::cos(omega_p * s.t);
  for (std::size_t i = 0; i < s.n; ++i) {
    const double r = s.pos[i][radial_axis];
    const double z = s.pos[i].z();
    f[i][radial_axis] -= a * z;
    f[i].z() -= a * r;
  }
}

double ParametricRzTerm::potential_energy(const SystemState& s) const {
  const double a = coeff * std::cos(omega_p * s.t);
  double u = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) u += a * s.pos[i][radial_axis] * s.pos[i].z();
  return u;
}

ParametricZ3Term::ParametricZ3Term(const ParametricDrive& drive, const TrapConfig& cfg,
                                   const PhysicalConstants& c)
    : coeff(particle_charge(cfg, c) * drive.amplitude_scale * cfg.v0 / (cfg.r0 * cfg.r0)),
      omega_p(drive.omega_p) {
  if (drive.kind != DriveKind::z3) throw ConfigError("parametric_z3: drive kind must be z3");
}

void ParametricZ3Term::add(const SystemState& s, ForceArray& f) const {
  const double a = 3.0 * coeff * std::cos(omega_p * s.t);
  for (std::size_t i = 0; i < s.n; ++i) {
    const double z = s.pos[i].z();
    f[i].z() -= a * z * z;
  }
}

double ParametricZ3Term::potential_energy(const SystemState& s) const {
  const double a = coeff * std::cos(omega_p * s.t);
  double u = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double z = s.pos[i].z();
    u += a * z * z * z;
  }
  return u;
}

// --- Transport potentials ---------------------------------------------------

void SplitTerm::add(const SystemState& s, ForceArray& f) const {
  const SplitCoefficients k = schedule.at(std::clamp(s.t, 0.0, schedule.duration()));
  for (std::size_t i = 0; i < s.n; ++i) {
    const Vec3& r = s.pos[i];
    f[i].x() += charge * k.alpha * r.x();
    f[i].y() += charge * k.alpha * r.y();
    f[i].z() -= charge * (2.0 * k.alpha * r.z() + 4.0 * k.beta * r.z() * r.z() * r.z());
  }
}

double SplitTerm::potential_energy(const SystemState& s) const {
  double u = 0.0;
  const double t = std::clamp(s.t, 0.0, schedule.duration());
  for (std::size_t i = 0; i < s.n; ++i) u += charge * split_potential(s.pos[i], t, schedule);
  return u;
}

void ShuttleTerm::add(const SystemState& s, ForceArray& f) const {
  const double zc = schedule.center(s.t);
  for (std::size_t i = 0; i < s.n; ++i) f[i].z() -= stiffness * (s.pos[i].z() - zc);
}

double ShuttleTerm::potential_energy(const SystemState& s) const {
  const double zc = schedule.center(s.t);
  double u = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double dz = s.pos[i].z() - zc;
    u += 0.5 * stiffness * dz * dz;
  }
  return u;
}

// --- ForceStack -------------------------------------------------------------

std::string_view term_name(const ForceTerm& term) {
  return std::visit([](const auto& t) { return std::decay_t<decltype(t)>::name; }, term);
}

ForceStack& ForceStack::add(ForceTerm term) {
  terms_.push_back(std::move(term));
  return *this;
}

bool ForceStack::velocity_dependent() const {
  for (const auto& term : terms_) {
    if (std::visit([](const auto& t) { return std::decay_t<decltype(t)>::velocity_dependent; }, term)) {
      return true;
    }
  }
  return false;
}

bool ForceStack::has_noise() const {
  for (const auto& term : terms_) {
    if (std::holds_alternative<JohnsonNoiseTerm>(term)) return true;
  }
  return false;
}

void ForceStack::begin_step(double dt) {
  for (auto& term : terms_) {
    if (auto* noise = std::get_if<JohnsonNoiseTerm>(&term)) noise->begin_step(dt);
  }
}

void ForceStack::forces(const SystemState& s, ForceArray& out) const {
  out[0].setZero();
  out[1].setZero();
  for (const auto& term : terms_) {
    std::visit([&](const auto& t) { t.add(s, out); }, term);
  }
}

double ForceStack::potential_energy(const SystemState& s) const {
  double u = 0.0;
  for (const auto& term : terms_) {
    u += std::visit([&](const auto& t) { return t.potential_energy(s); }, term);
  }
  return u;
}

// --- Single-term evaluations ------------------------------------------------

double trap_potential(const Vec3& r, double t, const TrapConfig& cfg) {
  const double dc = cfg.kappa * cfg.u_dc * (2.0 * r.z() * r.z() - r.x() * r.x() - r.y() * r.y()) /
                    (2.0 * cfg.z0 * cfg.z0);
  const double rf = cfg.v0 * std::cos(cfg.omega_rf * t + cfg.rf_phase) * (r.x() * r.x() - r.y() * r.y()) /
                    (2.0 * cfg.r0 * cfg.r0);
  return dc + rf;
}

ForceArray trap_force(const SystemState& s, const TrapConfig& cfg, const PhysicalConstants& c) {
  ForceArray f = zero_forces();
  TrapTerm(cfg, true, c).add(s, f);
  return f;
}

ForceArray coulomb_force(const SystemState& s, const PhysicalConstants& c) {
  if (s.n != 2) throw DomainError("coulomb_force: needs exactly two particles");
  if (!((s.pos[0] - s.pos[1]).squaredNorm() > 0.0)) {
    throw DomainError("coulomb_force: zero separation");
  }
  ForceArray f = zero_forces();
  CoulombTerm(c).add(s, f);
  return f;
}

double coulomb_energy(const Vec3& r1, const Vec3& r2, const PhysicalConstants& c) {
  return c.coulomb_constant_q2() / (r1 - r2).norm();
}

Vec3 damping_force(const Vec3& velocity, const TankCircuit& circuit, double d_eff, Axis axis,
                   const PhysicalConstants& c) {
  Vec3 f = Vec3::Zero();
  f[axis] = -damping_rate(circuit, d_eff, c) * c.electron_mass * velocity[axis];
  return f;
}

Vec3 johnson_noise_force(const NoiseProcess& noise, double sample, double d_eff, Axis axis,
                         int charge_sign, const PhysicalConstants& c) {
  Vec3 f = Vec3::Zero();
  f[axis] = -(charge_sign * c.elementary_charge / d_eff) * noise.alpha * sample;
  return f;
}

Vec3 lorentz_force(const Vec3& velocity, const MagneticField& field, int charge_sign,
                   const PhysicalConstants& c) {
  return charge_sign * c.elementary_charge * velocity.cross(field.b);
}

double parametric_potential(const Vec3& r, double t, const ParametricDrive& drive, const TrapConfig& cfg) {
  const double v = drive.amplitude_scale * cfg.v0 * std::cos(drive.omega_p * t);
  if (drive.kind == DriveKind::rz) {
    return v * r[drive.radial_axis] * r.z() / (cfg.r0 * cfg.r0);
  }
  return v * r.z() * r.z() * r.z() / (cfg.r0 * cfg.r0);
}

ForceArray parametric_force(const SystemState& s, const ParametricDrive& drive, const TrapConfig& cfg,
                            const PhysicalConstants& c) {
  ForceArray f = zero_forces();
  if (drive.kind == DriveKind::rz) {
    ParametricRzTerm(drive, cfg, c).add(s, f);
  } else {
    ParametricZ3Term(drive, cfg, c).add(s, f);
  }
  return f;
}

double split_potential(const Vec3& r, double t, const SplitSchedule& schedule) {
  const SplitCoefficients k = schedule.at(t);
  const double z2 = r.z() * r.z();
  return k.alpha * (z2 - 0.5 * (r.x() * r.x() + r.y() * r.y())) + k.beta * z2 * z2;
}

ForceArray split_potential_force(const SystemState& s, const SplitSchedule& schedule,
                                 const PhysicalConstants& c) {
  ForceArray f = zero_forces();
  SplitTerm(schedule, c).add(s, f);
  return f;
}

}  // namespace paultrap
