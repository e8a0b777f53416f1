#include "paultrap/trap.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "paultrap/errors.hpp"

namespace paultrap {

void validate(const TrapConfig& cfg, const PhysicalConstants& c) {
  if (!(cfg.omega_rf > 0.0)) throw ConfigError("trap: omega_rf must be positive");
  if (!(cfg.r0 > 0.0)) throw ConfigError("trap: r0 must be positive");
  if (!(cfg.z0 > 0.0)) throw ConfigError("trap: z0 must be positive");
  if (!(cfg.d_eff > 0.0)) throw ConfigError("trap: d_eff must be positive");
  if (cfg.charge_sign != -1 && cfg.charge_sign != 1) {
    throw ConfigError("trap: charge_sign must be -1 or +1");
  }
  const double q = particle_charge(cfg, c);
  if (q * cfg.kappa * cfg.u_dc < 0.0) {
    throw ConfigError("trap: kappa*U_dc has the wrong sign for axial confinement of charge sign " +
                      std::to_string(cfg.charge_sign));
  }
}

DerivedTrapParams derive_trap_params(const TrapConfig& cfg, const PhysicalConstants& c) {
  validate(cfg, c);
  const double q = particle_charge(cfg, c);
  const double m = c.electron_mass;
  const double omega_rf2 = cfg.omega_rf * cfg.omega_rf;

  DerivedTrapParams p;
  p.omega_r = std::abs(q * cfg.v0) / (std::numbers::sqrt2 * m * cfg.omega_rf * cfg.r0 * cfg.r0);
  const double omega_z2 = 2.0 * q * cfg.kappa * cfg.u_dc / (m * cfg.z0 * cfg.z0);
  p.omega_z = std::sqrt(omega_z2);

  p.q_x = -2.0 * q * cfg.v0 / (m * cfg.r0 * cfg.r0 * omega_rf2);
  p.q_y = -p.q_x;
  p.a_z = 4.0 * omega_z2 / omega_rf2;
  p.a_x = -0.5 * p.a_z;
  p.a_y = p.a_x;
  return p;
}

TrapConfig trap_from_frequencies(double omega_rf, double omega_r, double omega_z,
                                 const TrapGeometry& g, const PhysicalConstants& c) {
  if (!(omega_rf > 0.0)) throw ConfigError("trap: omega_rf must be positive");
  if (omega_r < 0.0 || omega_z < 0.0) throw ConfigError("trap: secular frequencies must be >= 0");
  TrapConfig cfg;
  cfg.kappa = g.kappa;
  cfg.r0 = g.r0;
  cfg.z0 = g.z0;
  cfg.d_eff = g.d_eff;
  cfg.rf_phase = g.rf_phase;
  cfg.charge_sign = g.charge_sign;
  cfg.omega_rf = omega_rf;

  const double q = particle_charge(cfg, c);
  const double m = c.electron_mass;
  cfg.v0 = std::numbers::sqrt2 * m * omega_rf * g.r0 * g.r0 * omega_r / std::abs(q);
  cfg.u_dc = m * omega_z * omega_z * g.z0 * g.z0 / (2.0 * q * g.kappa);
  validate(cfg, c);
  return cfg;
}

TrapConfig trap_from_qx(double omega_rf, double q_x, double omega_z, const TrapGeometry& g,
                        const PhysicalConstants& c) {
  const double omega_r = std::abs(q_x) * omega_rf / (2.0 * std::numbers::sqrt2);
  return trap_from_frequencies(omega_rf, omega_r, omega_z, g, c);
}

double equilibrium_spacing(double omega_z, const PhysicalConstants& c) {
  if (!(omega_z > 0.0)) throw DomainError("equilibrium_spacing: omega_z must be positive");
  const double e = c.elementary_charge;
  return std::cbrt(e * e /
                   (2.0 * std::numbers::pi * c.vacuum_permittivity * c.electron_mass * omega_z * omega_z));
}

TrapConfig default_trap() {
  return trap_from_frequencies(kTwoPi * 10.6e9, kTwoPi * 2e9, kTwoPi * 300e6);
}

}  // namespace paultrap
