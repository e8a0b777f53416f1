#pragma once

#include "paultrap/constants.hpp"

namespace paultrap {

/// Linear Paul trap: DC quadrupole kappa*U_dc*(2z^2 - x^2 - y^2)/(2 z0^2) plus
/// RF quadrupole V0*cos(Omega_rf t + phi)*(x^2 - y^2)/(2 r0^2).
struct TrapConfig {
  double kappa = 1.0;
  double u_dc = 0.0;       // V
  double v0 = 0.0;         // V
  double rf_phase = 0.0;   // rad
  double omega_rf = 0.0;   // rad/s
  double r0 = 100e-6;      // m
  double z0 = 200e-6;      // m
  double d_eff = 254e-6;   // m
  int charge_sign = -1;    // electrons
};

/// Secular frequencies and Mathieu parameters. a/q are signed (standard
/// Mathieu convention x'' + (a - 2q cos 2tau) x = 0 with tau = (Omega t + phi)/2).
struct DerivedTrapParams {
  double omega_r = 0.0;
  double omega_z = 0.0;
  double q_x = 0.0;
  double q_y = 0.0;
  double a_x = 0.0;
  double a_y = 0.0;
  double a_z = 0.0;
};

/// Throws ConfigError when the invariants do not hold.
void validate(const TrapConfig& cfg, const PhysicalConstants& c = kCodata2018);

DerivedTrapParams derive_trap_params(const TrapConfig& cfg, const PhysicalConstants& c = kCodata2018);

/// Geometry and drive held fixed while solving for voltages.
struct TrapGeometry {
  double kappa = 1.0;
  double r0 = 100e-6;
  double z0 = 200e-6;
  double d_eff = 254e-6;
  double rf_phase = 0.0;
  int charge_sign = -1;
};

/// Inverse problem: V0 and U_dc that produce the requested secular frequencies.
TrapConfig trap_from_frequencies(double omega_rf, double omega_r, double omega_z,
                                 const TrapGeometry& geometry = {},
                                 const PhysicalConstants& c = kCodata2018);

/// Same as trap_from_frequencies but with |q_x| fixed instead of omega_r:
/// omega_r = |q_x| Omega_rf / (2 sqrt 2).
TrapConfig trap_from_qx(double omega_rf, double q_x, double omega_z,
                        const TrapGeometry& geometry = {},
                        const PhysicalConstants& c = kCodata2018);

/// Signed particle charge q = charge_sign * e.
inline double particle_charge(const TrapConfig& cfg, const PhysicalConstants& c = kCodata2018) {
  return cfg.charge_sign * c.elementary_charge;
}

/// Two-electron equilibrium separation l = (q^2 / (2 pi eps0 m omega_z^2))^(1/3).
double equilibrium_spacing(double omega_z, const PhysicalConstants& c = kCodata2018);

/// RF period 2 pi / Omega_rf.
inline double rf_period(const TrapConfig& cfg) { return kTwoPi / cfg.omega_rf; }

/// Default trap: Omega_rf/2pi = 10.6 GHz, omega_r/2pi = 2 GHz, omega_z/2pi = 300 MHz.
TrapConfig default_trap();

}  // namespace paultrap
