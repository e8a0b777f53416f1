#pragma once

#include <numbers>

namespace paultrap {

/// CODATA-2018 values, SI units.
struct PhysicalConstants {
  double elementary_charge = 1.602176634e-19;     // C
  double electron_mass = 9.1093837015e-31;        // kg
  double vacuum_permittivity = 8.8541878128e-12;  // F/m
  double boltzmann = 1.380649e-23;                // J/K
  double reduced_planck = 1.054571817e-34;        // J s

  /// q^2 / (4 pi eps0), J m.
  constexpr double coulomb_constant_q2() const {
    return elementary_charge * elementary_charge / (4.0 * std::numbers::pi * vacuum_permittivity);
  }
};

inline constexpr PhysicalConstants kCodata2018{};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Electron-volt in joules.
inline constexpr double kElectronVolt = 1.602176634e-19;

}  // namespace paultrap
