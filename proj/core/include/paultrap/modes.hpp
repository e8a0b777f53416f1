#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "paultrap/constants.hpp"
#include "paultrap/state.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

/// The six normal modes of a two-electron linear chain. For a single particle
/// only the *_com entries are used, as the x/y/z motion of that particle.
enum class ModeId : int {
  axial_com = 0,
  axial_stretch,
  radial_x_com,
  radial_x_stretch,
  radial_y_com,
  radial_y_stretch,
};

inline constexpr std::array<ModeId, 6> kAllModes{
    ModeId::axial_com,    ModeId::axial_stretch,    ModeId::radial_x_com,
    ModeId::radial_x_stretch, ModeId::radial_y_com, ModeId::radial_y_stretch};

std::string_view mode_name(ModeId id);

/// Cartesian axis a mode moves along.
Axis mode_axis(ModeId id);

inline bool is_stretch(ModeId id) {
  return id == ModeId::axial_stretch || id == ModeId::radial_x_stretch ||
         id == ModeId::radial_y_stretch;
}

/// Harmonic frequencies of the two-electron chain.
struct NormalModeSet {
  double axial_com = 0.0;       // omega_z
  double axial_stretch = 0.0;   // sqrt(3) omega_z
  double radial_com = 0.0;      // omega_r
  double radial_stretch = 0.0;  // sqrt(omega_r^2 - omega_z^2)

  static NormalModeSet from_frequencies(double omega_r, double omega_z);
  static NormalModeSet from_trap(const DerivedTrapParams& p) {
    return from_frequencies(p.omega_r, p.omega_z);
  }

  double frequency(ModeId id) const;
};

/// Mode coordinates for a pair of displacements:
/// com = (d1 + d2)/2 (mass 2m), stretch = d1 - d2 (reduced mass m/2).
struct ModePair {
  double com = 0.0;
  double stretch = 0.0;
};

inline ModePair to_modes(double d1, double d2) { return {0.5 * (d1 + d2), d1 - d2}; }

inline std::array<double, 2> from_modes(const ModePair& m) {
  return {m.com + 0.5 * m.stretch, m.com - 0.5 * m.stretch};
}

/// Effective mass of a mode coordinate for particle mass m.
inline double mode_mass(bool stretch, double m) { return stretch ? 0.5 * m : 2.0 * m; }

/// Harmonic energy 0.5 M (v^2 + omega^2 x^2) of one mode coordinate.
inline double oscillator_energy(double mass, double omega, double x, double v) {
  return 0.5 * mass * (v * v + omega * omega * x * x);
}

enum class PhaseConvention { fixed_sign, random_sign };

struct ModeTemperatureSpec {
  std::array<double, 6> temperature_k{};  // indexed by ModeId
  std::uint64_t rng_seed = 1;
  PhaseConvention phase = PhaseConvention::fixed_sign;

  static ModeTemperatureSpec uniform(double t_k) {
    ModeTemperatureSpec s;
    s.temperature_k.fill(t_k);
    return s;
  }

  double& operator[](ModeId id) { return temperature_k[static_cast<int>(id)]; }
  double operator[](ModeId id) const { return temperature_k[static_cast<int>(id)]; }
};

/// Particle equilibrium positions: origin for one particle, z = -l/2 and +l/2 for two.
std::array<Vec3, 2> equilibrium_positions(std::size_t n_particles, double spacing);

/// Particles at equilibrium, each mode carrying kinetic energy kB T_i / 2 along
/// its eigenvector. Throws DomainError for negative temperatures or n outside {1, 2}.
SystemState init_state(std::size_t n_particles, const ModeTemperatureSpec& spec, double spacing,
                       const PhysicalConstants& c = kCodata2018);

}  // namespace paultrap
