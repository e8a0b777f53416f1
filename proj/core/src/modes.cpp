#include "paultrap/modes.hpp"

#include <cmath>
#include <random>

#include "paultrap/errors.hpp"

namespace paultrap {

std::string_view mode_name(ModeId id) {
  switch (id) {
    case ModeId::axial_com: return "axial_com";
    case ModeId::axial_stretch: return "axial_stretch";
    case ModeId::radial_x_com: return "radial_x_com";
    case ModeId::radial_x_stretch: return "radial_x_stretch";
    case ModeId::radial_y_com: return "radial_y_com";
    case ModeId::radial_y_stretch: return "radial_y_stretch";
  }
  return "unknown";
}

Axis mode_axis(ModeId id) {
  switch (id) {
    case ModeId::axial_com:
    case ModeId::axial_stretch: return kZ;
    case ModeId::radial_x_com:
    case ModeId::radial_x_stretch: return kX;
    case ModeId::radial_y_com:
    case ModeId::radial_y_stretch: return kY;
  }
  return kZ;
}

NormalModeSet NormalModeSet::from_frequencies(double omega_r, double omega_z) {
  NormalModeSet s;
  s.axial_com = omega_z;
  s.axial_stretch = std::sqrt(3.0) * omega_z;
  s.radial_com = omega_r;
  s.radial_stretch = std::sqrt(omega_r * omega_r - omega_z * omega_z);
  return s;
}

double NormalModeSet::frequency(ModeId id) const {
  switch (id) {
    case ModeId::axial_com: return axial_com;
    case ModeId::axial_stretch: return axial_stretch;
    case ModeId::radial_x_com:
    case ModeId::radial_y_com: return radial_com;
    case ModeId::radial_x_stretch:
    case ModeId::radial_y_stretch: return radial_stretch;
  }
  return 0.0;
}

std::array<Vec3, 2> equilibrium_positions(std::size_t n_particles, double spacing) {
  if (n_particles == 1) return {Vec3::Zero(), Vec3::Zero()};
  if (n_particles != 2) throw DomainError("equilibrium_positions: n_particles must be 1 or 2");
  return {Vec3(0.0, 0.0, -0.5 * spacing), Vec3(0.0, 0.0, 0.5 * spacing)};
}

SystemState init_state(std::size_t n_particles, const ModeTemperatureSpec& spec, double spacing,
                       const PhysicalConstants& c) {
  if (n_particles != 1 && n_particles != 2) {
    throw DomainError("init_state: n_particles must be 1 or 2");
  }
  for (double t : spec.temperature_k) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("init_state: mode temperatures must be >= 0");
  }

  SystemState s;
  s.n = n_particles;
  s.pos = equilibrium_positions(n_particles, spacing);

  std::mt19937_64 rng(spec.rng_seed);
  std::bernoulli_distribution coin(0.5);
  auto sign = [&]() {
    if (spec.phase == PhaseConvention::fixed_sign) return 1.0;
    return coin(rng) ? 1.0 : -1.0;
  };

  const double m = c.electron_mass;
  for (ModeId id : kAllModes) {
    const bool stretch = is_stretch(id);
    if (n_particles == 1 && stretch) continue;
    const double energy = 0.5 * c.boltzmann * spec[id];
    const Axis axis = mode_axis(id);
    if (n_particles == 1) {
      s.vel[0][axis] = sign() * std::sqrt(2.0 * energy / m);
      continue;
    }
    const double mass = mode_mass(stretch, m);
    const double speed = sign() * std::sqrt(2.0 * energy / mass);
    const ModePair mv = stretch ? ModePair{0.0, speed} : ModePair{speed, 0.0};
    const auto v = from_modes(mv);
    s.vel[0][axis] += v[0];
    s.vel[1][axis] += v[1];
  }
  return s;
}

}  // namespace paultrap
