#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace paultrap {

using Vec3 = Eigen::Vector3d;

enum Axis : int { kX = 0, kY = 1, kZ = 2 };

inline constexpr std::size_t kMaxParticles = 2;

/// Positions and velocities of one or two particles at time t.
struct SystemState {
  double t = 0.0;
  std::size_t n = 1;
  std::array<Vec3, kMaxParticles> pos{Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, kMaxParticles> vel{Vec3::Zero(), Vec3::Zero()};

  bool finite() const {
    for (std::size_t i = 0; i < n; ++i) {
      if (!pos[i].allFinite() || !vel[i].allFinite()) return false;
    }
    return std::isfinite(t);
  }
};

using ForceArray = std::array<Vec3, kMaxParticles>;

inline ForceArray zero_forces() { return {Vec3::Zero(), Vec3::Zero()}; }

}  // namespace paultrap
