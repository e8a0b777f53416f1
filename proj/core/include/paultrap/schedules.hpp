#pragma once

#include <cstddef>
#include <vector>

#include "paultrap/constants.hpp"

namespace paultrap {

/// Instantaneous splitting-potential coefficients. The potential energy of a
/// particle of charge magnitude |q| is |q| (alpha z^2 + beta z^4), so positive
/// alpha and beta confine regardless of the charge sign.
struct SplitCoefficients {
  double alpha = 0.0;  // V/m^2
  double beta = 0.0;   // V/m^4
  double d = 0.0;      // equilibrium separation, m
};

struct SplitSample {
  double t = 0.0;
  SplitCoefficients c;
};

/// Split (or merge) schedule for two particles.
///
/// The separation follows a raised cosine from d0 to d_final over tau_s. The
/// quartic coefficient rises along the same profile from 0 to beta_cp at the
/// critical point (where beta_cp d^5 = |q|/(2 pi eps0)) and then falls back to
/// zero along the time-reversed profile. alpha is fixed pointwise by the
/// equilibrium relation beta d^5 + 2 alpha d^3 = |q|/(2 pi eps0).
class SplitSchedule {
 public:
  /// Throws DomainError when the critical point is not strictly between the
  /// initial and final separations, or on non-positive inputs.
  static SplitSchedule build(double omega_z_init, double d_final, double tau_s, double beta_cp,
                             const PhysicalConstants& c = kCodata2018);

  /// Coefficients at t in [0, tau_s]; throws DomainError outside.
  SplitCoefficients at(double t) const;

  /// Uniform grid of n >= 2 samples including both endpoints.
  std::vector<SplitSample> sample(std::size_t n) const;

  /// The merging schedule: at(t) of the result equals at(tau_s - t) of this one.
  SplitSchedule reversed() const;

  double duration() const { return tau_s_; }
  double initial_separation() const { return d0_; }
  double final_separation() const { return d_final_; }
  double beta_cp() const { return beta_cp_; }
  double critical_time() const { return reversed_ ? tau_s_ - t_cp_ : t_cp_; }
  double critical_separation() const { return d_cp_; }
  /// |q|/(2 pi eps0), V m.
  double equilibrium_constant() const { return k_; }
  bool is_merge() const { return reversed_; }

  /// Relative residual |beta d^5 + 2 alpha d^3 - k| / k.
  double equilibrium_residual(const SplitCoefficients& c) const;

 private:
  SplitCoefficients forward(double t) const;

  double tau_s_ = 0.0;
  double d0_ = 0.0;
  double d_final_ = 0.0;
  double beta_cp_ = 0.0;
  double d_cp_ = 0.0;
  double t_cp_ = 0.0;
  double k_ = 0.0;
  bool reversed_ = false;
};

/// Critical-point frequency omega_CP = (q/2 pi eps0)^0.2 (3q/m)^0.5 beta_CP^0.3.
double omega_cp(double beta_cp, const PhysicalConstants& c = kCodata2018);

/// Inverse of omega_cp.
double beta_cp_for_omega(double omega, const PhysicalConstants& c = kCodata2018);

/// Harmonic well moving along z: z_c(t) = (D/2)(1 - cos(pi t / tau_t)).
struct ShuttleSchedule {
  double tau_t = 1e-6;        // s
  double displacement = 0.0;  // m

  double center(double t) const;
  double center_velocity(double t) const;
};

}  // namespace paultrap
