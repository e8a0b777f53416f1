#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace paultrap {

/// f(E) = exp{A [1 - exp((E0 - E)/tau)] + f0}. Energies in any consistent unit
/// (the scans use the 2E/kB kelvin label), rates in 1/s.
struct DoubleExpParams {
  double amplitude = 0.0;  // A
  double onset = 0.0;      // E0
  double width = 1.0;      // tau
  double log_floor = 0.0;  // f0

  double rate(double energy) const;
  double log_rate(double energy) const;
};

struct DoubleExpFit {
  DoubleExpParams params;
  /// Root-mean-square residual of log f.
  double rms_log_residual = 0.0;
  /// Covariance of (A, E0, tau); f0 is held fixed.
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  std::size_t n_points = 0;
  std::size_t starts_tried = 0;
};

/// Nonlinear least squares on log f with f0 held at log_floor (the model only
/// identifies three combinations of its four parameters). When log_floor is not
/// given, min(log f) is used. Deterministic multi-start over onset and width
/// grids. Solutions with A <= 0 or tau above 20 data spans are rejected as
/// unidentified. Requires at least 5 points with f > 0; throws FitError if no
/// start converges.
DoubleExpFit fit_double_exponential(std::span<const double> energies, std::span<const double> rates,
                                    std::optional<double> log_floor = std::nullopt);

/// Mean of rate(E) under the normalized weight exp(-E/T)/T on [0, inf).
/// Throws DomainError for T <= 0 and NumericalError if the integral is not finite.
double boltzmann_mean_rate(const std::function<double(double)>& rate, double temperature);
double boltzmann_mean_rate(const DoubleExpParams& fit, double temperature);

/// Temperature where the Boltzmann-mean rate equals target, by bisection on
/// [t_lo, t_hi] (the mean rate must be increasing). Throws DomainError when the
/// bracket does not contain the target.
double threshold_temperature(const DoubleExpParams& fit, double target_rate, double t_lo, double t_hi,
                             double tolerance = 1e-5);

/// E = A omega^(2/3) - E0 by linear least squares.
struct FrequencyScalingFit {
  double coefficient = 0.0;  // A
  double offset = 0.0;       // E0
};
FrequencyScalingFit frequency_scaling_fit(std::span<const double> omegas, std::span<const double> energies);

/// E = A omega^p (log-log least squares), or E = A omega^p - E0 when with_offset.
struct PowerLawFit {
  double coefficient = 0.0;
  double exponent = 0.0;
  double offset = 0.0;
};
PowerLawFit free_exponent_fit(std::span<const double> omegas, std::span<const double> energies,
                              bool with_offset = false);

/// E(q) = p0 + p1 atan((q - p2)/p3).
struct ArctanParams {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 1.0;

  double operator()(double q) const;
};
ArctanParams qx_scaling_fit(std::span<const double> q_values, std::span<const double> energies);

/// Slope and intercept of y = a x + b by least squares, with the coefficient of determination.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// y = c2 x^2 + c1 x + c0 by least squares.
struct QuadraticFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
};
QuadraticFit quadratic_fit(std::span<const double> x, std::span<const double> y);

}  // namespace paultrap
