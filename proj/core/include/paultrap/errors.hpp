#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace paultrap {

/// Invalid or inconsistent configuration (bad trap signs, VV with velocity-dependent forces, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure: divergence, non-finite results, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A least-squares fit that did not converge from any start.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, double best_residual)
      : NumericalError(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Shortest round-trippable-enough rendering for messages, e.g. 1.887e-12.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace paultrap
