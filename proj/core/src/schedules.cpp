#include "paultrap/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "paultrap/errors.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {

namespace {

double raised_cosine(double u) { return 0.5 * (1.0 - std::cos(std::numbers::pi * u)); }

}  // namespace

SplitSchedule SplitSchedule::build(double omega_z_init, double d_final, double tau_s, double beta_cp,
                                   const PhysicalConstants& c) {
  if (!(tau_s > 0.0)) throw DomainError("split schedule: tau_s must be positive");
  if (!(beta_cp > 0.0)) throw DomainError("split schedule: beta_cp must be positive");
  SplitSchedule s;
  s.tau_s_ = tau_s;
  s.d0_ = equilibrium_spacing(omega_z_init, c);
  s.d_final_ = d_final;
  s.beta_cp_ = beta_cp;
  s.k_ = c.elementary_charge / (2.0 * std::numbers::pi * c.vacuum_permittivity);
  s.d_cp_ = std::pow(s.k_ / beta_cp, 0.2);
  if (!(d_final > s.d0_)) {
    throw DomainError("split schedule: d_final must exceed the initial spacing");
  }
  if (!(s.d_cp_ > s.d0_ && s.d_cp_ < d_final)) {
    std::ostringstream msg;
    msg << "split schedule infeasible: critical separation " << s.d_cp_ << " m for beta_cp "
        << beta_cp << " V/m^4 is outside (" << s.d0_ << ", " << d_final << ") m";
    throw DomainError(msg.str());
  }
  const double frac = (s.d_cp_ - s.d0_) / (d_final - s.d0_);
  s.t_cp_ = tau_s / std::numbers::pi * std::acos(1.0 - 2.0 * frac);
  return s;
}

SplitCoefficients SplitSchedule::forward(double t) const {
  SplitCoefficients out;
  out.d = d0_ + (d_final_ - d0_) * raised_cosine(t / tau_s_);
  if (t <= t_cp_) {
    out.beta = beta_cp_ * raised_cosine(t / t_cp_);
  } else {
    out.beta = beta_cp_ * raised_cosine((tau_s_ - t) / (tau_s_ - t_cp_));
  }
  const double d3 = out.d * out.d * out.d;
  out.alpha = (k_ - out.beta * d3 * out.d * out.d) / (2.0 * d3);
  return out;
}

SplitCoefficients SplitSchedule::at(double t) const {
  if (!(t >= 0.0 && t <= tau_s_)) {
    std::ostringstream msg;
    msg << "split schedule: t = " << t << " s outside [0, " << tau_s_ << "]";
    throw DomainError(msg.str());
  }
  return reversed_ ? forward(tau_s_ - t) : forward(t);
}

std::vector<SplitSample> SplitSchedule::sample(std::size_t n) const {
  if (n < 2) throw DomainError("split schedule: need at least two samples");
  std::vector<SplitSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Exact endpoints; the reversed schedule maps sample i onto sample n-1-i.
    const double t = (i + 1 == n) ? tau_s_ : tau_s_ * static_cast<double>(i) / static_cast<double>(n - 1);
    out[i].t = t;
    if (reversed_) {
      const double tf = (i == 0) ? tau_s_
                                 : tau_s_ * static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
      out[i].c = forward(tf);
    } else {
      out[i].c = forward(t);
    }
  }
  return out;
}

SplitSchedule SplitSchedule::reversed() const {
  SplitSchedule r = *this;
  r.reversed_ = !reversed_;
  return r;
}

double SplitSchedule::equilibrium_residual(const SplitCoefficients& c) const {
  const double d3 = c.d * c.d * c.d;
  return std::abs(c.beta * d3 * c.d * c.d + 2.0 * c.alpha * d3 - k_) / k_;
}

double omega_cp(double beta_cp, const PhysicalConstants& c) {
  if (!(beta_cp > 0.0)) throw DomainError("omega_cp: beta_cp must be positive");
  const double q = c.elementary_charge;
  return std::pow(q / (2.0 * std::numbers::pi * c.vacuum_permittivity), 0.2) *
         std::sqrt(3.0 * q / c.electron_mass) * std::pow(beta_cp, 0.3);
}

double beta_cp_for_omega(double omega, const PhysicalConstants& c) {
  if (!(omega > 0.0)) throw DomainError("beta_cp_for_omega: omega must be positive");
  const double unit = omega_cp(1.0, c);
  return std::pow(omega / unit, 1.0 / 0.3);
}

double ShuttleSchedule::center(double t) const {
  const double u = std::clamp(t / tau_t, 0.0, 1.0);
  return displacement * raised_cosine(u);
}

double ShuttleSchedule::center_velocity(double t) const {
  if (t <= 0.0 || t >= tau_t) return 0.0;
  return 0.5 * displacement * std::numbers::pi / tau_t * std::sin(std::numbers::pi * t / tau_t);
}

}  // namespace paultrap
