#include "paultrap/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "paultrap/errors.hpp"

namespace paultrap {

namespace {

using Residual = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct ResidualFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Residual fn;
  int n_in;
  int n_out;

  int inputs() const { return n_in; }
  int values() const { return n_out; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    fn(x, r);
    return 0;
  }
};

struct LmResult {
  Eigen::VectorXd x;
  double sum_sq = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd jacobian;
  bool ok = false;
};

LmResult lm_minimize(const Residual& fn, int n_out, Eigen::VectorXd x0) {
  ResidualFunctor f{fn, static_cast<int>(x0.size()), n_out};
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(x0);

  LmResult out;
  out.x = x0;
  Eigen::VectorXd r(n_out);
  fn(x0, r);
  out.sum_sq = r.squaredNorm();
  out.ok = std::isfinite(out.sum_sq) && x0.allFinite() &&
           status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
  out.jacobian.resize(n_out, x0.size());
  diff.df(x0, out.jacobian);
  return out;
}

void require_same_size(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw DomainError(std::string(who) + ": input sizes differ");
}

double r_squared(std::span<const double> y, const Eigen::VectorXd& fitted) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fitted[static_cast<Eigen::Index>(i)]) * (y[i] - fitted[static_cast<Eigen::Index>(i)]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

}  // namespace

double DoubleExpParams::log_rate(double energy) const {
  // Capped so a zero amplitude far below the onset stays finite instead of 0 * inf.
  const double x = std::min((onset - energy) / width, 700.0);
  return amplitude * (1.0 - std::exp(x)) + log_floor;
}

double DoubleExpParams::rate(double energy) const { return std::exp(log_rate(energy)); }

DoubleExpFit fit_double_exponential(std::span<const double> energies, std::span<const double> rates,
                                    std::optional<double> log_floor) {
  require_same_size(energies, rates, "fit_double_exponential");
  std::vector<double> e, y;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (rates[i] > 0.0 && std::isfinite(rates[i]) && std::isfinite(energies[i])) {
      e.push_back(energies[i]);
      y.push_back(std::log(rates[i]));
    }
  }
  const std::size_t n = e.size();
  if (n < 5) throw DomainError("fit_double_exponential: need at least 5 points with positive rate");

  const double f0 = log_floor.value_or(*std::min_element(y.begin(), y.end()));
  const double e_min = *std::min_element(e.begin(), e.end());
  const double e_max = *std::max_element(e.begin(), e.end());
  const double span = std::max(e_max - e_min, 1e-12 * std::max(1.0, std::abs(e_max)));

  // Parameters: (A, E0, ln tau).
  const Residual residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const DoubleExpParams p{x[0], x[1], std::exp(x[2]), f0};
    for (std::size_t i = 0; i < n; ++i) r[static_cast<Eigen::Index>(i)] = p.log_rate(e[i]) - y[i];
  };

  // Amplitude from a one-dimensional linear solve given (E0, tau).
  auto best_amplitude = [&](double onset, double width) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = 1.0 - std::exp((onset - e[i]) / width);
      if (!std::isfinite(g)) return std::numeric_limits<double>::quiet_NaN();
      num += g * (y[i] - f0);
      den += g * g;
    }
    return den > 0.0 ? num / den : 0.0;
  };

  LmResult best;
  std::size_t tried = 0;
  constexpr int kOnsetGrid = 7;
  constexpr double kWidthGrid[] = {0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
  constexpr double kMaxWidthSpans = 20.0;
  for (int i = 0; i < kOnsetGrid; ++i) {
    const double onset = e_min + span * static_cast<double>(i) / (kOnsetGrid - 1);
    for (double w : kWidthGrid) {
      const double width = w * span;
      const double amp = best_amplitude(onset, width);
      if (!std::isfinite(amp)) continue;
      Eigen::VectorXd x0(3);
      x0 << amp, onset, std::log(width);
      ++tried;
      LmResult r = lm_minimize(residual, static_cast<int>(n), x0);
      // Widths far beyond the data make the model a straight line in log f with
      // A and tau individually unidentified; such solutions are discarded.
      const bool identified = std::exp(r.x[2]) <= kMaxWidthSpans * span && r.x[0] > 0.0;
      if (r.ok && identified && r.sum_sq < best.sum_sq) best = std::move(r);
    }
  }
  if (!best.ok) {
    throw FitError("fit_double_exponential: no start converged to a positive amplitude and a width within 20 data spans",
                   best.sum_sq);
  }

  DoubleExpFit fit;
  fit.params = {best.x[0], best.x[1], std::exp(best.x[2]), f0};
  fit.n_points = n;
  fit.starts_tried = tried;
  fit.rms_log_residual = std::sqrt(best.sum_sq / static_cast<double>(n));

  // Covariance in (A, E0, tau): chain rule through ln tau.
  Eigen::MatrixXd j = best.jacobian;
  j.col(2) /= fit.params.width;
  const double dof = n > 3 ? static_cast<double>(n - 3) : 1.0;
  const Eigen::Matrix3d jtj = (j.transpose() * j).topLeftCorner<3, 3>();
  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(jtj);
  fit.covariance = cod.pseudoInverse() * (best.sum_sq / dof);
  return fit;
}

double boltzmann_mean_rate(const std::function<double(double)>& rate, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("boltzmann_mean_rate: temperature must be positive");
  // Integrate over u = E / T on [0, inf).
  auto integrand = [&](double u) {
    const double weight = std::exp(-u);
    return weight == 0.0 ? 0.0 : weight * rate(u * temperature);
  };
  double mean = 0.0;
  try {
    boost::math::quadrature::exp_sinh<double> quad;
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    mean = quad.integrate(integrand, 1e-12, &err, &l1, &levels);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("boltzmann_mean_rate: ") + e.what());
  }
  if (!std::isfinite(mean)) throw NumericalError("boltzmann_mean_rate: integral is not finite");
  return mean;
}

double boltzmann_mean_rate(const DoubleExpParams& fit, double temperature) {
  return boltzmann_mean_rate([&](double e) { return fit.rate(e); }, temperature);
}

double threshold_temperature(const DoubleExpParams& fit, double target_rate, double t_lo, double t_hi,
                             double tolerance) {
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw DomainError("threshold_temperature: need 0 < t_lo < t_hi");
  double f_lo = boltzmann_mean_rate(fit, t_lo) - target_rate;
  const double f_hi = boltzmann_mean_rate(fit, t_hi) - target_rate;
  if (f_lo > 0.0 || f_hi < 0.0) {
    std::ostringstream msg;
    msg << "threshold_temperature: target " << target_rate << " /s not bracketed by [" << t_lo << ", " << t_hi
        << "] K";
    throw DomainError(msg.str());
  }
  double lo = t_lo, hi = t_hi;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = boltzmann_mean_rate(fit, mid) - target_rate;
    if (f_mid > 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

FrequencyScalingFit frequency_scaling_fit(std::span<const double> omegas, std::span<const double> energies) {
  require_same_size(omegas, energies, "frequency_scaling_fit");
  const auto n = static_cast<Eigen::Index>(omegas.size());
  if (n < 3) throw DomainError("frequency_scaling_fit: need at least 3 points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = std::cbrt(omegas[static_cast<std::size_t>(i)] * omegas[static_cast<std::size_t>(i)]);
    a(i, 1) = -1.0;
    b[i] = energies[static_cast<std::size_t>(i)];
  }
  // Scale the first column to keep the design well conditioned.
  const double scale = a.col(0).cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw NumericalError("frequency_scaling_fit: rank-deficient design");
  a.col(0) /= scale;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 2) throw NumericalError("frequency_scaling_fit: rank-deficient design");
  const Eigen::VectorXd x = qr.solve(b);
  return {x[0] / scale, x[1]};
}

PowerLawFit free_exponent_fit(std::span<const double> omegas, std::span<const double> energies,
                              bool with_offset) {
  require_same_size(omegas, energies, "free_exponent_fit");
  const std::size_t n = omegas.size();
  if (n < 3) throw DomainError("free_exponent_fit: need at least 3 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(omegas[i] > 0.0 && energies[i] > 0.0)) {
      throw DomainError("free_exponent_fit: frequencies and energies must be positive");
    }
    lx[i] = std::log(omegas[i]);
    ly[i] = std::log(energies[i]);
  }
  const LinearFit lf = linear_fit(lx, ly);
  PowerLawFit out{std::exp(lf.intercept), lf.slope, 0.0};
  if (!with_offset) return out;

  // Work in scaled frequency so A stays O(energy).
  const double w_ref = std::exp(std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n));
  const Residual residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      r[static_cast<Eigen::Index>(i)] = x[0] * std::pow(omegas[i] / w_ref, x[1]) - x[2] - energies[i];
    }
  };
  Eigen::VectorXd x0(3);
  x0 << out.coefficient * std::pow(w_ref, out.exponent), out.exponent, 0.0;
  const LmResult r = lm_minimize(residual, static_cast<int>(n), x0);
  if (!r.ok) throw FitError("free_exponent_fit: offset fit did not converge", r.sum_sq);
  return {r.x[0] / std::pow(w_ref, r.x[1]), r.x[1], r.x[2]};
}

double ArctanParams::operator()(double q) const { return p0 + p1 * std::atan((q - p2) / p3); }

ArctanParams qx_scaling_fit(std::span<const double> q_values, std::span<const double> energies) {
  require_same_size(q_values, energies, "qx_scaling_fit");
  const std::size_t n = q_values.size();
  if (n < 4) throw DomainError("qx_scaling_fit: need at least 4 points");
  for (double q : q_values) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("qx_scaling_fit: q_x must lie in (0, 1)");
  }
  const double e_min = *std::min_element(energies.begin(), energies.end());
  const double e_max = *std::max_element(energies.begin(), energies.end());
  const double e_span = std::max(e_max - e_min, 1e-300);

  // Parameters: (p0, p1, p2, ln p3).
  const Residual residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const ArctanParams p{x[0], x[1], x[2], std::exp(x[3])};
    for (std::size_t i = 0; i < n; ++i) r[static_cast<Eigen::Index>(i)] = (p(q_values[i]) - energies[i]) / e_span;
  };

  LmResult best;
  for (double centre : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    for (double width : {0.02, 0.05, 0.1, 0.2, 0.4}) {
      // Linear solve for (p0, p1) at fixed (centre, width).
      Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 2);
      Eigen::VectorXd b(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        a(static_cast<Eigen::Index>(i), 1) = std::atan((q_values[i] - centre) / width);
        b[static_cast<Eigen::Index>(i)] = energies[i];
      }
      const Eigen::VectorXd lin = a.colPivHouseholderQr().solve(b);
      Eigen::VectorXd x0(4);
      x0 << lin[0], lin[1], centre, std::log(width);
      LmResult r = lm_minimize(residual, static_cast<int>(n), x0);
      if (r.ok && r.sum_sq < best.sum_sq) best = std::move(r);
    }
  }
  if (!best.ok) throw FitError("qx_scaling_fit: no start converged", best.sum_sq);
  return {best.x[0], best.x[1], best.x[2], std::exp(best.x[3])};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y, "linear_fit");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw DomainError("linear_fit: need at least 2 points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[static_cast<std::size_t>(i)];
    a(i, 1) = 1.0;
    b[i] = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) throw NumericalError("linear_fit: rank-deficient design");
  const Eigen::VectorXd c = qr.solve(b);
  return {c[0], c[1], r_squared(y, a * c)};
}

QuadraticFit quadratic_fit(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y, "quadratic_fit");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 3) throw DomainError("quadratic_fit: need at least 3 points");
  const double scale = std::max(std::abs(*std::max_element(x.begin(), x.end())),
                                std::abs(*std::min_element(x.begin(), x.end())));
  if (!(scale > 0.0)) throw NumericalError("quadratic_fit: rank-deficient design");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = x[static_cast<std::size_t>(i)] / scale;
    a(i, 0) = 1.0;
    a(i, 1) = u;
    a(i, 2) = u * u;
    b[i] = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) throw NumericalError("quadratic_fit: rank-deficient design");
  const Eigen::VectorXd c = qr.solve(b);
  return {c[0], c[1] / scale, c[2] / (scale * scale), r_squared(y, a * c)};
}

}  // namespace paultrap
