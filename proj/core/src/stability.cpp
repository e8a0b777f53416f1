#include "paultrap/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "paultrap/errors.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/parallel.hpp"

namespace paultrap {

Matrix6 LinearPeriodicSystem::at(double t) const {
  Matrix6 m = Matrix6::Zero();
  m.topRightCorner<3, 3>().setIdentity();
  const double drive = std::cos(omega_rf * t + phase);
  for (int i = 0; i < 3; ++i) m(3 + i, i) = -(k_static[i] + k_drive[i] * drive);
  m.bottomRightCorner<3, 3>() = coupling;
  return m;
}

LinearPeriodicSystem LinearPeriodicSystem::from_trap(const TrapConfig& cfg, const MagneticField& field,
                                                     const PhysicalConstants& c) {
  validate(cfg, c);
  const double q = particle_charge(cfg, c);
  const double m = c.electron_mass;
  const double dc = q * cfg.kappa * cfg.u_dc / (cfg.z0 * cfg.z0 * m);
  const double rf = q * cfg.v0 / (cfg.r0 * cfg.r0 * m);

  LinearPeriodicSystem s;
  s.omega_rf = cfg.omega_rf;
  s.phase = cfg.rf_phase;
  s.k_static = Eigen::Vector3d(-dc, -dc, 2.0 * dc);
  s.k_drive = Eigen::Vector3d(rf, -rf, 0.0);
  const Vec3 b = field.b * (q / m);
  s.coupling << 0.0, b.z(), -b.y(),
                -b.z(), 0.0, b.x(),
                b.y(), -b.x(), 0.0;
  return s;
}

LinearPeriodicSystem LinearPeriodicSystem::mathieu(double a, double q, double omega_rf) {
  LinearPeriodicSystem s;
  s.omega_rf = omega_rf;
  const double w2 = 0.25 * omega_rf * omega_rf;
  s.k_static = Eigen::Vector3d::Constant(w2 * a);
  s.k_drive = Eigen::Vector3d(-2.0 * w2 * q, 2.0 * w2 * q, -2.0 * w2 * q);
  return s;
}

Matrix6 monodromy(const LinearPeriodicSystem& system, std::size_t steps_per_period) {
  if (steps_per_period < 200) throw DomainError("monodromy: need at least 200 steps per period");
  if (!(system.omega_rf > 0.0)) throw DomainError("monodromy: omega_rf must be positive");
  // Dimensionless time s = omega_rf t and velocity coordinates v / omega_rf keep
  // the generator well scaled for the matrix exponential.
  const double w = system.omega_rf;
  auto scaled = [&](double s) {
    Matrix6 a = system.at(s / w);
    a.bottomLeftCorner<3, 3>() /= w;
    a.topRightCorner<3, 3>() *= w;
    a /= w;
    return a;
  };
  const double h = kTwoPi / static_cast<double>(steps_per_period);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double comm = std::sqrt(3.0) / 12.0 * h * h;

  Matrix6 phi = Matrix6::Identity();
  for (std::size_t k = 0; k < steps_per_period; ++k) {
    const double s = static_cast<double>(k) * h;
    const Matrix6 a1 = scaled(s + c1 * h);
    const Matrix6 a2 = scaled(s + c2 * h);
    const Matrix6 omega = 0.5 * h * (a1 + a2) + comm * (a2 * a1 - a1 * a2);
    phi = omega.exp() * phi;
  }
  if (!phi.allFinite()) throw NumericalError("monodromy: non-finite transition matrix");
  return phi;
}

FloquetSpectrum floquet_spectrum(const Matrix6& m) {
  Eigen::EigenSolver<Matrix6> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("floquet_spectrum: eigen decomposition failed");
  FloquetSpectrum out;
  out.multipliers = es.eigenvalues();
  out.vectors = es.eigenvectors();
  double rho = 0.0;
  for (int i = 0; i < 6; ++i) rho = std::max(rho, std::abs(out.multipliers[i]));
  out.exponent = std::log(rho);
  return out;
}

namespace {

// beta + 2k or 2k - beta nearest to ref.
double lift_beta(double principal, double ref) {
  double best = principal;
  double best_dist = std::numeric_limits<double>::infinity();
  const double k0 = std::floor(ref / 2.0);
  for (double k = k0 - 1.0; k <= k0 + 2.0; k += 1.0) {
    for (double cand : {2.0 * k + principal, 2.0 * k - principal}) {
      if (std::abs(cand - ref) < best_dist) {
        best_dist = std::abs(cand - ref);
        best = cand;
      }
    }
  }
  return best;
}

}  // namespace

BetaEstimate beta_x(const Matrix6& m, std::optional<double> reference) {
  const FloquetSpectrum fs = floquet_spectrum(m);
  std::array<double, 6> principal{};
  for (int i = 0; i < 6; ++i) {
    principal[static_cast<std::size_t>(i)] = std::abs(std::arg(fs.multipliers[i])) / std::numbers::pi;
  }
  auto distinct = [&](int i, int j) {
    return std::abs(principal[static_cast<std::size_t>(i)] - principal[static_cast<std::size_t>(j)]) > 1e-7;
  };

  BetaEstimate out;
  if (reference) {
    // Continuation: the multiplier whose lifted phase is nearest the reference.
    // Candidates move mainly in the x-z plane; y is decoupled from a field along y.
    const double ref = *reference;
    std::array<double, 6> dist{};
    dist.fill(std::numeric_limits<double>::infinity());
    int best = -1;
    for (int i = 0; i < 6; ++i) {
      const auto v = fs.vectors.col(i);
      const double y = std::norm(v[1]) + std::norm(v[4]);
      if (y > 0.5 * v.squaredNorm()) continue;
      dist[static_cast<std::size_t>(i)] = std::abs(lift_beta(principal[static_cast<std::size_t>(i)], ref) - ref);
      if (best < 0 || dist[static_cast<std::size_t>(i)] < dist[static_cast<std::size_t>(best)]) best = i;
    }
    if (best < 0) throw NumericalError("beta_x: no multiplier with x-z plane motion");
    double second = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
      if (distinct(i, best)) second = std::min(second, dist[static_cast<std::size_t>(i)]);
    }
    out.value = lift_beta(principal[static_cast<std::size_t>(best)], ref);
    out.ambiguous = second < 2.0 * dist[static_cast<std::size_t>(best)] + 1e-3;
    return out;
  }

  // x-position weight of each eigenvector among the position components.
  std::array<double, 6> weight{};
  for (int i = 0; i < 6; ++i) {
    const auto v = fs.vectors.col(i);
    const double pos = std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
    weight[static_cast<std::size_t>(i)] = pos > 0.0 ? std::norm(v[0]) / pos : 0.0;
  }
  int best = 0;
  for (int i = 1; i < 6; ++i) {
    if (weight[static_cast<std::size_t>(i)] > weight[static_cast<std::size_t>(best)]) best = i;
  }
  // Runner-up among multipliers with a different phase; the conjugate partner and
  // degenerate copies give the same beta.
  double second = 0.0;
  for (int i = 0; i < 6; ++i) {
    if (distinct(i, best)) second = std::max(second, weight[static_cast<std::size_t>(i)]);
  }
  out.ambiguous = second > 0.8 * weight[static_cast<std::size_t>(best)];
  out.value = principal[static_cast<std::size_t>(best)];
  return out;
}

double continue_beta_x(const TrapConfig& trap, double omega_from, double beta_from, double omega_to,
                       std::size_t steps_per_period, double max_step) {
  if (max_step < 0.0) throw DomainError("continue_beta_x: max_step must not be negative");
  if (max_step == 0.0) max_step = beta_track_step(trap.omega_rf);
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(omega_to - omega_from) / max_step));
  double beta = beta_from;
  for (std::size_t k = 1; k <= n; ++k) {
    const double w = omega_from + (omega_to - omega_from) * static_cast<double>(k) / static_cast<double>(n);
    beta = beta_x(monodromy(LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(w)),
                            steps_per_period),
                  beta)
               .value;
  }
  return beta;
}

double floquet_secular_frequency(const TrapConfig& cfg, std::size_t steps_per_period) {
  const Matrix6 m = monodromy(LinearPeriodicSystem::from_trap(cfg), steps_per_period);
  if (floquet_exponent(m) >= kDefaultStabilityThreshold) {
    throw DomainError("floquet_secular_frequency: trap is not stable");
  }
  return 0.5 * beta_x(m).value * cfg.omega_rf;
}

double mathieu_boundary_q(double a, double q_lo, double q_hi, double threshold, double q_tolerance,
                          std::size_t steps_per_period) {
  auto unstable = [&](double q) {
    return floquet_exponent(monodromy(LinearPeriodicSystem::mathieu(a, q), steps_per_period)) >= threshold;
  };
  if (unstable(q_lo) || !unstable(q_hi)) {
    throw DomainError("mathieu_boundary_q: bracket must go from stable to unstable");
  }
  while (q_hi - q_lo > q_tolerance) {
    const double mid = 0.5 * (q_lo + q_hi);
    (unstable(mid) ? q_hi : q_lo) = mid;
  }
  return 0.5 * (q_lo + q_hi);
}

StabilityGrid stability_map(std::span<const double> q_x, std::span<const double> omega_ce,
                            const StabilityMapConfig& cfg) {
  StabilityGrid g;
  g.q_x.assign(q_x.begin(), q_x.end());
  g.omega_ce.assign(omega_ce.begin(), omega_ce.end());
  g.threshold = cfg.threshold;
  const std::size_t n = g.q_x.size() * g.omega_ce.size();
  g.lambda.assign(n, 0.0);
  g.beta_x.assign(n, 0.0);
  g.ambiguous.assign(n, false);

  std::vector<Matrix6> mono(n);
  parallel_for(n, cfg.jobs, [&](std::size_t idx) {
    const std::size_t iq = idx / g.omega_ce.size();
    const std::size_t ice = idx % g.omega_ce.size();
    const TrapConfig trap = trap_from_qx(cfg.omega_rf, g.q_x[iq], cfg.omega_z, cfg.geometry);
    const auto sys = LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(g.omega_ce[ice]));
    mono[idx] = monodromy(sys, cfg.steps_per_period);
    g.lambda[idx] = floquet_exponent(mono[idx]);
  });

  const double step = beta_track_step(cfg.omega_rf);
  parallel_for(g.q_x.size(), cfg.jobs, [&](std::size_t iq) {
    // Field-free start of each row; the principal value is exact below beta = 1.
    const TrapConfig trap = trap_from_qx(cfg.omega_rf, g.q_x[iq], cfg.omega_z, cfg.geometry);
    double w = 0.0;
    double ref = beta_x(monodromy(LinearPeriodicSystem::from_trap(trap), cfg.steps_per_period)).value;
    for (std::size_t ice = 0; ice < g.omega_ce.size(); ++ice) {
      const std::size_t idx = g.index(iq, ice);
      const double target = g.omega_ce[ice];
      if (std::abs(target - w) > step) {
        ref = continue_beta_x(trap, w, ref, target - std::copysign(step, target - w), cfg.steps_per_period, step);
      }
      const BetaEstimate b = beta_x(mono[idx], ref);
      g.beta_x[idx] = b.value;
      g.ambiguous[idx] = b.ambiguous;
      ref = b.value;
      w = target;
    }
  });
  return g;
}

std::vector<BoundaryPoint> stability_boundaries(const StabilityGrid& g, const StabilityMapConfig& cfg,
                                               double omega_tolerance) {
  if (!(omega_tolerance > 0.0)) throw DomainError("stability_boundaries: tolerance must be positive");
  struct Cell {
    std::size_t iq;
    std::size_t ice;
  };
  std::vector<Cell> cells;
  for (std::size_t iq = 0; iq < g.q_x.size(); ++iq) {
    for (std::size_t ice = 1; ice < g.omega_ce.size(); ++ice) {
      if (g.stable(iq, ice - 1) != g.stable(iq, ice)) cells.push_back({iq, ice});
    }
  }
  const double step = beta_track_step(cfg.omega_rf);
  std::vector<BoundaryPoint> out(cells.size());
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t k) {
    const Cell& c = cells[k];
    const TrapConfig trap = trap_from_qx(cfg.omega_rf, g.q_x[c.iq], cfg.omega_z, cfg.geometry);
    const std::size_t stable_ice = g.stable(c.iq, c.ice - 1) ? c.ice - 1 : c.ice;
    double w_stable = g.omega_ce[stable_ice];
    double w_unstable = g.omega_ce[stable_ice == c.ice ? c.ice - 1 : c.ice];
    auto is_stable = [&](double w) {
      const auto sys = LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(w));
      return floquet_exponent(monodromy(sys, cfg.steps_per_period)) < cfg.threshold;
    };
    while (std::abs(w_unstable - w_stable) > omega_tolerance) {
      const double mid = 0.5 * (w_stable + w_unstable);
      (is_stable(mid) ? w_stable : w_unstable) = mid;
    }
    BoundaryPoint& p = out[k];
    p.q_x = g.q_x[c.iq];
    p.omega_ce = w_stable;
    p.beta_x = continue_beta_x(trap, g.omega_ce[stable_ice], g.beta_x[g.index(c.iq, stable_ice)], w_stable,
                               cfg.steps_per_period, step);
  });
  return out;
}

double radial_energy(const SystemState& s, double omega_z, const PhysicalConstants& c) {
  const double m = c.electron_mass;
  const Vec3& r = s.pos[0];
  const Vec3& v = s.vel[0];
  return 0.5 * m * (v.x() * v.x() + v.y() * v.y()) - 0.25 * m * omega_z * omega_z * (r.x() * r.x() + r.y() * r.y());
}

std::vector<LineCutPoint> max_energy_linecut(std::span<const double> omega_ce, const LineCutConfig& cfg) {
  const TrapConfig trap = trap_from_qx(cfg.omega_rf, cfg.q_x, cfg.omega_z, cfg.geometry);
  const double cap = cfg.energy_cap_ev * kElectronVolt;

  std::vector<LineCutPoint> out(omega_ce.size());
  parallel_for(omega_ce.size(), cfg.jobs, [&](std::size_t i) {
    LineCutPoint& p = out[i];
    p.omega_ce = omega_ce[i];
    const MagneticField field = MagneticField::from_cyclotron(omega_ce[i]);
    p.lambda = floquet_exponent(monodromy(LinearPeriodicSystem::from_trap(trap, field), cfg.steps_per_period));
    p.lambda_stable = p.lambda < cfg.threshold;

    ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(cfg.initial_temperature_k);
    spec.rng_seed = cfg.seed;
    const SystemState initial = init_state(1, spec, 0.0);

    ForceStack stack;
    stack.add(TrapTerm(trap)).add(LorentzTerm(field, trap.charge_sign));

    const double omega_z = derive_trap_params(trap).omega_z;
    double max_e = radial_energy(initial, omega_z);
    IntegratorConfig ic;
    ic.method = Method::rk3;
    ic.dt = cfg.dt;
    ic.t_end = cfg.t_end;
    ic.record_stride = 1;
    ic.recorders = {false, false, false};
    ic.observer = [&](const SystemState& s) {
      max_e = std::max(max_e, radial_energy(s, omega_z));
      return max_e < cap;
    };
    const RunRecord run = run_simulation(initial, stack, ic);
    if (run.status == RunStatus::diverged) max_e = cap;
    p.capped = max_e >= cap;
    p.max_energy_ev = std::min(max_e, cap) / kElectronVolt;
  });
  return out;
}

}  // namespace paultrap
