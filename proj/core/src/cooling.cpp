#include "paultrap/cooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "paultrap/errors.hpp"
#include "paultrap/fitting.hpp"
#include "paultrap/parallel.hpp"
#include "paultrap/stability.hpp"
#include "paultrap/wigner.hpp"

namespace paultrap {

namespace {

double block_duration(const RunRecord& record) {
  if (record.secular.empty() || record.secular_block_steps == 0) {
    throw DomainError("secular estimate: record has no block-averaged samples");
  }
  return static_cast<double>(record.secular_block_steps) * record.dt;
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

CoolingCurve make_curve(const RunRecord& record, std::span<const SecularMode> modes, double spacing,
                        std::size_t points) {
  CoolingCurve curve;
  std::vector<std::vector<double>> series;
  for (const SecularMode& m : modes) {
    curve.modes.emplace_back(mode_name(m.id));
    series.push_back(secular_energy_series(record, m, spacing));
  }
  const std::size_t n = record.secular.size();
  if (n == 0 || points == 0) return curve;
  const std::size_t group = std::max<std::size_t>(1, n / points);
  curve.energy_k.assign(modes.size(), {});
  const double kb = kCodata2018.boltzmann;
  for (std::size_t start = 0; start + group <= n; start += group) {
    double t = 0.0;
    for (std::size_t j = start; j < start + group; ++j) t += record.secular[j].t;
    curve.t.push_back(t / static_cast<double>(group));
    for (std::size_t k = 0; k < modes.size(); ++k) {
      double e = 0.0;
      for (std::size_t j = start; j < start + group; ++j) e += series[k][j];
      curve.energy_k[k].push_back(e / static_cast<double>(group) / kb);
    }
  }
  return curve;
}

IntegratorConfig cooling_integrator(double omega_rf, double dt_max, double duration) {
  IntegratorConfig ic;
  ic.method = Method::rk3;
  ic.dt = rf_aligned_dt(omega_rf, std::min(dt_max, max_stable_dt(omega_rf)));
  ic.t_end = duration;
  ic.record_stride = std::numeric_limits<std::size_t>::max();
  ic.recorders = {false, false, false};
  ic.secular_block_steps = steps_per_period(omega_rf, ic.dt);
  return ic;
}

template <typename Result, typename Config, typename Fn>
std::vector<Result> run_ensemble(Config cfg, std::size_t runs, std::size_t jobs, Fn fn) {
  std::vector<Result> out(runs);
  const std::uint64_t base = cfg.seed;
  parallel_for(runs, jobs, [&](std::size_t i) {
    Config member = cfg;
    member.seed = base + i;
    out[i] = fn(member);
  });
  return out;
}

}  // namespace

std::vector<double> secular_energy_series(const RunRecord& record, const SecularMode& mode, double spacing,
                                          const PhysicalConstants& c) {
  const double tb = block_duration(record);
  const std::size_t n = record.final_state.n;
  const Axis axis = mode_axis(mode.id);
  const bool stretch = is_stretch(mode.id);
  if (n == 1 && stretch) throw DomainError("secular estimate: stretch modes need two particles");

  const double mass = n == 1 ? c.electron_mass : mode_mass(stretch, c.electron_mass);
  const auto eq = equilibrium_positions(n, spacing);
  const double s = sinc(0.5 * mode.omega * tb);
  const double correction = 1.0 / (s * s);

  std::vector<double> out;
  out.reserve(record.secular.size());
  for (const SecularSample& b : record.secular) {
    double x = 0.0, v = 0.0;
    if (n == 1) {
      x = b.pos[0][axis];
      v = b.vel[0][axis];
    } else {
      const ModePair mx = to_modes(b.pos[0][axis] - eq[0][axis], b.pos[1][axis] - eq[1][axis]);
      const ModePair mv = to_modes(b.vel[0][axis], b.vel[1][axis]);
      x = stretch ? mx.stretch : mx.com;
      v = stretch ? mv.stretch : mv.com;
    }
    out.push_back(oscillator_energy(mass, mode.omega, x, v) * correction);
  }
  return out;
}

TemperatureEstimate secular_temperature(const RunRecord& record, const SecularMode& mode, double t_from,
                                        double t_to, double spacing, const PhysicalConstants& c) {
  if (!(t_to > t_from)) throw DomainError("secular_temperature: empty window");
  const double tb = block_duration(record);
  if (t_from < record.secular.front().t - 2.0 * tb || t_to > record.secular.back().t + 2.0 * tb) {
    throw DomainError("secular_temperature: window exceeds the recorded samples");
  }
  const std::vector<double> e = secular_energy_series(record, mode, spacing, c);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double t = record.secular[i].t;
    if (t >= t_from && t <= t_to) {
      sum += e[i];
      ++count;
    }
  }
  if (count == 0) throw DomainError("secular_temperature: no samples in the window");
  TemperatureEstimate est;
  est.mode = std::string(mode_name(mode.id));
  est.window_start_s = t_from;
  est.window_end_s = t_to;
  est.samples = count;
  est.temperature_k = sum / static_cast<double>(count) / c.boltzmann;
  return est;
}

EnsembleStats ensemble_stats(std::span<const double> values) {
  EnsembleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.sem = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

ResistiveCoolingResult run_resistive_cooling(const ResistiveCoolingConfig& cfg) {
  if (cfg.method == Method::velocity_verlet) {
    throw ConfigError("resistive cooling: velocity_verlet cannot integrate the damping force");
  }
  const DerivedTrapParams p = derive_trap_params(cfg.trap);
  const double gamma = damping_rate(cfg.circuit, cfg.trap.d_eff);

  ResistiveCoolingResult res;
  res.seed = cfg.seed;
  res.damping_time_s = 1.0 / gamma;
  const double duration = cfg.duration_tau * res.damping_time_s;

  ForceStack stack;
  stack.add(TrapTerm(cfg.trap)).add(DampingTerm(cfg.circuit, cfg.trap.d_eff, cfg.axis));
  if (cfg.noise && cfg.circuit.temperature_k > 0.0) {
    stack.add(JohnsonNoiseTerm(NoiseProcess::johnson(cfg.circuit, cfg.seed), cfg.trap.d_eff, cfg.axis,
                               kCodata2018, cfg.trap.charge_sign));
  }

  ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(cfg.initial_k);
  spec.rng_seed = cfg.seed;
  const SystemState initial = init_state(1, spec, 0.0);

  const IntegratorConfig ic = cooling_integrator(cfg.trap.omega_rf, cfg.dt, duration);
  res.dt = ic.dt;
  const RunRecord run = run_simulation(initial, stack, ic);
  res.status = run.status;
  if (run.status == RunStatus::diverged) return res;

  SecularMode mode;
  if (cfg.axis == kZ) {
    mode = {ModeId::axial_com, p.omega_z};
  } else {
    mode = {cfg.axis == kX ? ModeId::radial_x_com : ModeId::radial_y_com, floquet_secular_frequency(cfg.trap)};
  }

  const std::vector<double> e = secular_energy_series(run, mode);
  std::vector<double> t_fit, log_e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double t = run.secular[i].t;
    if (t >= res.damping_time_s && t <= 6.0 * res.damping_time_s && e[i] > 0.0) {
      t_fit.push_back(t);
      log_e.push_back(std::log(e[i]));
    }
  }
  if (t_fit.size() >= 2) res.fitted_decay_time_s = -1.0 / linear_fit(t_fit, log_e).slope;

  const double t_end = run.final_state.t;
  res.equilibrium = secular_temperature(run, mode, t_end - cfg.window_tau * res.damping_time_s, t_end);
  const SecularMode modes[] = {mode};
  res.curve = make_curve(run, modes, 0.0, cfg.curve_points);
  return res;
}

ParametricCoolingResult run_parametric_single(const ParametricCoolingConfig& cfg) {
  const DerivedTrapParams p = derive_trap_params(cfg.trap);
  ParametricCoolingResult res;
  res.seed = cfg.seed;
  res.omega_radial = floquet_secular_frequency(cfg.trap);
  res.omega_axial = p.omega_z;
  res.omega_p = cfg.omega_p.value_or(res.omega_radial - res.omega_axial);
  res.coupling = rz_coupling(cfg.amplitude_scale, cfg.trap.omega_rf, p.omega_r, p.omega_z);
  const double detuning = res.omega_p - (res.omega_radial - res.omega_axial);
  if (std::abs(detuning) > 10.0 * res.coupling) {
    res.warnings.push_back("drive detuned by more than 10 g_rz from the radial-axial difference; no cooling expected");
  }

  ParametricDrive drive{DriveKind::rz, cfg.amplitude_scale, res.omega_p, cfg.radial_axis};
  ForceStack stack;
  stack.add(TrapTerm(cfg.trap))
      .add(DampingTerm(cfg.circuit, cfg.trap.d_eff, kZ))
      .add(ParametricRzTerm(drive, cfg.trap));
  if (cfg.circuit.temperature_k > 0.0) {
    stack.add(JohnsonNoiseTerm(NoiseProcess::johnson(cfg.circuit, cfg.seed), cfg.trap.d_eff, kZ, kCodata2018,
                               cfg.trap.charge_sign));
  }

  ModeTemperatureSpec spec;
  spec[ModeId::radial_x_com] = cfg.initial_radial_k;
  spec[ModeId::radial_y_com] = cfg.initial_radial_k;
  spec[ModeId::axial_com] = cfg.initial_axial_k;
  spec.rng_seed = cfg.seed;
  const SystemState initial = init_state(1, spec, 0.0);

  const IntegratorConfig ic = cooling_integrator(cfg.trap.omega_rf, cfg.dt, cfg.duration);
  res.dt = ic.dt;
  const RunRecord run = run_simulation(initial, stack, ic);
  res.status = run.status;
  if (run.status == RunStatus::diverged) return res;

  const SecularMode radial{cfg.radial_axis == kX ? ModeId::radial_x_com : ModeId::radial_y_com,
                           res.omega_radial};
  const SecularMode axial{ModeId::axial_com, res.omega_axial};
  const double t_end = run.final_state.t;
  res.radial = secular_temperature(run, radial, t_end - cfg.window, t_end);
  res.axial = secular_temperature(run, axial, t_end - cfg.window, t_end);
  const SecularMode modes[] = {radial, axial};
  res.curve = make_curve(run, modes, 0.0, cfg.curve_points);
  return res;
}

StretchCoolingResult run_stretch_cooling(const StretchCoolingConfig& cfg) {
  const DerivedTrapParams p = derive_trap_params(cfg.trap);
  const NormalModeSet nm = NormalModeSet::from_trap(p);
  const double spacing = equilibrium_spacing(p.omega_z);

  StretchCoolingResult res;
  res.seed = cfg.seed;
  res.omega_com = nm.axial_com;
  res.omega_stretch = nm.axial_stretch;
  res.omega_p = cfg.omega_p.value_or(nm.axial_stretch - nm.axial_com);
  res.coupling = z3_coupling(cfg.amplitude_scale, cfg.trap);
  res.stretch_floor_k = cfg.circuit.temperature_k * nm.axial_stretch / nm.axial_com;
  if (cfg.initial_stretch_k > kelvin_label(coulomb_barrier_energy(p.omega_z))) {
    res.warnings.push_back("initial stretch energy is above the Coulomb barrier; the pair may start as a cloud");
  }

  ParametricDrive drive{DriveKind::z3, cfg.amplitude_scale, res.omega_p, kX};
  ForceStack stack;
  stack.add(TrapTerm(cfg.trap))
      .add(CoulombTerm())
      .add(DampingTerm(cfg.circuit, cfg.trap.d_eff, kZ))
      .add(ParametricZ3Term(drive, cfg.trap));
  if (cfg.circuit.temperature_k > 0.0) {
    stack.add(JohnsonNoiseTerm(NoiseProcess::johnson(cfg.circuit, cfg.seed), cfg.trap.d_eff, kZ, kCodata2018,
                               cfg.trap.charge_sign));
  }

  ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(cfg.initial_radial_k);
  spec[ModeId::axial_com] = cfg.initial_com_k;
  spec[ModeId::axial_stretch] = cfg.initial_stretch_k;
  spec.rng_seed = cfg.seed;
  const SystemState initial = init_state(2, spec, spacing);

  const IntegratorConfig ic = cooling_integrator(cfg.trap.omega_rf, cfg.dt, cfg.duration);
  res.dt = ic.dt;
  const RunRecord run = run_simulation(initial, stack, ic);
  res.status = run.status;
  if (run.status == RunStatus::diverged) return res;

  const SecularMode com{ModeId::axial_com, res.omega_com};
  const SecularMode str{ModeId::axial_stretch, res.omega_stretch};
  const double t_end = run.final_state.t;
  res.com = secular_temperature(run, com, t_end - cfg.window, t_end, spacing);
  res.stretch = secular_temperature(run, str, t_end - cfg.window, t_end, spacing);
  const SecularMode modes[] = {com, str};
  res.curve = make_curve(run, modes, spacing, cfg.curve_points);
  return res;
}

std::vector<ResistiveCoolingResult> resistive_ensemble(ResistiveCoolingConfig cfg, std::size_t runs,
                                                       std::size_t jobs) {
  return run_ensemble<ResistiveCoolingResult>(cfg, runs, jobs, run_resistive_cooling);
}

std::vector<ParametricCoolingResult> parametric_ensemble(ParametricCoolingConfig cfg, std::size_t runs,
                                                         std::size_t jobs) {
  return run_ensemble<ParametricCoolingResult>(cfg, runs, jobs, run_parametric_single);
}

std::vector<StretchCoolingResult> stretch_ensemble(StretchCoolingConfig cfg, std::size_t runs, std::size_t jobs) {
  return run_ensemble<StretchCoolingResult>(cfg, runs, jobs, run_stretch_cooling);
}

}  // namespace paultrap
