#include "paultrap/transport.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "paultrap/errors.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/parallel.hpp"

namespace paultrap {

double quanta_change(double e_before, double e_after, double omega, const PhysicalConstants& c) {
  if (!(omega > 0.0)) throw DomainError("quanta_change: omega must be positive");
  return (e_after - e_before) / (c.reduced_planck * omega);
}

double split_well_frequency(double alpha, const PhysicalConstants& c) {
  if (!(alpha > 0.0)) throw DomainError("split_well_frequency: alpha must be positive");
  return std::sqrt(2.0 * c.elementary_charge * alpha / c.electron_mass);
}

AxialPairEnergy axial_pair_energy(const SystemState& s, const SplitCoefficients& k, const PhysicalConstants& c) {
  if (s.n != 2) throw DomainError("axial_pair_energy: needs two particles");
  const double q = c.elementary_charge;
  const double m = c.electron_mass;
  const double kc = c.coulomb_constant_q2();

  const double zc = 0.5 * (s.pos[0].z() + s.pos[1].z());
  const double vc = 0.5 * (s.vel[0].z() + s.vel[1].z());
  const double sep = std::abs(s.pos[1].z() - s.pos[0].z());
  const double vs = s.vel[1].z() - s.vel[0].z();

  const double omega_c2 = q * (2.0 * k.alpha + 3.0 * k.beta * k.d * k.d) / m;
  auto relative_potential = [&](double r) {
    return q * (0.5 * k.alpha * r * r + 0.125 * k.beta * r * r * r * r) + kc / r;
  };

  AxialPairEnergy e;
  e.com = m * (vc * vc + omega_c2 * zc * zc);
  e.stretch = 0.25 * m * vs * vs + relative_potential(sep) - relative_potential(k.d);
  return e;
}

namespace {

void rotate_axial_phase(SystemState& s, double spacing, double omega, double phase) {
  const auto eq = equilibrium_positions(2, spacing);
  const ModePair x = to_modes(s.pos[0].z() - eq[0].z(), s.pos[1].z() - eq[1].z());
  const ModePair v = to_modes(s.vel[0].z(), s.vel[1].z());
  const double cs = std::cos(phase), sn = std::sin(phase);
  auto rotate = [&](double& xi, double& vi, double w) {
    const double x0 = xi, v0 = vi;
    xi = x0 * cs + v0 / w * sn;
    vi = v0 * cs - w * x0 * sn;
  };
  ModePair xr = x, vr = v;
  rotate(xr.com, vr.com, omega);
  rotate(xr.stretch, vr.stretch, std::numbers::sqrt3 * omega);
  const auto z = from_modes(xr);
  const auto vz = from_modes(vr);
  for (std::size_t i = 0; i < 2; ++i) {
    s.pos[i].z() = eq[i].z() + z[i];
    s.vel[i].z() = vz[i];
  }
}

}  // namespace

SplitResult run_split(const SplitSchedule& schedule, const ModeTemperatureSpec& initial,
                      const SplitRunConfig& cfg) {
  const PhysicalConstants& c = kCodata2018;
  const SplitCoefficients k0 = schedule.at(0.0);
  const SplitCoefficients kf = schedule.at(schedule.duration());

  SplitResult res;
  res.tau_s = schedule.duration();
  res.dt = cfg.dt;
  res.omega_initial = split_well_frequency(k0.alpha);
  res.omega_final = split_well_frequency(kf.alpha);

  SystemState start = init_state(2, initial, k0.d);
  if (cfg.initial_phase != 0.0) rotate_axial_phase(start, k0.d, res.omega_initial, cfg.initial_phase);
  res.initial_energy = axial_pair_energy(start, k0);

  ForceStack stack;
  stack.add(TrapTerm(cfg.trap, false)).add(SplitTerm(schedule)).add(CoulombTerm());

  IntegratorConfig ic;
  ic.method = cfg.method;
  ic.dt = cfg.dt;
  ic.t_end = schedule.duration();
  const auto n_steps = static_cast<std::size_t>(std::floor(ic.t_end / ic.dt + 1e-9));
  const std::size_t target = std::max<std::size_t>(cfg.trajectory_points, 10'000);
  ic.record_stride = std::max<std::size_t>(1, n_steps / target);
  ic.recorders = {cfg.trajectory_points > 0, false, false};
  ic.observer = [&](const SystemState& s) {
    const double t = std::clamp(s.t, 0.0, schedule.duration());
    const double d = schedule.at(t).d;
    const double sep = s.pos[1].z() - s.pos[0].z();
    res.max_stretch_deviation = std::max(res.max_stretch_deviation, std::abs(sep - d));
    res.max_com_deviation = std::max(res.max_com_deviation, std::abs(0.5 * (s.pos[0].z() + s.pos[1].z())));
    return true;
  };

  RunRecord run = run_simulation(start, stack, ic);
  res.status = run.status;
  res.message = run.message;
  if (cfg.trajectory_points > 0) {
    const std::size_t every = std::max<std::size_t>(1, run.trajectory.size() / cfg.trajectory_points);
    for (std::size_t i = 0; i < run.trajectory.size(); i += every) res.trajectory.push_back(run.trajectory[i]);
    if (res.trajectory.back().t != run.trajectory.back().t) res.trajectory.push_back(run.trajectory.back());
  }
  if (run.status == RunStatus::diverged) return res;

  res.final_energy = axial_pair_energy(run.final_state, kf);
  const double s3 = std::numbers::sqrt3;
  res.dn_com = res.final_energy.com / (c.reduced_planck * res.omega_final) -
               res.initial_energy.com / (c.reduced_planck * res.omega_initial);
  res.dn_stretch = res.final_energy.stretch / (c.reduced_planck * s3 * res.omega_final) -
                   res.initial_energy.stretch / (c.reduced_planck * s3 * res.omega_initial);
  return res;
}

SplitPhaseAverage run_split_phase_average(const SplitSchedule& schedule, const ModeTemperatureSpec& initial,
                                          std::size_t phases, const SplitRunConfig& cfg, std::size_t jobs) {
  if (phases == 0) throw DomainError("run_split_phase_average: need at least one phase");
  SplitPhaseAverage avg;
  avg.runs.resize(phases);
  parallel_for(phases, jobs, [&](std::size_t i) {
    SplitRunConfig member = cfg;
    member.initial_phase = cfg.initial_phase + kTwoPi * static_cast<double>(i) / static_cast<double>(phases);
    avg.runs[i] = run_split(schedule, initial, member);
  });
  for (const SplitResult& r : avg.runs) {
    if (r.status == RunStatus::diverged) throw NumericalError("split run diverged: " + r.message);
    avg.dn_com += r.dn_com / static_cast<double>(phases);
    avg.dn_stretch += r.dn_stretch / static_cast<double>(phases);
  }
  return avg;
}

ShuttleResult run_shuttle(const ShuttleSchedule& schedule, double omega_z, const ShuttleRunConfig& cfg,
                          const PhysicalConstants& c) {
  if (!(omega_z > 0.0)) throw DomainError("run_shuttle: omega_z must be positive");
  if (!(schedule.tau_t > 0.0)) throw DomainError("run_shuttle: tau_t must be positive");

  ShuttleResult res;
  res.tau_t = schedule.tau_t;
  res.displacement = schedule.displacement;
  res.dt = cfg.dt;

  ForceStack stack(c.electron_mass);
  stack.add(ShuttleTerm(schedule, omega_z, c));

  SystemState start;
  start.n = 1;

  IntegratorConfig ic;
  ic.method = cfg.method;
  ic.dt = cfg.dt;
  ic.t_end = schedule.tau_t;
  ic.record_stride = std::numeric_limits<std::size_t>::max();
  ic.recorders = {false, false, false};
  const RunRecord run = run_simulation(start, stack, ic);
  res.status = run.status;
  if (run.status == RunStatus::diverged) return res;

  const SystemState& s = run.final_state;
  const double dz = s.pos[0].z() - schedule.center(s.t);
  const double dv = s.vel[0].z() - schedule.center_velocity(s.t);
  res.final_energy = oscillator_energy(c.electron_mass, omega_z, dz, dv);
  res.dn = quanta_change(0.0, res.final_energy, omega_z, c);
  return res;
}

namespace {

/// Shortest text that parses back to the same double, independent of the stream locale.
std::string field(double v) {
  std::array<char, 32> buf{};
  return std::string(buf.data(), std::to_chars(buf.data(), buf.data() + buf.size(), v).ptr);
}

}  // namespace

void write_split_schedule_csv(std::ostream& out, const SplitSchedule& schedule, std::size_t samples) {
  out << "t_s,alpha_vpm2,beta_vpm4,d_m\n";
  for (const SplitSample& s : schedule.sample(samples)) {
    out << field(s.t) << ',' << field(s.c.alpha) << ',' << field(s.c.beta) << ',' << field(s.c.d) << '\n';
  }
}

void write_shuttle_schedule_csv(std::ostream& out, const ShuttleSchedule& schedule, std::size_t samples) {
  if (samples < 2) throw DomainError("shuttle schedule: need at least two samples");
  out << "t_s,zc_m,vc_mps\n";
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = schedule.tau_t * static_cast<double>(i) / static_cast<double>(samples - 1);
    out << field(t) << ',' << field(schedule.center(t)) << ',' << field(schedule.center_velocity(t)) << '\n';
  }
}

}  // namespace paultrap
