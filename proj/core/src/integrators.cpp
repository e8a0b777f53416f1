#include "paultrap/integrators.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "paultrap/errors.hpp"

namespace paultrap {

namespace {

constexpr double kMaxCoordinate = 1.0;  // m
constexpr double kMaxSpeed = 1e8;       // m/s

int axial_order(const SystemState& s) { return s.pos[0].z() < s.pos[1].z() ? -1 : 1; }

}  // namespace

std::string_view method_name(Method m) {
  return m == Method::velocity_verlet ? "velocity_verlet" : "rk3";
}

Method parse_method(std::string_view name) {
  if (name == "velocity_verlet" || name == "vv") return Method::velocity_verlet;
  if (name == "rk3") return Method::rk3;
  throw ConfigError("unknown integrator method '" + std::string(name) + "'");
}

std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::diverged: return "diverged";
    case RunStatus::stopped: return "stopped";
  }
  return "unknown";
}

double max_stable_dt(double omega_rf) { return kTwoPi / (50.0 * omega_rf); }

double rf_aligned_dt(double omega_rf, double max_dt) {
  if (!(omega_rf > 0.0) || !(max_dt > 0.0)) throw DomainError("rf_aligned_dt: inputs must be positive");
  const double period = kTwoPi / omega_rf;
  return period / std::ceil(period / max_dt - 1e-9);
}

std::size_t steps_per_period(double omega_rf, double dt) {
  return static_cast<std::size_t>(std::llround(kTwoPi / omega_rf / dt));
}

void validate(const IntegratorConfig& cfg, const ForceStack& stack) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("integrator: dt must be positive");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("integrator: t_end must be >= 0");
  if (cfg.record_stride == 0) throw ConfigError("integrator: record_stride must be >= 1");
  if (cfg.method == Method::velocity_verlet && stack.velocity_dependent()) {
    throw ConfigError("integrator: velocity_verlet cannot integrate velocity-dependent forces (damping, lorentz)");
  }
  for (const auto& term : stack.terms()) {
    if (const auto* trap = std::get_if<TrapTerm>(&term)) {
      const double limit = max_stable_dt(trap->omega_rf);
      if (cfg.dt > limit * (1.0 + 1e-12)) {
        throw ConfigError("integrator: dt = " + format_number(cfg.dt) + " s exceeds 2*pi/(50*Omega_rf) = " +
                          format_number(limit) + " s");
      }
    }
  }
}

ForceArray accelerations(const SystemState& s, const ForceStack& stack) {
  ForceArray a;
  stack.forces(s, a);
  const double inv_m = 1.0 / stack.mass();
  a[0] *= inv_m;
  a[1] *= inv_m;
  return a;
}

double kinetic_energy(const SystemState& s, double mass) {
  double k = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) k += 0.5 * mass * s.vel[i].squaredNorm();
  return k;
}

bool diverged(const SystemState& s) {
  for (std::size_t i = 0; i < s.n; ++i) {
    if (!(s.pos[i].cwiseAbs().maxCoeff() <= kMaxCoordinate)) return true;
    if (!(s.vel[i].norm() <= kMaxSpeed)) return true;
  }
  return false;
}

void velocity_verlet_step(SystemState& s, ForceStack& stack, double dt, ForceArray& accel) {
  const double half = 0.5 * dt;
  for (std::size_t i = 0; i < s.n; ++i) {
    s.vel[i] += half * accel[i];
    s.pos[i] += dt * s.vel[i];
  }
  s.t += dt;
  accel = accelerations(s, stack);
  for (std::size_t i = 0; i < s.n; ++i) s.vel[i] += half * accel[i];
}

void rk3_step(SystemState& s, ForceStack& stack, double dt) {
  stack.begin_step(dt);
  const SystemState s0 = s;

  const ForceArray a1 = accelerations(s0, stack);

  SystemState s2 = s0;
  s2.t = s0.t + 0.5 * dt;
  for (std::size_t i = 0; i < s.n; ++i) {
    s2.pos[i] = s0.pos[i] + 0.5 * dt * s0.vel[i];
    s2.vel[i] = s0.vel[i] + 0.5 * dt * a1[i];
  }
  const ForceArray a2 = accelerations(s2, stack);

  SystemState s3 = s0;
  s3.t = s0.t + 0.75 * dt;
  for (std::size_t i = 0; i < s.n; ++i) {
    s3.pos[i] = s0.pos[i] + 0.75 * dt * s2.vel[i];
    s3.vel[i] = s0.vel[i] + 0.75 * dt * a2[i];
  }
  const ForceArray a3 = accelerations(s3, stack);

  constexpr double b1 = 2.0 / 9.0, b2 = 1.0 / 3.0, b3 = 4.0 / 9.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    s.pos[i] = s0.pos[i] + dt * (b1 * s0.vel[i] + b2 * s2.vel[i] + b3 * s3.vel[i]);
    s.vel[i] = s0.vel[i] + dt * (b1 * a1[i] + b2 * a2[i] + b3 * a3[i]);
  }
  s.t = s0.t + dt;
}

SystemState velocity_verlet_step(const SystemState& s, ForceStack& stack, double dt) {
  if (stack.velocity_dependent()) {
    throw ConfigError("velocity_verlet_step: velocity-dependent force term present");
  }
  SystemState out = s;
  stack.begin_step(dt);
  ForceArray a = accelerations(out, stack);
  velocity_verlet_step(out, stack, dt, a);
  return out;
}

SystemState rk3_step(const SystemState& s, ForceStack& stack, double dt) {
  SystemState out = s;
  rk3_step(out, stack, dt);
  return out;
}

RunRecord run_simulation(const SystemState& initial, ForceStack& stack, const IntegratorConfig& cfg) {
  validate(cfg, stack);
  if (initial.n < 1 || initial.n > kMaxParticles) throw DomainError("run_simulation: n must be 1 or 2");
  if (!initial.finite()) throw NumericalError("run_simulation: initial state is not finite");

  const auto wall_start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.dt = cfg.dt;
  rec.secular_block_steps = cfg.secular_block_steps;

  const auto n_steps = static_cast<std::uint64_t>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  const double mass = stack.mass();
  const bool track_order = initial.n == 2 && (cfg.recorders.events || cfg.stop_on_reorder);

  SystemState s = initial;
  const double t0 = initial.t;
  const int order0 = initial.n == 2 ? axial_order(initial) : 0;

  auto record = [&](const SystemState& st) {
    if (cfg.recorders.trajectory) rec.trajectory.push_back(st);
    if (cfg.recorders.energy) {
      rec.energy.push_back({st.t, kinetic_energy(st, mass), stack.potential_energy(st)});
    }
  };

  const std::size_t block = cfg.secular_block_steps;
  SecularSample acc;
  std::size_t in_block = 0;
  double block_t0 = t0;
  auto accumulate = [&](const SystemState& st) {
    if (block == 0) return;
    if (in_block == 0) block_t0 = st.t;
    for (std::size_t i = 0; i < st.n; ++i) {
      acc.pos[i] += st.pos[i];
      acc.vel[i] += st.vel[i];
    }
    if (++in_block == block) {
      SecularSample out;
      out.t = block_t0 + 0.5 * static_cast<double>(block - 1) * cfg.dt;
      const double inv = 1.0 / static_cast<double>(block);
      for (std::size_t i = 0; i < st.n; ++i) {
        out.pos[i] = acc.pos[i] * inv;
        out.vel[i] = acc.vel[i] * inv;
      }
      rec.secular.push_back(out);
      acc = SecularSample{};
      in_block = 0;
    }
  };

  record(s);

  ForceArray accel;
  const bool vv = cfg.method == Method::velocity_verlet;
  const bool noisy = stack.has_noise();
  if (vv) {
    stack.begin_step(cfg.dt);
    accel = accelerations(s, stack);
  }

  std::uint64_t step = 0;
  for (; step < n_steps; ++step) {
    accumulate(s);
    if (vv) {
      if (noisy && step > 0) {
        stack.begin_step(cfg.dt);
        accel = accelerations(s, stack);
      }
      velocity_verlet_step(s, stack, cfg.dt, accel);
    } else {
      rk3_step(s, stack, cfg.dt);
    }
    s.t = t0 + static_cast<double>(step + 1) * cfg.dt;

    if (diverged(s)) {
      rec.status = RunStatus::diverged;
      rec.message = "state left the divergence bounds at t = " + format_number(s.t) + " s";
      ++step;
      record(s);
      break;
    }
    if (track_order && !rec.first_reorder && axial_order(s) != order0) {
      rec.first_reorder = s.t;
      if (cfg.stop_on_reorder) {
        rec.status = RunStatus::stopped;
        rec.message = "axial reorder";
        ++step;
        record(s);
        break;
      }
    }
    if ((step + 1) % cfg.record_stride == 0) {
      record(s);
      if (cfg.observer && !cfg.observer(s)) {
        rec.status = RunStatus::stopped;
        rec.message = "stopped by observer";
        ++step;
        break;
      }
    }
    if (cfg.progress && (step + 1) % cfg.progress_every == 0) {
      cfg.progress(static_cast<double>(step + 1) / static_cast<double>(n_steps));
    }
  }

  if (rec.status == RunStatus::completed && step % cfg.record_stride != 0) record(s);
  rec.steps = step;
  rec.final_state = s;
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return rec;
}

}  // namespace paultrap
