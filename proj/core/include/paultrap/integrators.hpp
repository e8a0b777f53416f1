#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paultrap/forces.hpp"
#include "paultrap/state.hpp"

namespace paultrap {

enum class Method { velocity_verlet, rk3 };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct Recorders {
  bool trajectory = true;
  bool energy = false;
  bool events = true;
};

struct IntegratorConfig {
  Method method = Method::rk3;
  double dt = 1e-13;             // s
  double t_end = 0.0;            // s
  std::size_t record_stride = 1;  // steps between trajectory/energy samples
  Recorders recorders;
  /// Boxcar length in steps for the block-averaged (secular) recorder; 0 disables it.
  std::size_t secular_block_steps = 0;
  /// Stop as soon as the two particles swap axial order.
  bool stop_on_reorder = false;
  /// Called every record_stride steps; returning false stops the run.
  std::function<bool(const SystemState&)> observer;
  /// Called roughly every progress_every steps with the completed fraction.
  std::function<void(double)> progress;
  std::uint64_t progress_every = 10'000'000;
};

enum class RunStatus { completed, diverged, stopped };

std::string_view status_name(RunStatus s);

struct EnergySample {
  double t = 0.0;
  double kinetic = 0.0;    // J
  double potential = 0.0;  // J, conservative terms at t
};

/// Boxcar mean of positions and velocities over one block; t is the block midpoint.
struct SecularSample {
  double t = 0.0;
  std::array<Vec3, kMaxParticles> pos{Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, kMaxParticles> vel{Vec3::Zero(), Vec3::Zero()};
};

struct RunRecord {
  RunStatus status = RunStatus::completed;
  std::string message;
  double dt = 0.0;
  std::size_t secular_block_steps = 0;
  std::vector<SystemState> trajectory;
  std::vector<EnergySample> energy;
  std::vector<SecularSample> secular;
  std::optional<double> first_reorder;  // s
  SystemState final_state;
  std::uint64_t steps = 0;
  double wall_time_s = 0.0;
};

/// Largest dt allowed for a drive at omega_rf: 2 pi / (50 omega_rf).
double max_stable_dt(double omega_rf);

/// Largest dt <= max_dt that divides one RF period into a whole number of steps.
double rf_aligned_dt(double omega_rf, double max_dt);

/// Steps per RF period for an aligned dt.
std::size_t steps_per_period(double omega_rf, double dt);

/// Throws ConfigError on dt <= 0, t_end < 0, stride 0, VV with velocity-dependent
/// terms, or dt above the limit set by any trap term in the stack.
void validate(const IntegratorConfig& cfg, const ForceStack& stack);

/// In-place kick-drift-kick step. accel holds a(t) on entry and a(t + dt) on exit.
void velocity_verlet_step(SystemState& s, ForceStack& stack, double dt, ForceArray& accel);

/// In-place three-stage, third-order (Bogacki-Shampine) step on (position, velocity).
void rk3_step(SystemState& s, ForceStack& stack, double dt);

/// Value-returning wrappers.
SystemState velocity_verlet_step(const SystemState& s, ForceStack& stack, double dt);
SystemState rk3_step(const SystemState& s, ForceStack& stack, double dt);

/// Accelerations a = F/m for the current state.
ForceArray accelerations(const SystemState& s, const ForceStack& stack);

double kinetic_energy(const SystemState& s, double mass);

/// Any coordinate beyond 1 m, any speed beyond 1e8 m/s, or a non-finite value.
bool diverged(const SystemState& s);

/// Integrates from initial to cfg.t_end with a fixed step.
RunRecord run_simulation(const SystemState& initial, ForceStack& stack, const IntegratorConfig& cfg);

}  // namespace paultrap
