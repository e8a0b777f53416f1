#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "paultrap/errors.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"

namespace paultrap {
namespace {

const double kOmega = kTwoPi * 300e6;
const double kPeriod = kTwoPi / kOmega;
const double kMass = kCodata2018.electron_mass;

// Static axial harmonic well: a shuttle schedule with zero displacement.
ShuttleTerm harmonic_well(double omega = kOmega) { return ShuttleTerm(ShuttleSchedule{1.0, 0.0}, omega); }

SystemState axial_start(double z, double vz) {
  SystemState s;
  s.n = 1;
  s.pos[0] = Vec3(0, 0, z);
  s.vel[0] = Vec3(0, 0, vz);
  return s;
}

struct Exact {
  double x;
  double v;
};

Exact harmonic_exact(double x0, double v0, double t) {
  return {x0 * std::cos(kOmega * t) + v0 / kOmega * std::sin(kOmega * t),
          -x0 * kOmega * std::sin(kOmega * t) + v0 * std::cos(kOmega * t)};
}

// Largest |z - z_exact| over a run of `periods` oscillations.
double max_position_error(Method method, double dt, double periods) {
  ForceStack stack;
  stack.add(harmonic_well());
  const double x0 = 1e-7, v0 = 30.0;
  IntegratorConfig cfg;
  cfg.method = method;
  cfg.dt = dt;
  cfg.t_end = periods * kPeriod;
  cfg.recorders = {true, false, false};
  const RunRecord r = run_simulation(axial_start(x0, v0), stack, cfg);
  double err = 0.0;
  for (const SystemState& s : r.trajectory) err = std::max(err, std::abs(s.pos[0].z() - harmonic_exact(x0, v0, s.t).x));
  return err;
}

double measured_order(Method method) {
  const double e1 = max_position_error(method, kPeriod / 100.0, 20.0);
  const double e2 = max_position_error(method, kPeriod / 200.0, 20.0);
  const double e3 = max_position_error(method, kPeriod / 400.0, 20.0);
  return 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
}

TEST(Integrators, FreeParticleIsExact) {
  ForceStack empty;
  SystemState s;
  s.n = 2;
  s.pos = {Vec3(1e-6, 2e-6, 3e-6), Vec3(-1e-6, 0, 5e-6)};
  s.vel = {Vec3(10.0, -20.0, 30.0), Vec3(0.5, 0.25, -0.125)};
  const double dt = 1e-12;
  const SystemState vv = velocity_verlet_step(std::as_const(s), empty, dt);
  const SystemState rk = rk3_step(std::as_const(s), empty, dt);
  for (std::size_t i = 0; i < 2; ++i) {
    const Vec3 want = s.pos[i] + s.vel[i] * dt;
    EXPECT_LT((vv.pos[i] - want).norm(), 1e-21);
    EXPECT_LT((rk.pos[i] - want).norm(), 1e-21);
    EXPECT_EQ(vv.vel[i], s.vel[i]);
    EXPECT_EQ(rk.vel[i], s.vel[i]);
  }
  EXPECT_DOUBLE_EQ(vv.t, dt);
  EXPECT_DOUBLE_EQ(rk.t, dt);
}

TEST(Integrators, VelocityVerletIsSecondOrder) {
  EXPECT_NEAR(measured_order(Method::velocity_verlet), 2.0, 0.1);
}

TEST(Integrators, Rk3IsThirdOrder) { EXPECT_NEAR(measured_order(Method::rk3), 3.0, 0.2); }

TEST(Integrators, VelocityVerletHasNoEnergyDrift) {
  ForceStack stack;
  stack.add(harmonic_well());
  IntegratorConfig cfg;
  cfg.method = Method::velocity_verlet;
  cfg.dt = kPeriod / 1000.0;
  cfg.t_end = 1e6 * cfg.dt;
  cfg.recorders = {false, true, false};
  const RunRecord r = run_simulation(axial_start(1e-7, 0.0), stack, cfg);
  ASSERT_EQ(r.energy.size(), 1'000'001u);
  // Mean total energy over the first and the last oscillation period.
  auto period_mean = [&](std::size_t first) {
    double sum = 0.0;
    for (std::size_t i = first; i < first + 1000; ++i) sum += r.energy[i].kinetic + r.energy[i].potential;
    return sum / 1000.0;
  };
  const double e0 = period_mean(0);
  const double e1 = period_mean(r.energy.size() - 1001);
  EXPECT_LT(std::abs(e1 - e0) / e0, 1e-6);
  // The instantaneous energy error stays bounded at the (omega dt)^2 level.
  double worst = 0.0;
  for (const auto& e : r.energy) worst = std::max(worst, std::abs(e.kinetic + e.potential - e0) / e0);
  EXPECT_LT(worst, 2e-5);
}

TEST(Integrators, Rk3DampedOscillatorFollowsAnalyticSolution) {
  const double gamma = kOmega / 100.0;
  TankCircuit circuit;
  const double e = kCodata2018.elementary_charge;
  const double d_eff = std::sqrt(e * e * circuit.resistance() / (kMass * gamma));
  ASSERT_NEAR(damping_rate(circuit, d_eff) / gamma, 1.0, 1e-12);

  ForceStack stack;
  stack.add(harmonic_well()).add(DampingTerm(circuit, d_eff));
  IntegratorConfig cfg;
  cfg.method = Method::rk3;
  cfg.dt = kPeriod / 1000.0;
  cfg.t_end = 10.0 / gamma;
  cfg.record_stride = 97;
  cfg.recorders = {true, false, false};
  const double x0 = 1e-7;
  const RunRecord r = run_simulation(axial_start(x0, 0.0), stack, cfg);

  const double wd = std::sqrt(kOmega * kOmega - 0.25 * gamma * gamma);
  const double b = 0.5 * gamma * x0 / wd;
  const double amplitude = std::hypot(x0, b);
  double worst = 0.0;
  for (const SystemState& s : r.trajectory) {
    const double env = std::exp(-0.5 * gamma * s.t);
    const double exact = env * (x0 * std::cos(wd * s.t) + b * std::sin(wd * s.t));
    worst = std::max(worst, std::abs(s.pos[0].z() - exact) / (amplitude * env));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Integrators, VelocityVerletRejectsVelocityDependentForces) {
  for (const ForceTerm& term : {ForceTerm(DampingTerm(TankCircuit{}, 254e-6)),
                                ForceTerm(LorentzTerm(MagneticField::along_y(1e-3)))}) {
    ForceStack stack;
    stack.add(term);
    IntegratorConfig cfg;
    cfg.method = Method::velocity_verlet;
    cfg.t_end = 1e-12;
    EXPECT_THROW(run_simulation(axial_start(0.0, 0.0), stack, cfg), ConfigError);
    cfg.method = Method::rk3;
    EXPECT_NO_THROW(run_simulation(axial_start(0.0, 0.0), stack, cfg));
  }
}

TEST(Integrators, StepLimitFromRfDrive) {
  const TrapConfig trap = default_trap();
  const double limit = max_stable_dt(trap.omega_rf);
  EXPECT_NEAR(limit, kTwoPi / (50.0 * trap.omega_rf), 1e-30);
  EXPECT_GT(limit, 1e-13);  // the default step is admissible
  ForceStack stack;
  stack.add(TrapTerm(trap));
  IntegratorConfig cfg;
  cfg.t_end = 1e-10;
  cfg.dt = 1.01 * limit;
  EXPECT_THROW(run_simulation(axial_start(0.0, 0.0), stack, cfg), ConfigError);
  cfg.dt = rf_aligned_dt(trap.omega_rf, limit);
  EXPECT_NO_THROW(run_simulation(axial_start(0.0, 0.0), stack, cfg));
  EXPECT_EQ(steps_per_period(trap.omega_rf, cfg.dt), 50u);
  EXPECT_EQ(steps_per_period(trap.omega_rf, rf_aligned_dt(trap.omega_rf, 1e-12)), 95u);
}

TEST(Integrators, InvalidConfigurationsAreRejected) {
  ForceStack stack;
  IntegratorConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(validate(cfg, stack), ConfigError);
  cfg.dt = 1e-13;
  cfg.t_end = -1.0;
  EXPECT_THROW(validate(cfg, stack), ConfigError);
  cfg.t_end = 1.0;
  cfg.record_stride = 0;
  EXPECT_THROW(validate(cfg, stack), ConfigError);
}

TEST(Integrators, ZeroDurationRecordsInitialStateOnly) {
  ForceStack stack;
  stack.add(harmonic_well());
  IntegratorConfig cfg;
  cfg.t_end = 0.0;
  const SystemState s0 = axial_start(1e-7, 3.0);
  const RunRecord r = run_simulation(s0, stack, cfg);
  ASSERT_EQ(r.trajectory.size(), 1u);
  EXPECT_EQ(r.trajectory[0].pos[0], s0.pos[0]);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.status, RunStatus::completed);
}

TEST(Integrators, StrideDecimatesAndKeepsFinalState) {
  ForceStack stack;
  stack.add(harmonic_well());
  IntegratorConfig cfg;
  cfg.dt = kPeriod / 100.0;
  cfg.t_end = 105 * cfg.dt;
  cfg.record_stride = 10;
  const RunRecord r = run_simulation(axial_start(1e-7, 0.0), stack, cfg);
  ASSERT_EQ(r.trajectory.size(), 12u);  // t = 0, 10 dt, ..., 100 dt, 105 dt
  EXPECT_NEAR(r.trajectory[1].t, 10 * cfg.dt, 1e-24);
  EXPECT_NEAR(r.trajectory.back().t, 105 * cfg.dt, 1e-24);
  EXPECT_EQ(r.steps, 105u);
}

TEST(Integrators, DivergenceEndsTheRun) {
  ForceStack empty;
  SystemState s;
  s.vel[0] = Vec3(9e7, 0, 0);
  IntegratorConfig cfg;
  cfg.dt = 1e-10;
  cfg.t_end = 1e-7;
  const RunRecord r = run_simulation(s, empty, cfg);
  EXPECT_EQ(r.status, RunStatus::diverged);
  EXPECT_LT(r.steps, 1000u);
  EXPECT_FALSE(r.message.empty());
  EXPECT_TRUE(diverged(r.trajectory.back()));
}

TEST(Integrators, NoisyRunsAreBitReproducible) {
  const TrapConfig trap = default_trap();
  auto run = [&] {
    ForceStack stack;
    TankCircuit circuit;
    stack.add(TrapTerm(trap)).add(CoulombTerm()).add(DampingTerm(circuit, trap.d_eff));
    stack.add(JohnsonNoiseTerm(NoiseProcess::johnson(circuit, 77), trap.d_eff));
    ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(1.0);
    spec.phase = PhaseConvention::random_sign;
    spec.rng_seed = 5;
    const SystemState s0 = init_state(2, spec, equilibrium_spacing(derive_trap_params(trap).omega_z));
    IntegratorConfig cfg;
    cfg.t_end = 2e-9;
    cfg.record_stride = 7;
    cfg.recorders = {true, true, true};
    return run_simulation(s0, stack, cfg);
  };
  const RunRecord a = run(), b = run();
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    for (std::size_t p = 0; p < 2; ++p) {
      EXPECT_EQ(a.trajectory[i].pos[p], b.trajectory[i].pos[p]);
      EXPECT_EQ(a.trajectory[i].vel[p], b.trajectory[i].vel[p]);
    }
    EXPECT_EQ(a.energy[i].kinetic, b.energy[i].kinetic);
  }
}

TEST(Integrators, SecularRecorderAveragesBlocks) {
  ForceStack stack;
  stack.add(harmonic_well());
  IntegratorConfig cfg;
  cfg.dt = kPeriod / 100.0;
  cfg.t_end = 300 * cfg.dt;
  cfg.secular_block_steps = 100;
  cfg.recorders = {false, false, false};
  const RunRecord r = run_simulation(axial_start(1e-7, 0.0), stack, cfg);
  ASSERT_EQ(r.secular.size(), 3u);
  EXPECT_EQ(r.secular_block_steps, 100u);
  // A full oscillation period averages to nearly zero.
  for (const auto& s : r.secular) EXPECT_LT(std::abs(s.pos[0].z()), 1e-3 * 1e-7);
  EXPECT_NEAR(r.secular[0].t, 49.5 * cfg.dt, 1e-22);
}

TEST(Integrators, ReorderEventStopsTheRun) {
  ForceStack empty;
  SystemState s;
  s.n = 2;
  s.pos = {Vec3(0, 0, -1e-6), Vec3(0, 0, 1e-6)};
  s.vel = {Vec3(0, 0, 1e3), Vec3(0, 0, -1e3)};
  IntegratorConfig cfg;
  cfg.dt = 1e-11;
  cfg.t_end = 1e-8;
  cfg.stop_on_reorder = true;
  const RunRecord r = run_simulation(s, empty, cfg);
  EXPECT_EQ(r.status, RunStatus::stopped);
  ASSERT_TRUE(r.first_reorder.has_value());
  EXPECT_NEAR(*r.first_reorder, 1e-9, 1e-11 + 1e-15);
}

TEST(Integrators, MethodNamesRoundTrip) {
  for (Method m : {Method::velocity_verlet, Method::rk3}) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("euler"), ConfigError);
}

}  // namespace
}  // namespace paultrap
