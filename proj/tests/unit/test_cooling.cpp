#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "paultrap/cooling.hpp"
#include "paultrap/errors.hpp"

namespace paultrap {
namespace {

const double kOmega = kTwoPi * 300e6;
const double kMass = kCodata2018.electron_mass;
const double kKb = kCodata2018.boltzmann;

RunRecord harmonic_record(double amplitude, std::size_t block_steps) {
  ForceStack stack;
  stack.add(ShuttleTerm(ShuttleSchedule{1.0, 0.0}, kOmega));
  SystemState s;
  s.pos[0] = Vec3(0, 0, amplitude);
  IntegratorConfig cfg;
  cfg.dt = kTwoPi / kOmega / 1000.0;
  cfg.t_end = 20000 * cfg.dt;
  cfg.recorders = {false, false, false};
  cfg.method = Method::velocity_verlet;
  cfg.secular_block_steps = block_steps;
  return run_simulation(s, stack, cfg);
}

TEST(SecularEstimator, HarmonicAmplitudeGivesExactEnergy) {
  const double a = 1e-7;
  const double want_k = kMass * kOmega * kOmega * a * a / (2.0 * kKb);
  for (std::size_t block : {100u, 370u, 800u}) {
    const RunRecord r = harmonic_record(a, block);
    for (double e : secular_energy_series(r, {ModeId::axial_com, kOmega})) EXPECT_NEAR(e / kKb / want_k, 1.0, 1e-3);
    const TemperatureEstimate t = secular_temperature(r, {ModeId::axial_com, kOmega}, 0.0, r.final_state.t);
    EXPECT_NEAR(t.temperature_k / want_k, 1.0, 1e-3);
    EXPECT_EQ(t.samples, r.secular.size());
  }
}

TEST(SecularEstimator, ZeroMotionGivesZero) {
  const RunRecord r = harmonic_record(0.0, 50);
  for (double e : secular_energy_series(r, {ModeId::axial_com, kOmega})) EXPECT_EQ(e, 0.0);
}

TEST(SecularEstimator, RejectsBadWindowsAndRecords) {
  const RunRecord r = harmonic_record(1e-7, 50);
  const SecularMode m{ModeId::axial_com, kOmega};
  EXPECT_THROW(secular_temperature(r, m, 1e-9, 1e-9), DomainError);
  EXPECT_THROW(secular_temperature(r, m, 0.0, 10.0 * r.final_state.t), DomainError);
  EXPECT_THROW(secular_energy_series(r, {ModeId::axial_stretch, kOmega}), DomainError);
  RunRecord empty;
  EXPECT_THROW(secular_energy_series(empty, m), DomainError);
}

TEST(EnsembleStats, SampleMoments) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const EnsembleStats s = ensemble_stats(v);
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.sem, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(ensemble_stats(std::vector<double>{}).n, 0u);
  EXPECT_EQ(ensemble_stats(std::vector<double>{7.0}).stddev, 0.0);
}

// Strong coupling (small pickup distance) keeps the damping time short.
ResistiveCoolingConfig fast_resistive() {
  ResistiveCoolingConfig cfg;
  cfg.trap.d_eff = 25.4e-6;
  cfg.duration_tau = 8.0;
  cfg.window_tau = 2.0;
  return cfg;
}

TEST(ResistiveCooling, NoiseFreeDecayMatchesDampingTime) {
  ResistiveCoolingConfig cfg = fast_resistive();
  cfg.noise = false;
  const ResistiveCoolingResult r = run_resistive_cooling(cfg);
  const double tau = 1.0 / damping_rate(cfg.circuit, cfg.trap.d_eff);
  EXPECT_DOUBLE_EQ(r.damping_time_s, tau);
  EXPECT_NEAR(r.fitted_decay_time_s / tau, 1.0, 0.1);
  EXPECT_LT(r.equilibrium.temperature_k, 1e-2 * cfg.initial_k);
  EXPECT_EQ(r.status, RunStatus::completed);
  ASSERT_EQ(r.curve.modes.size(), 1u);
  EXPECT_EQ(r.curve.t.size(), r.curve.energy_k[0].size());
}

TEST(ResistiveCooling, ZeroCircuitTemperatureMatchesNoiseFree) {
  ResistiveCoolingConfig a = fast_resistive();
  a.duration_tau = 2.0;
  a.window_tau = 1.0;
  a.circuit.temperature_k = 0.0;
  ResistiveCoolingConfig b = a;
  b.noise = false;
  EXPECT_EQ(run_resistive_cooling(a).equilibrium.temperature_k, run_resistive_cooling(b).equilibrium.temperature_k);
}

TEST(ResistiveCooling, NoisyRunsReachCircuitTemperatureScale) {
  ResistiveCoolingConfig cfg = fast_resistive();
  cfg.duration_tau = 12.0;
  cfg.window_tau = 8.0;
  const auto runs = resistive_ensemble(cfg, 2, 1);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].seed, cfg.seed);
  EXPECT_EQ(runs[1].seed, cfg.seed + 1);
  for (const auto& r : runs) {
    EXPECT_GT(r.equilibrium.temperature_k, 0.05);
    EXPECT_LT(r.equilibrium.temperature_k, 2.0);
  }
}

TEST(ResistiveCooling, VelocityVerletIsRejected) {
  ResistiveCoolingConfig cfg;
  cfg.method = Method::velocity_verlet;
  EXPECT_THROW(run_resistive_cooling(cfg), ConfigError);
}

TEST(StretchCooling, UndrivenStretchKeepsItsEnergy) {
  StretchCoolingConfig cfg;
  cfg.amplitude_scale = 0.0;
  cfg.circuit.temperature_k = 0.0;
  cfg.initial_com_k = 4.0;
  cfg.initial_stretch_k = 2.0;
  cfg.duration = 2e-6;
  cfg.window = 1e-6;
  const StretchCoolingResult r = run_stretch_cooling(cfg);
  EXPECT_TRUE(r.warnings.empty());
  // A mode labelled T starts with energy kB T / 2.
  EXPECT_NEAR(r.stretch.temperature_k / (0.5 * cfg.initial_stretch_k), 1.0, 0.1);
  EXPECT_LT(r.com.temperature_k, 0.7 * 0.5 * cfg.initial_com_k);
  EXPECT_EQ(r.stretch_floor_k, 0.0);
  EXPECT_NEAR(r.omega_p, r.omega_stretch - r.omega_com, 1e-3);
}

TEST(StretchCooling, FloorScalesWithCircuitTemperature) {
  StretchCoolingConfig cfg;
  cfg.duration = 2e-9;
  cfg.window = 1e-9;
  EXPECT_NEAR(run_stretch_cooling(cfg).stretch_floor_k, 0.4 * std::sqrt(3.0), 1e-3);
}

TEST(StretchCooling, HotStartIsFlagged) {
  StretchCoolingConfig cfg;
  cfg.initial_stretch_k = 20.0;
  cfg.duration = 2e-9;
  cfg.window = 1e-9;
  EXPECT_FALSE(run_stretch_cooling(cfg).warnings.empty());
}

TEST(ParametricCooling, DetunedDriveIsFlagged) {
  ParametricCoolingConfig cfg;
  cfg.duration = 2e-9;
  cfg.window = 1e-9;
  const ParametricCoolingResult on = run_parametric_single(cfg);
  EXPECT_TRUE(on.warnings.empty());
  EXPECT_NEAR(on.omega_p, on.omega_radial - on.omega_axial, 1e-3);
  cfg.omega_p = on.omega_p + 20.0 * on.coupling;
  EXPECT_FALSE(run_parametric_single(cfg).warnings.empty());
}

}  // namespace
}  // namespace paultrap
