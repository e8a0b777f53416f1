#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "paultrap/errors.hpp"
#include "paultrap/transport.hpp"

namespace paultrap {
namespace {

const double kOmegaZ = kTwoPi * 300e6;

SplitSchedule default_split(double tau = 10e-6) {
  return SplitSchedule::build(kOmegaZ, 200e-6, tau, beta_cp_for_omega(kTwoPi * 100e6));
}

TEST(SplitSchedule, EquilibriumHoldsEverywhere) {
  const SplitSchedule s = default_split();
  for (const SplitSample& x : s.sample(2001)) EXPECT_LT(s.equilibrium_residual(x.c), 1e-9);
  for (const SplitSample& x : s.reversed().sample(501)) EXPECT_LT(s.equilibrium_residual(x.c), 1e-9);
}

TEST(SplitSchedule, Endpoints) {
  const SplitSchedule s = default_split();
  const SplitCoefficients c0 = s.at(0.0), cf = s.at(s.duration());
  EXPECT_NEAR(c0.d, 5.22e-6, 0.005 * 5.22e-6);
  EXPECT_NEAR(cf.d, 200e-6, 1e-18);
  EXPECT_EQ(c0.beta, 0.0);
  EXPECT_NEAR(cf.beta, 0.0, 1e-12 * s.beta_cp());
  EXPECT_NEAR(split_well_frequency(c0.alpha) / kOmegaZ, 1.0, 1e-12);
  EXPECT_THROW(s.at(-1e-12), DomainError);
  EXPECT_THROW(s.at(2.0 * s.duration()), DomainError);
}

TEST(SplitSchedule, CriticalPoint) {
  const SplitSchedule s = default_split();
  const SplitCoefficients c = s.at(s.critical_time());
  EXPECT_NEAR(c.beta / s.beta_cp(), 1.0, 1e-12);
  EXPECT_NEAR(c.d / s.critical_separation(), 1.0, 1e-12);
  EXPECT_NEAR(s.beta_cp() * std::pow(c.d, 5) / s.equilibrium_constant(), 1.0, 1e-12);
  // The quadratic coefficient changes sign at the critical point.
  EXPECT_NEAR(c.alpha * c.d * c.d / (s.beta_cp() * std::pow(c.d, 4)), 0.0, 1e-9);
  EXPECT_GT(s.at(0.5 * s.critical_time()).alpha, 0.0);
  EXPECT_LT(s.at(0.5 * (s.critical_time() + s.duration())).alpha, 0.0);
  EXPECT_GT(s.critical_separation(), s.initial_separation());
  EXPECT_LT(s.critical_separation(), s.final_separation());
}

TEST(SplitSchedule, SeparationIsMonotone) {
  const SplitSchedule s = default_split();
  double prev = 0.0;
  for (const SplitSample& x : s.sample(1000)) {
    EXPECT_GE(x.c.d, prev);
    prev = x.c.d;
  }
}

TEST(SplitSchedule, ReversedIsTimeMirror) {
  const SplitSchedule s = default_split();
  const SplitSchedule m = s.reversed();
  EXPECT_TRUE(m.is_merge());
  EXPECT_FALSE(m.reversed().is_merge());
  EXPECT_NEAR(m.critical_time(), s.duration() - s.critical_time(), 1e-20);
  for (double f : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    const double t = f * s.duration();
    const SplitCoefficients a = m.at(t), b = s.at(s.duration() - t);
    EXPECT_EQ(a.d, b.d);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.beta, b.beta);
  }
  const auto fwd = s.sample(11), rev = m.sample(11);
  for (std::size_t i = 0; i < 11; ++i) EXPECT_EQ(rev[i].c.d, fwd[10 - i].c.d);
}

TEST(SplitSchedule, InfeasibleInputsAreRejected) {
  // Critical separation below the initial spacing.
  EXPECT_THROW(SplitSchedule::build(kOmegaZ, 200e-6, 1e-6, 1e20), DomainError);
  // Critical separation beyond the final spacing.
  EXPECT_THROW(SplitSchedule::build(kOmegaZ, 200e-6, 1e-6, 1e-3), DomainError);
  EXPECT_THROW(SplitSchedule::build(kOmegaZ, 1e-6, 1e-6, 1.0), DomainError);
  EXPECT_THROW(SplitSchedule::build(kOmegaZ, 200e-6, 0.0, 1.0), DomainError);
  EXPECT_THROW(default_split().sample(1), DomainError);
}

TEST(CriticalFrequency, ClosedFormAndScaling) {
  const double beta = beta_cp_for_omega(kTwoPi * 100e6);
  EXPECT_NEAR(omega_cp(beta) / (kTwoPi * 100e6), 1.0, 1e-12);
  EXPECT_NEAR(omega_cp(beta * std::pow(2.0, 10.0 / 3.0)) / omega_cp(beta), 2.0, 1e-12);
  // Single-particle curvature of the pure quartic well at z = d/2.
  const PhysicalConstants c;
  const double k = c.elementary_charge / (2.0 * std::numbers::pi * c.vacuum_permittivity);
  const double d = std::pow(k / beta, 0.2);
  EXPECT_NEAR(3.0 * c.elementary_charge * beta * d * d / c.electron_mass / std::pow(omega_cp(beta), 2), 1.0, 1e-12);
  EXPECT_THROW(omega_cp(0.0), DomainError);
  EXPECT_THROW(beta_cp_for_omega(-1.0), DomainError);
}

TEST(Quanta, CountsInUnitsOfHbarOmega) {
  const double w = kTwoPi * 300e6;
  EXPECT_NEAR(quanta_change(0.0, 384.0 * kCodata2018.reduced_planck * w, w), 384.0, 1e-9);
  EXPECT_NEAR(quanta_change(kCodata2018.boltzmann * 0.4, kCodata2018.boltzmann * 0.4, w), 0.0, 1e-15);
  EXPECT_THROW(quanta_change(0.0, 1.0, 0.0), DomainError);
}

TEST(AxialPairEnergy, ZeroAtEquilibriumAndHarmonicForSmallStretch) {
  const SplitSchedule s = default_split();
  const SplitCoefficients k = s.at(0.0);
  SystemState eq;
  eq.n = 2;
  eq.pos = {Vec3(0, 0, -0.5 * k.d), Vec3(0, 0, 0.5 * k.d)};
  const AxialPairEnergy e0 = axial_pair_energy(eq, k);
  EXPECT_NEAR(e0.com, 0.0, 1e-40);
  EXPECT_NEAR(e0.stretch, 0.0, 1e-36);

  // Small stretch displacement: reduced-mass oscillator at sqrt(3) omega_z.
  const double xi = 1e-10;
  SystemState st = eq;
  st.pos[0].z() -= 0.5 * xi;
  st.pos[1].z() += 0.5 * xi;
  const double mu = 0.5 * kCodata2018.electron_mass;
  const double want = 0.5 * mu * 3.0 * kOmegaZ * kOmegaZ * xi * xi;
  EXPECT_NEAR(axial_pair_energy(st, k).stretch / want, 1.0, 1e-3);

  SystemState com = eq;
  com.vel = {Vec3(0, 0, 10.0), Vec3(0, 0, 10.0)};
  EXPECT_NEAR(axial_pair_energy(com, k).com / (kCodata2018.electron_mass * 100.0), 1.0, 1e-12);
}

TEST(Split, SlowSplitFollowsTheSchedule) {
  const SplitSchedule s = default_split(2e-6);
  SplitRunConfig cfg;
  cfg.dt = 1e-12;
  cfg.trajectory_points = 100;
  const SplitResult r = run_split(s, ModeTemperatureSpec{}, cfg);
  EXPECT_EQ(r.status, RunStatus::completed);
  EXPECT_NEAR(r.omega_initial / kOmegaZ, 1.0, 1e-12);
  EXPECT_LT(r.max_stretch_deviation, 0.02 * s.final_separation());
  EXPECT_LT(r.max_com_deviation, 1e-12);
  EXPECT_GE(r.dn_stretch, 0.0);
  EXPECT_TRUE(std::isfinite(r.dn_stretch));
  EXPECT_FALSE(r.trajectory.empty());
}

// Quanta gained by a driven oscillator that starts at rest in a well whose centre
// moves as zc(t): E = m/2 |int_0^tau zc''(t) exp(i w t) dt|^2 by Simpson quadrature.
double shuttle_quanta_oracle(const ShuttleSchedule& s, double omega) {
  const int n = 200000;
  const double h = s.tau_t / n;
  const double acc = 0.5 * s.displacement * std::pow(std::numbers::pi / s.tau_t, 2);
  std::complex<double> sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * acc * std::cos(std::numbers::pi * t / s.tau_t) * std::exp(std::complex<double>(0.0, omega * t));
  }
  sum *= h / 3.0;
  const double energy = 0.5 * kCodata2018.electron_mass * std::norm(sum);
  return energy / (kCodata2018.reduced_planck * omega);
}

TEST(Shuttle, MatchesDrivenOscillatorOracle) {
  for (double tau : {0.05e-6, 0.2e-6}) {
    const ShuttleSchedule s{tau, 100e-6};
    ShuttleRunConfig cfg;
    cfg.dt = 1e-12;
    const ShuttleResult r = run_shuttle(s, kOmegaZ, cfg);
    const double want = shuttle_quanta_oracle(s, kOmegaZ);
    EXPECT_NEAR(r.dn / want, 1.0, 1e-3) << "tau " << tau;
  }
}

TEST(Shuttle, NoDisplacementNoHeating) {
  const ShuttleResult r = run_shuttle(ShuttleSchedule{0.1e-6, 0.0}, kOmegaZ);
  EXPECT_EQ(r.dn, 0.0);
  EXPECT_THROW(run_shuttle(ShuttleSchedule{0.0, 1e-6}, kOmegaZ), DomainError);
  EXPECT_THROW(run_shuttle(ShuttleSchedule{1e-6, 1e-6}, 0.0), DomainError);
}

TEST(Shuttle, ScheduleEndpoints) {
  const ShuttleSchedule s{1e-6, 100e-6};
  EXPECT_EQ(s.center(0.0), 0.0);
  EXPECT_NEAR(s.center(1e-6), 100e-6, 1e-20);
  EXPECT_NEAR(s.center(0.5e-6), 50e-6, 1e-18);
  EXPECT_EQ(s.center_velocity(0.0), 0.0);
  EXPECT_EQ(s.center_velocity(1e-6), 0.0);
  EXPECT_NEAR(s.center_velocity(0.5e-6), 0.5 * 100e-6 * std::numbers::pi / 1e-6, 1e-6);
  EXPECT_EQ(s.center(2e-6), s.center(1e-6));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(ScheduleCsv, HeadersAndRows) {
  std::ostringstream split, shuttle;
  write_split_schedule_csv(split, default_split(), 5);
  write_shuttle_schedule_csv(shuttle, ShuttleSchedule{1e-6, 100e-6}, 3);
  const auto a = lines_of(split.str()), b = lines_of(shuttle.str());
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a[0], "t_s,alpha_vpm2,beta_vpm4,d_m");
  EXPECT_EQ(a[1].substr(0, 2), "0,");
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(b[0], "t_s,zc_m,vc_mps");
  EXPECT_NEAR(std::stod(b[3].substr(b[3].find(',') + 1)), 100e-6, 1e-18);
  EXPECT_EQ(b[3].substr(b[3].rfind(',')), ",0");
  EXPECT_THROW(write_shuttle_schedule_csv(shuttle, ShuttleSchedule{}, 1), DomainError);
}

}  // namespace
}  // namespace paultrap
