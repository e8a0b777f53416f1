#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "paultrap/errors.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {
namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form spacing evaluated from the constants directly.
double spacing_oracle(double omega_z) {
  const PhysicalConstants c;
  const double e = c.elementary_charge;
  return std::cbrt(e * e / (2.0 * kPi * c.vacuum_permittivity * c.electron_mass * omega_z * omega_z));
}

TEST(Constants, Codata2018Values) {
  const PhysicalConstants c;
  EXPECT_EQ(c.elementary_charge, 1.602176634e-19);
  EXPECT_EQ(c.electron_mass, 9.1093837015e-31);
  EXPECT_EQ(c.vacuum_permittivity, 8.8541878128e-12);
  EXPECT_EQ(c.boltzmann, 1.380649e-23);
  EXPECT_EQ(c.reduced_planck, 1.054571817e-34);
}

TEST(DerivedTrap, DefaultTrapMathieuParameters) {
  const DerivedTrapParams p = derive_trap_params(default_trap());
  EXPECT_NEAR(std::abs(p.q_x), 0.5336, 5e-4);
  EXPECT_NEAR(std::abs(p.a_z), 3.2e-3, 1e-5);
  EXPECT_NEAR(p.omega_r / kTwoPi, 2e9, 1e-3);
  EXPECT_NEAR(p.omega_z / kTwoPi, 300e6, 1e-4);
}

TEST(DerivedTrap, MathieuRelationsHoldExactly) {
  const TrapConfig cfg = default_trap();
  const DerivedTrapParams p = derive_trap_params(cfg);
  EXPECT_NEAR(std::abs(p.q_x), 2.0 * std::numbers::sqrt2 * p.omega_r / cfg.omega_rf, 1e-15);
  EXPECT_NEAR(std::abs(p.q_y), std::abs(p.q_x), 1e-15);
  const double w2 = 2.0 * p.omega_z * p.omega_z / (cfg.omega_rf * cfg.omega_rf);
  EXPECT_NEAR(std::abs(p.a_x), w2, 1e-18);
  EXPECT_NEAR(std::abs(p.a_y), w2, 1e-18);
  EXPECT_NEAR(std::abs(p.a_z), 2.0 * w2, 1e-18);
}

TEST(DerivedTrap, ZeroDcVoltageGivesNoAxialConfinement) {
  TrapConfig cfg = default_trap();
  cfg.u_dc = 0.0;
  const DerivedTrapParams p = derive_trap_params(cfg);
  EXPECT_EQ(p.omega_z, 0.0);
  EXPECT_EQ(p.a_z, 0.0);
}

TEST(DerivedTrap, WrongDcSignIsRejected) {
  TrapConfig cfg = default_trap();
  cfg.u_dc = -cfg.u_dc;
  EXPECT_THROW(derive_trap_params(cfg), ConfigError);
  cfg = default_trap();
  cfg.charge_sign = +1;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(DerivedTrap, NonPositiveGeometryIsRejected) {
  for (double TrapConfig::*field : {&TrapConfig::omega_rf, &TrapConfig::r0, &TrapConfig::z0, &TrapConfig::d_eff}) {
    TrapConfig cfg = default_trap();
    cfg.*field = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
  }
}

TEST(DerivedTrap, InverseSolveRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wr(2e8, 4e9), wz(1e7, 5e8);
  for (int i = 0; i < 50; ++i) {
    const double omega_r = kTwoPi * wr(rng);
    const double omega_z = kTwoPi * wz(rng);
    const double omega_rf = 6.0 * omega_r;
    const TrapConfig cfg = trap_from_frequencies(omega_rf, omega_r, omega_z);
    const DerivedTrapParams p = derive_trap_params(cfg);
    EXPECT_NEAR(p.omega_r / omega_r, 1.0, 1e-12);
    EXPECT_NEAR(p.omega_z / omega_z, 1.0, 1e-12);
    const TrapConfig again = trap_from_frequencies(omega_rf, p.omega_r, p.omega_z);
    EXPECT_NEAR(again.v0 / cfg.v0, 1.0, 1e-12);
    EXPECT_NEAR(again.u_dc / cfg.u_dc, 1.0, 1e-12);
  }
}

TEST(DerivedTrap, TrapFromQxFixesQ) {
  const TrapConfig cfg = trap_from_qx(kTwoPi * 10.6e9, 0.53, kTwoPi * 300e6);
  EXPECT_NEAR(std::abs(derive_trap_params(cfg).q_x), 0.53, 1e-12);
}

TEST(EquilibriumSpacing, MatchesClosedForm) {
  const double l = equilibrium_spacing(kTwoPi * 300e6);
  EXPECT_NEAR(l, spacing_oracle(kTwoPi * 300e6), 1e-20);
  EXPECT_NEAR(l, 5.22e-6, 0.005 * 5.22e-6);
  EXPECT_NEAR(equilibrium_spacing(kTwoPi * 30e6), 24.2e-6, 0.1e-6);
}

TEST(EquilibriumSpacing, ScalesAsTwoThirdsPower) {
  const double l1 = equilibrium_spacing(kTwoPi * 300e6);
  const double l8 = equilibrium_spacing(8.0 * kTwoPi * 300e6);
  EXPECT_NEAR(l8 / l1, 0.25, 1e-14);
}

TEST(EquilibriumSpacing, RejectsNonPositiveFrequency) {
  EXPECT_THROW(equilibrium_spacing(0.0), DomainError);
  EXPECT_THROW(equilibrium_spacing(-1.0), DomainError);
}

TEST(EquilibriumSpacing, NetAxialForceVanishes) {
  const TrapConfig cfg = default_trap();
  const double l = equilibrium_spacing(derive_trap_params(cfg).omega_z);
  SystemState s;
  s.n = 2;
  s.pos = equilibrium_positions(2, l);
  const ForceArray trap = trap_force(s, cfg);
  const ForceArray coul = coulomb_force(s);
  for (std::size_t i = 0; i < 2; ++i) {
    const double scale = std::max(std::abs(trap[i].z()), std::abs(coul[i].z()));
    EXPECT_LT(std::abs(trap[i].z() + coul[i].z()), 1e-9 * scale);
  }
}

TEST(NormalModes, FrequencyRelations) {
  const NormalModeSet m = NormalModeSet::from_trap(derive_trap_params(default_trap()));
  EXPECT_NEAR(m.axial_stretch / m.axial_com, std::numbers::sqrt3, 1e-15);
  EXPECT_LT(m.radial_stretch, m.radial_com);
  EXPECT_NEAR(m.radial_stretch,
              std::sqrt(m.radial_com * m.radial_com - m.axial_com * m.axial_com), 1e-6);
  EXPECT_EQ(m.frequency(ModeId::radial_y_com), m.radial_com);
}

TEST(NormalModes, ProjectionRoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e-6, 1e-6);
  for (int i = 0; i < 1000; ++i) {
    const double d1 = u(rng), d2 = u(rng);
    const auto back = from_modes(to_modes(d1, d2));
    EXPECT_NEAR(back[0], d1, 4e-22);
    EXPECT_NEAR(back[1], d2, 4e-22);
  }
}

TEST(InitState, ColdStartIsAtEquilibriumAtRest) {
  const double l = 5.22e-6;
  const SystemState s = init_state(2, ModeTemperatureSpec{}, l);
  EXPECT_EQ(s.n, 2u);
  EXPECT_EQ(s.pos[0], Vec3(0.0, 0.0, -0.5 * l));
  EXPECT_EQ(s.pos[1], Vec3(0.0, 0.0, 0.5 * l));
  EXPECT_EQ(s.vel[0], Vec3::Zero());
  EXPECT_EQ(s.vel[1], Vec3::Zero());
  const SystemState one = init_state(1, ModeTemperatureSpec::uniform(0.0), 0.0);
  EXPECT_EQ(one.pos[0], Vec3::Zero());
}

TEST(InitState, StretchEnergyUsesReducedMass) {
  const PhysicalConstants c;
  ModeTemperatureSpec spec;
  spec[ModeId::axial_stretch] = 0.4;
  const SystemState s = init_state(2, spec, 5e-6);
  const double v_rel = s.vel[0].z() - s.vel[1].z();
  const double mu = 0.5 * c.electron_mass;
  EXPECT_NEAR(0.5 * mu * v_rel * v_rel / (0.5 * c.boltzmann * 0.4), 1.0, 1e-12);
  EXPECT_NEAR(s.vel[0].z() + s.vel[1].z(), 0.0, 1e-12 * std::abs(v_rel));
}

TEST(InitState, TotalKineticEnergyMatchesModeSum) {
  const PhysicalConstants c;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (PhaseConvention phase : {PhaseConvention::fixed_sign, PhaseConvention::random_sign}) {
    for (int trial = 0; trial < 20; ++trial) {
      ModeTemperatureSpec spec;
      double expected = 0.0;
      for (double& t : spec.temperature_k) {
        t = u(rng);
        expected += 0.5 * c.boltzmann * t;
      }
      spec.phase = phase;
      spec.rng_seed = static_cast<std::uint64_t>(trial);
      const SystemState s = init_state(2, spec, 5e-6);
      double ke = 0.0;
      for (std::size_t i = 0; i < 2; ++i) ke += 0.5 * c.electron_mass * s.vel[i].squaredNorm();
      EXPECT_NEAR(ke / expected, 1.0, 1e-12);
    }
  }
}

TEST(InitState, SingleParticleUsesComEntries) {
  const PhysicalConstants c;
  ModeTemperatureSpec spec;
  spec[ModeId::axial_com] = 2.0;
  spec[ModeId::axial_stretch] = 100.0;  // ignored for one particle
  const SystemState s = init_state(1, spec, 0.0);
  EXPECT_NEAR(0.5 * c.electron_mass * s.vel[0].z() * s.vel[0].z(), 0.5 * c.boltzmann * 2.0, 1e-35);
  EXPECT_EQ(s.vel[0].x(), 0.0);
}

TEST(InitState, SeedDeterminism) {
  ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(1.0);
  spec.phase = PhaseConvention::random_sign;
  spec.rng_seed = 42;
  const SystemState a = init_state(2, spec, 5e-6);
  const SystemState b = init_state(2, spec, 5e-6);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.pos[i], b.pos[i]);
    EXPECT_EQ(a.vel[i], b.vel[i]);
  }
}

TEST(InitState, RejectsBadInputs) {
  ModeTemperatureSpec spec;
  spec[ModeId::axial_com] = -1.0;
  EXPECT_THROW(init_state(2, spec, 5e-6), DomainError);
  EXPECT_THROW(init_state(3, ModeTemperatureSpec{}, 5e-6), DomainError);
}

}  // namespace
}  // namespace paultrap
