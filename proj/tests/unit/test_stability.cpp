#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "paultrap/errors.hpp"
#include "paultrap/stability.hpp"

namespace paultrap {
namespace {

constexpr double kPi = std::numbers::pi;
const double kOmegaRf = kTwoPi * 10.6e9;
const double kOmegaZ = kTwoPi * 300e6;

// Brute-force RK4 on x'' + (a - 2q cos 2s) x = 0 over one period s in [0, pi].
// Returns the trace of the 2x2 monodromy.
double mathieu_trace_oracle(double a, double q, int steps = 20000) {
  auto rhs = [&](double s, const std::array<double, 2>& y) {
    return std::array<double, 2>{y[1], -(a - 2.0 * q * std::cos(2.0 * s)) * y[0]};
  };
  auto propagate = [&](std::array<double, 2> y) {
    const double h = kPi / steps;
    for (int i = 0; i < steps; ++i) {
      const double s = i * h;
      const auto k1 = rhs(s, y);
      const auto k2 = rhs(s + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
      const auto k3 = rhs(s + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
      const auto k4 = rhs(s + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
      for (int j = 0; j < 2; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
  };
  return propagate({1.0, 0.0})[0] + propagate({0.0, 1.0})[1];
}

double mathieu_boundary_oracle(double a) {
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(mathieu_trace_oracle(a, mid, 4000)) > 2.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double mathieu_beta_oracle(double a, double q) { return std::acos(0.5 * mathieu_trace_oracle(a, q)) / kPi; }

Matrix6 trap_monodromy(double q_x, double omega_ce) {
  const TrapConfig trap = trap_from_qx(kOmegaRf, q_x, kOmegaZ);
  return monodromy(LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(omega_ce)));
}

TEST(Monodromy, FreeMotion) {
  LinearPeriodicSystem free;
  free.omega_rf = 1.0;
  const Matrix6 m = monodromy(free);
  Matrix6 want = Matrix6::Identity();
  want.topRightCorner<3, 3>() = kTwoPi * Eigen::Matrix3d::Identity();
  EXPECT_LT((m - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Monodromy, StaticHarmonicRotation) {
  LinearPeriodicSystem s;
  s.omega_rf = 1.0;
  const double w = 0.3;
  s.k_static = Eigen::Vector3d::Constant(w * w);
  const FloquetSpectrum f = floquet_spectrum(monodromy(s));
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(std::abs(f.multipliers[i]), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(std::arg(f.multipliers[i])), w * kTwoPi, 1e-9);
  }
  EXPECT_LT(f.exponent, kDefaultStabilityThreshold);
}

TEST(Monodromy, RejectsBadInput) {
  LinearPeriodicSystem s;
  s.omega_rf = 1.0;
  EXPECT_THROW(monodromy(s, 100), DomainError);
  s.omega_rf = 0.0;
  EXPECT_THROW(monodromy(s), DomainError);
}

TEST(Monodromy, ConvergedInSteps) {
  const TrapConfig trap = default_trap();
  const auto sys = LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(kTwoPi * 3e9));
  const Matrix6 fine = monodromy(sys, 800);
  EXPECT_LT((monodromy(sys, 400) - fine).cwiseAbs().maxCoeff(), 1e-8 * fine.cwiseAbs().maxCoeff());
}

TEST(Monodromy, UnitDeterminantAndReciprocalMultipliers) {
  for (double f_ce : {0.0, 0.1e9, 2.5e9, 5e9, 8e9}) {
    const Matrix6 m = trap_monodromy(0.53, kTwoPi * f_ce);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-6) << f_ce;
    const FloquetSpectrum f = floquet_spectrum(m);
    for (Eigen::Index i = 0; i < 6; ++i) {
      double best = 1e300;
      for (Eigen::Index j = 0; j < 6; ++j) {
        if (j != i) best = std::min(best, std::abs(f.multipliers[i] * f.multipliers[j] - 1.0));
      }
      EXPECT_LT(best, 1e-6) << f_ce;
    }
  }
}

TEST(Monodromy, FieldFreeAxesDecouple) {
  const Matrix6 m = trap_monodromy(0.53, 0.0);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      if (r % 3 != c % 3) EXPECT_EQ(m(r, c), 0.0);
    }
  }
}

TEST(Monodromy, FieldReversalKeepsExponent) {
  const TrapConfig trap = default_trap();
  for (double f_ce : {1e9, 5e9}) {
    const auto up = LinearPeriodicSystem::from_trap(trap, MagneticField::from_cyclotron(kTwoPi * f_ce));
    auto down_field = MagneticField::from_cyclotron(kTwoPi * f_ce);
    down_field.b = -down_field.b;
    const auto down = LinearPeriodicSystem::from_trap(trap, down_field);
    EXPECT_NEAR(floquet_exponent(monodromy(up)), floquet_exponent(monodromy(down)), 1e-9);
    EXPECT_NEAR(up.coupling.trace(), 0.0, 1e-300);
  }
}

TEST(Mathieu, BoundaryMatchesBruteForce) {
  const double oracle = mathieu_boundary_oracle(0.0);
  EXPECT_NEAR(oracle, 0.908, 1e-3);
  const double q = mathieu_boundary_q(0.0, 0.5, 1.0);
  EXPECT_NEAR(q, oracle, 0.01);
  EXPECT_NEAR(q, 0.908046, 1e-4);
  EXPECT_THROW(mathieu_boundary_q(0.0, 0.95, 1.0), DomainError);
}

TEST(Mathieu, BetaMatchesBruteForce) {
  for (double q : {0.1, 0.3, 0.53, 0.8}) {
    const Matrix6 m = monodromy(LinearPeriodicSystem::mathieu(-0.0016, q));
    EXPECT_NEAR(beta_x(m).value, mathieu_beta_oracle(-0.0016, q), 1e-6) << q;
  }
}

TEST(Mathieu, SmallQFollowsPseudopotential) {
  const Matrix6 m = monodromy(LinearPeriodicSystem::mathieu(0.0, 0.1));
  EXPECT_NEAR(beta_x(m).value / (0.1 / std::numbers::sqrt2), 1.0, 0.02);
}

TEST(SecularFrequency, DefaultTrapFloquetValue) {
  const TrapConfig trap = default_trap();
  const DerivedTrapParams p = derive_trap_params(trap);
  const double beta = mathieu_beta_oracle(p.a_x, std::abs(p.q_x));
  EXPECT_NEAR(floquet_secular_frequency(trap) / (0.5 * beta * trap.omega_rf), 1.0, 1e-6);
  EXPECT_NEAR(floquet_secular_frequency(trap) / p.omega_r, 1.0, 0.15);
}

TEST(Stability, OperatingPointAndCutVerdicts) {
  EXPECT_LT(floquet_exponent(trap_monodromy(0.53, 0.0)), kDefaultStabilityThreshold);
  EXPECT_LT(floquet_exponent(trap_monodromy(0.53, kTwoPi * 0.1e9)), kDefaultStabilityThreshold);
  EXPECT_GT(floquet_exponent(trap_monodromy(0.53, kTwoPi * 5e9)), kDefaultStabilityThreshold);
  EXPECT_LT(floquet_exponent(trap_monodromy(0.53, kTwoPi * 8e9)), kDefaultStabilityThreshold);
  EXPECT_GT(floquet_exponent(trap_monodromy(0.95, 0.0)), kDefaultStabilityThreshold);
}

TEST(Stability, MagnetizedRadialParameter) {
  EXPECT_NEAR(magnetized_a_radial(std::numbers::sqrt2 * kOmegaZ, kOmegaZ, kOmegaRf), 0.0, 1e-18);
  EXPECT_GT(magnetized_a_radial(kTwoPi * 1e9, kOmegaZ, kOmegaRf), 0.0);
}

TEST(Stability, BoundariesSitAtIntegerBeta) {
  std::vector<double> ce;
  for (int i = 0; i <= 16; ++i) ce.push_back(kTwoPi * 0.5e9 * i);
  const std::vector<double> q{0.3, 0.55};
  StabilityMapConfig cfg;
  const StabilityGrid g = stability_map(q, ce, cfg);
  ASSERT_EQ(g.lambda.size(), q.size() * ce.size());
  for (std::size_t iq = 0; iq < q.size(); ++iq) {
    EXPECT_TRUE(g.stable(iq, 0));
    EXPECT_NEAR(g.beta_x[g.index(iq, 0)], mathieu_beta_oracle(-2.0 * kOmegaZ * kOmegaZ / (kOmegaRf * kOmegaRf), q[iq]),
                1e-6);
  }
  const auto boundaries = stability_boundaries(g, cfg, kTwoPi * 1e5);
  ASSERT_FALSE(boundaries.empty());
  for (const BoundaryPoint& b : boundaries) {
    EXPECT_NEAR(b.beta_x, std::round(b.beta_x), 0.05) << "q " << b.q_x << " f_ce " << b.omega_ce / kTwoPi;
  }
}

TEST(Stability, BetaContinuationIsPathIndependent) {
  const TrapConfig trap = trap_from_qx(kOmegaRf, 0.3, kOmegaZ);
  const double b0 = beta_x(monodromy(LinearPeriodicSystem::from_trap(trap))).value;
  const double direct = continue_beta_x(trap, 0.0, b0, kTwoPi * 2e9);
  const double mid = continue_beta_x(trap, 0.0, b0, kTwoPi * 1e9);
  const double staged = continue_beta_x(trap, kTwoPi * 1e9, mid, kTwoPi * 2e9);
  EXPECT_NEAR(direct, staged, 1e-9);
}

TEST(LineCut, TimeDomainAgreesWithMonodromy) {
  LineCutConfig cfg;
  cfg.t_end = 1e-6;
  const std::vector<double> ce{kTwoPi * 0.1e9, kTwoPi * 5e9};
  const auto pts = max_energy_linecut(ce, cfg);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_TRUE(pts[0].lambda_stable);
  EXPECT_FALSE(pts[0].capped);
  EXPECT_LT(pts[0].max_energy_ev, cfg.energy_cap_ev);
  EXPECT_FALSE(pts[1].lambda_stable);
  EXPECT_TRUE(pts[1].capped);
  EXPECT_EQ(pts[1].max_energy_ev, cfg.energy_cap_ev);
}

TEST(LineCut, RadialEnergyOfRestingParticle) {
  SystemState s;
  EXPECT_EQ(radial_energy(s, kOmegaZ), 0.0);
  s.vel[0] = Vec3(1e3, 0, 0);
  EXPECT_NEAR(radial_energy(s, kOmegaZ), 0.5 * kCodata2018.electron_mass * 1e6, 1e-40);
}

}  // namespace
}  // namespace paultrap
