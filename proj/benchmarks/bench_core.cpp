#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "paultrap/fitting.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/spectrum.hpp"
#include "paultrap/stability.hpp"
#include "paultrap/trap.hpp"

namespace paultrap {
namespace {

struct Pair {
  TrapConfig trap = default_trap();
  ForceStack stack;
  SystemState state;

  Pair() {
    stack.add(TrapTerm(trap)).add(CoulombTerm());
    state = init_state(2, ModeTemperatureSpec::uniform(1.0), equilibrium_spacing(derive_trap_params(trap).omega_z));
  }
};

void BM_Rk3Step(benchmark::State& st) {
  Pair p;
  for (auto _ : st) {
    rk3_step(p.state, p.stack, 1e-13);
    benchmark::DoNotOptimize(p.state);
  }
}
BENCHMARK(BM_Rk3Step);

void BM_VelocityVerletStep(benchmark::State& st) {
  Pair p;
  ForceArray accel = accelerations(p.state, p.stack);
  for (auto _ : st) {
    velocity_verlet_step(p.state, p.stack, 1e-13, accel);
    benchmark::DoNotOptimize(p.state);
  }
}
BENCHMARK(BM_VelocityVerletStep);

void BM_Monodromy(benchmark::State& st) {
  const LinearPeriodicSystem sys =
      LinearPeriodicSystem::from_trap(default_trap(), MagneticField::from_cyclotron(kTwoPi * 3e9));
  for (auto _ : st) benchmark::DoNotOptimize(monodromy(sys, static_cast<std::size_t>(st.range(0))));
}
BENCHMARK(BM_Monodromy)->Arg(200)->Arg(400)->Arg(1600);

void BM_DoubleExpFit(benchmark::State& st) {
  const DoubleExpParams truth{8.0, 6.0, 2.5, std::log(1e5)};
  std::vector<double> e, r;
  for (int i = 0; i < 40; ++i) {
    e.push_back(3.0 + 15.0 * i / 39.0);
    r.push_back(truth.rate(e.back()));
  }
  for (auto _ : st) benchmark::DoNotOptimize(fit_double_exponential(e, r, truth.log_floor));
}
BENCHMARK(BM_DoubleExpFit);

void BM_BoltzmannMean(benchmark::State& st) {
  const DoubleExpParams fit{8.0, 6.0, 2.5, std::log(1e5)};
  for (auto _ : st) benchmark::DoNotOptimize(boltzmann_mean_rate(fit, 1.5));
}
BENCHMARK(BM_BoltzmannMean);

void BM_Spectrum(benchmark::State& st) {
  std::vector<double> x(static_cast<std::size_t>(st.range(0)));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * static_cast<double>(i));
  for (auto _ : st) benchmark::DoNotOptimize(amplitude_spectrum(x, 1e-12));
}
BENCHMARK(BM_Spectrum)->Arg(1 << 14)->Arg(100001);

}  // namespace
}  // namespace paultrap

BENCHMARK_MAIN();
