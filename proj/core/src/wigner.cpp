#include "paultrap/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "paultrap/errors.hpp"
#include "paultrap/parallel.hpp"

namespace paultrap {

std::string_view direction_name(ScanDirection d) { return d == ScanDirection::axial ? "axial" : "radial"; }

ScanDirection parse_direction(std::string_view name) {
  if (name == "axial") return ScanDirection::axial;
  if (name == "radial") return ScanDirection::radial;
  throw ConfigError("unknown scan direction '" + std::string(name) + "' (axial or radial)");
}

ModeId scanned_mode(ScanDirection d) {
  return d == ScanDirection::axial ? ModeId::axial_stretch : ModeId::radial_x_stretch;
}

std::optional<double> detect_reordering(const RunRecord& record) {
  if (record.final_state.n != 2 && (record.trajectory.empty() || record.trajectory.front().n != 2)) {
    throw DomainError("detect_reordering: needs a two-particle record");
  }
  if (record.first_reorder) return record.first_reorder;
  if (record.trajectory.empty()) return std::nullopt;
  auto order = [](const SystemState& s) { return s.pos[0].z() < s.pos[1].z(); };
  const bool initial = order(record.trajectory.front());
  for (const SystemState& s : record.trajectory) {
    if (order(s) != initial) return s.t;
  }
  return std::nullopt;
}

LifetimeRecord run_lifetime(double energy_k, const LifetimeScanConfig& cfg, std::uint64_t seed) {
  if (!(energy_k >= 0.0)) throw DomainError("run_lifetime: energy must be >= 0");
  const DerivedTrapParams p = derive_trap_params(cfg.trap);
  const double spacing = equilibrium_spacing(p.omega_z);

  ModeTemperatureSpec spec = ModeTemperatureSpec::uniform(cfg.spectator_k);
  spec[scanned_mode(cfg.direction)] = energy_k;
  spec.rng_seed = seed;
  spec.phase = cfg.phase;
  const SystemState initial = init_state(2, spec, spacing);

  ForceStack stack;
  stack.add(TrapTerm(cfg.trap)).add(CoulombTerm());

  IntegratorConfig ic;
  ic.method = cfg.method;
  ic.dt = cfg.dt;
  ic.t_end = cfg.t_end;
  ic.record_stride = std::numeric_limits<std::size_t>::max();
  ic.recorders = {false, false, true};
  ic.stop_on_reorder = true;
  const RunRecord run = run_simulation(initial, stack, ic);

  LifetimeRecord r;
  r.energy_k = energy_k;
  r.spectator_k = cfg.spectator_k;
  r.seed = seed;
  r.dt = cfg.dt;
  r.diverged = run.status == RunStatus::diverged;
  if (run.first_reorder) {
    r.lifetime_s = *run.first_reorder;
    r.rate = 1.0 / r.lifetime_s;
  } else {
    r.censored = true;
    r.lifetime_s = cfg.t_end;
    r.rate = 1.0 / cfg.t_end;
  }
  if (r.rate < 1.0 / cfg.t_end) r.rate = 1.0 / cfg.t_end;
  return r;
}

std::vector<LifetimeRecord> lifetime_scan(std::span<const double> energies_k, const LifetimeScanConfig& cfg) {
  if (!std::is_sorted(energies_k.begin(), energies_k.end())) {
    throw DomainError("lifetime_scan: energies must be sorted ascending");
  }
  std::vector<LifetimeRecord> out(energies_k.size());
  std::mutex progress_mutex;
  std::size_t finished = 0;
  parallel_for(energies_k.size(), cfg.jobs, [&](std::size_t i) {
    out[i] = run_lifetime(energies_k[i], cfg, cfg.base_seed + i);
    if (cfg.progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      cfg.progress(++finished, energies_k.size());
    }
  });
  return out;
}

ThresholdScanResult analyze_scan(std::vector<LifetimeRecord> records, const LifetimeScanConfig& cfg,
                                 std::span<const double> curve_temperatures_k,
                                 std::optional<double> target_rate) {
  ThresholdScanResult res;
  res.direction = cfg.direction;
  res.spectator_k = cfg.spectator_k;
  res.t_end = cfg.t_end;
  res.target_rate = target_rate.value_or(cfg.target_rate);
  res.records = std::move(records);

  std::vector<double> e, f;
  std::size_t n_diverged = 0;
  for (const auto& r : res.records) {
    if (r.diverged) {
      ++n_diverged;
      continue;
    }
    if (r.censored) continue;
    e.push_back(r.energy_k);
    f.push_back(r.rate);
  }
  if (n_diverged > 0) {
    res.warnings.push_back(std::to_string(n_diverged) + " diverged run(s) excluded from the fit");
  }
  if (e.size() < 5) {
    res.warnings.push_back("fewer than 5 uncensored points; no fit");
    return res;
  }
  try {
    res.fit = fit_double_exponential(e, f, std::log(1.0 / cfg.t_end));
  } catch (const FitError& err) {
    res.warnings.push_back(std::string("double-exponential fit failed: ") + err.what());
    return res;
  }
  try {
    for (double t : curve_temperatures_k) {
      res.mean_rate_curve.push_back({t, boltzmann_mean_rate(res.fit->params, t)});
    }
  } catch (const NumericalError& err) {
    res.warnings.push_back(std::string("mean-rate curve truncated: ") + err.what());
  }
  const double t_hi = *std::max_element(e.begin(), e.end());
  try {
    res.threshold_k = threshold_temperature(res.fit->params, res.target_rate, 1e-4, t_hi);
  } catch (const std::exception& err) {
    res.warnings.push_back(std::string("no threshold: ") + err.what());
  }
  return res;
}

ThresholdScanResult threshold_scan(std::span<const double> energies_k, const LifetimeScanConfig& cfg,
                                   std::span<const double> curve_temperatures_k,
                                   std::optional<double> target_rate) {
  return analyze_scan(lifetime_scan(energies_k, cfg), cfg, curve_temperatures_k, target_rate);
}

double coulomb_barrier_energy(double omega_z, const PhysicalConstants& c) {
  if (!(omega_z > 0.0)) throw DomainError("coulomb_barrier_energy: omega_z must be positive");
  const double e = c.elementary_charge;
  const double k = e * e / (2.0 * std::numbers::pi * c.vacuum_permittivity);
  return 0.5 * std::pow(k, 2.0 / 3.0) * std::cbrt(c.electron_mass * omega_z * omega_z);
}

}  // namespace paultrap
