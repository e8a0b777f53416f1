#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stop_token>
#include <thread>

#include <spdlog/spdlog.h>

#include "paultrap/fitting.hpp"
#include "paultrap/parallel.hpp"
#include "paultrap/schedules.hpp"
#include "paultrap/spectrum.hpp"

#ifndef PAULTRAP_VERSION
#define PAULTRAP_VERSION "0.0.0"
#endif

namespace paultrap::cli {

namespace {

double hz(double omega) { return omega / kTwoPi; }
double rad(double f_hz) { return kTwoPi * f_hz; }

/// Logs elapsed time to stderr at a fixed interval until destroyed.
class Heartbeat {
 public:
  Heartbeat(std::string label, double interval_s) {
    if (interval_s <= 0.0) return;
    thread_ = std::jthread([label = std::move(label), interval_s, this](std::stop_token stop) {
      const auto start = std::chrono::steady_clock::now();
      const auto interval = std::chrono::duration<double>(interval_s);
      std::unique_lock lock(mutex_);
      while (true) {
        cv_.wait_for(lock, stop, interval, [] { return false; });
        if (stop.stop_requested()) break;
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        spdlog::info("{}: running, {:.0f} s elapsed", label, elapsed);
      }
    });
  }

 private:
  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::jthread thread_;
};

Json fit_json(const DoubleExpFit& fit) {
  Json j = Json::object();
  j["amplitude_hz"] = fit.params.amplitude;
  j["onset_k"] = fit.params.onset;
  j["width_k"] = fit.params.width;
  j["log_floor"] = fit.params.log_floor;
  j["rms_log_residual"] = fit.rms_log_residual;
  j["points"] = fit.n_points;
  return j;
}

Json stats_json(const std::vector<double>& values) {
  const EnsembleStats s = ensemble_stats(values);
  Json j = Json::object();
  j["mean"] = json_number(s.mean);
  j["stddev"] = json_number(s.stddev);
  j["sem"] = json_number(s.sem);
  j["n"] = s.n;
  return j;
}

Json strings_json(const std::vector<std::string>& v) {
  Json j = Json::array();
  for (const auto& s : v) j.push_back(s);
  return j;
}

/// Mean curve over runs; all runs share the same sample grid.
template <class Result>
std::string curve_csv(const std::vector<Result>& runs) {
  const CoolingCurve& first = runs.front().curve;
  std::vector<std::string> columns{"t_s"};
  for (const auto& m : first.modes) columns.push_back(m + "_temp_k");
  CsvWriter csv(columns);
  for (std::size_t i = 0; i < first.t.size(); ++i) {
    std::vector<CsvWriter::Cell> row{first.t[i]};
    for (std::size_t m = 0; m < first.modes.size(); ++m) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : runs) {
        if (m < r.curve.energy_k.size() && i < r.curve.energy_k[m].size()) {
          sum += r.curve.energy_k[m][i];
          ++n;
        }
      }
      row.emplace_back(n ? sum / static_cast<double>(n) : std::nan(""));
    }
    csv.row(row);
  }
  return csv.str();
}

template <class Result>
bool any_diverged(const std::vector<Result>& runs) {
  return std::any_of(runs.begin(), runs.end(), [](const auto& r) { return r.status == RunStatus::diverged; });
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

Json run_simulate(const RunConfig& cfg, const SimulateSettings& st, OutputDir& out) {
  const TrapConfig& trap = cfg.trap.trap;
  ForceStack stack;
  stack.add(TrapTerm(trap));
  if (st.coulomb && st.particles == 2) stack.add(CoulombTerm());
  if (st.field) stack.add(LorentzTerm(*st.field, trap.charge_sign));
  if (st.damping) stack.add(DampingTerm(cfg.circuit, trap.d_eff, kZ));
  if (st.noise) {
    stack.add(JohnsonNoiseTerm(NoiseProcess::johnson(cfg.circuit, cfg.seed), trap.d_eff, kZ, kCodata2018,
                               trap.charge_sign));
  }

  const double omega_z = derive_trap_params(trap).omega_z;
  const SystemState initial = init_state(st.particles, st.modes, equilibrium_spacing(omega_z));

  IntegratorConfig ic;
  ic.method = cfg.integrator.method;
  ic.dt = cfg.integrator.dt_s;
  ic.t_end = cfg.integrator.t_end_s;
  ic.record_stride = cfg.integrator.record_stride;
  ic.recorders.trajectory = true;
  ic.recorders.energy = st.energy;
  ic.recorders.events = st.particles == 2;
  ic.stop_on_reorder = st.stop_on_reorder;
  ic.progress = [](double f) { spdlog::info("simulate: {:.0f}% done", 100.0 * f); };
  const RunRecord rec = run_simulation(initial, stack, ic);

  std::vector<std::string> columns{"t_s"};
  for (std::size_t p = 1; p <= st.particles; ++p) {
    for (const char* c : {"x", "y", "z"}) columns.push_back(std::string(c) + std::to_string(p) + "_m");
    for (const char* c : {"vx", "vy", "vz"}) columns.push_back(std::string(c) + std::to_string(p) + "_mps");
  }
  CsvWriter traj(columns);
  for (const SystemState& s : rec.trajectory) {
    std::vector<CsvWriter::Cell> row{s.t};
    for (std::size_t p = 0; p < st.particles; ++p) {
      for (int a = 0; a < 3; ++a) row.emplace_back(s.pos[p][a]);
      for (int a = 0; a < 3; ++a) row.emplace_back(s.vel[p][a]);
    }
    traj.row(row);
  }
  out.write("trajectory.csv", traj.str());

  if (st.energy) {
    CsvWriter energy({"t_s", "kinetic_j", "potential_j", "total_j"});
    for (const EnergySample& e : rec.energy) energy.row({e.t, e.kinetic, e.potential, e.kinetic + e.potential});
    out.write("energy.csv", energy.str());
  }

  Json summary = Json::object();
  if (st.spectrum && rec.trajectory.size() >= 4) {
    std::vector<double> z1, x1;
    for (const SystemState& s : rec.trajectory) {
      z1.push_back(s.pos[0].z());
      x1.push_back(s.pos[0].x());
    }
    const double sample_dt = rec.dt * static_cast<double>(cfg.integrator.record_stride);
    const Spectrum sz = amplitude_spectrum(z1, sample_dt);
    const Spectrum sx = amplitude_spectrum(x1, sample_dt);
    CsvWriter spec({"frequency_hz", "amplitude_z1_m", "amplitude_x1_m"});
    for (std::size_t i = 0; i < sz.frequency_hz.size(); ++i) spec.row({sz.frequency_hz[i], sz.amplitude[i], sx.amplitude[i]});
    out.write("spectrum.csv", spec.str());
    summary["spectrum_bin_width_hz"] = sz.bin_width_hz;
  }

  summary["run_status"] = std::string(status_name(rec.status));
  if (!rec.message.empty()) summary["message"] = rec.message;
  summary["dt_s"] = rec.dt;
  summary["steps"] = rec.steps;
  summary["samples"] = rec.trajectory.size();
  summary["first_reorder_s"] = rec.first_reorder ? Json(*rec.first_reorder) : Json(nullptr);
  summary["final_time_s"] = rec.final_state.t;
  out.write_json("summary.json", summary);
  return summary;
}

LifetimeScanConfig lifetime_config(const RunConfig& cfg, const LifetimeSettings& l, std::size_t jobs) {
  LifetimeScanConfig lc;
  lc.direction = l.direction;
  lc.spectator_k = l.spectator_temp_k;
  lc.trap = cfg.trap.trap;
  lc.method = cfg.integrator.method;
  lc.dt = cfg.integrator.dt_s;
  lc.t_end = cfg.integrator.t_end_s;
  lc.base_seed = cfg.seed;
  lc.phase = l.phase;
  lc.jobs = jobs;
  lc.progress = [](std::size_t done, std::size_t total) { spdlog::info("lifetime scan: {}/{} points", done, total); };
  return lc;
}

void lifetime_rows(CsvWriter& csv, const std::vector<LifetimeRecord>& records, std::optional<double> scale) {
  for (const LifetimeRecord& r : records) {
    std::vector<CsvWriter::Cell> row;
    if (scale) row.emplace_back(*scale);
    row.insert(row.end(), {r.energy_k, r.lifetime_s, r.rate, r.censored, r.diverged, r.seed});
    csv.row(row);
  }
}

const std::vector<std::string> kLifetimeColumns{"energy_k", "lifetime_s", "rate_hz", "censored", "diverged", "seed"};

Json run_lifetime_scan(const RunConfig& cfg, const LifetimeSettings& l, OutputDir& out, std::size_t jobs) {
  const LifetimeScanConfig lc = lifetime_config(cfg, l, jobs);
  const std::vector<LifetimeRecord> records = lifetime_scan(l.energies_k, lc);
  CsvWriter csv(kLifetimeColumns);
  lifetime_rows(csv, records, std::nullopt);
  out.write("lifetimes.csv", csv.str());

  Json j = Json::object();
  j["direction"] = std::string(direction_name(l.direction));
  j["spectator_temp_k"] = l.spectator_temp_k;
  j["t_end_s"] = lc.t_end;
  j["points"] = records.size();
  j["reordered"] = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.censored && !r.diverged; });
  j["censored"] = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.censored; });
  j["diverged"] = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.diverged; });
  out.write_json("scan.json", j);
  return j;
}

Json run_threshold(const RunConfig& cfg, const ThresholdSettings& th, OutputDir& out, std::size_t jobs) {
  std::vector<std::string> columns{"frequency_scale"};
  columns.insert(columns.end(), kLifetimeColumns.begin(), kLifetimeColumns.end());
  CsvWriter lifetimes(columns);
  CsvWriter curve({"frequency_scale", "temp_k", "mean_rate_hz"});
  Json scales = Json::array();
  std::vector<double> omegas, thresholds;

  const DerivedTrapParams base = derive_trap_params(cfg.trap.trap);
  for (double s : th.frequency_scales) {
    const double energy_scale = std::pow(s, 2.0 / 3.0);
    RunConfig scaled = cfg;
    const double omega_rf = cfg.trap.trap.omega_rf * s;
    scaled.trap.trap = trap_from_frequencies(omega_rf, base.omega_r * s, base.omega_z * s, cfg.trap.geometry);
    scaled.integrator.dt_s = cfg.integrator.dt_s / s;
    LifetimeScanConfig lc = lifetime_config(scaled, th.scan, jobs);
    lc.target_rate = th.target_rate_hz;
    std::vector<double> energies, temps;
    for (double e : th.scan.energies_k) energies.push_back(e * energy_scale);
    for (double t : th.curve_temps_k) temps.push_back(t * energy_scale);
    spdlog::info("threshold: frequency scale {}", format_double(s));
    const ThresholdScanResult r = threshold_scan(energies, lc, temps, th.target_rate_hz);

    lifetime_rows(lifetimes, r.records, s);
    for (const MeanRatePoint& p : r.mean_rate_curve) curve.row({s, p.temperature_k, p.rate});

    const double omega_z = base.omega_z * s;
    Json js = Json::object();
    js["frequency_scale"] = s;
    js["axial_freq_hz"] = hz(omega_z);
    js["rf_freq_hz"] = hz(omega_rf);
    js["dt_s"] = lc.dt;
    js["fit"] = r.fit ? fit_json(*r.fit) : Json(nullptr);
    js["threshold_k"] = r.threshold_k ? Json(*r.threshold_k) : Json(nullptr);
    js["coulomb_barrier_k"] = kelvin_label(coulomb_barrier_energy(omega_z));
    js["warnings"] = strings_json(r.warnings);
    scales.push_back(js);
    if (r.threshold_k) {
      omegas.push_back(omega_z);
      thresholds.push_back(*r.threshold_k);
    }
  }
  out.write("lifetimes.csv", lifetimes.str());
  out.write("mean_rate.csv", curve.str());

  Json j = Json::object();
  j["direction"] = std::string(direction_name(th.scan.direction));
  j["target_rate_hz"] = th.target_rate_hz;
  j["scales"] = scales;
  if (omegas.size() >= 2) {
    const FrequencyScalingFit f = frequency_scaling_fit(omegas, thresholds);
    j["two_thirds_fit"] = Json{{"coefficient", f.coefficient}, {"offset_k", f.offset}};
  }
  if (omegas.size() >= 3) {
    const PowerLawFit f = free_exponent_fit(omegas, thresholds);
    j["free_exponent_fit"] = Json{{"coefficient", f.coefficient}, {"exponent", f.exponent}};
  }
  out.write_json("thresholds.json", j);
  return j;
}

Json run_cooling(const CoolingSettings& c, OutputDir& out, std::size_t jobs, bool& diverged) {
  const auto runs = resistive_ensemble(c.config, c.runs, jobs);
  diverged = any_diverged(runs);
  out.write("curve.csv", curve_csv(runs));
  CsvWriter csv({"run", "seed", "status", "dt_s", "damping_time_s", "fitted_decay_time_s", "equilibrium_temp_k"});
  std::vector<double> temps, decays;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    csv.row({static_cast<std::uint64_t>(i), r.seed, std::string(status_name(r.status)), r.dt, r.damping_time_s,
             r.fitted_decay_time_s, r.equilibrium.temperature_k});
    temps.push_back(r.equilibrium.temperature_k);
    decays.push_back(r.fitted_decay_time_s);
  }
  out.write("runs.csv", csv.str());
  Json j = Json::object();
  j["axis"] = std::string(1, "xyz"[c.config.axis]);
  j["runs"] = runs.size();
  j["damping_time_s"] = runs.front().damping_time_s;
  j["fitted_decay_time_s"] = stats_json(decays);
  j["equilibrium_temp_k"] = stats_json(temps);
  j["window_s"] = Json::array({runs.front().equilibrium.window_start_s, runs.front().equilibrium.window_end_s});
  out.write_json("cooling.json", j);
  return j;
}

Json run_parametric(const ParametricSettings& p, OutputDir& out, std::size_t jobs, bool& diverged) {
  const auto runs = parametric_ensemble(p.config, p.runs, jobs);
  diverged = any_diverged(runs);
  out.write("curve.csv", curve_csv(runs));
  CsvWriter csv({"run", "seed", "status", "dt_s", "radial_temp_k", "axial_temp_k", "temp_ratio"});
  std::vector<double> radial, axial, ratio;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const double q = r.radial.temperature_k / r.axial.temperature_k;
    csv.row({static_cast<std::uint64_t>(i), r.seed, std::string(status_name(r.status)), r.dt, r.radial.temperature_k,
             r.axial.temperature_k, q});
    radial.push_back(r.radial.temperature_k);
    axial.push_back(r.axial.temperature_k);
    ratio.push_back(q);
  }
  out.write("runs.csv", csv.str());
  const auto& f = runs.front();
  Json j = Json::object();
  j["runs"] = runs.size();
  j["radial_freq_hz"] = hz(f.omega_radial);
  j["axial_freq_hz"] = hz(f.omega_axial);
  j["drive_freq_hz"] = hz(f.omega_p);
  j["coupling_hz"] = hz(f.coupling);
  j["frequency_ratio"] = f.omega_radial / f.omega_axial;
  j["radial_temp_k"] = stats_json(radial);
  j["axial_temp_k"] = stats_json(axial);
  j["temp_ratio"] = stats_json(ratio);
  j["warnings"] = strings_json(f.warnings);
  out.write_json("parametric.json", j);
  return j;
}

Json run_stretch(const StretchSettings& p, OutputDir& out, std::size_t jobs, bool& diverged) {
  const auto runs = stretch_ensemble(p.config, p.runs, jobs);
  diverged = any_diverged(runs);
  out.write("curve.csv", curve_csv(runs));
  CsvWriter csv({"run", "seed", "status", "dt_s", "com_temp_k", "stretch_temp_k"});
  std::vector<double> com, stretch;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    csv.row({static_cast<std::uint64_t>(i), r.seed, std::string(status_name(r.status)), r.dt, r.com.temperature_k,
             r.stretch.temperature_k});
    com.push_back(r.com.temperature_k);
    stretch.push_back(r.stretch.temperature_k);
  }
  out.write("runs.csv", csv.str());
  const auto& f = runs.front();
  Json j = Json::object();
  j["runs"] = runs.size();
  j["com_freq_hz"] = hz(f.omega_com);
  j["stretch_freq_hz"] = hz(f.omega_stretch);
  j["drive_freq_hz"] = hz(f.omega_p);
  j["coupling_hz"] = hz(f.coupling);
  j["stretch_floor_k"] = f.stretch_floor_k;
  j["com_temp_k"] = stats_json(com);
  j["stretch_temp_k"] = stats_json(stretch);
  j["warnings"] = strings_json(f.warnings);
  out.write_json("stretch_cooling.json", j);
  return j;
}

Json run_split_experiment(const RunConfig& cfg, const SplitSettings& sp, OutputDir& out, std::size_t jobs,
                          bool& diverged) {
  const double omega_z = derive_trap_params(cfg.trap.trap).omega_z;
  SplitSchedule schedule = SplitSchedule::build(omega_z, sp.d_final_m, sp.tau_s, sp.beta_cp_vpm4);
  if (sp.merge) schedule = schedule.reversed();

  std::ostringstream sched;
  write_split_schedule_csv(sched, schedule, sp.schedule_points);
  out.write("schedule.csv", sched.str());

  SplitRunConfig rc;
  rc.trap = cfg.trap.trap;
  rc.method = cfg.integrator.method;
  rc.dt = cfg.integrator.dt_s;
  rc.trajectory_points = sp.trajectory_points;
  const SplitPhaseAverage avg = run_split_phase_average(schedule, sp.modes, sp.phases, rc, jobs);
  diverged = any_diverged(avg.runs);

  CsvWriter csv({"phase_index", "initial_phase_rad", "status", "dn_com", "dn_stretch", "max_com_deviation_m",
                 "max_stretch_deviation_m"});
  for (std::size_t i = 0; i < avg.runs.size(); ++i) {
    const SplitResult& r = avg.runs[i];
    csv.row({static_cast<std::uint64_t>(i), kTwoPi * static_cast<double>(i) / static_cast<double>(sp.phases),
             std::string(status_name(r.status)), r.dn_com, r.dn_stretch, r.max_com_deviation,
             r.max_stretch_deviation});
  }
  out.write("runs.csv", csv.str());

  const SplitResult& first = avg.runs.front();
  if (sp.trajectory_points > 0) {
    CsvWriter traj({"t_s", "z1_m", "z2_m", "vz1_mps", "vz2_mps"});
    for (const SystemState& s : first.trajectory) traj.row({s.t, s.pos[0].z(), s.pos[1].z(), s.vel[0].z(), s.vel[1].z()});
    out.write("trajectory.csv", traj.str());
  }

  Json j = Json::object();
  j["merge"] = sp.merge;
  j["tau_s"] = schedule.duration();
  j["initial_separation_m"] = schedule.initial_separation();
  j["final_separation_m"] = schedule.final_separation();
  j["critical_time_s"] = schedule.critical_time();
  j["critical_separation_m"] = schedule.critical_separation();
  j["cp_freq_hz"] = hz(omega_cp(schedule.beta_cp()));
  j["initial_axial_freq_hz"] = hz(first.omega_initial);
  j["final_axial_freq_hz"] = hz(first.omega_final);
  j["phases"] = sp.phases;
  j["dn_com"] = avg.dn_com;
  j["dn_stretch"] = avg.dn_stretch;
  j["dt_s"] = first.dt;
  out.write_json("split.json", j);
  return j;
}

Json run_shuttle_experiment(const RunConfig& cfg, const ShuttleSettings& sh, OutputDir& out, std::size_t jobs,
                            bool& diverged) {
  const double omega_z = derive_trap_params(cfg.trap.trap).omega_z;
  ShuttleRunConfig rc;
  rc.method = cfg.integrator.method;
  rc.dt = cfg.integrator.dt_s;
  std::vector<ShuttleResult> results(sh.durations_s.size());
  parallel_for(results.size(), jobs, [&](std::size_t i) {
    results[i] = run_shuttle(ShuttleSchedule{sh.durations_s[i], sh.distance_m}, omega_z, rc);
  });
  diverged = any_diverged(results);

  CsvWriter csv({"tau_s", "distance_m", "status", "dn", "final_energy_j"});
  Json runs = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const ShuttleResult& r = results[i];
    csv.row({r.tau_t, r.displacement, std::string(status_name(r.status)), r.dn, r.final_energy});
    std::ostringstream sched;
    write_shuttle_schedule_csv(sched, ShuttleSchedule{sh.durations_s[i], sh.distance_m}, sh.schedule_points);
    out.write("schedule_" + std::to_string(i) + ".csv", sched.str());
    runs.push_back(Json{{"tau_s", r.tau_t}, {"dn", r.dn}, {"schedule", "schedule_" + std::to_string(i) + ".csv"}});
  }
  out.write("shuttle.csv", csv.str());
  Json j = Json::object();
  j["axial_freq_hz"] = hz(omega_z);
  j["distance_m"] = sh.distance_m;
  j["dt_s"] = results.front().dt;
  j["runs"] = runs;
  out.write_json("shuttle.json", j);
  return j;
}

Json run_stability_map(const RunConfig& cfg, const StabilityMapSettings& m, OutputDir& out, std::size_t jobs) {
  StabilityMapConfig mc;
  mc.omega_rf = cfg.trap.trap.omega_rf;
  mc.omega_z = rad(cfg.trap.axial_freq_hz);
  mc.geometry = cfg.trap.geometry;
  mc.steps_per_period = m.steps_per_period;
  mc.threshold = m.threshold;
  mc.jobs = jobs;
  std::vector<double> omega_ce;
  for (double f : m.cyclotron_freqs_hz) omega_ce.push_back(rad(f));
  const StabilityGrid grid = stability_map(m.q_x, omega_ce, mc);

  CsvWriter csv({"q_x", "omega_ce_hz", "lambda", "beta_x", "stable"});
  std::size_t stable = 0;
  for (std::size_t iq = 0; iq < grid.q_x.size(); ++iq) {
    for (std::size_t ic = 0; ic < grid.omega_ce.size(); ++ic) {
      const std::size_t k = grid.index(iq, ic);
      csv.row({grid.q_x[iq], m.cyclotron_freqs_hz[ic], grid.lambda[k], grid.beta_x[k], grid.stable(iq, ic)});
      stable += grid.stable(iq, ic) ? 1 : 0;
    }
  }
  out.write("stability_map.csv", csv.str());

  Json j = Json::object();
  j["threshold"] = m.threshold;
  j["steps_per_period"] = m.steps_per_period;
  j["cells"] = grid.lambda.size();
  j["stable_cells"] = stable;
  if (m.boundaries) {
    const auto points = stability_boundaries(grid, mc, rad(m.boundary_tolerance_hz));
    CsvWriter b({"q_x", "omega_ce_hz", "beta_x"});
    for (const BoundaryPoint& p : points) b.row({p.q_x, hz(p.omega_ce), p.beta_x});
    out.write("boundaries.csv", b.str());
    j["boundary_points"] = points.size();
  }
  out.write_json("stability_map.json", j);
  return j;
}

Json run_linecut(const RunConfig& cfg, const LinecutSettings& l, OutputDir& out, std::size_t jobs) {
  LineCutConfig lc;
  lc.omega_rf = cfg.trap.trap.omega_rf;
  lc.omega_z = rad(cfg.trap.axial_freq_hz);
  lc.q_x = std::abs(derive_trap_params(cfg.trap.trap).q_x);
  lc.geometry = cfg.trap.geometry;
  lc.t_end = cfg.integrator.t_end_s;
  lc.dt = cfg.integrator.dt_s;
  lc.energy_cap_ev = l.energy_cap_ev;
  lc.initial_temperature_k = l.temp_k;
  lc.seed = cfg.seed;
  lc.steps_per_period = l.steps_per_period;
  lc.threshold = l.threshold;
  lc.jobs = jobs;
  std::vector<double> omega_ce;
  for (double f : l.cyclotron_freqs_hz) omega_ce.push_back(rad(f));
  const std::vector<LineCutPoint> points = max_energy_linecut(omega_ce, lc);

  CsvWriter csv({"omega_ce_hz", "max_energy_ev", "capped", "lambda", "lambda_stable"});
  std::size_t agree = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LineCutPoint& p = points[i];
    csv.row({l.cyclotron_freqs_hz[i], p.max_energy_ev, p.capped, p.lambda, p.lambda_stable});
    agree += (p.capped != p.lambda_stable) ? 1 : 0;
  }
  out.write("linecut.csv", csv.str());
  Json j = Json::object();
  j["q_x"] = lc.q_x;
  j["t_end_s"] = lc.t_end;
  j["energy_cap_ev"] = lc.energy_cap_ev;
  j["points"] = points.size();
  j["agreeing_points"] = agree;
  out.write_json("linecut.json", j);
  return j;
}

Json error_json(const std::string& experiment, const std::string& kind, const std::string& message, int line = 0,
                int column = 0) {
  Json j = Json::object();
  j["status"] = "error";
  j["experiment"] = experiment;
  j["kind"] = kind;
  j["message"] = message;
  if (line > 0) {
    j["line"] = line;
    j["column"] = column;
  }
  return j;
}

}  // namespace

StepEstimate estimated_steps(const RunConfig& cfg) {
  const double dt = cfg.integrator.dt_s;
  const double t_end = cfg.integrator.t_end_s;
  auto repeated = [](double runs, double each) { return StepEstimate{runs * each, each}; };
  return std::visit(
      [&](const auto& s) -> StepEstimate {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimulateSettings>) {
          return repeated(1.0, t_end / dt);
        } else if constexpr (std::is_same_v<T, LifetimeSettings>) {
          return repeated(static_cast<double>(s.energies_k.size()), t_end / dt);
        } else if constexpr (std::is_same_v<T, ThresholdSettings>) {
          const double top = *std::max_element(s.frequency_scales.begin(), s.frequency_scales.end());
          const double sum = std::accumulate(s.frequency_scales.begin(), s.frequency_scales.end(), 0.0);
          return {static_cast<double>(s.scan.energies_k.size()) * sum * t_end / dt, top * t_end / dt};
        } else if constexpr (std::is_same_v<T, CoolingSettings>) {
          const double tau = 1.0 / damping_rate(s.config.circuit, s.config.trap.d_eff);
          return repeated(static_cast<double>(s.runs), s.config.duration_tau * tau / dt);
        } else if constexpr (std::is_same_v<T, ParametricSettings> || std::is_same_v<T, StretchSettings>) {
          return repeated(static_cast<double>(s.runs), s.config.duration / dt);
        } else if constexpr (std::is_same_v<T, SplitSettings>) {
          return repeated(static_cast<double>(s.phases), s.tau_s / dt);
        } else if constexpr (std::is_same_v<T, ShuttleSettings>) {
          const double top = *std::max_element(s.durations_s.begin(), s.durations_s.end());
          return {std::accumulate(s.durations_s.begin(), s.durations_s.end(), 0.0) / dt, top / dt};
        } else if constexpr (std::is_same_v<T, StabilityMapSettings>) {
          return repeated(static_cast<double>(s.q_x.size() * s.cyclotron_freqs_hz.size()),
                          static_cast<double>(s.steps_per_period));
        } else {
          return repeated(static_cast<double>(s.cyclotron_freqs_hz.size()), t_end / dt);
        }
      },
      cfg.settings);
}

Json run_configured(const RunConfig& cfg, OutputDir& out, const RunOptions& options) {
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  out.write("config.resolved.yaml", resolved_yaml(cfg));
  Heartbeat heartbeat(cfg.experiment, options.heartbeat_s);
  bool diverged = false;
  Json result = std::visit(
      [&](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimulateSettings>) {
          Json j = run_simulate(cfg, s, out);
          diverged = j["run_status"] == "diverged";
          return j;
        } else if constexpr (std::is_same_v<T, LifetimeSettings>) {
          return run_lifetime_scan(cfg, s, out, jobs);
        } else if constexpr (std::is_same_v<T, ThresholdSettings>) {
          return run_threshold(cfg, s, out, jobs);
        } else if constexpr (std::is_same_v<T, CoolingSettings>) {
          return run_cooling(s, out, jobs, diverged);
        } else if constexpr (std::is_same_v<T, ParametricSettings>) {
          return run_parametric(s, out, jobs, diverged);
        } else if constexpr (std::is_same_v<T, StretchSettings>) {
          return run_stretch(s, out, jobs, diverged);
        } else if constexpr (std::is_same_v<T, SplitSettings>) {
          return run_split_experiment(cfg, s, out, jobs, diverged);
        } else if constexpr (std::is_same_v<T, ShuttleSettings>) {
          return run_shuttle_experiment(cfg, s, out, jobs, diverged);
        } else if constexpr (std::is_same_v<T, StabilityMapSettings>) {
          return run_stability_map(cfg, s, out, jobs);
        } else {
          return run_linecut(cfg, s, out, jobs);
        }
      },
      cfg.settings);
  (void)result;

  Json summary = Json::object();
  summary["status"] = diverged ? "diverged" : "ok";
  summary["experiment"] = cfg.experiment;
  summary["out"] = out.path().string();
  Json files = Json::array();
  for (const auto& [name, sha] : out.written()) files.push_back(name);
  summary["outputs"] = files;
  return summary;
}

int run_command(const RunOptions& options, std::ostream& stdout_stream) {
  const auto start = std::chrono::steady_clock::now();
  auto fail = [&](const Json& err, int code) {
    try {
      OutputDir dir(options.out);
      dir.write_json("error.json", err);
    } catch (const std::exception&) {
    }
    stdout_stream << err.dump() << '\n';
    spdlog::error("{}", err["message"].get<std::string>());
    return code;
  };

  try {
    const RunConfig cfg = load_config(options.config, options.experiment);
    const StepEstimate steps = estimated_steps(cfg);
    if (steps.longest > kLongRunSteps && !options.long_runs) {
      throw ConfigError("a single integration needs about " + format_double(std::round(steps.longest / 1e6) * 1e6) +
                        " steps (limit " + format_double(kLongRunSteps) + "); pass --long-runs to allow it");
    }
    spdlog::info("{}: about {:.3g} integration steps in total on {} thread(s)", cfg.experiment, steps.total,
                 options.jobs);

    OutputDir out(options.out);
    std::filesystem::remove(options.out / "error.json");
    Json summary = run_configured(cfg, out, options);

    Json manifest = Json::object();
    manifest["tool"] = "paultrap";
    manifest["version"] = PAULTRAP_VERSION;
    manifest["experiment"] = cfg.experiment;
    manifest["status"] = summary["status"];
    manifest["inputs"] = Json::array({Json{{"path", options.config.string()}, {"sha256", cfg.source_sha256}}});
    manifest["resolved_config_sha256"] = out.written().front().second;
    manifest["seeds"] = Json{{"base", cfg.seed}, {"scheme", "run i uses base + i"}};
    manifest["jobs"] = options.jobs;
    Json outputs = Json::array();
    for (const auto& [name, sha] : out.written()) outputs.push_back(Json{{"file", name}, {"sha256", sha}});
    manifest["outputs"] = outputs;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.write_json("manifest.json", manifest);

    stdout_stream << summary.dump() << '\n';
    return summary["status"] == "ok" ? kExitOk : kExitDiverged;
  } catch (const ConfigParseError& e) {
    return fail(error_json(options.experiment, "config", e.what(), e.line(), e.column()), kExitConfig);
  } catch (const ConfigError& e) {
    return fail(error_json(options.experiment, "config", e.what()), kExitConfig);
  } catch (const DomainError& e) {
    return fail(error_json(options.experiment, "domain", e.what()), kExitNumerical);
  } catch (const NumericalError& e) {
    return fail(error_json(options.experiment, "numerical", e.what()), kExitNumerical);
  } catch (const std::exception& e) {
    return fail(error_json(options.experiment, "internal", e.what()), kExitInternal);
  }
}

}  // namespace paultrap::cli
