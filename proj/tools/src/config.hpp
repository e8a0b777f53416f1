#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "io.hpp"
#include "paultrap/cooling.hpp"
#include "paultrap/errors.hpp"
#include "paultrap/forces.hpp"
#include "paultrap/integrators.hpp"
#include "paultrap/modes.hpp"
#include "paultrap/stability.hpp"
#include "paultrap/transport.hpp"
#include "paultrap/trap.hpp"
#include "paultrap/wigner.hpp"

namespace paultrap::cli {

inline constexpr std::string_view kExperiments[] = {
    "simulate", "lifetime-scan", "threshold",     "cooling", "parametric",
    "stretch-cooling", "split",  "shuttle",       "stability-map", "linecut"};

bool is_experiment(std::string_view name);

/// Configuration error with the file position it refers to (1-based; 0 when unknown).
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(const std::string& what, int line = 0, int column = 0)
      : ConfigError(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// One mapping of the config file. Every accessor records the key it asked for
/// and echoes the resolved value; finish() rejects keys nobody asked for.
class Section {
 public:
  enum class Bound { any, positive, non_negative };

  Section(YAML::Node node, std::string path, std::string file, Json* echo);

  double number(const std::string& key, double fallback, Bound bound = Bound::any);
  std::optional<double> optional_number(const std::string& key, Bound bound = Bound::any);
  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min_value);
  bool flag(const std::string& key, bool fallback);
  std::string choice(const std::string& key, const std::string& fallback, std::initializer_list<std::string_view> allowed);
  /// A scalar, a sequence, or a {from, to, points} mapping (inclusive, evenly spaced).
  std::vector<double> values(const std::string& key, const std::vector<double>& fallback, Bound bound = Bound::any);
  Section child(const std::string& key);
  bool has(const std::string& key) const;
  /// Marks a key as known without reading it.
  void accept(const std::string& key) { asked_.insert(key); }

  void finish() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  YAML::Node get(const std::string& key);
  double parse_number(const YAML::Node& n, const std::string& key, Bound bound) const;
  std::string where(const YAML::Mark& mark) const;
  std::string qualified(const std::string& key) const;

  YAML::Node node_;
  std::string path_;
  std::string file_;
  Json* echo_;
  std::set<std::string> asked_;
};

// ---------------------------------------------------------------------------
// Typed settings
// ---------------------------------------------------------------------------

struct TrapSettings {
  double rf_freq_hz = 10.6e9;
  std::optional<double> radial_freq_hz;  // exclusive with q_x
  std::optional<double> q_x;
  double axial_freq_hz = 300e6;
  TrapGeometry geometry;
  TrapConfig trap;
};

struct IntegratorSettings {
  Method method = Method::rk3;
  double dt_s = 1e-13;
  double t_end_s = 0.0;
  std::size_t record_stride = 1;
};

struct SimulateSettings {
  std::size_t particles = 2;
  ModeTemperatureSpec modes;
  bool coulomb = true;
  std::optional<MagneticField> field;
  bool damping = false;
  bool noise = false;
  bool energy = true;
  bool spectrum = false;
  bool stop_on_reorder = false;
};

struct LifetimeSettings {
  ScanDirection direction = ScanDirection::axial;
  double spectator_temp_k = 0.4;
  std::vector<double> energies_k;
  PhaseConvention phase = PhaseConvention::fixed_sign;
};

struct ThresholdSettings {
  LifetimeSettings scan;
  std::vector<double> curve_temps_k;
  double target_rate_hz = 1e3;
  std::vector<double> frequency_scales{1.0};
};

struct CoolingSettings {
  ResistiveCoolingConfig config;
  std::size_t runs = 1;
};

struct ParametricSettings {
  ParametricCoolingConfig config;
  std::size_t runs = 1;
};

struct StretchSettings {
  StretchCoolingConfig config;
  std::size_t runs = 1;
};

struct SplitSettings {
  double d_final_m = 200e-6;
  double tau_s = 1e-6;
  double beta_cp_vpm4 = 3e15;
  bool merge = false;
  ModeTemperatureSpec modes;
  std::size_t phases = 1;
  std::size_t schedule_points = 1001;
  std::size_t trajectory_points = 0;
};

struct ShuttleSettings {
  double distance_m = 100e-6;
  std::vector<double> durations_s{1e-6, 2e-6, 5e-6, 10e-6};
  std::size_t schedule_points = 1001;
};

struct StabilityMapSettings {
  std::vector<double> q_x;
  std::vector<double> cyclotron_freqs_hz;
  double threshold = kDefaultStabilityThreshold;
  std::size_t steps_per_period = 400;
  bool boundaries = true;
  double boundary_tolerance_hz = 1e3;
};

struct LinecutSettings {
  std::vector<double> cyclotron_freqs_hz;
  double energy_cap_ev = 1.0;
  double temp_k = 0.4;
  std::size_t steps_per_period = 400;
  double threshold = kDefaultStabilityThreshold;
};

using ExperimentSettings =
    std::variant<SimulateSettings, LifetimeSettings, ThresholdSettings, CoolingSettings, ParametricSettings,
                 StretchSettings, SplitSettings, ShuttleSettings, StabilityMapSettings, LinecutSettings>;

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  TrapSettings trap;
  TankCircuit circuit;
  IntegratorSettings integrator;
  ExperimentSettings settings;
  /// Resolved configuration: every key with its effective value, then derived quantities.
  Json resolved;
  std::string source_sha256;
};

/// Parses and validates a config file for the given experiment.
RunConfig load_config(const std::filesystem::path& path, std::string_view experiment);
RunConfig parse_config(const std::string& text, std::string_view experiment, const std::string& file_label);

/// YAML text of cfg.resolved; loading it again reproduces the same RunConfig.
std::string resolved_yaml(const RunConfig& cfg);

}  // namespace paultrap::cli
