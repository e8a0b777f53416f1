#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "paultrap/constants.hpp"

namespace paultrap::cli {

namespace {

constexpr std::string_view kUnitSuffixes[] = {"_hz", "_s",  "_k", "_m",   "_tesla", "_ev", "_v",
                                              "_h",  "_f",  "_rad", "_vpm4", "_j", "_mps"};

constexpr std::string_view kTopLevelKeys[] = {"experiment", "seed", "trap", "forces", "circuit", "integrator", "derived"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view unit_suffix_of(std::string_view key) {
  for (std::string_view u : kUnitSuffixes) {
    if (ends_with(key, u) && key.size() > u.size()) return u;
  }
  return {};
}

bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

std::string join(const std::set<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

}  // namespace

bool is_experiment(std::string_view name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

// ---------------------------------------------------------------------------
// Section
// ---------------------------------------------------------------------------

Section::Section(YAML::Node node, std::string path, std::string file, Json* echo)
    : node_(std::move(node)), path_(std::move(path)), file_(std::move(file)), echo_(echo) {
  if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) {
    throw ConfigParseError(where(node_.Mark()) + (path_.empty() ? "config" : path_) + ": expected a mapping",
                           node_.Mark().line + 1, node_.Mark().column + 1);
  }
  if (echo_ && !echo_->is_object()) *echo_ = Json::object();
}

std::string Section::where(const YAML::Mark& mark) const {
  if (mark.is_null()) return file_ + ": ";
  return file_ + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1) + ": ";
}

std::string Section::qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void Section::fail(const std::string& key, const std::string& message) const {
  YAML::Mark mark = YAML::Mark::null_mark();
  if (node_.IsMap()) {
    const YAML::Node& cn = node_;
    const YAML::Node v = cn[key];
    if (v.IsDefined()) mark = v.Mark();
  }
  const int line = mark.is_null() ? 0 : mark.line + 1;
  const int col = mark.is_null() ? 0 : mark.column + 1;
  throw ConfigParseError(where(mark) + qualified(key) + ": " + message, line, col);
}

bool Section::has(const std::string& key) const {
  if (!node_.IsMap()) return false;
  const YAML::Node& cn = node_;
  return cn[key].IsDefined() && !cn[key].IsNull();
}

YAML::Node Section::get(const std::string& key) {
  asked_.insert(key);
  if (!has(key)) return YAML::Node();
  const YAML::Node& cn = node_;
  return cn[key];
}

double Section::parse_number(const YAML::Node& n, const std::string& key, Bound bound) const {
  if (!n.IsScalar()) fail(key, "expected a number");
  const std::string& text = n.Scalar();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    fail(key, "'" + text + "' is not a finite number");
  }
  if (bound == Bound::positive && !(v > 0.0)) fail(key, "must be positive");
  if (bound == Bound::non_negative && !(v >= 0.0)) fail(key, "must be non-negative");
  return v;
}

double Section::number(const std::string& key, double fallback, Bound bound) {
  const YAML::Node n = get(key);
  const double v = present(n) ? parse_number(n, key, bound) : fallback;
  if (echo_) (*echo_)[key] = v;
  return v;
}

std::optional<double> Section::optional_number(const std::string& key, Bound bound) {
  const YAML::Node n = get(key);
  if (!present(n)) return std::nullopt;
  const double v = parse_number(n, key, bound);
  if (echo_) (*echo_)[key] = v;
  return v;
}

std::int64_t Section::integer(const std::string& key, std::int64_t fallback, std::int64_t min_value) {
  const YAML::Node n = get(key);
  std::int64_t v = fallback;
  if (present(n)) {
    if (!n.IsScalar()) fail(key, "expected an integer");
    const std::string& text = n.Scalar();
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) fail(key, "'" + text + "' is not an integer");
  }
  if (v < min_value) fail(key, "must be at least " + std::to_string(min_value));
  if (echo_) (*echo_)[key] = v;
  return v;
}

bool Section::flag(const std::string& key, bool fallback) {
  const YAML::Node n = get(key);
  bool v = fallback;
  if (present(n)) {
    if (!n.IsScalar()) fail(key, "expected true or false");
    try {
      v = n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(key, "'" + n.Scalar() + "' is not a boolean");
    }
  }
  if (echo_) (*echo_)[key] = v;
  return v;
}

std::string Section::choice(const std::string& key, const std::string& fallback,
                            std::initializer_list<std::string_view> allowed) {
  const YAML::Node n = get(key);
  std::string v = fallback;
  if (present(n)) {
    if (!n.IsScalar()) fail(key, "expected one of the listed names");
    v = n.Scalar();
  }
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string names;
    for (std::string_view a : allowed) names += (names.empty() ? "" : ", ") + std::string(a);
    fail(key, "'" + v + "' is not one of: " + names);
  }
  if (echo_) (*echo_)[key] = v;
  return v;
}

std::vector<double> Section::values(const std::string& key, const std::vector<double>& fallback, Bound bound) {
  const YAML::Node n = get(key);
  std::vector<double> out;
  Json echo;
  if (!present(n)) {
    out = fallback;
    echo = Json::array();
    for (double v : out) echo.push_back(v);
  } else if (n.IsScalar()) {
    out.push_back(parse_number(n, key, bound));
    echo = out.front();
  } else if (n.IsSequence()) {
    echo = Json::array();
    for (const auto& item : n) {
      out.push_back(parse_number(item, key, bound));
      echo.push_back(out.back());
    }
  } else {
    Json range = Json::object();
    Section r(n, qualified(key), file_, &range);
    const double from = r.number("from", 0.0);
    const double to = r.number("to", 0.0);
    const std::int64_t points = r.integer("points", 2, 1);
    r.finish();
    if (!r.has("from") || !r.has("to")) fail(key, "a range needs 'from', 'to' and 'points'");
    for (std::int64_t i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      const double v = i == points - 1 ? to : from + (to - from) * f;
      if ((bound == Bound::positive && !(v > 0.0)) || (bound == Bound::non_negative && !(v >= 0.0))) {
        fail(key, bound == Bound::positive ? "values must be positive" : "values must be non-negative");
      }
      out.push_back(v);
    }
    echo = range;
  }
  if (out.empty()) fail(key, "needs at least one value");
  if (echo_) (*echo_)[key] = echo;
  return out;
}

Section Section::child(const std::string& key) {
  const YAML::Node n = get(key);
  Json* sub = nullptr;
  if (echo_) {
    (*echo_)[key] = Json::object();
    sub = &(*echo_)[key];
  }
  return Section(n, qualified(key), file_, sub);
}

void Section::finish() const {
  if (!node_.IsMap()) return;
  for (const auto& kv : node_) {
    const std::string key = kv.first.as<std::string>();
    if (asked_.count(key)) continue;
    const YAML::Mark mark = kv.first.Mark();
    std::string message;
    for (const auto& known : asked_) {
      if (known.size() > key.size() && known.compare(0, key.size(), key) == 0 &&
          unit_suffix_of(known) == std::string_view(known).substr(key.size())) {
        message = "missing unit suffix; write '" + known + "'";
        break;
      }
    }
    if (message.empty()) {
      const std::string_view suffix = unit_suffix_of(key);
      if (!suffix.empty()) {
        const std::string stem = key.substr(0, key.size() - suffix.size());
        for (const auto& known : asked_) {
          const std::string_view ks = unit_suffix_of(known);
          if (!ks.empty() && known.substr(0, known.size() - ks.size()) == stem) {
            message = "unit suffix '" + std::string(suffix) + "' is not accepted here; write '" + known + "'";
            break;
          }
        }
      }
    }
    if (message.empty() && path_.empty() &&
        (is_experiment(key) ||
         std::find(std::begin(kTopLevelKeys), std::end(kTopLevelKeys), key) != std::end(kTopLevelKeys))) {
      message = "section is not used by this experiment";
    }
    if (message.empty()) message = "unknown key; known keys here: " + join(asked_);
    throw ConfigParseError(where(mark) + qualified(key) + ": " + message, mark.line + 1, mark.column + 1);
  }
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

namespace {

using Bound = Section::Bound;

double hz_to_rad(double hz) { return kTwoPi * hz; }

std::size_t to_size(std::int64_t v) { return static_cast<std::size_t>(v); }

TrapSettings parse_trap(Section& root, bool needs_radial) {
  Section s = root.child("trap");
  TrapSettings t;
  t.rf_freq_hz = s.number("rf_freq_hz", t.rf_freq_hz, Bound::positive);
  if (needs_radial) {
    t.radial_freq_hz = s.optional_number("radial_freq_hz", Bound::positive);
    t.q_x = s.optional_number("q_x", Bound::positive);
    if (t.radial_freq_hz && t.q_x) s.fail("q_x", "give either radial_freq_hz or q_x, not both");
    if (!t.radial_freq_hz && !t.q_x) t.radial_freq_hz = 2e9;
  }
  t.axial_freq_hz = s.number("axial_freq_hz", t.axial_freq_hz, Bound::positive);
  t.geometry.r0 = s.number("r0_m", t.geometry.r0, Bound::positive);
  t.geometry.z0 = s.number("z0_m", t.geometry.z0, Bound::positive);
  t.geometry.d_eff = s.number("d_eff_m", t.geometry.d_eff, Bound::positive);
  t.geometry.kappa = s.number("kappa", t.geometry.kappa, Bound::positive);
  t.geometry.rf_phase = s.number("rf_phase_rad", t.geometry.rf_phase);
  s.finish();

  try {
    if (t.q_x) {
      t.trap = trap_from_qx(hz_to_rad(t.rf_freq_hz), *t.q_x, hz_to_rad(t.axial_freq_hz), t.geometry);
    } else {
      const double radial = t.radial_freq_hz.value_or(2e9);
      t.trap = trap_from_frequencies(hz_to_rad(t.rf_freq_hz), hz_to_rad(radial), hz_to_rad(t.axial_freq_hz),
                                     t.geometry);
    }
  } catch (const std::exception& e) {
    throw ConfigParseError(std::string("trap: ") + e.what());
  }
  return t;
}

void echo_trap_default(Json& resolved, const TrapSettings& t) {
  Json& trap = resolved["trap"];
  if (t.radial_freq_hz && !trap.contains("radial_freq_hz") && !trap.contains("q_x")) {
    Json ordered = Json::object();
    for (auto it = trap.begin(); it != trap.end(); ++it) {
      ordered[it.key()] = it.value();
      if (it.key() == "rf_freq_hz") ordered["radial_freq_hz"] = *t.radial_freq_hz;
    }
    trap = ordered;
  }
}

TankCircuit parse_circuit(Section& root) {
  Section s = root.child("circuit");
  TankCircuit c;
  c.inductance = s.number("inductance_h", c.inductance, Bound::positive);
  c.capacitance = s.number("capacitance_f", c.capacitance, Bound::positive);
  c.quality = s.number("quality", c.quality, Bound::positive);
  c.temperature_k = s.number("temp_k", c.temperature_k, Bound::non_negative);
  s.finish();
  return c;
}

struct IntegratorKeys {
  bool method = true;
  bool t_end = true;
  bool stride = false;
};

IntegratorSettings parse_integrator(Section& root, IntegratorSettings d, IntegratorKeys keys) {
  Section s = root.child("integrator");
  if (keys.method) {
    const std::string m = s.choice("method", std::string(method_name(d.method)), {"rk3", "velocity_verlet"});
    d.method = parse_method(m);
  }
  d.dt_s = s.number("dt_s", d.dt_s, Bound::positive);
  if (keys.t_end) d.t_end_s = s.number("t_end_s", d.t_end_s, Bound::non_negative);
  if (keys.stride) d.record_stride = to_size(s.integer("record_stride", static_cast<std::int64_t>(d.record_stride), 1));
  s.finish();
  return d;
}

ModeTemperatureSpec parse_modes(Section& parent, std::uint64_t seed, double fallback) {
  Section s = parent.child("modes");
  ModeTemperatureSpec spec;
  for (ModeId id : kAllModes) {
    spec[id] = s.number(std::string(mode_name(id)) + "_temp_k", fallback, Bound::non_negative);
  }
  spec.phase = s.flag("random_phase", false) ? PhaseConvention::random_sign : PhaseConvention::fixed_sign;
  spec.rng_seed = seed;
  s.finish();
  return spec;
}

std::optional<MagneticField> parse_field(Section& s) {
  const auto b = s.optional_number("b_tesla");
  const auto f = s.optional_number("cyclotron_freq_hz", Bound::non_negative);
  if (b && f) s.fail("cyclotron_freq_hz", "give either b_tesla or cyclotron_freq_hz, not both");
  if (b) return MagneticField::along_y(*b);
  if (f) return MagneticField::from_cyclotron(hz_to_rad(*f));
  return std::nullopt;
}

Axis parse_axis(Section& s, const std::string& key, const std::string& fallback, bool allow_z) {
  const std::string a = allow_z ? s.choice(key, fallback, {"x", "y", "z"}) : s.choice(key, fallback, {"x", "y"});
  return a == "x" ? kX : (a == "y" ? kY : kZ);
}

LifetimeSettings parse_lifetime(Section& s, const std::vector<double>& default_energies) {
  LifetimeSettings l;
  l.direction = parse_direction(s.choice("direction", "axial", {"axial", "radial"}));
  l.spectator_temp_k = s.number("spectator_temp_k", l.spectator_temp_k, Bound::non_negative);
  l.energies_k = s.values("energies_k", default_energies, Bound::non_negative);
  if (!std::is_sorted(l.energies_k.begin(), l.energies_k.end())) s.fail("energies_k", "must be ascending");
  l.phase = s.flag("random_phase", false) ? PhaseConvention::random_sign : PhaseConvention::fixed_sign;
  return l;
}

std::vector<double> range(double from, double to, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.back() = to;
  return v;
}

void add_trap_derived(Json& derived, const TrapSettings& t) {
  const DerivedTrapParams p = derive_trap_params(t.trap);
  Json trap = Json::object();
  trap["q_x"] = std::abs(p.q_x);
  trap["a_x"] = p.a_x;
  trap["a_z"] = p.a_z;
  trap["u_dc_v"] = t.trap.u_dc;
  trap["v0_v"] = t.trap.v0;
  trap["radial_freq_hz"] = p.omega_r / kTwoPi;
  trap["floquet_radial_freq_hz"] = floquet_secular_frequency(t.trap) / kTwoPi;
  trap["axial_freq_hz"] = p.omega_z / kTwoPi;
  trap["rf_period_s"] = rf_period(t.trap);
  trap["max_stable_dt_s"] = max_stable_dt(t.trap.omega_rf);
  trap["pair_spacing_m"] = equilibrium_spacing(p.omega_z);
  trap["coulomb_barrier_k"] = kelvin_label(coulomb_barrier_energy(p.omega_z));
  derived["trap"] = trap;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

RunConfig parse_config(const std::string& text, std::string_view experiment, const std::string& file_label) {
  if (!is_experiment(experiment)) {
    throw ConfigParseError("unknown experiment '" + std::string(experiment) + "'");
  }
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(file_label + ":" + std::to_string(e.mark.line + 1) + ":" +
                               std::to_string(e.mark.column + 1) + ": YAML syntax error: " + e.msg,
                           e.mark.line + 1, e.mark.column + 1);
  }
  if (!doc.IsDefined() || doc.IsNull() || (doc.IsMap() && doc.size() == 0)) {
    throw ConfigParseError(file_label + ": config is empty; required keys: experiment, seed");
  }

  RunConfig cfg;
  cfg.experiment = std::string(experiment);
  cfg.resolved = Json::object();
  Section root(doc, "", file_label, &cfg.resolved);

  std::set<std::string> missing;
  if (!root.has("experiment")) missing.insert("experiment");
  if (!root.has("seed")) missing.insert("seed");
  if (!missing.empty()) throw ConfigParseError(file_label + ": missing required keys: " + join(missing));

  const std::string named = root.choice("experiment", cfg.experiment,
                                        {"simulate", "lifetime-scan", "threshold", "cooling", "parametric",
                                         "stretch-cooling", "split", "shuttle", "stability-map", "linecut"});
  if (named != cfg.experiment) {
    root.fail("experiment", "config is for '" + named + "' but '" + cfg.experiment + "' was requested");
  }
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0));
  root.accept("derived");

  const std::string& e = cfg.experiment;
  const bool radial_trap = e != "stability-map";
  cfg.trap = parse_trap(root, radial_trap);
  echo_trap_default(cfg.resolved, cfg.trap);
  Json derived = Json::object();
  add_trap_derived(derived, cfg.trap);

  if (e == "simulate") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-13, 1e-6, 100}, {true, true, true});
    Section s = root.child("simulate");
    SimulateSettings st;
    st.particles = to_size(s.integer("particles", 2, 1));
    if (st.particles > 2) s.fail("particles", "must be 1 or 2");
    st.modes = parse_modes(s, cfg.seed, 0.0);
    st.energy = s.flag("energy", true);
    st.spectrum = s.flag("spectrum", false);
    st.stop_on_reorder = s.flag("stop_on_reorder", false);
    s.finish();
    Section f = root.child("forces");
    st.coulomb = f.flag("coulomb", true);
    st.field = parse_field(f);
    st.damping = f.flag("damping", false);
    st.noise = f.flag("noise", false);
    f.finish();
    if (st.damping || st.noise) cfg.circuit = parse_circuit(root);
    if (st.particles == 1 && st.coulomb) st.coulomb = false;
    cfg.settings = st;
  } else if (e == "lifetime-scan") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-13, 100e-6, 1}, {true, true, false});
    Section s = root.child("lifetime-scan");
    cfg.settings = parse_lifetime(s, range(1.0, 12.0, 23));
    s.finish();
  } else if (e == "threshold") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-13, 100e-6, 1}, {true, true, false});
    Section s = root.child("threshold");
    ThresholdSettings th;
    th.scan = parse_lifetime(s, range(1.0, 12.0, 23));
    th.curve_temps_k = s.values("curve_temps_k", range(0.05, 6.0, 120), Bound::positive);
    th.target_rate_hz = s.number("target_rate_hz", th.target_rate_hz, Bound::positive);
    th.frequency_scales = s.values("frequency_scales", th.frequency_scales, Bound::positive);
    s.finish();
    cfg.settings = th;
  } else if (e == "cooling") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1.9e-12, 0.0, 1}, {true, false, false});
    cfg.circuit = parse_circuit(root);
    Section s = root.child("cooling");
    CoolingSettings c;
    c.config.trap = cfg.trap.trap;
    c.config.circuit = cfg.circuit;
    c.config.method = cfg.integrator.method;
    c.config.dt = cfg.integrator.dt_s;
    c.config.seed = cfg.seed;
    c.config.axis = parse_axis(s, "axis", "z", true);
    c.config.initial_k = s.number("initial_temp_k", c.config.initial_k, Bound::non_negative);
    c.config.noise = s.flag("noise", c.config.noise);
    c.config.duration_tau = s.number("duration_tau", c.config.duration_tau, Bound::positive);
    c.config.window_tau = s.number("window_tau", c.config.window_tau, Bound::positive);
    if (c.config.window_tau > c.config.duration_tau) s.fail("window_tau", "must not exceed duration_tau");
    c.runs = to_size(s.integer("runs", 1, 1));
    c.config.curve_points = to_size(s.integer("curve_points", 2000, 1));
    s.finish();
    derived["damping_time_s"] = 1.0 / damping_rate(cfg.circuit, cfg.trap.trap.d_eff);
    cfg.settings = c;
  } else if (e == "parametric") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1.9e-12, 0.0, 1}, {false, false, false});
    cfg.circuit = parse_circuit(root);
    Section s = root.child("parametric");
    ParametricSettings p;
    p.config.trap = cfg.trap.trap;
    p.config.circuit = cfg.circuit;
    p.config.dt = cfg.integrator.dt_s;
    p.config.seed = cfg.seed;
    p.config.amplitude_scale = s.number("amplitude_scale", p.config.amplitude_scale, Bound::non_negative);
    if (auto f = s.optional_number("drive_freq_hz", Bound::positive)) p.config.omega_p = hz_to_rad(*f);
    p.config.radial_axis = parse_axis(s, "radial_axis", "x", false);
    p.config.initial_radial_k = s.number("initial_radial_temp_k", p.config.initial_radial_k, Bound::non_negative);
    p.config.initial_axial_k = s.number("initial_axial_temp_k", p.config.initial_axial_k, Bound::non_negative);
    p.config.duration = s.number("duration_s", p.config.duration, Bound::positive);
    p.config.window = s.number("window_s", p.config.window, Bound::positive);
    if (p.config.window > p.config.duration) s.fail("window_s", "must not exceed duration_s");
    p.runs = to_size(s.integer("runs", 1, 1));
    p.config.curve_points = to_size(s.integer("curve_points", 2000, 1));
    s.finish();
    cfg.settings = p;
  } else if (e == "stretch-cooling") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1.9e-12, 0.0, 1}, {false, false, false});
    cfg.circuit = parse_circuit(root);
    Section s = root.child("stretch-cooling");
    StretchSettings p;
    p.config.trap = cfg.trap.trap;
    p.config.circuit = cfg.circuit;
    p.config.dt = cfg.integrator.dt_s;
    p.config.seed = cfg.seed;
    p.config.amplitude_scale = s.number("amplitude_scale", p.config.amplitude_scale, Bound::non_negative);
    if (auto f = s.optional_number("drive_freq_hz", Bound::positive)) p.config.omega_p = hz_to_rad(*f);
    p.config.initial_com_k = s.number("initial_com_temp_k", p.config.initial_com_k, Bound::non_negative);
    p.config.initial_stretch_k = s.number("initial_stretch_temp_k", p.config.initial_stretch_k, Bound::non_negative);
    p.config.initial_radial_k = s.number("initial_radial_temp_k", p.config.initial_radial_k, Bound::non_negative);
    p.config.duration = s.number("duration_s", p.config.duration, Bound::positive);
    p.config.window = s.number("window_s", p.config.window, Bound::positive);
    if (p.config.window > p.config.duration) s.fail("window_s", "must not exceed duration_s");
    p.runs = to_size(s.integer("runs", 1, 1));
    p.config.curve_points = to_size(s.integer("curve_points", 2000, 1));
    s.finish();
    derived["stretch_floor_k"] =
        cfg.circuit.temperature_k * std::numbers::sqrt3;
    cfg.settings = p;
  } else if (e == "split") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-13, 0.0, 1}, {true, false, false});
    Section s = root.child("split");
    SplitSettings sp;
    sp.d_final_m = s.number("d_final_m", sp.d_final_m, Bound::positive);
    sp.tau_s = s.number("tau_s", sp.tau_s, Bound::positive);
    const auto beta = s.optional_number("beta_cp_vpm4", Bound::positive);
    const auto fcp = s.optional_number("cp_freq_hz", Bound::positive);
    if (beta && fcp) s.fail("cp_freq_hz", "give either beta_cp_vpm4 or cp_freq_hz, not both");
    if (fcp) {
      sp.beta_cp_vpm4 = beta_cp_for_omega(hz_to_rad(*fcp));
    } else {
      sp.beta_cp_vpm4 = beta.value_or(sp.beta_cp_vpm4);
      if (!beta) cfg.resolved["split"]["beta_cp_vpm4"] = sp.beta_cp_vpm4;
    }
    sp.merge = s.flag("merge", false);
    sp.modes = parse_modes(s, cfg.seed, 0.0);
    sp.phases = to_size(s.integer("phases", 1, 1));
    sp.schedule_points = to_size(s.integer("schedule_points", 1001, 2));
    sp.trajectory_points = to_size(s.integer("trajectory_points", 0, 0));
    s.finish();
    Json split = Json::object();
    split["beta_cp_vpm4"] = sp.beta_cp_vpm4;
    split["cp_freq_hz"] = omega_cp(sp.beta_cp_vpm4) / kTwoPi;
    derived["split"] = split;
    cfg.settings = sp;
  } else if (e == "shuttle") {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-12, 0.0, 1}, {true, false, false});
    Section s = root.child("shuttle");
    ShuttleSettings sh;
    sh.distance_m = s.number("distance_m", sh.distance_m, Bound::non_negative);
    sh.durations_s = s.values("durations_s", sh.durations_s, Bound::positive);
    sh.schedule_points = to_size(s.integer("schedule_points", 1001, 2));
    s.finish();
    cfg.settings = sh;
  } else if (e == "stability-map") {
    Section s = root.child("stability-map");
    StabilityMapSettings m;
    m.q_x = s.values("q_x", range(0.05, 0.9, 18), Bound::positive);
    m.cyclotron_freqs_hz = s.values("cyclotron_freqs_hz", range(0.0, 10e9, 41), Bound::non_negative);
    if (!std::is_sorted(m.cyclotron_freqs_hz.begin(), m.cyclotron_freqs_hz.end())) {
      s.fail("cyclotron_freqs_hz", "must be ascending");
    }
    m.threshold = s.number("threshold", m.threshold, Bound::positive);
    m.steps_per_period = to_size(s.integer("steps_per_period", 400, 200));
    m.boundaries = s.flag("boundaries", true);
    m.boundary_tolerance_hz = s.number("boundary_tolerance_hz", m.boundary_tolerance_hz, Bound::positive);
    s.finish();
    cfg.settings = m;
  } else {
    cfg.integrator = parse_integrator(root, {Method::rk3, 1e-13, 25e-6, 1}, {false, true, false});
    Section s = root.child("linecut");
    LinecutSettings l;
    l.cyclotron_freqs_hz =
        s.values("cyclotron_freqs_hz", {0.1e9, 1e9, 2e9, 3e9, 4e9, 5e9, 6e9, 7e9, 8e9, 9e9}, Bound::non_negative);
    l.energy_cap_ev = s.number("energy_cap_ev", l.energy_cap_ev, Bound::positive);
    l.temp_k = s.number("temp_k", l.temp_k, Bound::non_negative);
    l.steps_per_period = to_size(s.integer("steps_per_period", 400, 200));
    l.threshold = s.number("threshold", l.threshold, Bound::positive);
    s.finish();
    cfg.settings = l;
  }
  root.finish();

  cfg.resolved["derived"] = derived;
  cfg.source_sha256 = sha256_hex(text);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::string_view experiment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), experiment, path.string());
}

// ---------------------------------------------------------------------------
// Resolved echo
// ---------------------------------------------------------------------------

namespace {

void emit(YAML::Emitter& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object:
      out << YAML::BeginMap;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out << YAML::Key << it.key() << YAML::Value;
        emit(out, it.value());
      }
      out << YAML::EndMap;
      break;
    case Json::value_t::array:
      out << YAML::Flow << YAML::BeginSeq;
      for (const auto& v : j) emit(out, v);
      out << YAML::EndSeq;
      break;
    case Json::value_t::boolean:
      out << (j.get<bool>() ? "true" : "false");
      break;
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      break;
    case Json::value_t::number_integer:
      out << std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out << std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::string:
      out << j.get<std::string>();
      break;
    default:
      out << YAML::Null;
  }
}

}  // namespace

std::string resolved_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (auto it = cfg.resolved.begin(); it != cfg.resolved.end(); ++it) {
    if (it.key() == "derived") continue;
    out << YAML::Key << it.key() << YAML::Value;
    emit(out, it.value());
  }
  out << YAML::EndMap;
  std::string text = out.c_str();
  text += "\n# Derived quantities (output only; ignored when this file is loaded).\n";
  YAML::Emitter derived;
  derived << YAML::BeginMap << YAML::Key << "derived" << YAML::Value;
  emit(derived, cfg.resolved.at("derived"));
  derived << YAML::EndMap;
  text += derived.c_str();
  text += "\n";
  return text;
}

}  // namespace paultrap::cli
