#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "combbeam/geometry.hpp"
#include "combbeam/kspace.hpp"
#include "combbeam/propagation.hpp"
#include "combbeam/waveform.hpp"

namespace combbeam {

/// Malformed or schema-violating scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A source as written in the config. Exactly one placement form is used.
struct SourceSpec {
  enum class Form { az_range, position, farfield };
  Form form = Form::az_range;
  double az_deg = 0.0;
  double el_deg = 0.0;
  double range_m = 0.0;
  Vec3 position{};
  double u = 0.0;
  double v = 0.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;

  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;

  [[nodiscard]] Source to_source() const {
    switch (form) {
      case Form::az_range:
        return Source::point(range_m * direction_from_az_el(az_deg, el_deg), amplitude, phase_rad);
      case Form::position:
        return Source::point(position, amplitude, phase_rad);
      case Form::farfield:
        return Source::far_field({u, v}, amplitude, phase_rad);
    }
    throw std::logic_error("unreachable");
  }
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int trials = 0;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct SimSpec {
  PropagationModel model = PropagationModel::exact_spherical;
  int grid_points = 4096;
  double lo_hz = 0.0;  // resolved to comb f0 when omitted
  PhaseSign phase_sign = PhaseSign::delay;
  TimeReference time_reference = TimeReference::arrival;
  bool path_loss = false;
  double calibration_range_m = 0.0;
  double narrowband_freq_hz = 0.0;  // resolved to the comb centre when omitted
  double threshold_fraction = 0.5;
  std::optional<double> min_separation_u;  // 2 / num_tones when omitted
  NoiseSpec noise{};
  friend bool operator==(const SimSpec&, const SimSpec&) = default;
};

struct OutputSpec {
  std::string directory = "out";
  bool emit_rf = false;
  bool emit_phase_map = false;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct SweepSpec {
  std::string parameter;  // range_m | num_tones | delta_f_hz | spacing_m
  std::vector<double> values;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ScenarioConfig {
  CombSpec comb{};
  ArrayGeometry array{};
  std::vector<SourceSpec> sources;
  SimSpec sim{};
  OutputSpec output{};
  std::optional<SweepSpec> sweep;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  [[nodiscard]] Scene scene() const {
    Scene s;
    s.model = sim.model;
    for (const auto& spec : sources) s.sources.push_back(spec.to_source());
    return s;
  }

  [[nodiscard]] KSpaceConfig kspace() const {
    KSpaceConfig k;
    k.grid_points = sim.grid_points;
    k.f_lo = sim.lo_hz;
    k.propagation = {sim.phase_sign, sim.time_reference, sim.path_loss};
    k.noise = {sim.noise.sigma, sim.noise.seed};
    k.threshold_fraction = sim.threshold_fraction;
    k.min_separation_u = sim.min_separation_u;
    k.calibration_range = sim.calibration_range_m;
    return k;
  }
};

namespace detail {

using nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join_path(path, key) + ": unknown key");
  }
}

inline double get_number(const json& j, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  const std::string p = join_path(path, key);
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(p + ": required field is missing");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(p + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p + ": must be finite");
  return x;
}

inline int get_int(const json& j, const std::string& path, const char* key, std::optional<int> fallback = {}) {
  const std::string p = join_path(path, key);
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(p + ": required field is missing");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(p + ": expected an integer");
  return v.get<int>();
}

inline bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(join_path(path, key) + ": expected true or false");
  return j.at(key).get<bool>();
}

inline std::string get_string(const json& j, const std::string& path, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(join_path(path, key) + ": expected a string");
  return j.at(key).get<std::string>();
}

inline Vec3 get_vec3(const json& j, const std::string& path, const char* key, std::optional<Vec3> fallback = {}) {
  const std::string p = join_path(path, key);
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(p + ": required field is missing");
  }
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) throw ConfigError(p + ": expected [x, y, z]");
  for (const auto& c : v)
    if (!c.is_number()) throw ConfigError(p + ": expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

template <typename E>
E get_enum(const json& j, const std::string& path, const char* key, E fallback,
           std::initializer_list<std::pair<const char*, E>> names) {
  if (!j.contains(key)) return fallback;
  const std::string s = get_string(j, path, key, "");
  for (const auto& [name, value] : names)
    if (s == name) return value;
  std::string msg = join_path(path, key) + ": expected one of";
  for (const auto& [name, _] : names) msg += std::string(" ") + name;
  throw ConfigError(msg);
}

template <typename E>
const char* enum_name(E value, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  throw std::logic_error("unnamed enum value");
}

inline constexpr std::initializer_list<std::pair<const char*, ArrayKind>> kKindNames = {
    {"linear", ArrayKind::linear}, {"planar", ArrayKind::planar}};
inline constexpr std::initializer_list<std::pair<const char*, TuningOrder>> kOrderNames = {
    {"ascending", TuningOrder::ascending}, {"descending", TuningOrder::descending}};
inline constexpr std::initializer_list<std::pair<const char*, PhaseSign>> kSignNames = {
    {"delay", PhaseSign::delay}, {"advance", PhaseSign::advance}};
inline constexpr std::initializer_list<std::pair<const char*, TimeReference>> kTimeRefNames = {
    {"arrival", TimeReference::arrival}, {"absolute", TimeReference::absolute}};
inline constexpr std::initializer_list<std::pair<const char*, PropagationModel>> kModelNames = {
    {"exact", PropagationModel::exact_spherical}, {"far_field", PropagationModel::far_field}};

inline const std::array<const char*, 4> kSweepParameters = {"range_m", "num_tones", "delta_f_hz", "spacing_m"};

template <typename Fn>
void wrap_domain(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

/// Parses and validates a JSON scenario. Unknown keys, missing required
/// fields and out-of-range values raise ConfigError naming the field path.
inline ScenarioConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  detail::check_keys(root, "", {"comb", "array", "sources", "sim", "output", "sweep"});
  ScenarioConfig cfg;

  if (!root.contains("comb")) throw ConfigError("comb: required section is missing");
  const auto& jc = root.at("comb");
  detail::check_keys(jc, "comb", {"f0_hz", "delta_f_hz", "num_tones", "duration_s", "amplitude"});
  cfg.comb.f0 = detail::get_number(jc, "comb", "f0_hz");
  cfg.comb.delta_f = detail::get_number(jc, "comb", "delta_f_hz");
  cfg.comb.num_tones = detail::get_int(jc, "comb", "num_tones");
  cfg.comb.duration = detail::get_number(jc, "comb", "duration_s", 1.0 / std::max(cfg.comb.delta_f, 1e-300));
  cfg.comb.amplitude = detail::get_number(jc, "comb", "amplitude", 1.0);
  if (!(cfg.comb.delta_f > 0.0)) throw ConfigError("comb.delta_f_hz: must be > 0");
  if (cfg.comb.num_tones < 1) throw ConfigError("comb.num_tones: must be >= 1");
  if (!(cfg.comb.duration > 0.0)) throw ConfigError("comb.duration_s: must be > 0");
  if (!(cfg.comb.amplitude >= 0.0)) throw ConfigError("comb.amplitude: must be >= 0");
  detail::wrap_domain("comb", [&] { cfg.comb.validate(); });

  if (!root.contains("array")) throw ConfigError("array: required section is missing");
  const auto& ja = root.at("array");
  detail::check_keys(ja, "array", {"kind", "m", "n", "dx_m", "dy_m", "origin_m", "tuning_order"});
  cfg.array.kind = detail::get_enum(ja, "array", "kind", ArrayKind::linear, detail::kKindNames);
  cfg.array.m = detail::get_int(ja, "array", "m");
  cfg.array.n = detail::get_int(ja, "array", "n", 1);
  cfg.array.dx = detail::get_number(ja, "array", "dx_m");
  cfg.array.dy = detail::get_number(ja, "array", "dy_m", 0.0);
  cfg.array.origin = detail::get_vec3(ja, "array", "origin_m", Vec3{});
  cfg.array.tuning_order = detail::get_enum(ja, "array", "tuning_order", TuningOrder::ascending, detail::kOrderNames);
  detail::wrap_domain("array", [&] { cfg.array.validate(); });

  if (!root.contains("sources")) throw ConfigError("sources: required section is missing");
  const auto& js = root.at("sources");
  if (!js.is_array()) throw ConfigError("sources: expected a list");
  if (js.empty()) throw ConfigError("sources: at least one source is required");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string path = "sources[" + std::to_string(i) + "]";
    const auto& s = js[i];
    detail::check_keys(s, path, {"az_deg", "el_deg", "range_m", "position_m", "farfield", "amplitude", "phase_rad"});
    SourceSpec spec;
    const int forms = (s.contains("az_deg") ? 1 : 0) + (s.contains("position_m") ? 1 : 0) + (s.contains("farfield") ? 1 : 0);
    if (forms != 1) throw ConfigError(path + ": give exactly one of az_deg/range_m, position_m, farfield");
    if (s.contains("az_deg")) {
      spec.form = SourceSpec::Form::az_range;
      spec.az_deg = detail::get_number(s, path, "az_deg");
      spec.el_deg = detail::get_number(s, path, "el_deg", 0.0);
      spec.range_m = detail::get_number(s, path, "range_m");
      if (!(spec.range_m > 0.0)) throw ConfigError(path + ".range_m: must be > 0");
      if (std::abs(spec.az_deg) > 90.0) throw ConfigError(path + ".az_deg: must lie in [-90, 90]");
      if (std::abs(spec.el_deg) > 90.0) throw ConfigError(path + ".el_deg: must lie in [-90, 90]");
    } else if (s.contains("position_m")) {
      if (s.contains("el_deg") || s.contains("range_m")) throw ConfigError(path + ": el_deg/range_m need az_deg");
      spec.form = SourceSpec::Form::position;
      spec.position = detail::get_vec3(s, path, "position_m");
    } else {
      if (s.contains("el_deg") || s.contains("range_m")) throw ConfigError(path + ": el_deg/range_m need az_deg");
      spec.form = SourceSpec::Form::farfield;
      const auto& ff = s.at("farfield");
      detail::check_keys(ff, path + ".farfield", {"u", "v"});
      spec.u = detail::get_number(ff, path + ".farfield", "u");
      spec.v = detail::get_number(ff, path + ".farfield", "v", 0.0);
    }
    spec.amplitude = detail::get_number(s, path, "amplitude", 1.0);
    spec.phase_rad = detail::get_number(s, path, "phase_rad", 0.0);
    detail::wrap_domain(path, [&] { (void)spec.to_source(); });
    cfg.sources.push_back(spec);
  }

  const json empty = json::object();
  const auto& jsim = root.contains("sim") ? root.at("sim") : empty;
  detail::check_keys(jsim, "sim",
                     {"model", "grid_points", "lo_hz", "phase_sign", "time_reference", "path_loss", "calibration_range_m",
                      "narrowband_freq_hz", "threshold_fraction", "min_separation_u", "noise"});
  cfg.sim.model = detail::get_enum(jsim, "sim", "model", PropagationModel::exact_spherical, detail::kModelNames);
  cfg.sim.grid_points = detail::get_int(jsim, "sim", "grid_points", 4096);
  if (cfg.sim.grid_points < 16) throw ConfigError("sim.grid_points: must be >= 16");
  cfg.sim.lo_hz = detail::get_number(jsim, "sim", "lo_hz", cfg.comb.f0);
  cfg.sim.phase_sign = detail::get_enum(jsim, "sim", "phase_sign", PhaseSign::delay, detail::kSignNames);
  cfg.sim.time_reference = detail::get_enum(jsim, "sim", "time_reference", TimeReference::arrival, detail::kTimeRefNames);
  cfg.sim.path_loss = detail::get_bool(jsim, "sim", "path_loss", false);
  cfg.sim.calibration_range_m = detail::get_number(jsim, "sim", "calibration_range_m", 0.0);
  if (cfg.sim.calibration_range_m < 0.0) throw ConfigError("sim.calibration_range_m: must be >= 0");
  cfg.sim.narrowband_freq_hz = detail::get_number(jsim, "sim", "narrowband_freq_hz", cfg.comb.center_frequency());
  if (!(cfg.sim.narrowband_freq_hz > 0.0)) throw ConfigError("sim.narrowband_freq_hz: must be > 0");
  cfg.sim.threshold_fraction = detail::get_number(jsim, "sim", "threshold_fraction", 0.5);
  if (!(cfg.sim.threshold_fraction > 0.0 && cfg.sim.threshold_fraction < 1.0))
    throw ConfigError("sim.threshold_fraction: must lie in (0, 1)");
  if (jsim.contains("min_separation_u") && !jsim.at("min_separation_u").is_null()) {
    cfg.sim.min_separation_u = detail::get_number(jsim, "sim", "min_separation_u");
    if (!(*cfg.sim.min_separation_u >= 0.0)) throw ConfigError("sim.min_separation_u: must be >= 0");
  }
  if (jsim.contains("noise")) {
    const auto& jn = jsim.at("noise");
    detail::check_keys(jn, "sim.noise", {"sigma", "seed", "trials"});
    cfg.sim.noise.sigma = detail::get_number(jn, "sim.noise", "sigma", 0.0);
    if (!(cfg.sim.noise.sigma >= 0.0)) throw ConfigError("sim.noise.sigma: must be >= 0");
    if (jn.contains("seed")) {
      if (!jn.at("seed").is_number_unsigned() && !(jn.at("seed").is_number_integer() && jn.at("seed").get<long long>() >= 0))
        throw ConfigError("sim.noise.seed: expected a non-negative integer");
      cfg.sim.noise.seed = jn.at("seed").get<std::uint64_t>();
    }
    cfg.sim.noise.trials = detail::get_int(jn, "sim.noise", "trials", 0);
    if (cfg.sim.noise.trials < 0) throw ConfigError("sim.noise.trials: must be >= 0");
  }

  const auto& jo = root.contains("output") ? root.at("output") : empty;
  detail::check_keys(jo, "output", {"directory", "emit_rf", "emit_phase_map"});
  cfg.output.directory = detail::get_string(jo, "output", "directory", "out");
  cfg.output.emit_rf = detail::get_bool(jo, "output", "emit_rf", false);
  cfg.output.emit_phase_map = detail::get_bool(jo, "output", "emit_phase_map", false);

  if (root.contains("sweep")) {
    const auto& jw = root.at("sweep");
    detail::require_object(jw, "sweep");
    if (jw.size() != 1) throw ConfigError("sweep: exactly one swept parameter is supported");
    const auto& [key, values] = *jw.items().begin();
    bool known = false;
    for (const char* p : detail::kSweepParameters) known = known || key == p;
    if (!known) throw ConfigError("sweep." + key + ": unknown sweep parameter");
    if (!values.is_array() || values.empty()) throw ConfigError("sweep." + key + ": expected a non-empty list");
    SweepSpec sw{key, {}};
    for (const auto& v : values) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError("sweep." + key + ": values must be > 0");
      if (key == "num_tones" && !v.is_number_integer()) throw ConfigError("sweep.num_tones: values must be integers");
      sw.values.push_back(v.get<double>());
    }
    cfg.sweep = sw;
  }
  return cfg;
}

/// Serialises a config with every default written out explicitly.
inline nlohmann::json to_json(const ScenarioConfig& cfg) {
  using detail::json;
  json j;
  j["comb"] = {{"f0_hz", cfg.comb.f0},
               {"delta_f_hz", cfg.comb.delta_f},
               {"num_tones", cfg.comb.num_tones},
               {"duration_s", cfg.comb.duration},
               {"amplitude", cfg.comb.amplitude}};
  j["array"] = {{"kind", detail::enum_name(cfg.array.kind, detail::kKindNames)},
                {"m", cfg.array.m},
                {"n", cfg.array.n},
                {"dx_m", cfg.array.dx},
                {"dy_m", cfg.array.dy},
                {"origin_m", {cfg.array.origin.x, cfg.array.origin.y, cfg.array.origin.z}},
                {"tuning_order", detail::enum_name(cfg.array.tuning_order, detail::kOrderNames)}};
  j["sources"] = json::array();
  for (const auto& s : cfg.sources) {
    json js;
    switch (s.form) {
      case SourceSpec::Form::az_range:
        js = {{"az_deg", s.az_deg}, {"el_deg", s.el_deg}, {"range_m", s.range_m}};
        break;
      case SourceSpec::Form::position:
        js = {{"position_m", {s.position.x, s.position.y, s.position.z}}};
        break;
      case SourceSpec::Form::farfield:
        js = {{"farfield", {{"u", s.u}, {"v", s.v}}}};
        break;
    }
    js["amplitude"] = s.amplitude;
    js["phase_rad"] = s.phase_rad;
    j["sources"].push_back(js);
  }
  j["sim"] = {{"model", detail::enum_name(cfg.sim.model, detail::kModelNames)},
              {"grid_points", cfg.sim.grid_points},
              {"lo_hz", cfg.sim.lo_hz},
              {"phase_sign", detail::enum_name(cfg.sim.phase_sign, detail::kSignNames)},
              {"time_reference", detail::enum_name(cfg.sim.time_reference, detail::kTimeRefNames)},
              {"path_loss", cfg.sim.path_loss},
              {"calibration_range_m", cfg.sim.calibration_range_m},
              {"narrowband_freq_hz", cfg.sim.narrowband_freq_hz},
              {"threshold_fraction", cfg.sim.threshold_fraction},
              {"noise", {{"sigma", cfg.sim.noise.sigma}, {"seed", cfg.sim.noise.seed}, {"trials", cfg.sim.noise.trials}}}};
  if (cfg.sim.min_separation_u) j["sim"]["min_separation_u"] = *cfg.sim.min_separation_u;
  j["output"] = {{"directory", cfg.output.directory},
                 {"emit_rf", cfg.output.emit_rf},
                 {"emit_phase_map", cfg.output.emit_phase_map}};
  if (cfg.sweep) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : cfg.sweep->values) {
      if (cfg.sweep->parameter == "num_tones")
        values.push_back(static_cast<std::int64_t>(v));
      else
        values.push_back(v);
    }
    j["sweep"] = {{cfg.sweep->parameter, values}};
  }
  return j;
}

}  // namespace combbeam
