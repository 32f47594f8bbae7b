#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "combbeam/analysis.hpp"
#include "combbeam/conventional.hpp"
#include "combbeam/csv.hpp"
#include "combbeam/kspace.hpp"
#include "combbeam/scenario.hpp"

namespace combbeam {

/// Files produced by a command plus a human-readable summary for stdout.
struct CommandResult {
  OutputSet files;
  std::string report;
};

namespace detail {

inline CsvTable phase_map_table(const PhaseMap& pm) {
  CsvTable t({"m", "n", "x_m", "y_m", "phase_deg"});
  for (int im = 0; im < pm.m; ++im)
    for (int in = 0; in < pm.n; ++in) {
      const auto k = static_cast<std::size_t>(im * pm.n + in);
      t.row(im, in, pm.positions[k].x, pm.positions[k].y, pm.phase_deg[k]);
    }
  return t;
}

inline Source single_source(const ScenarioConfig& cfg, const char* command) {
  if (cfg.sources.size() != 1)
    throw ConfigError(std::string("sources: ") + command + " needs exactly one source");
  return cfg.sources.front().to_source();
}

}  // namespace detail

/// Comb beamformer run: envelope, peaks, per-element phasors and, on
/// request, the RF sum and the narrowband phase map of the first source.
inline CommandResult cmd_simulate(const ScenarioConfig& cfg) {
  if (cfg.array.kind != ArrayKind::linear) throw ConfigError("array.kind: simulate needs a linear array");
  if (cfg.comb.num_tones != cfg.array.m)
    throw ConfigError("array.m: must equal comb.num_tones (one tone per element)");
  const Scene scene = cfg.scene();
  const KSpaceConfig kcfg = cfg.kspace();
  const auto run = run_kspace(scene, cfg.array, cfg.comb, kcfg, cfg.comb.duration);
  const auto& out = run.output;

  CommandResult result;
  CsvTable env({"t_s", "envelope", "u", "az_deg"});
  for (std::size_t i = 0; i < out.time.size(); ++i) env.row(out.time[i], out.envelope[i], out.u[i], out.azimuth[i]);
  CsvTable peaks({"t_s", "u", "az_deg", "magnitude"});
  for (const auto& p : out.peaks) peaks.row(p.time, p.u, p.azimuth, p.magnitude);
  CsvTable ph({"element", "tone_hz", "phase_rad", "amplitude"});
  for (const auto& p : run.phasors) ph.row(p.element, p.tone_hz, p.phase(), p.amplitude());
  result.files.add("envelope.csv", env.text());
  result.files.add("peaks.csv", peaks.text());
  result.files.add("phasors.csv", ph.text());

  if (cfg.output.emit_rf) {
    const auto rf_phasors =
        scene_element_phasors(scene, cfg.array, cfg.comb, assign_tuning(cfg.array, cfg.comb), 0.0, kcfg.propagation);
    const auto rf = beamform_rf(rf_phasors, out.time);
    CsvTable t({"t_s", "rf"});
    for (std::size_t i = 0; i < rf.size(); ++i) t.row(out.time[i], rf[i]);
    result.files.add("rf.csv", t.text());
  }
  if (cfg.output.emit_phase_map) {
    const auto pm = phase_map(cfg.array, scene.sources.front(), cfg.sim.narrowband_freq_hz, cfg.sim.phase_sign);
    result.files.add("phase_map.csv", detail::phase_map_table(pm).text());
  }

  std::ostringstream rep;
  rep << "peaks: " << out.peaks.size() << '\n';
  for (const auto& p : out.peaks)
    rep << "  az_deg=" << format_number(p.azimuth) << " u=" << format_number(p.u)
        << " t_s=" << format_number(p.time) << " magnitude=" << format_number(p.magnitude) << '\n';
  if (cfg.sim.noise.sigma > 0.0 && cfg.sim.noise.trials > 0) {
    const double gain = snr_gain(scene, cfg.array, cfg.comb, kcfg, cfg.sim.noise.sigma, cfg.sim.noise.trials,
                                 cfg.sim.noise.seed);
    rep << "snr_gain_db: " << format_number(gain) << '\n';
  }
  result.report = rep.str();
  return result;
}

/// Wrapped phase and plane-fit residual of a single source across a planar
/// array at the narrowband frequency.
inline CommandResult cmd_phase_map(const ScenarioConfig& cfg) {
  if (cfg.array.kind != ArrayKind::planar) throw ConfigError("array.kind: phase-map needs a planar array");
  if (cfg.array.m < 2 || cfg.array.n < 2)
    throw ConfigError("array: phase-map needs at least 2 x 2 elements to define a gradient");
  const Source src = detail::single_source(cfg, "phase-map");
  const double freq = cfg.sim.narrowband_freq_hz;
  const auto pm = phase_map(cfg.array, src, freq, cfg.sim.phase_sign);
  const auto curv = curvature_profile(cfg.array, src, freq, cfg.sim.phase_sign);
  const auto steps = mean_phase_steps(pm);

  CommandResult result;
  result.files.add("phase_map.csv", detail::phase_map_table(pm).text());
  CsvTable t({"m", "n", "residual_cycles"});
  for (int im = 0; im < curv.m; ++im)
    for (int in = 0; in < curv.n; ++in)
      t.row(im, in, curv.residual_cycles[static_cast<std::size_t>(im * curv.n + in)]);
  result.files.add("curvature.csv", t.text());

  std::ostringstream rep;
  rep << "elements: " << pm.phase_deg.size() << '\n'
      << "mean_step_horizontal_deg: " << format_number(steps.horizontal) << '\n'
      << "mean_step_vertical_deg: " << format_number(steps.vertical) << '\n'
      << "max_abs_residual_cycles: " << format_number(curv.max_abs_residual()) << '\n';
  result.report = rep.str();
  return result;
}

/// Config with one swept parameter replaced by `value`.
inline ScenarioConfig with_sweep_value(ScenarioConfig cfg, const std::string& parameter, double value) {
  if (parameter == "range_m") {
    auto& s = cfg.sources.front();
    if (s.form == SourceSpec::Form::az_range) {
      s.range_m = value;
    } else if (s.form == SourceSpec::Form::position) {
      const Vec3 rel = s.position - cfg.array.origin;
      const double r = rel.norm();
      if (!(r > 0.0)) throw ConfigError("sources[0].position_m: coincides with the array origin");
      s.position = cfg.array.origin + (value / r) * rel;
    } else {
      throw ConfigError("sweep.range_m: the first source must be a point source");
    }
  } else if (parameter == "num_tones") {
    cfg.comb.num_tones = static_cast<int>(value);
    cfg.array.m = cfg.comb.num_tones;
  } else if (parameter == "delta_f_hz") {
    cfg.comb.delta_f = value;
  } else if (parameter == "spacing_m") {
    cfg.array.dx = value;
  } else {
    throw ConfigError("sweep." + parameter + ": unknown sweep parameter");
  }
  return cfg;
}

/// Angle error, peak magnitude and -3 dB width of the strongest peak for
/// every value of the swept parameter.
inline CommandResult cmd_sweep(const ScenarioConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("sweep: section is required for the sweep command");
  if (cfg.sweep->values.empty()) throw ConfigError("sweep." + cfg.sweep->parameter + ": expected a non-empty list");
  if (cfg.array.kind != ArrayKind::linear) throw ConfigError("array.kind: sweep needs a linear array");
  const auto& values = cfg.sweep->values;
  std::vector<ScenarioConfig> variants;
  variants.reserve(values.size());
  for (double v : values) {
    auto c = with_sweep_value(cfg, cfg.sweep->parameter, v);
    detail::wrap_domain("sweep." + cfg.sweep->parameter, [&] {
      c.comb.validate();
      c.array.validate();
    });
    variants.push_back(std::move(c));
  }
  std::vector<SweepRow> rows(values.size());
  detail::parallel_for(values.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& c = variants[i];
      rows[i] = single_source_metrics(c.scene(), c.array, c.comb, c.kspace(), values[i]);
    }
  }, 1);

  CommandResult result;
  CsvTable t({"value", "az_error_deg", "peak_mag", "width_u"});
  for (const auto& r : rows) t.row(r.value, r.az_error_deg, r.peak_mag, r.width_u);
  result.files.add("sweep.csv", t.text());
  result.report = "sweep: " + cfg.sweep->parameter + ", " + std::to_string(rows.size()) + " rows\n";
  return result;
}

/// Held-out plane-wave probes used to check a calibration.
inline constexpr std::array<double, 4> kHeldOutProbes = {-0.9, -0.5, 0.3, 0.7};

struct ProbeResidual {
  double u_true = 0.0;
  double u_estimated = 0.0;
  double residual = 0.0;
};

/// Recovers each held-out probe through the full chain and reports the u
/// error of the strongest peak.
inline std::vector<ProbeResidual> probe_residuals(const ArrayGeometry& geom, const CombSpec& comb,
                                                  const KSpaceConfig& cfg) {
  KSpaceConfig quiet = cfg;
  quiet.noise = {};
  std::vector<ProbeResidual> out;
  for (double u : kHeldOutProbes) {
    const Scene scene{{Source::far_field({u, 0.0})}, PropagationModel::exact_spherical};
    const auto run = run_kspace(scene, geom, comb, quiet);
    if (run.output.peaks.empty()) throw std::domain_error("calibration check: probe produced no peak");
    const double est = run.output.peaks.front().u;
    out.push_back({u, est, est - u});
  }
  return out;
}

inline CommandResult cmd_calibrate(const ScenarioConfig& cfg) {
  if (cfg.array.kind != ArrayKind::linear) throw ConfigError("array.kind: calibrate needs a linear array");
  if (cfg.comb.num_tones < 2) throw ConfigError("comb.num_tones: calibration needs at least 2 tones");
  if (cfg.comb.num_tones != cfg.array.m)
    throw ConfigError("array.m: must equal comb.num_tones (one tone per element)");
  const KSpaceConfig kcfg = cfg.kspace();
  const auto cal = calibrate_axis(cfg.array, cfg.comb, kcfg);
  const auto residuals = probe_residuals(cfg.array, cfg.comb, kcfg);

  CommandResult result;
  CsvTable t({"u_true", "u_estimated", "residual_u"});
  for (const auto& r : residuals) t.row(r.u_true, r.u_estimated, r.residual);
  result.files.add("calibration.csv", t.text());

  std::ostringstream rep;
  rep << "slope_sign: " << cal.slope_sign << '\n'
      << "t0_s: " << format_number(cal.t0) << '\n'
      << "t0_cycles: " << format_number(cal.t0 * cal.delta_f) << '\n'
      << "u_per_cycle: " << format_number(cal.u_per_cycle) << '\n';
  for (const auto& r : residuals)
    rep << "probe u=" << format_number(r.u_true) << " residual_u=" << format_number(r.residual) << '\n';
  result.report = rep.str();
  return result;
}

}  // namespace combbeam
