#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "combbeam/detail/parallel.hpp"
#include "combbeam/detail/phase.hpp"
#include "combbeam/geometry.hpp"
#include "combbeam/propagation.hpp"
#include "combbeam/tuning.hpp"
#include "combbeam/waveform.hpp"

namespace combbeam {

/// Uniform grid of `points` samples over [0, span).
inline std::vector<double> make_time_grid(int points, double span) {
  if (points < 1) throw std::invalid_argument("time grid: need at least one point");
  if (!(span > 0.0)) throw std::invalid_argument("time grid: span must be > 0");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = span * i / points;
  return t;
}

struct Peak {
  double time = 0.0;  // s, quadratically interpolated
  double u = 0.0;
  double azimuth = 0.0;  // degrees
  double magnitude = 0.0;
  double kspace_time = 0.0;  // s, on the [0, 1/df) <-> u in [-1, 1) axis
};

struct BeamformOutput {
  std::vector<double> time;
  std::vector<double> envelope;
  std::vector<double> rf;  // empty unless requested
  std::vector<double> u;
  std::vector<double> azimuth;
  std::vector<Peak> peaks;
  double period = 0.0;  // 1/df of the phasor set
  bool periodic = false;  // grid spans a whole number of periods

  [[nodiscard]] bool empty() const { return envelope.empty(); }
};

namespace detail {

inline double common_spacing(std::span<const ElementPhasor> phasors) {
  if (phasors.size() < 2) return 0.0;
  std::vector<double> f;
  f.reserve(phasors.size());
  for (const auto& p : phasors) f.push_back(p.baseband_hz);
  std::sort(f.begin(), f.end());
  double step = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double d = f[i] - f[i - 1];
    if (d > 0.0 && (step == 0.0 || d < step)) step = d;
  }
  return step;
}

inline double min_baseband(std::span<const ElementPhasor> phasors) {
  double lo = phasors.front().baseband_hz;
  for (const auto& p : phasors) lo = std::min(lo, p.baseband_hz);
  return lo;
}

/// Complex noise samples, element-major within each time sample.
inline std::vector<std::complex<double>> noise_sums(std::size_t samples, std::size_t elements, const NoiseConfig& noise) {
  std::vector<std::complex<double>> sums(samples);
  if (!noise.enabled()) return sums;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, noise.sigma / std::sqrt(2.0));
  for (std::size_t i = 0; i < samples; ++i) {
    std::complex<double> acc{};
    for (std::size_t e = 0; e < elements; ++e) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      acc += std::complex<double>{re, im};
    }
    sums[i] = acc;
  }
  return sums;
}

}  // namespace detail

/// Complex beamformer sum at time t. The lowest baseband frequency is
/// factored out, which leaves the magnitude unchanged and keeps the phase
/// arguments small.
inline std::complex<double> beamform_sum(std::span<const ElementPhasor> phasors, double t) {
  if (phasors.empty()) return {};
  const double ref = detail::min_baseband(phasors);
  std::complex<double> acc{};
  for (const auto& p : phasors) {
    const double a = detail::kTwoPi * detail::cycles_frac(p.baseband_hz - ref, t);
    acc += p.value * std::complex<double>(std::cos(a), std::sin(a));
  }
  return acc;
}

/// Envelope |sum_n a_n exp(j(2 pi nu_n t + phi_n))| of the summed element
/// outputs, evaluated in closed form on `grid`.
inline BeamformOutput beamform_envelope(const NoisyPhasors& input, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("beamform_envelope: empty time grid");
  if (input.phasors.empty()) throw std::invalid_argument("beamform_envelope: no phasors");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("beamform_envelope: grid must be strictly increasing");

  BeamformOutput out;
  out.time.assign(grid.begin(), grid.end());
  out.envelope.resize(grid.size());
  const double spacing = detail::common_spacing(input.phasors);
  out.period = spacing > 0.0 ? 1.0 / spacing : 0.0;
  if (out.period > 0.0 && grid.size() > 1) {
    const double step = grid[1] - grid[0];
    const double cycles = (grid.back() + step - grid.front()) / out.period;
    out.periodic = std::round(cycles) >= 1.0 && std::abs(cycles - std::round(cycles)) < 1e-9;
  }

  const auto noise = detail::noise_sums(grid.size(), input.phasors.size(), input.noise);
  const std::span<const ElementPhasor> ph(input.phasors);
  detail::parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.envelope[i] = std::abs(beamform_sum(ph, grid[i]) + noise[i]);
  });
  return out;
}

inline BeamformOutput beamform_envelope(const std::vector<ElementPhasor>& phasors, std::span<const double> grid) {
  return beamform_envelope(NoisyPhasors{phasors, {}}, grid);
}

/// Real sum of the element outputs at their full tone frequencies. Phasors
/// must carry RF frequencies (built with f_LO = 0).
inline std::vector<double> beamform_rf(std::span<const ElementPhasor> phasors, std::span<const double> grid) {
  std::vector<double> out(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      for (const auto& p : phasors)
        acc += std::abs(p.value) *
               std::cos(detail::kTwoPi * detail::cycles_frac(p.baseband_hz, grid[i]) + std::arg(p.value));
      out[i] = acc;
    }
  });
  return out;
}

/// Affine map from beamformer time to direction cosine:
/// u(t) = wrap(slope_sign * u_per_cycle * delta_f * (t - t0)).
struct AxisCalibration {
  int slope_sign = 1;
  double t0 = 0.0;        // s, in [0, 1/delta_f)
  double delta_f = 0.0;   // Hz
  double u_per_cycle = 2.0;  // u span of one output period (2 for lambda/2 spacing)

  [[nodiscard]] double period() const { return 1.0 / delta_f; }
};

inline double time_to_u(const AxisCalibration& cal, double t) {
  const double span = cal.u_per_cycle;
  const double u = detail::wrap_symmetric(cal.slope_sign * span * cal.delta_f * (t - cal.t0), span);
  return std::clamp(u, -1.0, 1.0);
}

/// Position of u on the k-space time axis, where [0, 1/df) spans u in [-1, 1).
inline double u_to_kspace_time(const AxisCalibration& cal, double u) {
  return (u + 1.0) / (2.0 * cal.delta_f);
}

/// arcsin(u) in degrees; identical to atan(u / sqrt(1 - u^2)) for |u| < 1.
inline double u_to_azimuth(double u) {
  if (!(std::abs(u) <= 1.0)) throw std::domain_error("u_to_azimuth: |u| must be <= 1");
  return rad_to_deg(std::asin(u));
}

/// Fills the u and azimuth axes of `out` and of any peaks already found.
inline void apply_calibration(BeamformOutput& out, const AxisCalibration& cal) {
  out.u.resize(out.time.size());
  out.azimuth.resize(out.time.size());
  for (std::size_t i = 0; i < out.time.size(); ++i) {
    out.u[i] = time_to_u(cal, out.time[i]);
    out.azimuth[i] = u_to_azimuth(out.u[i]);
  }
  for (auto& p : out.peaks) {
    p.u = time_to_u(cal, p.time);
    p.azimuth = u_to_azimuth(p.u);
    p.kspace_time = u_to_kspace_time(cal, p.u);
  }
}

/// Grid-local maximum refined with a 3-point parabola.
struct RefinedMax {
  std::size_t index = 0;
  double time = 0.0;
  double magnitude = 0.0;
};

/// Strict local maxima of the envelope (plateaus report their first
/// sample), refined by quadratic interpolation. Neighbours wrap around when
/// the grid covers whole periods; otherwise the end samples are skipped.
inline std::vector<RefinedMax> local_maxima(const BeamformOutput& out) {
  const auto& y = out.envelope;
  const std::size_t n = y.size();
  std::vector<RefinedMax> found;
  if (n < 3) return found;
  const double dt = out.time[1] - out.time[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.periodic && (i == 0 || i + 1 == n)) continue;
    const double ym = y[(i + n - 1) % n];
    const double y0 = y[i];
    const double yp = y[(i + 1) % n];
    if (!(y0 > ym && y0 >= yp)) continue;
    const double denom = ym - 2.0 * y0 + yp;
    double delta = 0.0;
    double mag = y0;
    if (denom < 0.0) {
      delta = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
      mag = y0 - 0.25 * (ym - yp) * delta;
    }
    double t = out.time[i] + delta * dt;
    if (out.periodic) t = detail::wrap_positive(t - out.time.front(), out.time.back() + dt - out.time.front()) + out.time.front();
    found.push_back({i, t, mag});
  }
  return found;
}

/// Peaks above threshold_fraction * global max, greedily kept in order of
/// magnitude when at least min_separation_u away (in u) from every kept
/// peak. Requires `out` to be calibrated.
inline std::vector<Peak> find_peaks(const BeamformOutput& out, const AxisCalibration& cal, double threshold_fraction,
                                    double min_separation_u) {
  if (out.empty()) throw std::invalid_argument("find_peaks: empty beamformer output");
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw std::invalid_argument("find_peaks: threshold_fraction must lie in (0, 1)");
  const auto [lo, hi] = std::minmax_element(out.envelope.begin(), out.envelope.end());
  if (!(*hi - *lo > 1e-12 * std::max(*hi, 1e-300))) throw std::domain_error("find_peaks: no isolated peak");

  auto maxima = local_maxima(out);
  if (maxima.empty()) throw std::domain_error("find_peaks: no isolated peak");
  std::sort(maxima.begin(), maxima.end(), [](const RefinedMax& a, const RefinedMax& b) { return a.magnitude > b.magnitude; });

  const double floor = threshold_fraction * maxima.front().magnitude;
  std::vector<Peak> peaks;
  for (const auto& m : maxima) {
    if (m.magnitude < floor) break;
    Peak p;
    p.time = m.time;
    p.magnitude = m.magnitude;
    p.u = time_to_u(cal, m.time);
    p.azimuth = u_to_azimuth(p.u);
    p.kspace_time = u_to_kspace_time(cal, p.u);
    const bool clear = std::none_of(peaks.begin(), peaks.end(),
                                    [&](const Peak& q) { return std::abs(q.u - p.u) < min_separation_u; });
    if (clear) peaks.push_back(p);
  }
  return peaks;
}

/// Settings for the end-to-end comb beamforming chain.
struct KSpaceConfig {
  int grid_points = 4096;
  std::optional<double> f_lo;  // defaults to the comb's f0
  PropagationOptions propagation{};
  NoiseConfig noise{};
  double threshold_fraction = 0.5;
  std::optional<double> min_separation_u;  // defaults to 2/N
  double calibration_range = 0.0;  // 0: plane-wave probes

  [[nodiscard]] double lo(const CombSpec& comb) const { return f_lo.value_or(comb.f0); }
  [[nodiscard]] double separation(const CombSpec& comb) const {
    return min_separation_u.value_or(2.0 / comb.num_tones);
  }
};

namespace detail {

/// Global maximum of a probe's envelope over one period, refined.
inline double probe_peak_time(const Source& probe, const ArrayGeometry& geom, const CombSpec& comb, double f_lo,
                              PhaseSign sign, int grid_points) {
  const Scene scene{{probe}, PropagationModel::exact_spherical};
  PropagationOptions opts;
  opts.sign = sign;
  const auto phasors = scene_element_phasors(scene, geom, comb, assign_tuning(geom, comb), f_lo, opts);
  const auto grid = make_time_grid(grid_points, comb.period());
  const auto out = beamform_envelope(phasors, grid);
  const auto maxima = local_maxima(out);
  if (maxima.empty()) throw std::domain_error("calibration: probe produced no peak");
  const auto best = std::max_element(maxima.begin(), maxima.end(),
                                     [](const RefinedMax& a, const RefinedMax& b) { return a.magnitude < b.magnitude; });
  return best->time;
}

inline Source calibration_probe(double u, double range, const ArrayGeometry& geom) {
  if (range > 0.0) {
    const DirectionUV dir{u, 0.0};
    return Source::point(geom.origin + range * dir.unit());
  }
  return Source::far_field({u, 0.0});
}

}  // namespace detail

/// Derives the time-to-u map by pushing two synthetic probes through the
/// chain: boresight fixes t0, u = +0.5 fixes the slope sign and scale.
inline AxisCalibration calibrate_axis(const ArrayGeometry& geom, const CombSpec& comb, double f_lo, PhaseSign sign,
                                      int grid_points = 4096, double reference_range = 0.0) {
  comb.validate();
  if (comb.num_tones < 2 || geom.m < 2) throw std::invalid_argument("calibration: undefined for a single-element array");
  const double period = comb.period();
  const double t0 = detail::probe_peak_time(detail::calibration_probe(0.0, reference_range, geom), geom, comb, f_lo,
                                            sign, grid_points);
  const double t_half = detail::probe_peak_time(detail::calibration_probe(0.5, reference_range, geom), geom, comb, f_lo,
                                                sign, grid_points);
  const double offset = detail::wrap_symmetric(t_half - t0, period);
  if (!(std::abs(offset) > 1e-6 * period)) throw std::domain_error("calibration: probes are indistinguishable");

  AxisCalibration cal;
  cal.slope_sign = offset > 0.0 ? 1 : -1;
  cal.t0 = detail::wrap_positive(t0, period);
  cal.delta_f = comb.delta_f;
  cal.u_per_cycle = 0.5 / (std::abs(offset) * comb.delta_f);
  return cal;
}

inline AxisCalibration calibrate_axis(const ArrayGeometry& geom, const CombSpec& comb, const KSpaceConfig& cfg) {
  return calibrate_axis(geom, comb, cfg.lo(comb), cfg.propagation.sign, cfg.grid_points, cfg.calibration_range);
}

/// Everything produced by one pass of the comb beamforming chain.
struct KSpaceRun {
  std::vector<ElementPhasor> phasors;
  AxisCalibration calibration;
  BeamformOutput output;
};

/// Phasors -> envelope over [0, span) -> calibrated axes -> peaks. `span`
/// defaults to one output period.
inline KSpaceRun run_kspace(const Scene& scene, const ArrayGeometry& geom, const CombSpec& comb,
                            const KSpaceConfig& cfg, std::optional<double> span = std::nullopt) {
  if (cfg.grid_points < 3) throw std::invalid_argument("kspace: grid needs at least 3 points");
  KSpaceRun run;
  const auto tuning = assign_tuning(geom, comb);
  run.phasors = scene_element_phasors(scene, geom, comb, tuning, cfg.lo(comb), cfg.propagation);
  run.calibration = calibrate_axis(geom, comb, cfg);
  const auto grid = make_time_grid(cfg.grid_points, span.value_or(comb.period()));
  run.output = beamform_envelope(NoisyPhasors{run.phasors, cfg.noise}, grid);
  apply_calibration(run.output, run.calibration);
  const auto top = *std::max_element(run.output.envelope.begin(), run.output.envelope.end());
  if (top > 0.0)
    run.output.peaks = find_peaks(run.output, run.calibration, cfg.threshold_fraction, cfg.separation(comb));
  return run;
}

struct AzimuthEstimate {
  double azimuth = 0.0;  // degrees
  double magnitude = 0.0;
};

inline std::vector<AzimuthEstimate> estimate_azimuths(const Scene& scene, const ArrayGeometry& geom,
                                                      const CombSpec& comb, const KSpaceConfig& cfg = {}) {
  const auto run = run_kspace(scene, geom, comb, cfg);
  std::vector<AzimuthEstimate> out;
  out.reserve(run.output.peaks.size());
  for (const auto& p : run.output.peaks) out.push_back({p.azimuth, p.magnitude});
  return out;
}

}  // namespace combbeam
