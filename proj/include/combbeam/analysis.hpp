#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "combbeam/conventional.hpp"
#include "combbeam/detail/parallel.hpp"
#include "combbeam/detail/phase.hpp"
#include "combbeam/kspace.hpp"

namespace combbeam {

struct ReferencePeak {
  double time = 0.0;
  double magnitude = 0.0;
};

namespace detail {

inline long double direct_envelope(std::span<const ElementPhasor> phasors, long double t) {
  std::complex<long double> acc{};
  for (const auto& p : phasors) {
    const long double arg = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(p.baseband_hz) * t +
                            static_cast<long double>(std::arg(p.value));
    acc += std::polar(static_cast<long double>(std::abs(p.value)), arg);
  }
  return std::abs(acc);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Reference peak by exhaustive scan of one output period on
/// 4096 * oversample points, then golden-section refinement around the best
/// sample. Evaluates the tone sum directly (the refinement in long double)
/// and shares no code with beamform_envelope.
inline ReferencePeak brute_force_peak(std::span<const ElementPhasor> phasors, int oversample) {
  if (oversample < 1) throw std::invalid_argument("brute_force_peak: oversample must be >= 1");
  if (phasors.empty()) throw std::invalid_argument("brute_force_peak: no phasors");
  double spacing = 0.0;
  for (std::size_t i = 0; i < phasors.size(); ++i)
    for (std::size_t j = i + 1; j < phasors.size(); ++j) {
      const double d = std::abs(phasors[i].baseband_hz - phasors[j].baseband_hz);
      if (d > 0.0 && (spacing == 0.0 || d < spacing)) spacing = d;
    }
  if (spacing == 0.0) return {0.0, static_cast<double>(detail::direct_envelope(phasors, 0.0L))};

  const long double period = 1.0L / spacing;
  const long points = 4096L * oversample;
  const long double dt = period / points;
  // The coarse scan runs in double; only the refinement needs long double.
  std::vector<double> freq(phasors.size()), phase(phasors.size()), amp(phasors.size());
  for (std::size_t k = 0; k < phasors.size(); ++k) {
    freq[k] = 2.0 * std::numbers::pi * phasors[k].baseband_hz;
    phase[k] = std::arg(phasors[k].value);
    amp[k] = std::abs(phasors[k].value);
  }
  long best = 0;
  double best_val = -1.0;
  for (long i = 0; i < points; ++i) {
    const double t = static_cast<double>(dt * i);
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < phasors.size(); ++k) {
      const double arg = freq[k] * t + phase[k];
      re += amp[k] * std::cos(arg);
      im += amp[k] * std::sin(arg);
    }
    const double v = std::hypot(re, im);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  const long double phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = dt * best - dt;
  long double b = dt * best + dt;
  long double c = b - phi * (b - a);
  long double d = a + phi * (b - a);
  long double fc = detail::direct_envelope(phasors, c);
  long double fd = detail::direct_envelope(phasors, d);
  for (int it = 0; it < 200 && (b - a) > 1e-6L * dt; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = detail::direct_envelope(phasors, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = detail::direct_envelope(phasors, d);
    }
  }
  const long double t = 0.5L * (a + b);
  long double wrapped = std::fmod(t, period);
  if (wrapped < 0) wrapped += period;
  return {static_cast<double>(wrapped), static_cast<double>(detail::direct_envelope(phasors, t))};
}

/// Half-power (-3 dB) width of the peak nearest `peak_time`, in u.
inline double peak_width_u(const BeamformOutput& out, const AxisCalibration& cal, double peak_time) {
  const auto& y = out.envelope;
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("peak_width_u: output too short");
  const double dt = out.time[1] - out.time[0];
  auto idx = static_cast<long>(std::lround((peak_time - out.time.front()) / dt));
  idx = ((idx % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
  // climb to the local sample maximum
  const auto at = [&](long i) {
    if (out.periodic) return y[static_cast<std::size_t>(((i % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n))];
    if (i < 0 || i >= static_cast<long>(n)) return 0.0;
    return y[static_cast<std::size_t>(i)];
  };
  while (at(idx + 1) > at(idx)) ++idx;
  while (at(idx - 1) > at(idx)) --idx;
  const double level = at(idx) / std::numbers::sqrt2;
  const long limit = static_cast<long>(n);

  long r = idx;
  while (r - idx < limit && at(r) >= level) ++r;
  long l = idx;
  while (idx - l < limit && at(l) >= level) --l;
  if (r - idx >= limit || idx - l >= limit) throw std::domain_error("peak_width_u: no half-power crossing");
  // linear interpolation of both crossings, in samples
  const double right = static_cast<double>(r - 1) + (at(r - 1) - level) / (at(r - 1) - at(r));
  const double left = static_cast<double>(l + 1) - (at(l + 1) - level) / (at(l + 1) - at(l));
  return (right - left) * dt * cal.u_per_cycle * cal.delta_f;
}

/// Level of the strongest sidelobe adjacent to the global maximum, in dB
/// relative to that maximum.
inline double first_sidelobe_db(const BeamformOutput& out) {
  const auto maxima = local_maxima(out);
  if (maxima.size() < 2) throw std::domain_error("first_sidelobe_db: need a main lobe and a sidelobe");
  const auto main = std::max_element(maxima.begin(), maxima.end(),
                                     [](const auto& a, const auto& b) { return a.magnitude < b.magnitude; });
  const std::size_t n = out.envelope.size();
  const auto circ = [&](std::size_t a, std::size_t b) {
    const std::size_t d = a > b ? a - b : b - a;
    return out.periodic ? std::min(d, n - d) : d;
  };
  double best = 0.0;
  std::size_t nearest = n;
  for (const auto& m : maxima) {
    if (m.index == main->index) continue;
    const std::size_t d = circ(m.index, main->index);
    if (d < nearest) {
      nearest = d;
      best = m.magnitude;
    } else if (d == nearest) {
      best = std::max(best, m.magnitude);
    }
  }
  return 20.0 * std::log10(best / main->magnitude);
}

/// True azimuth of a source seen from the array reference point.
inline double true_azimuth(const Source& s, const ArrayGeometry& geom) {
  if (s.is_point()) return azimuth_of(s.position(), geom.origin);
  return u_to_azimuth(s.direction().u);
}

struct SweepRow {
  double value = 0.0;
  double az_error_deg = 0.0;
  double peak_mag = 0.0;
  double width_u = 0.0;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepRow> rows;
};

/// Angle error, magnitude and width of the strongest peak for a scene whose
/// first source is the target.
inline SweepRow single_source_metrics(const Scene& scene, const ArrayGeometry& geom, const CombSpec& comb,
                                      const KSpaceConfig& cfg, double value) {
  const auto run = run_kspace(scene, geom, comb, cfg);
  if (run.output.peaks.empty()) throw std::domain_error("sweep: no peak found");
  const auto& top = run.output.peaks.front();
  SweepRow row;
  row.value = value;
  row.az_error_deg = top.azimuth - true_azimuth(scene.sources.front(), geom);
  row.peak_mag = top.magnitude;
  row.width_u = peak_width_u(run.output, run.calibration, top.time);
  return row;
}

/// k-space angle error of a single point source at azimuth `az_deg` as a
/// function of range.
inline SweepResult nearfield_error_sweep(double az_deg, std::span<const double> ranges, const ArrayGeometry& geom,
                                         const CombSpec& comb, const KSpaceConfig& cfg = {}) {
  SweepResult result{"range_m", {}};
  result.rows.resize(ranges.size());
  for (double r : ranges)
    if (!(r > 0.0)) throw std::invalid_argument("nearfield_error_sweep: ranges must be > 0");
  detail::parallel_for(ranges.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Scene scene{{source_from_az_range(az_deg, ranges[i], 1.0, 0.0, geom.origin)},
                        PropagationModel::exact_spherical};
      result.rows[i] = single_source_metrics(scene, geom, comb, cfg, ranges[i]);
    }
  }, 1);
  return result;
}

struct MethodPair {
  double kspace_az = 0.0;
  double conventional_az = 0.0;
  double difference = 0.0;  // |kspace - conventional|, degrees
};

struct MethodComparison {
  std::vector<MethodPair> pairs;
  std::size_t kspace_peaks = 0;
  std::size_t conventional_peaks = 0;

  [[nodiscard]] bool count_mismatch() const { return kspace_peaks != conventional_peaks; }
};

/// Runs the comb beamformer and a narrowband conventional scan at the comb
/// centre frequency on the same scene, pairing peaks by nearest azimuth.
inline MethodComparison compare_methods(const Scene& scene, const ArrayGeometry& geom, const CombSpec& comb,
                                        const KSpaceConfig& cfg = {}, int scan_points = 20001) {
  scene.validate();
  const auto run = run_kspace(scene, geom, comb, cfg);
  const double freq = comb.center_frequency();
  PropagationOptions conv_opts = cfg.propagation;
  conv_opts.sign = PhaseSign::advance;
  const auto snap = narrowband_snapshot(scene, geom, freq, conv_opts);
  const auto map = beamform_conventional(snap, geom, wavelength(freq), ElementPattern::isotropic(),
                                         UVGrid::linear_scan(scan_points));
  const auto conv = conventional_peaks(map, cfg.threshold_fraction, cfg.separation(comb));

  MethodComparison cmp;
  cmp.kspace_peaks = run.output.peaks.size();
  cmp.conventional_peaks = conv.size();
  std::vector<bool> used(conv.size(), false);
  for (const auto& p : run.output.peaks) {
    std::size_t best = conv.size();
    for (std::size_t j = 0; j < conv.size(); ++j) {
      if (used[j]) continue;
      if (best == conv.size() || std::abs(conv[j].azimuth - p.azimuth) < std::abs(conv[best].azimuth - p.azimuth))
        best = j;
    }
    if (best == conv.size()) break;
    used[best] = true;
    cmp.pairs.push_back({p.azimuth, conv[best].azimuth, std::abs(p.azimuth - conv[best].azimuth)});
  }
  return cmp;
}

/// Coherent integration gain of the comb beamformer, in dB.
///
/// Per trial, complex Gaussian noise (std sigma per element and sample) is
/// drawn for every element. Noise power is estimated from the median of the
/// noise envelope (Rayleigh: P = median^2 / ln 2), excluding +-2 resolution
/// cells around the noiseless peaks for the summed output. Signal power is
/// the noisy power at the noiseless peak sample minus that floor (averaged
/// over all samples when the noiseless envelope is flat). Element 0
/// carries a constant-envelope tone, so its signal power is the mean noisy
/// power over all samples minus its own floor. Powers are averaged over
/// trials before forming the ratio.
inline double snr_gain(const Scene& scene, const ArrayGeometry& geom, const CombSpec& comb, KSpaceConfig cfg,
                       double sigma, int trials, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("snr_gain: sigma must be > 0");
  if (trials < 10) throw std::invalid_argument("snr_gain: at least 10 trials are required");
  const auto phasors = scene_element_phasors(scene, geom, comb, assign_tuning(geom, comb), cfg.lo(comb),
                                             cfg.propagation);
  const auto grid = make_time_grid(cfg.grid_points, comb.period());
  struct {
    std::vector<ElementPhasor> phasors;
    BeamformOutput output;
  } clean{phasors, beamform_envelope(phasors, grid)};
  const auto& env = clean.output.envelope;
  const std::size_t g = env.size();
  const std::size_t elements = clean.phasors.size();
  const std::size_t peak_idx =
      static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());

  // Clean complex output and element-0 trace on the grid.
  std::vector<std::complex<double>> clean_sum(g);
  std::vector<std::complex<double>> clean_e0(g);
  const double ref = detail::min_baseband(clean.phasors);
  for (std::size_t i = 0; i < g; ++i) {
    clean_sum[i] = beamform_sum(clean.phasors, clean.output.time[i]);
    const auto& p0 = clean.phasors.front();
    clean_e0[i] = p0.value * std::polar(1.0, detail::kTwoPi * detail::cycles_frac(p0.baseband_hz - ref, clean.output.time[i]));
  }

  // A flat envelope has no isolated peak; its level is measured over all samples.
  const double env_min = *std::min_element(env.begin(), env.end());
  const bool flat = env[peak_idx] - env_min <= 1e-9 * env[peak_idx];

  // Samples excluded from the output noise-floor estimate.
  std::vector<bool> excluded(g, false);
  const auto cell = static_cast<long>(std::ceil(static_cast<double>(g) / static_cast<double>(comb.num_tones)));
  const auto exclude_around = [&](std::size_t centre) {
    for (long k = -2 * cell; k <= 2 * cell; ++k)
      excluded[static_cast<std::size_t>(((static_cast<long>(centre) + k) % static_cast<long>(g) + static_cast<long>(g)) %
                                        static_cast<long>(g))] = true;
  };
  exclude_around(peak_idx);
  const double top = env[peak_idx];
  for (const auto& m : local_maxima(clean.output))
    if (m.magnitude >= cfg.threshold_fraction * top) exclude_around(m.index);
  // Too few tones for an isolated peak: keep every sample.
  if (static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), false)) < g / 4)
    std::fill(excluded.begin(), excluded.end(), false);

  struct TrialPowers {
    double out_peak = 0.0;
    double out_noise = 0.0;
    double e0_peak = 0.0;
    double e0_noise = 0.0;
  };
  std::vector<TrialPowers> per_trial(static_cast<std::size_t>(trials));

  const auto median_power = [](std::vector<double>& mags) {
    const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    return (*mid) * (*mid) / std::numbers::ln2;
  };

  detail::parallel_for(static_cast<std::size_t>(trials), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      std::mt19937_64 rng(detail::splitmix64(detail::splitmix64(seed) + k));
      std::normal_distribution<double> gauss(0.0, sigma / std::sqrt(2.0));
      std::vector<double> out_noise_mag;
      std::vector<double> e0_noise_mag;
      out_noise_mag.reserve(g);
      e0_noise_mag.reserve(g);
      std::complex<double> out_at_peak{};
      double e0_power = 0.0;
      double out_power = 0.0;
      for (std::size_t i = 0; i < g; ++i) {
        std::complex<double> sum{};
        std::complex<double> first{};
        for (std::size_t el = 0; el < elements; ++el) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          if (el == 0) first = {re, im};
          sum += std::complex<double>{re, im};
        }
        if (!excluded[i]) out_noise_mag.push_back(std::abs(sum));
        e0_noise_mag.push_back(std::abs(first));
        e0_power += std::norm(clean_e0[i] + first);
        out_power += std::norm(clean_sum[i] + sum);
        if (i == peak_idx) out_at_peak = clean_sum[i] + sum;
      }
      auto& tp = per_trial[k];
      tp.out_noise = median_power(out_noise_mag);
      tp.e0_noise = median_power(e0_noise_mag);
      tp.out_peak = flat ? out_power / static_cast<double>(g) : std::norm(out_at_peak);
      tp.e0_peak = e0_power / static_cast<double>(g);
    }
  }, 1);

  TrialPowers mean;
  for (const auto& tp : per_trial) {
    mean.out_peak += tp.out_peak;
    mean.out_noise += tp.out_noise;
    mean.e0_peak += tp.e0_peak;
    mean.e0_noise += tp.e0_noise;
  }
  const double out_snr = (mean.out_peak - mean.out_noise) / mean.out_noise;
  const double e0_snr = (mean.e0_peak - mean.e0_noise) / mean.e0_noise;
  if (!(out_snr > 0.0) || !(e0_snr > 0.0)) throw std::domain_error("snr_gain: signal below the noise floor");
  return 10.0 * std::log10(out_snr / e0_snr);
}

}  // namespace combbeam
