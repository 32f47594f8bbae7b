#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "combbeam/detail/phase.hpp"
#include "combbeam/geometry.hpp"
#include "combbeam/tuning.hpp"
#include "combbeam/waveform.hpp"

namespace combbeam {

/// Sign of the propagation phase. `delay` gives exp(-j 2 pi d / lambda),
/// `advance` gives exp(+j 2 pi d / lambda).
enum class PhaseSign { delay, advance };

/// Origin of the beamformer time axis for point sources.
///
/// `arrival` measures time from the wavefront's arrival at the array
/// reference point, so only the path difference d_n - d_ref enters the
/// phase. `absolute` keeps the full path d_n, which adds a bulk shift of
/// delta_f * d_ref / c cycles to every peak time.
enum class TimeReference { arrival, absolute };

struct PropagationOptions {
  PhaseSign sign = PhaseSign::delay;
  TimeReference time_reference = TimeReference::arrival;
  bool path_loss = false;  // scale amplitude by 1/d (unity at 1 m)

  friend bool operator==(const PropagationOptions&, const PropagationOptions&) = default;
};

inline double sign_factor(PhaseSign s) { return s == PhaseSign::delay ? -1.0 : 1.0; }

/// One element's received tone after superposing all sources.
struct ElementPhasor {
  int element = 0;
  int tone = 1;
  std::complex<double> value{};
  double tone_hz = 0.0;
  double baseband_hz = 0.0;  // tone_hz - f_LO

  [[nodiscard]] double amplitude() const { return std::abs(value); }
  /// Wrapped to (-pi, pi].
  [[nodiscard]] double phase() const { return value == std::complex<double>{} ? 0.0 : detail::wrap_to_pi(std::arg(value)); }
};

/// Phase of a point source at an element under the spherical model. The
/// optional reference distance is subtracted from the path before
/// converting to cycles.
inline double received_phase_exact(const Source& source, const Vec3& element_pos, double freq, PhaseSign sign,
                                   double reference_distance = 0.0) {
  if (!source.is_point()) throw std::invalid_argument("received_phase_exact: source must be a point source");
  if (!(freq > 0.0)) throw std::invalid_argument("received_phase_exact: frequency must be > 0");
  const double path = distance(source.position(), element_pos) - reference_distance;
  const double cycles = path * freq / kSpeedOfLight;
  const double frac = cycles - std::round(cycles);
  return detail::wrap_to_pi(sign_factor(sign) * detail::kTwoPi * frac + source.phase);
}

/// Plane-wave phase for a source in direction (u, v), referenced to
/// `reference` (the coordinate origin unless given). Elements closer to the
/// source along (u, v, w) see a shorter path.
inline double received_phase_farfield(const Source& source, const Vec3& element_pos, double freq, PhaseSign sign,
                                      const Vec3& reference = {}) {
  if (source.is_point()) throw std::invalid_argument("received_phase_farfield: source must be a far-field source");
  if (!source.direction().valid()) throw std::invalid_argument("received_phase_farfield: u^2 + v^2 > 1");
  if (!(freq > 0.0)) throw std::invalid_argument("received_phase_farfield: frequency must be > 0");
  const double path = -dot(source.direction().unit(), element_pos - reference);
  const double cycles = path * freq / kSpeedOfLight;
  const double frac = cycles - std::round(cycles);
  return detail::wrap_to_pi(sign_factor(sign) * detail::kTwoPi * frac + source.phase);
}

/// Complex field of one source at one element, honouring the scene model
/// and the propagation options. `reference` is the array phase centre.
inline std::complex<double> source_field(const Source& source, PropagationModel model, const Vec3& element_pos,
                                         double freq, const Vec3& reference, const PropagationOptions& opts) {
  double amplitude = source.amplitude;
  double phase = 0.0;
  if (source.is_point() && model == PropagationModel::exact_spherical) {
    const double d = distance(source.position(), element_pos);
    const double d_ref =
        opts.time_reference == TimeReference::arrival ? distance(source.position(), reference) : 0.0;
    phase = received_phase_exact(source, element_pos, freq, opts.sign, d_ref);
    if (opts.path_loss) amplitude /= std::max(d, 1e-12);
  } else if (source.is_point()) {
    const Vec3 rel = source.position() - reference;
    const double r = rel.norm();
    if (!(r > 0.0)) throw std::invalid_argument("far-field model: source coincides with the array reference");
    const Source plane = Source::far_field({rel.x / r, rel.y / r}, source.amplitude, source.phase);
    phase = received_phase_farfield(plane, element_pos, freq, opts.sign, reference);
    if (opts.path_loss) amplitude /= r;
  } else {
    phase = received_phase_farfield(source, element_pos, freq, opts.sign, reference);
  }
  return std::polar(amplitude, phase);
}

/// Received phasor per element of a tuned linear array, superposed over
/// every source in the scene. Each element is an ideal single-tone receiver.
inline std::vector<ElementPhasor> scene_element_phasors(const Scene& scene, const ArrayGeometry& geom,
                                                        const CombSpec& comb, const TuningPlan& tuning, double f_lo,
                                                        const PropagationOptions& opts = {}) {
  scene.validate();
  comb.validate();
  if (geom.kind != ArrayKind::linear) throw std::invalid_argument("scene_element_phasors: linear geometry required");
  if (tuning.size() != static_cast<std::size_t>(geom.size()))
    throw std::invalid_argument("scene_element_phasors: tuning plan does not match the element count");
  tuning.validate(comb.num_tones);

  const auto positions = element_positions(geom);
  std::vector<ElementPhasor> out;
  out.reserve(positions.size());
  for (std::size_t e = 0; e < positions.size(); ++e) {
    ElementPhasor p;
    p.element = static_cast<int>(e);
    p.tone = tuning.tone(e);
    p.tone_hz = tone_frequency(comb, p.tone);
    p.baseband_hz = p.tone_hz - f_lo;
    for (const auto& s : scene.sources)
      p.value += comb.amplitude * source_field(s, scene.model, positions[e], p.tone_hz, geom.origin, opts);
    out.push_back(p);
  }
  return out;
}

/// Additive noise injected per element and per time sample while
/// beamforming. Each sample is circular complex Gaussian with total
/// standard deviation sigma.
struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;

  [[nodiscard]] bool enabled() const { return sigma > 0.0; }
};

/// Phasors bundled with the noise model that the beamformer should apply.
struct NoisyPhasors {
  std::vector<ElementPhasor> phasors;
  NoiseConfig noise;
};

inline NoisyPhasors add_noise(std::vector<ElementPhasor> phasors, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  return {std::move(phasors), NoiseConfig{sigma, seed}};
}

}  // namespace combbeam
