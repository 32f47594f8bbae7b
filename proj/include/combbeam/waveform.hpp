#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "combbeam/detail/phase.hpp"
#include "combbeam/geometry.hpp"

namespace combbeam {

/// Uniformly weighted frequency comb. Tone n (1-based) sits at f0 + n*delta_f,
/// so f0 itself is one step below the lowest tone.
struct CombSpec {
  double f0 = 0.0;       // Hz
  double delta_f = 0.0;  // Hz
  int num_tones = 1;
  double duration = 0.0;  // s
  double amplitude = 1.0;

  friend bool operator==(const CombSpec&, const CombSpec&) = default;

  void validate() const {
    if (!(delta_f > 0.0) || !std::isfinite(delta_f)) throw std::invalid_argument("comb: delta_f must be > 0");
    if (num_tones < 1) throw std::invalid_argument("comb: num_tones must be >= 1");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("comb: duration must be > 0");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("comb: amplitude must be >= 0");
    if (!std::isfinite(f0) || !(f0 + delta_f > 0.0))
      throw std::invalid_argument("comb: every tone frequency must be > 0");
  }

  /// Repetition period of the summed output, 1/delta_f.
  [[nodiscard]] double period() const { return 1.0 / delta_f; }

  [[nodiscard]] double max_frequency() const { return f0 + num_tones * delta_f; }

  /// Mean of the tone frequencies.
  [[nodiscard]] double center_frequency() const { return f0 + 0.5 * (num_tones + 1) * delta_f; }
};

inline double tone_frequency(const CombSpec& comb, int n) {
  if (n < 1 || n > comb.num_tones) throw std::out_of_range("tone index must lie in 1..num_tones");
  return comb.f0 + n * comb.delta_f;
}

inline double wavelength(double freq) {
  if (!(freq > 0.0)) throw std::invalid_argument("wavelength: frequency must be > 0");
  return kSpeedOfLight / freq;
}

inline double wavelength(const CombSpec& comb, int n) { return wavelength(tone_frequency(comb, n)); }

/// Transmitted comb A * sum_n cos(2 pi (f0 + n df) t). Not windowed to [0, T).
inline double comb_value(const CombSpec& comb, double t) {
  double acc = 0.0;
  for (int n = 1; n <= comb.num_tones; ++n)
    acc += std::cos(detail::kTwoPi * detail::cycles_frac(tone_frequency(comb, n), t));
  return comb.amplitude * acc;
}

struct SpectrumLine {
  double frequency;  // Hz
  double magnitude;  // single-sided amplitude
};

/// Samples the comb at `sample_rate` and returns its `num_tones` strongest
/// DFT bins (positive frequencies), ordered by frequency.
inline std::vector<SpectrumLine> comb_spectrum_lines(const CombSpec& comb, double sample_rate, int num_samples) {
  comb.validate();
  if (!(sample_rate > 2.0 * comb.max_frequency()))
    throw std::invalid_argument("comb_spectrum_lines: sample rate must exceed twice the highest tone");
  if (num_samples < 2) throw std::invalid_argument("comb_spectrum_lines: need at least 2 samples");

  std::vector<double> x(static_cast<std::size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) x[static_cast<std::size_t>(i)] = comb_value(comb, i / sample_rate);

  const int half = num_samples / 2;
  std::vector<SpectrumLine> bins;
  bins.reserve(static_cast<std::size_t>(half) + 1);
  for (int k = 0; k <= half; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < num_samples; ++i) {
      // (k*i) mod N keeps the twiddle argument small.
      const double a = -detail::kTwoPi * static_cast<double>((static_cast<long long>(k) * i) % num_samples) / num_samples;
      acc += x[static_cast<std::size_t>(i)] * std::complex<double>(std::cos(a), std::sin(a));
    }
    const double scale = (k == 0 || 2 * k == num_samples) ? 1.0 : 2.0;
    bins.push_back({k * sample_rate / num_samples, scale * std::abs(acc) / num_samples});
  }

  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(comb.num_tones), bins.size());
  std::partial_sort(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(keep), bins.end(),
                    [](const SpectrumLine& a, const SpectrumLine& b) { return a.magnitude > b.magnitude; });
  bins.resize(keep);
  std::sort(bins.begin(), bins.end(),
            [](const SpectrumLine& a, const SpectrumLine& b) { return a.frequency < b.frequency; });
  return bins;
}

}  // namespace combbeam
