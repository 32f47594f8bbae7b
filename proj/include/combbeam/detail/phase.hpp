#pragma once

#include <cmath>
#include <numbers>

namespace combbeam::detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fractional part of f*t in cycles, in [0, 1). The rounding error of the
/// product is carried through so that large f*t (RF carriers over
/// microseconds) keeps sub-nanocycle accuracy.
inline double cycles_frac(double f, double t) {
  const double p = f * t;
  const double err = std::fma(f, t, -p);
  double frac = (p - std::floor(p)) + err;
  frac -= std::floor(frac);
  return frac;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_to_pi(double a) {
  double r = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

/// Wrap to (-half, half].
inline double wrap_symmetric(double x, double period) {
  double r = std::remainder(x, period);
  if (r <= -0.5 * period) r += period;
  return r;
}

/// Wrap to [0, period).
inline double wrap_positive(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

}  // namespace combbeam::detail
