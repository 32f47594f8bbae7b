#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "combbeam/detail/parallel.hpp"
#include "combbeam/detail/phase.hpp"
#include "combbeam/geometry.hpp"
#include "combbeam/propagation.hpp"

namespace combbeam {

struct SteeringVector {
  std::vector<std::complex<double>> weights;  // flat index m*N + n
  DirectionUV direction;
  double wavelength = 0.0;
};

/// Entry (m, n) = exp(-j (2 pi / lambda) (m dx u + n dy v)), relative to
/// element (0, 0).
inline SteeringVector steering_vector(const ArrayGeometry& geom, double u, double v, double lambda) {
  geom.validate();
  const DirectionUV dir{u, v};
  if (!dir.valid()) throw std::invalid_argument("steering_vector: direction must satisfy u^2 + v^2 <= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("steering_vector: wavelength must be > 0");
  SteeringVector sv{{}, dir, lambda};
  sv.weights.reserve(static_cast<std::size_t>(geom.size()));
  for (int m = 0; m < geom.m; ++m)
    for (int n = 0; n < geom.n; ++n) {
      const double cycles = (m * geom.dx * u + n * geom.dy * v) / lambda;
      sv.weights.push_back(std::polar(1.0, -detail::kTwoPi * cycles));
    }
  return sv;
}

/// Element pattern E(u, v): isotropic, or cos(theta)^q.
struct ElementPattern {
  enum class Kind { isotropic, cosine_power };
  Kind kind = Kind::isotropic;
  double exponent = 0.0;

  static ElementPattern isotropic() { return {}; }
  static ElementPattern cosine(double q) {
    if (!(q >= 0.0)) throw std::invalid_argument("element pattern: exponent must be >= 0");
    return {Kind::cosine_power, q};
  }

  [[nodiscard]] double operator()(double u, double v) const {
    if (kind == Kind::isotropic) return 1.0;
    return std::pow(DirectionUV{u, v}.w(), exponent);
  }
};

/// Scan grid; visible directions only (u^2 + v^2 <= 1) get a value.
struct UVGrid {
  std::vector<double> u;
  std::vector<double> v{0.0};

  static UVGrid linear_scan(int points) {
    if (points < 2) throw std::invalid_argument("UVGrid: need at least 2 points");
    UVGrid g;
    g.u.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g.u[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (points - 1);
    return g;
  }
};

/// |b(u, v)| over a UVGrid, stored u-major: value(iu, iv) = magnitude[iu * v.size() + iv].
/// Invisible directions are left at 0.
struct PowerMap {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> magnitude;

  [[nodiscard]] double at(std::size_t iu, std::size_t iv) const { return magnitude[iu * v.size() + iv]; }
};

/// Single-direction beamformer output E(u,v) * sum_mn s_mn exp(+j k (m dx u + n dy v)).
inline std::complex<double> beamform_at(std::span<const std::complex<double>> snapshot, const ArrayGeometry& geom,
                                        double lambda, const ElementPattern& pattern, double u, double v) {
  if (snapshot.size() != static_cast<std::size_t>(geom.size()))
    throw std::invalid_argument("beamform: snapshot length must equal the element count");
  std::complex<double> acc{};
  for (int m = 0; m < geom.m; ++m)
    for (int n = 0; n < geom.n; ++n) {
      const double cycles = (m * geom.dx * u + n * geom.dy * v) / lambda;
      acc += snapshot[static_cast<std::size_t>(geom.flat_index(m, n))] * std::polar(1.0, detail::kTwoPi * cycles);
    }
  return pattern(u, v) * acc;
}

/// Spatial Fourier beamformer over a grid. The double sum is factored:
/// the n-sum is computed once per v and reused for every u.
inline PowerMap beamform_conventional(std::span<const std::complex<double>> snapshot, const ArrayGeometry& geom,
                                      double lambda, const ElementPattern& pattern, const UVGrid& grid) {
  geom.validate();
  if (snapshot.size() != static_cast<std::size_t>(geom.size()))
    throw std::invalid_argument("beamform_conventional: snapshot length must equal the element count");
  if (!(lambda > 0.0)) throw std::invalid_argument("beamform_conventional: wavelength must be > 0");

  PowerMap map{grid.u, grid.v, std::vector<double>(grid.u.size() * grid.v.size(), 0.0)};
  const auto M = static_cast<std::size_t>(geom.m);
  const auto N = static_cast<std::size_t>(geom.n);

  // inner[iv][m] = sum_n s_mn exp(j k n dy v)
  std::vector<std::vector<std::complex<double>>> inner(grid.v.size(), std::vector<std::complex<double>>(M));
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv)
    for (std::size_t m = 0; m < M; ++m) {
      std::complex<double> acc{};
      for (std::size_t n = 0; n < N; ++n)
        acc += snapshot[m * N + n] *
               std::polar(1.0, detail::kTwoPi * static_cast<double>(n) * geom.dy * grid.v[iv] / lambda);
      inner[iv][m] = acc;
    }

  detail::parallel_for(grid.u.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t iu = b; iu < e; ++iu)
      for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
        const double u = grid.u[iu];
        const double v = grid.v[iv];
        if (u * u + v * v > 1.0 + 1e-12) continue;
        std::complex<double> acc{};
        for (std::size_t m = 0; m < M; ++m)
          acc += inner[iv][m] * std::polar(1.0, detail::kTwoPi * static_cast<double>(m) * geom.dx * u / lambda);
        map.magnitude[iu * grid.v.size() + iv] = pattern(u, v) * std::abs(acc);
      }
  }, 64);
  return map;
}

/// Narrowband snapshot of a scene at one frequency. With the default
/// advance sign a far-field source at (u, v) reproduces the steering
/// vector, so beamform_conventional peaks at (u, v).
inline std::vector<std::complex<double>> narrowband_snapshot(const Scene& scene, const ArrayGeometry& geom,
                                                             double freq, PropagationOptions opts = {PhaseSign::advance}) {
  scene.validate();
  const auto positions = element_positions(geom);
  std::vector<std::complex<double>> snap(positions.size());
  for (std::size_t e = 0; e < positions.size(); ++e)
    for (const auto& s : scene.sources) snap[e] += source_field(s, scene.model, positions[e], freq, geom.origin, opts);
  return snap;
}

/// Per-element wrapped phase in degrees, (-180, 180], flat index m*N + n.
struct PhaseMap {
  int m = 0;
  int n = 0;
  std::vector<Vec3> positions;
  std::vector<double> phase_deg;

  [[nodiscard]] double at(int im, int in) const { return phase_deg[static_cast<std::size_t>(im * n + in)]; }
};

/// Phase of the exact-model field (full path, no time referencing).
inline PhaseMap phase_map(const ArrayGeometry& geom, const Source& source, double freq,
                          PhaseSign sign = PhaseSign::delay) {
  source.validate();
  PhaseMap pm{geom.m, geom.n, element_positions(geom), {}};
  pm.phase_deg.reserve(pm.positions.size());
  for (const auto& pos : pm.positions) {
    const double ph = source.is_point() ? received_phase_exact(source, pos, freq, sign)
                                        : received_phase_farfield(source, pos, freq, sign, geom.origin);
    double deg = rad_to_deg(ph);
    if (deg <= -180.0) deg += 360.0;
    pm.phase_deg.push_back(deg);
  }
  return pm;
}

/// Row-then-column unwrapping: the m = 0 row is unwrapped along n, then
/// every column along m. Throws if the result still has a jump of 180
/// degrees or more along n, which means the aperture is undersampled.
inline std::vector<double> unwrap_phase_map(const PhaseMap& pm) {
  const auto idx = [&](int im, int in) { return static_cast<std::size_t>(im * pm.n + in); };
  const auto step = [](double from, double to) { return detail::wrap_symmetric(to - from, 360.0); };
  std::vector<double> out(pm.phase_deg.size());
  out[0] = pm.phase_deg[0];
  for (int in = 1; in < pm.n; ++in) out[idx(0, in)] = out[idx(0, in - 1)] + step(pm.at(0, in - 1), pm.at(0, in));
  for (int in = 0; in < pm.n; ++in)
    for (int im = 1; im < pm.m; ++im)
      out[idx(im, in)] = out[idx(im - 1, in)] + step(pm.at(im - 1, in), pm.at(im, in));
  for (int im = 1; im < pm.m; ++im)
    for (int in = 1; in < pm.n; ++in)
      if (std::abs(out[idx(im, in)] - out[idx(im, in - 1)]) >= 180.0)
        throw std::domain_error("phase unwrapping failed: adjacent elements differ by >= 180 degrees");
  return out;
}

/// Mean absolute unwrapped phase step between neighbours, degrees.
struct PhaseSteps {
  double horizontal = 0.0;  // along m (x)
  double vertical = 0.0;    // along n (y)
};

inline PhaseSteps mean_phase_steps(const PhaseMap& pm) {
  const auto un = unwrap_phase_map(pm);
  const auto at = [&](int im, int in) { return un[static_cast<std::size_t>(im * pm.n + in)]; };
  PhaseSteps s;
  long hcount = 0;
  long vcount = 0;
  for (int im = 0; im < pm.m; ++im)
    for (int in = 0; in < pm.n; ++in) {
      if (im + 1 < pm.m) {
        s.horizontal += std::abs(at(im + 1, in) - at(im, in));
        ++hcount;
      }
      if (in + 1 < pm.n) {
        s.vertical += std::abs(at(im, in + 1) - at(im, in));
        ++vcount;
      }
    }
  if (hcount > 0) s.horizontal /= static_cast<double>(hcount);
  if (vcount > 0) s.vertical /= static_cast<double>(vcount);
  return s;
}

/// Deviation of the unwrapped phase front from its least-squares plane.
struct CurvatureProfile {
  int m = 0;
  int n = 0;
  std::vector<double> residual_cycles;  // flat index m*N + n
  double gradient_x = 0.0;  // cycles per metre of the fitted plane
  double gradient_y = 0.0;

  [[nodiscard]] double max_abs_residual() const {
    double r = 0.0;
    for (double x : residual_cycles) r = std::max(r, std::abs(x));
    return r;
  }
};

inline CurvatureProfile curvature_profile(const ArrayGeometry& geom, const Source& source, double freq,
                                          PhaseSign sign = PhaseSign::delay) {
  const auto pm = phase_map(geom, source, freq, sign);
  const auto un = unwrap_phase_map(pm);
  const auto rows = static_cast<Eigen::Index>(un.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd b(rows);
  const Vec3 c = geom.center();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& p = pm.positions[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = p.x - c.x;
    a(i, 2) = p.y - c.y;
    b(i) = un[static_cast<std::size_t>(i)] / 360.0;
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * coef;
  CurvatureProfile out{geom.m, geom.n, std::vector<double>(res.data(), res.data() + res.size()), coef(1), coef(2)};
  return out;
}

/// Peak directions of a linear-array conventional scan, strongest first.
struct ConventionalPeak {
  double u = 0.0;
  double azimuth = 0.0;
  double magnitude = 0.0;
};

inline std::vector<ConventionalPeak> conventional_peaks(const PowerMap& map, double threshold_fraction,
                                                        double min_separation_u) {
  const auto& y = map.magnitude;
  const std::size_t nv = map.v.size();
  if (nv != 1) throw std::invalid_argument("conventional_peaks: expects a u-only scan");
  std::vector<ConventionalPeak> found;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    double delta = 0.0;
    double mag = y[i];
    if (denom < 0.0) {
      delta = std::clamp(0.5 * (y[i - 1] - y[i + 1]) / denom, -0.5, 0.5);
      mag = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta;
    }
    const double du = map.u[i + 1] - map.u[i];
    const double u = std::clamp(map.u[i] + delta * du, -1.0, 1.0);
    found.push_back({u, rad_to_deg(std::asin(u)), mag});
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.magnitude > b.magnitude; });
  std::vector<ConventionalPeak> kept;
  if (found.empty()) return kept;
  const double floor = threshold_fraction * found.front().magnitude;
  for (const auto& p : found) {
    if (p.magnitude < floor) break;
    if (std::none_of(kept.begin(), kept.end(), [&](const auto& q) { return std::abs(q.u - p.u) < min_separation_u; }))
      kept.push_back(p);
  }
  return kept;
}

}  // namespace combbeam
