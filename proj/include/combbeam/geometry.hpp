#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace combbeam {

/// Speed of light in vacuum, m/s (exact by SI definition).
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Cartesian position in metres. z is boresight, x horizontal, y vertical.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  [[nodiscard]] double norm() const { return std::hypot(x, y, z); }
  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

enum class ArrayKind { linear, planar };

/// Which edge of a linear array receives the lowest comb tone.
enum class TuningOrder { ascending, descending };

/// Uniform linear or rectangular aperture in the xy plane.
///
/// Element (m, n) sits at origin + (m*dx, n*dy, 0). Elements are stored
/// row-major with n varying fastest, so flat index = m*N + n.
struct ArrayGeometry {
  ArrayKind kind = ArrayKind::linear;
  int m = 1;  // elements along x
  int n = 1;  // elements along y
  double dx = 0.0;
  double dy = 0.0;
  Vec3 origin{};
  TuningOrder tuning_order = TuningOrder::ascending;

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

  [[nodiscard]] int size() const { return m * n; }
  [[nodiscard]] int flat_index(int im, int in) const { return im * n + in; }

  void validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("array: element counts must be >= 1");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("array: dx must be > 0");
    if (kind == ArrayKind::linear && n != 1) throw std::invalid_argument("array: linear arrays have n = 1");
    if (kind == ArrayKind::planar && (!(dy > 0.0) || !std::isfinite(dy)))
      throw std::invalid_argument("array: dy must be > 0 for planar arrays");
    if (!origin.finite()) throw std::invalid_argument("array: origin must be finite");
  }

  static ArrayGeometry linear(int count, double spacing, Vec3 origin = {},
                              TuningOrder order = TuningOrder::ascending) {
    ArrayGeometry g{ArrayKind::linear, count, 1, spacing, 0.0, origin, order};
    g.validate();
    return g;
  }

  static ArrayGeometry planar(int count_x, int count_y, double spacing_x, double spacing_y, Vec3 origin = {}) {
    ArrayGeometry g{ArrayKind::planar, count_x, count_y, spacing_x, spacing_y, origin, TuningOrder::ascending};
    g.validate();
    return g;
  }

  /// Planar grid whose geometric centre sits at (0, 0, 0).
  static ArrayGeometry planar_centered(int count_x, int count_y, double spacing_x, double spacing_y) {
    const Vec3 origin{-0.5 * (count_x - 1) * spacing_x, -0.5 * (count_y - 1) * spacing_y, 0.0};
    return planar(count_x, count_y, spacing_x, spacing_y, origin);
  }

  [[nodiscard]] Vec3 center() const {
    return origin + Vec3{0.5 * (m - 1) * dx, 0.5 * (n - 1) * dy, 0.0};
  }
};

inline std::vector<Vec3> element_positions(const ArrayGeometry& geom) {
  geom.validate();
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(geom.size()));
  for (int im = 0; im < geom.m; ++im)
    for (int in = 0; in < geom.n; ++in)
      out.push_back(geom.origin + Vec3{im * geom.dx, in * geom.dy, 0.0});
  return out;
}

inline double distance(const Vec3& source_pos, const Vec3& element_pos) {
  return (source_pos - element_pos).norm();
}

/// Direction cosines of an arrival direction. u along x, v along y.
struct DirectionUV {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const DirectionUV&, const DirectionUV&) = default;

  [[nodiscard]] bool valid() const { return std::abs(u) <= 1.0 && std::abs(v) <= 1.0 && u * u + v * v <= 1.0 + 1e-15; }
  /// Boresight component w = sqrt(1 - u^2 - v^2).
  [[nodiscard]] double w() const { return std::sqrt(std::max(0.0, 1.0 - u * u - v * v)); }
  [[nodiscard]] Vec3 unit() const { return {u, v, w()}; }
};

/// Azimuth is measured from boresight (z) within the xz plane, elevation
/// toward +y. Both in degrees.
inline DirectionUV azimuth_elevation_to_uv(double az_deg, double el_deg) {
  if (!(std::abs(az_deg) <= 90.0) || !(std::abs(el_deg) <= 90.0))
    throw std::invalid_argument("azimuth/elevation must lie in [-90, 90] degrees");
  const double az = deg_to_rad(az_deg);
  const double el = deg_to_rad(el_deg);
  return {std::sin(az) * std::cos(el), std::sin(el)};
}

/// Unit vector pointing from the origin toward azimuth/elevation (degrees).
inline Vec3 direction_from_az_el(double az_deg, double el_deg) {
  const double az = deg_to_rad(az_deg);
  const double el = deg_to_rad(el_deg);
  return {std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)};
}

/// Azimuth (degrees) of a position seen from `reference`, ignoring y.
inline double azimuth_of(const Vec3& pos, const Vec3& reference = {}) {
  const Vec3 d = pos - reference;
  return rad_to_deg(std::atan2(d.x, d.z));
}

struct PointPlacement {
  Vec3 position;
  friend bool operator==(const PointPlacement&, const PointPlacement&) = default;
};

struct FarFieldPlacement {
  DirectionUV direction;
  friend bool operator==(const FarFieldPlacement&, const FarFieldPlacement&) = default;
};

struct Source {
  std::variant<PointPlacement, FarFieldPlacement> placement;
  double amplitude = 1.0;
  double phase = 0.0;  // radians

  friend bool operator==(const Source&, const Source&) = default;

  [[nodiscard]] bool is_point() const { return std::holds_alternative<PointPlacement>(placement); }
  [[nodiscard]] const Vec3& position() const { return std::get<PointPlacement>(placement).position; }
  [[nodiscard]] const DirectionUV& direction() const { return std::get<FarFieldPlacement>(placement).direction; }

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("source: amplitude must be >= 0");
    if (!std::isfinite(phase)) throw std::invalid_argument("source: phase must be finite");
    if (is_point()) {
      if (!position().finite()) throw std::invalid_argument("source: position must be finite");
    } else if (!direction().valid()) {
      throw std::invalid_argument("source: far-field direction needs |u|,|v| <= 1 and u^2 + v^2 <= 1");
    }
  }

  static Source point(Vec3 pos, double amplitude = 1.0, double phase = 0.0) {
    Source s{PointPlacement{pos}, amplitude, phase};
    s.validate();
    return s;
  }

  static Source far_field(DirectionUV dir, double amplitude = 1.0, double phase = 0.0) {
    Source s{FarFieldPlacement{dir}, amplitude, phase};
    s.validate();
    return s;
  }
};

/// Point source in the horizontal plane at azimuth `az_deg` and `range` metres
/// from `reference`.
inline Source source_from_az_range(double az_deg, double range, double amplitude = 1.0, double phase = 0.0,
                                   Vec3 reference = {}) {
  if (!(range > 0.0) || !std::isfinite(range)) throw std::invalid_argument("source range must be > 0");
  const double az = deg_to_rad(az_deg);
  return Source::point(reference + Vec3{range * std::sin(az), 0.0, range * std::cos(az)}, amplitude, phase);
}

enum class PropagationModel { exact_spherical, far_field };

struct Scene {
  std::vector<Source> sources;
  PropagationModel model = PropagationModel::exact_spherical;

  friend bool operator==(const Scene&, const Scene&) = default;

  void validate() const {
    if (sources.empty()) throw std::invalid_argument("scene: at least one source is required");
    for (const auto& s : sources) s.validate();
  }
};

}  // namespace combbeam
