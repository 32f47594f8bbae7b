#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "combbeam/geometry.hpp"
#include "combbeam/propagation.hpp"

using namespace combbeam;

namespace {

constexpr double kHalfLambda19005 = 299792458.0 / 19.005e9 / 2.0;

}  // namespace

TEST(ElementPositions, LinearThreeElements) {
  const auto pos = element_positions(ArrayGeometry::linear(3, 0.5));
  ASSERT_EQ(pos.size(), 3u);
  EXPECT_EQ(pos[0], (Vec3{0, 0, 0}));
  EXPECT_EQ(pos[1], (Vec3{0.5, 0, 0}));
  EXPECT_EQ(pos[2], (Vec3{1.0, 0, 0}));
}

TEST(ElementPositions, PlanarTwoByTwoIsRowMajor) {
  const auto pos = element_positions(ArrayGeometry::planar(2, 2, 1.0, 1.0));
  ASSERT_EQ(pos.size(), 4u);
  EXPECT_EQ(pos[0], (Vec3{0, 0, 0}));
  EXPECT_EQ(pos[1], (Vec3{0, 1, 0}));
  EXPECT_EQ(pos[2], (Vec3{1, 0, 0}));
  EXPECT_EQ(pos[3], (Vec3{1, 1, 0}));
}

TEST(ElementPositions, TwentyOneElementLastPosition) {
  const auto pos = element_positions(ArrayGeometry::linear(21, kHalfLambda19005));
  EXPECT_NEAR(pos.back().x, 20.0 * kHalfLambda19005, 1e-15);
  EXPECT_NEAR(pos.back().x, 0.1577442, 5e-7);
  for (const auto& p : pos) {
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.z, 0.0);
  }
}

TEST(ArrayGeometry, RejectsInvalidLayouts) {
  EXPECT_THROW(ArrayGeometry::linear(0, 0.1), std::invalid_argument);
  EXPECT_THROW(ArrayGeometry::linear(3, 0.0), std::invalid_argument);
  EXPECT_THROW(ArrayGeometry::planar(2, 2, 0.1, 0.0), std::invalid_argument);
  ArrayGeometry g = ArrayGeometry::linear(3, 0.1);
  g.n = 2;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(ArrayGeometry, CenteredPlanarHasCentreAtOrigin) {
  const auto g = ArrayGeometry::planar_centered(14, 14, 0.01, 0.02);
  const Vec3 c = g.center();
  EXPECT_NEAR(c.x, 0.0, 1e-15);
  EXPECT_NEAR(c.y, 0.0, 1e-15);
}

TEST(Distance, ReferenceSourceToOrigin) {
  EXPECT_NEAR(distance({-6, 0, 6}, {0, 0, 0}), 8.4853, 5e-5);
  EXPECT_NEAR(distance({-6, 0, 6}, {0, 0, 0}) / kSpeedOfLight, 28.3e-9, 0.05e-9);
}

TEST(Distance, CoincidentPointsAreZero) { EXPECT_EQ(distance({1.5, -2, 3}, {1.5, -2, 3}), 0.0); }

TEST(Distance, SourceToLastElement) {
  // sqrt(6.1577442^2 + 36) evaluated independently in long double.
  const long double dx = 6.1577442L;
  const long double ref = std::sqrt(dx * dx + 36.0L);
  EXPECT_NEAR(distance({-6, 0, 6}, {0.1577442, 0, 0}), static_cast<double>(ref), 1e-12);
  EXPECT_NEAR(distance({-6, 0, 6}, {0.1577442, 0, 0}), 8.59755, 5e-6);
}

TEST(Distance, MetricAxiomsOnRandomPoints) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> d(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a{d(rng), d(rng), d(rng)};
    const Vec3 b{d(rng), d(rng), d(rng)};
    const Vec3 c{d(rng), d(rng), d(rng)};
    EXPECT_EQ(distance(a, b), distance(b, a));
    EXPECT_GT(distance(a, b), 0.0);
    EXPECT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST(AzimuthElevation, Boresight) {
  const auto uv = azimuth_elevation_to_uv(0, 0);
  EXPECT_EQ(uv.u, 0.0);
  EXPECT_EQ(uv.v, 0.0);
}

TEST(AzimuthElevation, MinusFortyFive) {
  const auto uv = azimuth_elevation_to_uv(-45, 0);
  EXPECT_NEAR(uv.u, -0.70711, 5e-6);
  EXPECT_EQ(uv.v, 0.0);
}

TEST(AzimuthElevation, HighElevationScene) {
  const auto uv = azimuth_elevation_to_uv(4.3, 63.4);
  EXPECT_NEAR(uv.u, std::sin(4.3 * M_PI / 180) * std::cos(63.4 * M_PI / 180), 1e-15);
  EXPECT_NEAR(uv.u, 0.03357, 5e-6);
  EXPECT_NEAR(uv.v, 0.89415, 5e-6);
  EXPECT_LE(uv.u * uv.u + uv.v * uv.v, 1.0);
}

TEST(AzimuthElevation, RejectsOutOfRangeAngles) {
  EXPECT_THROW(azimuth_elevation_to_uv(91, 0), std::invalid_argument);
  EXPECT_THROW(azimuth_elevation_to_uv(0, -90.5), std::invalid_argument);
}

TEST(SourceFromAzRange, ReferenceSource) {
  const auto s = source_from_az_range(-45, 8.4853);
  EXPECT_NEAR(s.position().x, -6.0, 1e-3);
  EXPECT_EQ(s.position().y, 0.0);
  EXPECT_NEAR(s.position().z, 6.0, 1e-3);
}

TEST(SourceFromAzRange, FiftyThreeDegreesAtTwentyFiveMetres) {
  const auto s = source_from_az_range(53.1, 25);
  EXPECT_NEAR(s.position().x, 19.992, 5e-4);
  EXPECT_NEAR(s.position().z, 15.011, 5e-4);
}

TEST(SourceFromAzRange, Boresight) {
  const auto s = source_from_az_range(0, 1);
  EXPECT_EQ(s.position(), (Vec3{0, 0, 1}));
}

TEST(SourceFromAzRange, RejectsNonPositiveRange) {
  EXPECT_THROW(source_from_az_range(10, 0), std::invalid_argument);
  EXPECT_THROW(source_from_az_range(10, -3), std::invalid_argument);
}

TEST(SourceFromAzRange, AzimuthRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> az(-89.999, 89.999);
  std::uniform_real_distribution<double> logr(-3.0, 6.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = az(rng);
    const double r = std::pow(10.0, logr(rng));
    EXPECT_NEAR(azimuth_of(source_from_az_range(a, r).position()), a, 1e-9);
  }
}

TEST(Source, FarFieldDirectionMustBeVisible) {
  EXPECT_THROW(Source::far_field({0.8, 0.8}), std::invalid_argument);
  EXPECT_THROW(Source::far_field({1.1, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(Source::far_field({1.0, 0.0}));
  EXPECT_THROW(Source::point({0, 0, 1}, -1.0), std::invalid_argument);
}

TEST(Scene, NeedsAtLeastOneSource) {
  const Scene s{};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(FarFieldLimit, ExactModelConvergesToPlaneWave) {
  const auto geom = ArrayGeometry::linear(21, kHalfLambda19005);
  const auto pos = element_positions(geom);
  const double f = 19.003e9;
  const double az = -45.0;
  const auto point = source_from_az_range(az, 1e6);
  const auto dir = azimuth_elevation_to_uv(az, 0);
  const auto plane = Source::far_field(dir);
  const double ref = distance(point.position(), geom.origin);
  double worst = 0.0;
  for (const auto& p : pos) {
    const double exact = received_phase_exact(point, p, f, PhaseSign::delay, ref);
    const double ff = received_phase_farfield(plane, p, f, PhaseSign::delay, geom.origin);
    worst = std::max(worst, std::abs(std::remainder(exact - ff, 2 * M_PI)) / (2 * M_PI));
  }
  EXPECT_LT(worst, 1e-3);
}
