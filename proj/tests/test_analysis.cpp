#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "combbeam/analysis.hpp"

using namespace combbeam;

namespace {

const CombSpec kComb{19.0008e9, 0.2e6, 21, 5e-6, 1.0};
const ArrayGeometry kArray = ArrayGeometry::linear(21, 299792458.0 / 19.005e9 / 2);

KSpaceConfig reference_config() {
  KSpaceConfig cfg;
  cfg.f_lo = 19e9;
  return cfg;
}

std::vector<ElementPhasor> phasors_of(const Scene& s, const ArrayGeometry& g = kArray, const CombSpec& c = kComb) {
  return scene_element_phasors(s, g, c, assign_tuning(g, c), 19e9);
}

// Golden-section maximisation of the envelope on [a, b].
double refine_max(std::span<const ElementPhasor> ph, double a, double b) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = std::abs(beamform_sum(ph, x1));
  double f2 = std::abs(beamform_sum(ph, x2));
  for (int i = 0; i < 200 && b - a > 1e-16; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = std::abs(beamform_sum(ph, x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = std::abs(beamform_sum(ph, x1));
    }
  }
  return std::max(f1, f2);
}

double circular_distance(double a, double b, double period) {
  const double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace

TEST(BruteForcePeak, AlignedTonesPeakAtZero) {
  std::vector<ElementPhasor> ph;
  for (int k = 1; k <= 21; ++k) {
    ElementPhasor p;
    p.tone = k;
    p.value = {1.0, 0.0};
    p.baseband_hz = k * 0.2e6;
    ph.push_back(p);
  }
  const auto ref = brute_force_peak(ph, 2);
  EXPECT_LT(circular_distance(ref.time, 0.0, 5e-6), 1e-12);
  EXPECT_NEAR(ref.magnitude, 21.0, 1e-9);
}

TEST(BruteForcePeak, AgreesWithInterpolatedPeakOnReferenceScene) {
  const Scene s{{Source::point({-6, 0, 6})}};
  const auto ref = brute_force_peak(phasors_of(s), 16);
  const auto run = run_kspace(s, kArray, kComb, reference_config());
  EXPECT_LT(circular_distance(ref.time, run.output.peaks.front().time, kComb.period()), 1e-4 / kComb.delta_f);
}

TEST(BruteForcePeak, SymmetricSourcesGiveEqualMaxima) {
  const Scene s{{Source::far_field({0.4, 0}), Source::far_field({-0.4, 0})}};
  const auto ph = phasors_of(s);
  auto out = beamform_envelope(ph, make_time_grid(4096, kComb.period()));
  auto maxima = local_maxima(out);
  std::sort(maxima.begin(), maxima.end(), [](auto& a, auto& b) { return a.magnitude > b.magnitude; });
  ASSERT_GE(maxima.size(), 2u);
  const double dt = kComb.period() / 4096;
  const double m0 = refine_max(ph, maxima[0].time - dt, maxima[0].time + dt);
  const double m1 = refine_max(ph, maxima[1].time - dt, maxima[1].time + dt);
  EXPECT_NEAR(m0, m1, 1e-9);
}

TEST(BruteForcePeak, MatchesFindPeaksOnRandomFarFieldScenes) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> ud(-0.95, 0.95);
  std::uniform_real_distribution<double> amp(0.2, 3.0);
  std::uniform_real_distribution<double> phase(-M_PI, M_PI);
  const double fine_step = kComb.period() / (4096.0 * 16.0);
  for (int i = 0; i < 100; ++i) {
    const Scene s{{Source::far_field({ud(rng), 0}, amp(rng), phase(rng))}};
    const auto ref = brute_force_peak(phasors_of(s), 16);
    const auto run = run_kspace(s, kArray, kComb, reference_config());
    ASSERT_FALSE(run.output.peaks.empty());
    EXPECT_LT(circular_distance(ref.time, run.output.peaks.front().time, kComb.period()), fine_step) << "scene " << i;
  }
}

TEST(PeakMagnitude, LinearPhaseRampReachesFullGain) {
  // Idealised far-field phasors: phase linear in tone index, so every term
  // can be aligned at once and the maximum is exactly N * A.
  for (double u : {-0.6, 0.05, 0.77}) {
    std::vector<ElementPhasor> ph;
    for (int n = 0; n < 21; ++n) {
      ElementPhasor p;
      p.tone = n;
      p.baseband_hz = 0.8e6 + n * 0.2e6;
      p.value = std::polar(1.5, -2 * M_PI * n * 0.5 * u);
      ph.push_back(p);
    }
    EXPECT_NEAR(brute_force_peak(ph, 4).magnitude, 21.0 * 1.5, 1e-9) << u;
  }
}

TEST(PeakMagnitude, SingleFarFieldSourceIsBoundedByDispersionResidual) {
  // Each element sees its own tone's wavenumber, so the received phase has a
  // small quadratic term in the element index that no time shift removes.
  // With delta_n the residual of a least-squares linear fit of phase against
  // baseband frequency, the maximum satisfies
  //   sum A cos(delta_n) <= max <= N * A.
  const double c = 299792458.0;
  const double dx = c / 19.005e9 / 2;
  for (double u : {-0.6, 0.05, 0.77}) {
    const auto ph = phasors_of(Scene{{Source::far_field({u, 0}, 1.5)}});
    std::vector<double> nu, phase;
    for (std::size_t n = 0; n < ph.size(); ++n) {
      nu.push_back(ph[n].baseband_hz);
      phase.push_back(2 * M_PI * (19e9 + ph[n].baseband_hz) / c * static_cast<double>(n) * dx * u);
    }
    const double k = static_cast<double>(nu.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      sx += nu[i];
      sy += phase[i];
      sxx += nu[i] * nu[i];
      sxy += nu[i] * phase[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / k;
    double lower = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) lower += 1.5 * std::cos(phase[i] - slope * nu[i] - icpt);

    const double peak = brute_force_peak(ph, 4).magnitude;
    EXPECT_LE(peak, 21.0 * 1.5 + 1e-9) << u;
    EXPECT_GE(peak, lower - 1e-9) << u;
    EXPECT_NEAR(peak, 21.0 * 1.5, 21.0 * 1.5 - lower + 1e-9) << u;
  }
}

TEST(FirstSidelobe, UniformCombIsMinusThirteenDb) {
  const auto run = run_kspace(Scene{{Source::far_field({0.1, 0})}}, kArray, kComb, reference_config());
  EXPECT_NEAR(first_sidelobe_db(run.output), -13.2, 0.3);
}

TEST(CompareMethods, FarFieldSourceAgrees) {
  const auto cmp = compare_methods(Scene{{Source::far_field(azimuth_elevation_to_uv(-30, 0))}}, kArray, kComb,
                                   reference_config());
  ASSERT_EQ(cmp.pairs.size(), 1u);
  EXPECT_FALSE(cmp.count_mismatch());
  EXPECT_LT(cmp.pairs[0].difference, 0.5);
  EXPECT_NEAR(cmp.pairs[0].kspace_az, -30.0, 0.05);
}

TEST(CompareMethods, NearFieldSourceBothNearTruth) {
  const auto cmp = compare_methods(Scene{{Source::point({-6, 0, 6})}}, kArray, kComb, reference_config());
  ASSERT_EQ(cmp.pairs.size(), 1u);
  EXPECT_NEAR(cmp.pairs[0].kspace_az, -45.0, 2.0);
  EXPECT_NEAR(cmp.pairs[0].conventional_az, -45.0, 2.0);
  EXPECT_GE(cmp.pairs[0].difference, 0.0);
}

TEST(CompareMethods, EmptySceneIsAnError) {
  EXPECT_THROW(compare_methods(Scene{}, kArray, kComb, reference_config()), std::invalid_argument);
}

TEST(CompareMethods, MethodsConvergeAtLongRange) {
  for (int az = -60; az <= 60; az += 5) {
    const auto cmp = compare_methods(Scene{{source_from_az_range(az, 1e6)}}, kArray, kComb, reference_config());
    ASSERT_EQ(cmp.pairs.size(), 1u) << az;
    EXPECT_LT(cmp.pairs[0].difference, 0.1) << az;
  }
}

TEST(NearfieldSweep, ReferenceRangeHasSmallNonzeroError) {
  const std::vector<double> ranges{8.4853};
  const auto res = nearfield_error_sweep(-45, ranges, kArray, kComb, reference_config());
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_LE(std::abs(res.rows[0].az_error_deg), 2.0);
  EXPECT_GT(std::abs(res.rows[0].az_error_deg), 1e-3);
}

TEST(NearfieldSweep, FarRangeIsAccurate) {
  const std::vector<double> ranges{10000};
  const auto res = nearfield_error_sweep(-45, ranges, kArray, kComb, reference_config());
  EXPECT_LT(std::abs(res.rows[0].az_error_deg), 0.2);
}

TEST(NearfieldSweep, ErrorDecaysAsRangeDoubles) {
  std::vector<double> ranges;
  for (double r = 1; r <= 1024; r *= 2) ranges.push_back(r);
  const auto res = nearfield_error_sweep(-45, ranges, kArray, kComb, reference_config());
  ASSERT_EQ(res.rows.size(), ranges.size());
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    EXPECT_LE(std::abs(res.rows[i].az_error_deg), std::abs(res.rows[i - 1].az_error_deg) + 0.05) << ranges[i];
  EXPECT_THROW(nearfield_error_sweep(-45, std::vector<double>{-1.0}, kArray, kComb), std::invalid_argument);
}

TEST(SnrGain, TwentyOneTones) {
  const Scene s{{Source::far_field({0.2, 0})}};
  EXPECT_NEAR(snr_gain(s, kArray, kComb, reference_config(), 1.0, 100, 2024), 10 * std::log10(21.0), 1.5);
}

TEST(SnrGain, SingleToneHasNoGain) {
  const CombSpec one{19e9, 0.2e6, 1, 5e-6, 1.0};
  const Scene s{{Source::far_field({0.0, 0})}};
  EXPECT_NEAR(snr_gain(s, ArrayGeometry::linear(1, 0.0079), one, reference_config(), 1.0, 100, 3), 0.0, 1.0);
}

TEST(SnrGain, HundredTones) {
  const CombSpec c{19e9, 0.2e6, 100, 5e-6, 1.0};
  const auto g = ArrayGeometry::linear(100, 0.0079);
  const Scene s{{Source::far_field({-0.1, 0})}};
  EXPECT_NEAR(snr_gain(s, g, c, reference_config(), 1.0, 100, 11), 20.0, 1.0);
}

TEST(SnrGain, Errors) {
  const Scene s{{Source::far_field({0.2, 0})}};
  EXPECT_THROW(snr_gain(s, kArray, kComb, reference_config(), 0.0, 100, 1), std::invalid_argument);
  EXPECT_THROW(snr_gain(s, kArray, kComb, reference_config(), 1.0, 5, 1), std::invalid_argument);
}

TEST(SnrGain, DeterministicAndIndependentOfThreadCount) {
  const Scene s{{Source::far_field({0.2, 0})}};
  auto cfg = reference_config();
  cfg.grid_points = 1024;
  const double a = snr_gain(s, kArray, kComb, cfg, 1.0, 10, 77);
  const double b = snr_gain(s, kArray, kComb, cfg, 1.0, 10, 77);
  setenv("COMBBEAM_THREADS", "1", 1);
  const double c = snr_gain(s, kArray, kComb, cfg, 1.0, 10, 77);
  unsetenv("COMBBEAM_THREADS");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(PeakWidth, MatchesDirichletHalfPowerWidth) {
  // Half-power full width of the N-point Dirichlet kernel is about
  // 0.886 / N cycles, i.e. 1.772 / N in u for half-wavelength spacing.
  const auto run = run_kspace(Scene{{Source::far_field({0.0, 0})}}, kArray, kComb, reference_config());
  const double w = peak_width_u(run.output, run.calibration, run.output.peaks.front().time);
  EXPECT_NEAR(w, 1.772 / 21, 0.02 * 1.772 / 21);
}
