// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "combbeam/commands.hpp"

using namespace combbeam;
using cd = std::complex<double>;

namespace {

const std::filesystem::path kScenarios = COMBBEAM_SCENARIO_DIR;

ScenarioConfig load(const std::string& name) {
  std::ifstream is(kScenarios / (name + ".json"));
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Verdict criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load("paper_fig8");
  const auto run = run_kspace(cfg.scene(), cfg.array, cfg.comb, cfg.kspace());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (run.output.peaks.empty()) return {false, "no peak"};
  const double az = run.output.peaks.front().azimuth;
  return {std::abs(az + 45.0) <= 2.0 && secs < 1.0,
          "azimuth " + fmt("%.4f deg", az) + ", runtime " + fmt("%.3f s", secs)};
}

Verdict criterion2() {
  const auto cfg = load("paper_fig8");
  auto kcfg = cfg.kspace();
  const auto run = run_kspace(cfg.scene(), cfg.array, cfg.comb, kcfg);
  const auto& p = run.output.peaks.front();
  // Raw envelope peak times: arrival-referenced and absolute time origins.
  kcfg.propagation.time_reference = TimeReference::absolute;
  const auto abs_run = run_kspace(cfg.scene(), cfg.array, cfg.comb, kcfg);
  const auto& q = abs_run.output.peaks.front();
  const double err = std::abs(p.kspace_time - 0.6963e-6);
  return {err <= 0.05e-6, "k-space time " + fmt("%.4f us", p.kspace_time * 1e6) + " (absolute-time variant " +
                              fmt("%.4f us", q.kspace_time * 1e6) + "); raw envelope peak " +
                              fmt("%.4f us", p.time * 1e6) + " (absolute-time variant " + fmt("%.4f us)", q.time * 1e6)};
}

Verdict criterion3() {
  const auto cfg = load("paper_fig11");
  const auto run = run_kspace(cfg.scene(), cfg.array, cfg.comb, cfg.kspace());
  const auto& peaks = run.output.peaks;
  if (peaks.size() != 3) return {false, std::to_string(peaks.size()) + " peaks"};
  bool ok = true;
  std::string detail = "azimuths";
  double lo = peaks.front().magnitude;
  double hi = lo;
  for (double truth : {53.1, 8.5, -45.0}) {
    double best = 1e9;
    for (const auto& p : peaks) best = std::min(best, std::abs(p.azimuth - truth));
    ok = ok && best <= 2.0;
  }
  for (const auto& p : peaks) {
    detail += fmt(" %.3f", p.azimuth);
    lo = std::min(lo, p.magnitude);
    hi = std::max(hi, p.magnitude);
  }
  const double spread = (hi - lo) / hi;
  ok = ok && spread <= 0.05;
  return {ok, detail + ", magnitude spread " + fmt("%.2f%%", 100 * spread)};
}

Verdict criterion4() {
  const auto cfg = load("paper_fig8");
  double worst = 0.0;
  for (double u : {-0.9, -0.5, 0.0, 0.3, 0.7}) {
    const auto run = run_kspace(Scene{{Source::far_field({u, 0})}}, cfg.array, cfg.comb, cfg.kspace());
    if (run.output.peaks.empty()) return {false, "no peak for u=" + fmt("%g", u)};
    worst = std::max(worst, std::abs(run.output.peaks.front().azimuth - u_to_azimuth(u)));
  }
  return {worst <= 0.05, "max azimuth error " + fmt("%.3e deg", worst)};
}

Verdict criterion5() {
  const int n = 21;
  const double df = 0.2e6;
  const double q = 0.5 * 0.37;
  std::vector<ElementPhasor> ph;
  for (int k = 1; k <= n; ++k) {
    ElementPhasor p;
    p.tone = k;
    p.baseband_hz = k * df;
    p.value = std::polar(1.0, -2 * M_PI * k * q + 0.4);
    ph.push_back(p);
  }
  const auto grid = make_time_grid(4096, 1.0 / df);
  const auto out = beamform_envelope(ph, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double psi = df * grid[i] - q;
    const double s = std::sin(M_PI * psi);
    const double ref = std::abs(s) < 1e-12 ? 1.0 : std::abs(std::sin(n * M_PI * psi) / (n * s));
    worst = std::max(worst, std::abs(out.envelope[i] / n - ref));
  }
  const double sll = first_sidelobe_db(out);
  return {worst <= 1e-9 && std::abs(sll + 13.2) <= 0.3,
          "max kernel deviation " + fmt("%.2e", worst) + ", first sidelobe " + fmt("%.3f dB", sll)};
}

Verdict criterion6() {
  const auto cfg = load("paper_fig8");
  const auto ph = scene_element_phasors(cfg.scene(), cfg.array, cfg.comb, assign_tuning(cfg.array, cfg.comb),
                                        cfg.sim.lo_hz, cfg.kspace().propagation);
  const auto out = beamform_envelope(ph, make_time_grid(8192, 10e-6));
  const double top = *std::max_element(out.envelope.begin(), out.envelope.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < 4096; ++i) worst = std::max(worst, std::abs(out.envelope[i] - out.envelope[i + 4096]) / top);
  return {worst <= 1e-12 && std::abs(out.period - 5e-6) < 1e-18,
          "period " + fmt("%.6g us", out.period * 1e6) + ", max relative mismatch " + fmt("%.2e", worst)};
}

Verdict criterion7() {
  const auto cfg = load("paper_fig8");
  const Scene scene{{Source::far_field({0.2, 0}, 1.0)}};
  const auto run = run_kspace(scene, cfg.array, cfg.comb, cfg.kspace());
  const double peak = run.output.peaks.front().magnitude;
  const double gain = snr_gain(scene, cfg.array, cfg.comb, cfg.kspace(), 1.0, 100, 20240611);
  return {std::abs(peak - 21.0) <= 0.21 && std::abs(gain - 13.2) <= 1.5,
          "peak " + fmt("%.6f", peak) + ", SNR gain " + fmt("%.3f dB", gain)};
}

Verdict criterion8() {
  const auto g = ArrayGeometry::planar(8, 8, 0.004, 0.006);
  const double lambda = 0.01;
  std::mt19937_64 rng(88);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-0.7, 0.7);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<cd> s(64);
    for (auto& x : s) x = {nd(rng), nd(rng)};
    const double u = ud(rng);
    const double v = ud(rng);
    const auto map = beamform_conventional(s, g, lambda, ElementPattern::isotropic(), UVGrid{{u}, {v}});
    cd ref{};
    for (int m = 0; m < 8; ++m)
      for (int n = 0; n < 8; ++n) {
        const double a = 2 * M_PI * (m * g.dx * u + n * g.dy * v) / lambda;
        ref += s[static_cast<std::size_t>(m * 8 + n)] * cd(std::cos(a), std::sin(a));
      }
    worst = std::max(worst, std::abs(map.at(0, 0) - std::abs(ref)) / std::abs(ref));
  }
  bool ones = true;
  for (const auto& w : steering_vector(g, 0, 0, lambda).weights) ones = ones && w == cd(1, 0);
  const auto matched = steering_vector(g, 0.25, -0.35, lambda).weights;
  const double gain = beamform_conventional(matched, g, lambda, ElementPattern::isotropic(), UVGrid{{0.25}, {-0.35}}).at(0, 0);
  const bool gain_ok = std::abs(gain - 64.0) <= 1e-12 * 64.0;
  return {worst <= 1e-10 && ones && gain_ok, "max relative deviation " + fmt("%.2e", worst) +
                                                 ", boresight all-ones " + (ones ? "yes" : "no") + ", matched gain " +
                                                 fmt("%.15g", gain)};
}

Verdict criterion9() {
  const auto ratio = [](const std::string& name, double& measured, double& expected) {
    const auto cfg = load(name);
    const auto steps = mean_phase_steps(phase_map(cfg.array, cfg.sources.front().to_source(),
                                                  cfg.sim.narrowband_freq_hz, cfg.sim.phase_sign));
    const auto uv = azimuth_elevation_to_uv(cfg.sources.front().az_deg, cfg.sources.front().el_deg);
    measured = steps.vertical / steps.horizontal;
    expected = std::abs(uv.v) / std::abs(uv.u);
  };
  double m2 = 0, e2 = 0, m3 = 0, e3 = 0;
  ratio("paper_fig2", m2, e2);
  ratio("paper_fig3", m3, e3);
  const bool ok2 = std::abs(m2 - e2) <= 0.15 * e2 && m2 > 1.0;
  const bool ok3 = std::abs(m3 - e3) <= 0.15 * e3 && m3 < 1.0;
  return {ok2 && ok3, "vertical/horizontal " + fmt("%.3f", m2) + " vs |v|/|u| " + fmt("%.3f", e2) + "; inverted scene " +
                          fmt("%.4f", m3) + " vs " + fmt("%.4f", e3)};
}

Verdict criterion10() {
  const auto cfg = load("paper_fig12");
  const auto src = cfg.sources.front().to_source();
  const double freq = cfg.sim.narrowband_freq_hz;
  const auto prof = curvature_profile(cfg.array, src, freq, cfg.sim.phase_sign);
  // Second-order oracle: path excess (x^2 + y^2) / 2R, minus its plane fit.
  const double lambda = kSpeedOfLight / freq;
  const double range = cfg.sources.front().range_m;
  const int m = cfg.array.m;
  const auto p2 = [&](int k) { return k * k - (m - 1.0) * k + (m - 1.0) * (m - 2.0) / 6.0; };
  const double oracle = 2 * p2(0) * cfg.array.dx * cfg.array.dy / (2 * range * lambda);
  const double measured = prof.max_abs_residual();
  const bool curvature_ok = std::abs(measured - oracle) <= 0.1 * oracle;

  const auto sweep = load("range_sweep");
  const auto res = cmd_sweep(sweep);
  std::istringstream is(res.files.files().front().second);
  std::string line;
  std::getline(is, line);
  std::vector<double> errors;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string v, e;
    std::getline(ls, v, ',');
    std::getline(ls, e, ',');
    errors.push_back(std::abs(std::stod(e)));
  }
  bool monotone = errors.size() >= 2;
  for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1];
  return {curvature_ok && monotone, "max residual " + fmt("%.5f", measured) + " cycles vs oracle " +
                                        fmt("%.5f", oracle) + "; |error| " + fmt("%.3f", errors.front()) + " -> " +
                                        fmt("%.4f deg", errors.back()) + (monotone ? " monotone" : " NOT monotone")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"single-source azimuth", criterion1},     {"peak time", criterion2},
      {"three-source scene", criterion3},        {"far-field exactness", criterion4},
      {"Dirichlet equivalence", criterion5},     {"periodicity", criterion6},
      {"coherent gain", criterion7},             {"conventional oracle", criterion8},
      {"phase-map orientation", criterion9},     {"near-field curvature", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
