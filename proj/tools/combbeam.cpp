// Command-line front end for the comb beamforming simulator.
//
//   combbeam simulate|phase-map|sweep|calibrate --config <path> --out <dir>
//            [--seed <u64>] [--grid-points <k>]
//
// Exit codes: 0 success, 1 config error, 2 runtime/numerical error,
// 3 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "combbeam/commands.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2, kIoError = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw combbeam::IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw combbeam::IoError("failed to read config " + path);
  return ss.str();
}

int run(const std::function<combbeam::CommandResult(const combbeam::ScenarioConfig&)>& command, const Options& opt) {
  try {
    auto cfg = combbeam::parse_config(read_file(opt.config));
    if (opt.seed) cfg.sim.noise.seed = *opt.seed;
    if (opt.grid_points) {
      if (*opt.grid_points < 16) throw combbeam::ConfigError("--grid-points: must be >= 16");
      cfg.sim.grid_points = *opt.grid_points;
    }
    const auto result = command(cfg);
    result.files.commit(opt.out.empty() ? cfg.output.directory : opt.out);
    std::cout << result.report;
    return kOk;
  } catch (const combbeam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const combbeam::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-comb k-space beamforming simulator"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, combbeam::CommandResult (*)(const combbeam::ScenarioConfig&)>>
      commands = {
          {"simulate", {"Run the comb beamformer and write envelope, peaks and phasors", &combbeam::cmd_simulate}},
          {"phase-map", {"Write the planar-array phase map and curvature residuals", &combbeam::cmd_phase_map}},
          {"sweep", {"Sweep one parameter and write angle error and peak width", &combbeam::cmd_sweep}},
          {"calibrate", {"Report the time-to-u calibration and held-out probe residuals", &combbeam::cmd_calibrate}},
      };

  Options opt;
  std::uint64_t seed = 0;
  int grid_points = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opt.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (defaults to output.directory)");
    sub->add_option("--seed", seed, "Noise seed override");
    sub->add_option("--grid-points", grid_points, "Time-grid size override");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) opt.seed = seed;
    if (sub->count("--grid-points") > 0) opt.grid_points = grid_points;
    return run(commands.at(name).second, opt);
  }
  return kConfigError;
}
