// Copyright 2026 The mhamcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mhamcl/commands.hpp"

namespace
{

template<typename T>
std::optional<T> if_set(const CLI::Option * opt, const T & value)
{
  return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Multi-hypothesis Monte Carlo localization on occupancy grids"};
  app.require_subcommand(1);

  std::string config, scenario, log, out, est, gt, timing, initial_pose;
  std::uint64_t seed = 0;
  double time = 0.0, tolerance = 0.05, threshold = 0.3, hold = 5.0, recovery_from = 0.0;
  bool single = false;

  auto * sim = app.add_subcommand("simulate", "Generate odometry, scans and ground truth");
  sim->add_option("--config", config, "Configuration JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output run log")->required();
  auto * sim_seed = sim->add_option("--seed", seed, "Overrides the scenario seed");

  auto * loc = app.add_subcommand("localize", "Replay a run log through the localizer");
  loc->add_option("--config", config, "Configuration JSON")->required()->check(CLI::ExistingFile);
  loc->add_option("--log", log, "Input run log")->required()->check(CLI::ExistingFile);
  loc->add_option("--out", out, "Output estimate log")->required();
  auto * loc_seed = loc->add_option("--seed", seed, "Overrides the config seed");
  auto * loc_pose = loc->add_option("--initial-pose", initial_pose, "Known start \"x y yaw\"");
  loc->add_flag("--single-hypothesis", single, "Plain AMCL baseline: one hypothesis at most");
  auto * loc_timing = loc->add_option("--timing", timing, "Per-correction CPU time CSV");

  auto * mat = app.add_subcommand("match", "Rank map-matching candidates for one scan");
  mat->add_option("--config", config, "Configuration JSON")->required()->check(CLI::ExistingFile);
  mat->add_option("--log", log, "Run log holding the scan")->required()->check(CLI::ExistingFile);
  mat->add_option("--time", time, "Scan time in seconds")->required();
  mat->add_option("--tolerance", tolerance, "Largest accepted |stamp - time|")
  ->capture_default_str();
  auto * mat_out = mat->add_option("--out", out, "CSV output (default: stdout)");

  auto * bench = app.add_subcommand("bench", "Score estimates against ground truth");
  bench->add_option("--est", est, "Estimate log")->required()->check(CLI::ExistingFile);
  bench->add_option("--gt", gt, "Log with ground truth")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out, "Output directory")->required();
  auto * bench_timing = bench->add_option("--timing", timing, "CPU time CSV from localize")
    ->check(CLI::ExistingFile);
  bench->add_option("--threshold", threshold, "Recovery error threshold (m)")->capture_default_str();
  bench->add_option("--hold", hold, "Recovery hold time (s)")->capture_default_str();
  auto * bench_from = bench->add_option(
    "--recovery-from", recovery_from, "Measure recovery from this time (e.g. a kidnap)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return mhamcl::kExitUsage;
  }

  if (sim->parsed()) {
    return mhamcl::cmd_simulate({config, scenario, out, if_set(sim_seed, seed)}, std::cerr);
  }
  if (loc->parsed()) {
    return mhamcl::cmd_localize(
      {config, log, out, if_set(loc_seed, seed), if_set(loc_pose, initial_pose), single,
        if_set(loc_timing, std::filesystem::path(timing))},
      std::cerr);
  }
  if (mat->parsed()) {
    return mhamcl::cmd_match(
      {config, log, time, tolerance, if_set(mat_out, std::filesystem::path(out))}, std::cout,
      std::cerr);
  }
  return mhamcl::cmd_bench(
    {est, gt, out, if_set(bench_timing, std::filesystem::path(timing)), threshold, hold,
      if_set(bench_from, recovery_from)},
    std::cerr);
}
