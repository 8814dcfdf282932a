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

#ifndef MHAMCL__COMMANDS_HPP_
#define MHAMCL__COMMANDS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mhamcl/config.hpp"
#include "mhamcl/localizer.hpp"
#include "mhamcl/metrics.hpp"
#include "mhamcl/runlog.hpp"
#include "mhamcl/sim.hpp"

namespace mhamcl
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct SimulateOptions
{
  std::filesystem::path config;
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

struct LocalizeOptions
{
  std::filesystem::path config;
  std::filesystem::path log;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> initial_pose;  // "x y yaw"
  bool single_hypothesis{false};
  std::optional<std::filesystem::path> timing;
};

struct MatchOptions
{
  std::filesystem::path config;
  std::filesystem::path log;
  double time{0.0};
  double tolerance{0.05};
  std::optional<std::filesystem::path> out;  // stdout when absent
};

struct BenchOptions
{
  std::filesystem::path estimates;
  std::filesystem::path ground_truth;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> timing;
  double threshold{0.3};
  double hold{5.0};
  std::optional<double> recovery_from;
};

/// "x y yaw", separated by spaces and/or commas.
inline Transform2D parse_pose_text(const std::string & text)
{
  std::string cleaned = text;
  for (char & c : cleaned) {
    if (c == ',') {
      c = ' ';
    }
  }
  std::istringstream in(cleaned);
  double x = 0.0, y = 0.0, yaw = 0.0;
  std::string rest;
  if (!(in >> x >> y >> yaw) || (in >> rest) || !std::isfinite(x) || !std::isfinite(y) ||
    !std::isfinite(yaw))
  {
    throw ConfigError("--initial-pose: expected \"x y yaw\", got \"" + text + "\"");
  }
  return {x, y, yaw};
}

namespace detail
{

// Runs a command body, translating exceptions into exit codes.
template<typename Body>
int guarded(std::ostream & err, const char * command, Body && body)
{
  try {
    return body();
  } catch (const ConfigError & e) {
    err << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError & e) {
    err << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception & e) {
    err << command << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

inline OccupancyGrid load_config_map(const AppConfig & cfg)
{
  try {
    return load_map(cfg.map_image, cfg.map_metadata);
  } catch (const FormatError & e) {
    throw ConfigError(std::string("map: ") + e.what());
  }
}

inline LogWarning warn_to(std::ostream & err)
{
  return [&err](const std::string & m) {err << "warning: " << m << '\n';};
}

}  // namespace detail

/// Generates a synthetic run log from a scenario on the configured map.
inline int cmd_simulate(const SimulateOptions & opt, std::ostream & err)
{
  return detail::guarded(
    err, "simulate", [&] {
      const AppConfig cfg = load_config(opt.config);
      ScenarioScript script = load_scenario(opt.scenario, cfg.seed);
      if (opt.seed) {
        script.seed = *opt.seed;
      }
      const OccupancyGrid grid = detail::load_config_map(cfg);
      const std::vector<Record> log = simulate(grid, script, cfg.sensor);
      write_run_log(opt.out, log);
      return kExitOk;
    });
}

inline void write_timing_csv(const std::filesystem::path & path, std::span<const CorrectionTiming> timings)
{
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  out.precision(17);
  out << "t,cpu_s\n";
  for (const CorrectionTiming & c : timings) {
    out << c.t << ',' << c.cpu_seconds << '\n';
  }
}

/// Replays odometry and scans through the localizer and writes its estimates.
/// Single-hypothesis mode is the plain AMCL baseline: at most one population,
/// created by map matching only while none exists.
inline int cmd_localize(const LocalizeOptions & opt, std::ostream & err)
{
  return detail::guarded(
    err, "localize", [&] {
      AppConfig cfg = load_config(opt.config);
      std::optional<Transform2D> initial;
      if (opt.initial_pose) {
        initial = parse_pose_text(*opt.initial_pose);
      }
      if (opt.single_hypothesis) {
        cfg.localizer.multihyp.max_hypotheses = 1;
        cfg.localizer.multihyp.spawn_only_when_empty = true;
      }
      const std::uint64_t seed = opt.seed.value_or(cfg.seed);
      const std::vector<Record> log = read_run_log(opt.log, detail::warn_to(err));
      const bool has_scan = std::any_of(
        log.begin(), log.end(), [](const Record & r) {return std::holds_alternative<ScanRecord>(r);});
      const bool has_odom = std::any_of(
        log.begin(), log.end(), [](const Record & r) {return std::holds_alternative<OdomRecord>(r);});
      if (!has_scan || !has_odom) {
        err << "localize: " << opt.log.string() << " has no " << (has_scan ? "odom" : "scan")
            << " records\n";
        return kExitFailure;
      }
      const GridPyramid pyramid(detail::load_config_map(cfg), cfg.localizer.matcher.levels);
      const ReplayResult result = replay(log, pyramid, cfg.localizer, initial, seed);
      write_run_log(opt.out, result.output);
      if (opt.timing) {
        write_timing_csv(*opt.timing, result.timings);
      }
      return kExitOk;
    });
}

/// Ranks map-matching candidates for the scan nearest to the requested time.
inline int cmd_match(const MatchOptions & opt, std::ostream & out, std::ostream & err)
{
  return detail::guarded(
    err, "match", [&] {
      const AppConfig cfg = load_config(opt.config);
      const std::vector<Record> log = read_run_log(opt.log, detail::warn_to(err));
      const LaserScan * scan = nullptr;
      for (const Record & r : log) {
        if (const auto * s = std::get_if<ScanRecord>(&r)) {
          if (std::fabs(s->scan.stamp - opt.time) <= opt.tolerance &&
            (!scan || std::fabs(s->scan.stamp - opt.time) < std::fabs(scan->stamp - opt.time)))
          {
            scan = &s->scan;
          }
        }
      }
      if (!scan) {
        err << "match: no scan within " << opt.tolerance << " s of t=" << opt.time << '\n';
        return kExitFailure;
      }
      const GridPyramid pyramid(detail::load_config_map(cfg), cfg.localizer.matcher.levels);
      const MatchResult result = cascade_match(
        pyramid, *scan, cfg.localizer.base_to_laser, cfg.localizer.sensor, cfg.localizer.matcher);

      std::ofstream file;
      if (opt.out) {
        file.open(*opt.out);
        if (!file) {
          throw FormatError("cannot write " + opt.out->string());
        }
      }
      std::ostream & table = opt.out ? file : out;
      table.precision(10);
      table << "rank,x,y,yaw,score,level,accepted\n";
      int rank = 1;
      for (const MatchCandidate & c : result.candidates) {
        table << rank++ << ',' << c.pose.x() << ',' << c.pose.y() << ',' << c.pose.yaw() << ','
              << c.score << ',' << c.level << ','
              << (c.score >= cfg.localizer.matcher.min_score ? 1 : 0) << '\n';
      }
      return kExitOk;
    });
}

inline std::map<double, double> read_timing_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot read " + path.string());
  }
  std::map<double, double> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    double t = 0.0, cpu = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> cpu) || comma != ',') {
      throw FormatError(path.string() + ": bad timing row \"" + line + "\"");
    }
    out[t] = cpu;
  }
  return out;
}

inline nlohmann::ordered_json stats_json(const Stats & s)
{
  return {{"mean", s.mean}, {"std", s.stddev}, {"median", s.median}};
}

inline nlohmann::ordered_json phase_json(const PhaseStats & p)
{
  return {
    {"samples", p.samples}, {"mean_quality", p.mean_quality},
    {"mean_uncertainty", p.mean_uncertainty}};
}

/// Recovery measured from `from` (or the first sample): the delay until the
/// error falls under the threshold and holds.
inline std::optional<double> recovery_after(
  std::span<const ErrorSample> series, double threshold, double hold, std::optional<double> from)
{
  std::size_t first = 0;
  if (from) {
    while (first < series.size() && series[first].t < *from) {
      ++first;
    }
  }
  const auto tail = series.subspan(first);
  const auto r = recovery_time(tail, threshold, hold);
  if (!r || tail.empty()) {
    return std::nullopt;
  }
  return *r + (from ? tail.front().t - *from : 0.0);
}

/// Compares estimates with ground truth and writes errors.csv and summary.json.
inline int cmd_bench(const BenchOptions & opt, std::ostream & err)
{
  return detail::guarded(
    err, "bench", [&] {
      if (!(opt.threshold > 0.0) || !(opt.hold >= 0.0)) {
        throw ConfigError("bench: --threshold must be positive and --hold non-negative");
      }
      std::vector<EstimateRecord> estimates;
      for (const Record & r : read_run_log(opt.estimates, detail::warn_to(err))) {
        if (const auto * e = std::get_if<EstimateRecord>(&r)) {
          estimates.push_back(*e);
        }
      }
      std::vector<GroundTruthRecord> truth;
      for (const Record & r : read_run_log(opt.ground_truth, detail::warn_to(err))) {
        if (const auto * g = std::get_if<GroundTruthRecord>(&r)) {
          truth.push_back(*g);
        }
      }
      if (truth.empty()) {
        err << "bench: no ground truth records in " << opt.ground_truth.string() << '\n';
        return kExitFailure;
      }
      if (estimates.empty()) {
        err << "bench: no estimate records in " << opt.estimates.string() << '\n';
        return kExitFailure;
      }
      std::vector<double> cpu;
      if (opt.timing) {
        const auto timing = read_timing_csv(*opt.timing);
        for (const EstimateRecord & e : estimates) {
          const auto it = timing.find(e.t);
          cpu.push_back(it == timing.end() ? 0.0 : it->second);
        }
      }
      TrajectoryErrorResult result;
      try {
        result = trajectory_error(estimates, truth, cpu);
      } catch (const ParameterError & e) {
        err << "bench: " << e.what() << '\n';
        return kExitFailure;
      }

      std::filesystem::create_directories(opt.out_dir);
      {
        std::ofstream csv(opt.out_dir / "errors.csv");
        if (!csv) {
          throw FormatError("cannot write " + (opt.out_dir / "errors.csv").string());
        }
        write_error_series_csv(csv, result.series);
      }

      const auto recovery = recovery_after(
        result.series, opt.threshold, opt.hold, opt.recovery_from);
      const QualityUncertaintyReport qu = quality_vs_uncertainty(result.series, opt.threshold);
      std::vector<double> hyps, cpus;
      for (const ErrorSample & s : result.series) {
        hyps.push_back(s.hypothesis_count);
        cpus.push_back(s.cpu_seconds);
      }
      nlohmann::ordered_json summary;
      summary["samples"] = result.series.size();
      summary["position_error"] = stats_json(result.position);
      summary["yaw_error"] = stats_json(result.yaw);
      summary["recovery"] = {
        {"threshold", opt.threshold}, {"hold", opt.hold},
        {"from", opt.recovery_from ? nlohmann::ordered_json(*opt.recovery_from) :
          nlohmann::ordered_json(result.series.front().t)},
        {"recovered", recovery.has_value()},
        {"time", recovery ? nlohmann::ordered_json(*recovery) : nlohmann::ordered_json()}};
      summary["phases"] = {{"correct", phase_json(qu.correct)}, {"incorrect", phase_json(qu.incorrect)}};
      summary["hypotheses"] = stats_json(summarize(hyps));
      summary["cpu_seconds"] = stats_json(summarize(cpus));

      std::ofstream js(opt.out_dir / "summary.json");
      if (!js) {
        throw FormatError("cannot write " + (opt.out_dir / "summary.json").string());
      }
      js << summary.dump(2) << '\n';
      return kExitOk;
    });
}

}  // namespace mhamcl

#endif  // MHAMCL__COMMANDS_HPP_
