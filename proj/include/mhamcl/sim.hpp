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

#ifndef MHAMCL__SIM_HPP_
#define MHAMCL__SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/filter.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/gridmap.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/records.hpp"
#include "mhamcl/scan.hpp"

namespace mhamcl
{

class ScenarioError : public Error
{
public:
  using Error::Error;
};

struct SensorSpec
{
  int beam_count{360};
  double angle_min{-3.14159265358979323846};
  double angle_increment{2.0 * 3.14159265358979323846 / 360.0};
  double range_max{12.0};
  double range_noise_std{0.01};
  Transform2D mount;  // base -> laser

  void validate() const
  {
    if (beam_count < 1) {
      throw ParameterError("sensor.beam_count must be >= 1");
    }
    if (!(range_max > 0.0)) {
      throw ParameterError("sensor.range_max must be positive");
    }
    if (!(range_noise_std >= 0.0)) {
      throw ParameterError("sensor.range_noise_std must be >= 0");
    }
  }
};

/// A pose to reach at `t`, or a (v, w) unicycle command from `t` on.
struct Waypoint
{
  double t{0.0};
  std::optional<Transform2D> pose;
  double v{0.0};
  double w{0.0};

  static Waypoint at(double t, const Transform2D & pose) {return {t, pose, 0.0, 0.0};}
  static Waypoint command(double t, double v, double w) {return {t, std::nullopt, v, w};}
};

struct KidnapEvent
{
  double t{0.0};
  Transform2D pose;
};

struct ScenarioScript
{
  std::vector<Waypoint> waypoints;
  std::vector<KidnapEvent> kidnaps;
  MotionNoiseParams odom_noise{0.0, 0.0, 0.0, 0.0};
  double odom_hz{100.0};
  double scan_hz{10.0};
  std::uint64_t seed{0};
  std::optional<double> duration;  // defaults to the last waypoint time

  double end_time() const
  {
    return duration ? *duration : (waypoints.empty() ? 0.0 : waypoints.back().t);
  }
};

/// Ray-marches every beam at half-cell steps to the first Occupied cell.
/// Misses report range_max; hits get N(0, range_noise_std) added, clamped to
/// [0, range_max].
inline LaserScan scan_raycast(
  const OccupancyGrid & grid, const Transform2D & laser_pose, const SensorSpec & spec, Rng & rng,
  double stamp = 0.0)
{
  LaserScan scan;
  scan.stamp = stamp;
  scan.angle_min = spec.angle_min;
  scan.angle_increment = spec.angle_increment;
  scan.range_max = spec.range_max;
  scan.ranges.resize(static_cast<std::size_t>(spec.beam_count));

  const double step = grid.resolution() * 0.5;
  const int steps = static_cast<int>(std::ceil(spec.range_max / step));
  const Point2 o = grid.to_cell_units({laser_pose.x(), laser_pose.y()});
  for (int j = 0; j < spec.beam_count; ++j) {
    const double heading = laser_pose.yaw() + scan.angle(static_cast<std::size_t>(j)) -
      grid.origin().yaw();
    const double du = std::cos(heading) / grid.resolution();
    const double dv = std::sin(heading) / grid.resolution();
    double range = spec.range_max;
    for (int k = 0; k <= steps; ++k) {
      const double d = k * step;
      if (d > spec.range_max) {
        break;
      }
      if (grid.occupied(
          static_cast<int>(std::floor(o.x + d * du)), static_cast<int>(std::floor(o.y + d * dv))))
      {
        range = std::clamp(d + sample_normal(rng, spec.range_noise_std), 0.0, spec.range_max);
        break;
      }
    }
    scan.ranges[static_cast<std::size_t>(j)] = range;
  }
  return scan;
}

namespace detail
{

inline bool is_free_at(const OccupancyGrid & grid, const Transform2D & pose)
{
  const auto cell = grid.world_to_cell({pose.x(), pose.y()});
  return cell && grid.at(*cell) == CellState::Free;
}

inline Transform2D unicycle(double v, double w, double dt)
{
  if (std::fabs(w) < 1e-12) {
    return {v * dt, 0.0, 0.0};
  }
  const double a = w * dt;
  return {v / w * std::sin(a), v / w * (1.0 - std::cos(a)), a};
}

// Ground-truth trajectory advanced monotonically in time.
class TrajectoryRunner
{
public:
  explicit TrajectoryRunner(const ScenarioScript & script)
  : script_(script), time_(script.waypoints.front().t), pose_(*script.waypoints.front().pose) {}

  const Transform2D & pose() const {return pose_;}

  // Advances to t; returns the pose before any teleport in this advance and
  // whether one happened, so odometry can ignore the jump.
  Transform2D advance(double t, bool & teleported)
  {
    teleported = false;
    Transform2D motion_end = pose_;
    while (time_ < t) {
      double next = t;
      if (segment_ + 1 < script_.waypoints.size()) {
        next = std::min(next, script_.waypoints[segment_ + 1].t);
      }
      if (kidnap_ < script_.kidnaps.size()) {
        next = std::min(next, script_.kidnaps[kidnap_].t);
      }
      move_to(next);
      while (segment_ + 1 < script_.waypoints.size() && script_.waypoints[segment_ + 1].t <= time_) {
        ++segment_;
      }
      motion_end = pose_;
      while (kidnap_ < script_.kidnaps.size() && script_.kidnaps[kidnap_].t <= time_) {
        pose_ = script_.kidnaps[kidnap_++].pose;
        teleported = true;
      }
      if (!teleported) {
        motion_end = pose_;
      }
    }
    return motion_end;
  }

private:
  void move_to(double t)
  {
    const Waypoint & cur = script_.waypoints[segment_];
    const bool has_next = segment_ + 1 < script_.waypoints.size();
    if (has_next && script_.waypoints[segment_ + 1].pose) {
      const Waypoint & target = script_.waypoints[segment_ + 1];
      const double span = target.t - time_;
      pose_ = span > 0.0 ? interpolate(pose_, *target.pose, (t - time_) / span) : *target.pose;
    } else if (!cur.pose) {
      pose_ = pose_ * unicycle(cur.v, cur.w, t - time_);
    }
    time_ = t;
  }

  const ScenarioScript & script_;
  std::size_t segment_{0};
  std::size_t kidnap_{0};
  double time_;
  Transform2D pose_;
};

}  // namespace detail

inline void validate_scenario(const OccupancyGrid & grid, const ScenarioScript & script)
{
  if (script.waypoints.empty() || !script.waypoints.front().pose) {
    throw ScenarioError("scenario: the first waypoint must be a pose");
  }
  if (!(script.odom_hz > 0.0) || !(script.scan_hz > 0.0)) {
    throw ScenarioError("scenario: odom_hz and scan_hz must be positive");
  }
  for (std::size_t i = 0; i < script.waypoints.size(); ++i) {
    const Waypoint & w = script.waypoints[i];
    if (i > 0 && !(w.t > script.waypoints[i - 1].t)) {
      throw ScenarioError("scenario: waypoint times must be increasing");
    }
    if (w.pose && !detail::is_free_at(grid, *w.pose)) {
      throw ScenarioError(
              "scenario: waypoint at t=" + std::to_string(w.t) + " is not in free space");
    }
  }
  for (std::size_t i = 0; i < script.kidnaps.size(); ++i) {
    const KidnapEvent & k = script.kidnaps[i];
    if (i > 0 && !(k.t > script.kidnaps[i - 1].t)) {
      throw ScenarioError("scenario: kidnap times must be increasing");
    }
    if (!detail::is_free_at(grid, k.pose)) {
      throw ScenarioError(
              "scenario: kidnap target at t=" + std::to_string(k.t) + " is not in free space");
    }
  }
  if (script.end_time() < script.waypoints.front().t) {
    throw ScenarioError("scenario: duration ends before the first waypoint");
  }
}

/// Produces a time-ordered log of odometry, ground truth and scans.
///
/// Odometry integrates the true motion with per-run systematic errors drawn
/// once from odom_noise (scale errors in translation and rotation, heading
/// bias per meter), so it drifts with distance travelled. Kidnaps move the
/// ground truth without any odometry trace.
inline std::vector<Record> simulate(
  const OccupancyGrid & grid, const ScenarioScript & script, const SensorSpec & spec)
{
  validate_scenario(grid, script);
  spec.validate();
  script.odom_noise.validate();

  Rng odom_rng = make_stream(script.seed, "odometry");
  Rng sensor_rng = make_stream(script.seed, "sensor");
  const double trans_scale = sample_normal(odom_rng, script.odom_noise.trans_per_m);
  const double rot_scale = sample_normal(odom_rng, script.odom_noise.rot_per_rad);
  const double rot_per_m = sample_normal(odom_rng, script.odom_noise.rot_per_m);
  const double trans_per_rad = sample_normal(odom_rng, script.odom_noise.trans_per_rad);

  const double t_begin = script.waypoints.front().t;
  const double t_end = script.end_time();
  const double odom_dt = 1.0 / script.odom_hz;
  const double scan_dt = 1.0 / script.scan_hz;

  detail::TrajectoryRunner runner(script);
  Transform2D odom = Transform2D::identity();
  Transform2D previous = runner.pose();
  std::vector<Record> log;

  std::size_t k_odom = 0, k_scan = 0;
  while (true) {
    const double t_odom = t_begin + static_cast<double>(k_odom) * odom_dt;
    const double t_scan = t_begin + static_cast<double>(k_scan) * scan_dt;
    const double t = std::min(t_odom, t_scan);
    if (t > t_end + 1e-9) {
      break;
    }
    bool teleported = false;
    const Transform2D motion_end = runner.advance(t, teleported);
    const Transform2D truth = runner.pose();

    if (std::fabs(t_odom - t) <= 1e-9) {
      const Transform2D step = previous.inverse() * motion_end;
      const double dist = std::hypot(step.x(), step.y());
      const Transform2D measured{
        step.x() * (1.0 + trans_scale) + trans_per_rad * std::fabs(step.yaw()),
        step.y() * (1.0 + trans_scale),
        step.yaw() * (1.0 + rot_scale) + rot_per_m * dist};
      odom = odom * measured;
      previous = truth;
      log.emplace_back(OdomRecord{t, odom});
      log.emplace_back(GroundTruthRecord{t, truth});
      ++k_odom;
    } else if (teleported) {
      previous = previous * (motion_end.inverse() * truth);
    }
    if (std::fabs(t_scan - t) <= 1e-9) {
      log.emplace_back(ScanRecord{scan_raycast(grid, truth * spec.mount, spec, sensor_rng, t)});
      ++k_scan;
    }
  }
  return log;
}

}  // namespace mhamcl

#endif  // MHAMCL__SIM_HPP_
