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

#ifndef MHAMCL__CONFIG_HPP_
#define MHAMCL__CONFIG_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mhamcl/errors.hpp"
#include "mhamcl/multihyp.hpp"
#include "mhamcl/sim.hpp"

namespace mhamcl
{

/// Bad or missing configuration; the message names the offending field.
class ConfigError : public Error
{
public:
  using Error::Error;
};

struct AppConfig
{
  std::filesystem::path map_image;
  std::filesystem::path map_metadata;
  std::uint64_t seed{0};
  LocalizerConfig localizer;
  SensorSpec sensor;
};

namespace detail
{

// Walks one JSON object, remembering the dotted path for error messages.
class Section
{
public:
  Section(const nlohmann::json & j, std::string path)
  : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ConfigError(where() + " must be an object");
    }
  }

  void allow_only(std::initializer_list<const char *> keys) const
  {
    for (const auto & item : j_.items()) {
      bool known = false;
      for (const char * k : keys) {
        known = known || item.key() == k;
      }
      if (!known) {
        throw ConfigError("unknown config field " + name(item.key()));
      }
    }
  }

  bool has(const char * key) const {return j_.contains(key);}

  Section section(const char * key) const {return Section(j_.at(key), name(key));}

  const nlohmann::json & raw(const char * key) const {return j_.at(key);}

  double number(const char * key, double fallback) const
  {
    if (!has(key)) {
      return fallback;
    }
    const auto & v = j_.at(key);
    if (!v.is_number()) {
      throw ConfigError(name(key) + " must be a number");
    }
    return v.get<double>();
  }

  std::uint64_t count(const char * key, std::uint64_t fallback) const
  {
    if (!has(key)) {
      return fallback;
    }
    const auto & v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(name(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool flag(const char * key, bool fallback) const
  {
    if (!has(key)) {
      return fallback;
    }
    if (!j_.at(key).is_boolean()) {
      throw ConfigError(name(key) + " must be true or false");
    }
    return j_.at(key).get<bool>();
  }

  std::string text(const char * key) const
  {
    if (!has(key) || !j_.at(key).is_string()) {
      throw ConfigError(name(key) + " must be a string");
    }
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const char * key, std::size_t n) const
  {
    const auto & v = j_.at(key);
    if (!v.is_array() || v.size() != n) {
      throw ConfigError(name(key) + " must be an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto & e : v) {
      if (!e.is_number()) {
        throw ConfigError(name(key) + " must be an array of " + std::to_string(n) + " numbers");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  Transform2D pose(const char * key, const Transform2D & fallback) const
  {
    if (!has(key)) {
      return fallback;
    }
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
  }

  PoseStd pose_std(const char * key, const PoseStd & fallback) const
  {
    if (!has(key)) {
      return fallback;
    }
    const auto v = numbers(key, 3);
    for (double s : v) {
      require(s >= 0.0, key, "entries must be >= 0");
    }
    return {v[0], v[1], v[2]};
  }

  void require(bool ok, const std::string & key, const char * what) const
  {
    if (!ok) {
      throw ConfigError(name(key) + ": " + what);
    }
  }

  std::string name(const std::string & key) const {return path_.empty() ? key : path_ + "." + key;}
  std::string where() const {return path_.empty() ? "config" : path_;}

private:
  const nlohmann::json & j_;
  std::string path_;
};

inline double fraction(const Section & s, const char * key, double fallback)
{
  const double v = s.number(key, fallback);
  s.require(v >= 0.0 && v <= 1.0, key, "must lie in [0,1]");
  return v;
}

inline double positive(const Section & s, const char * key, double fallback)
{
  const double v = s.number(key, fallback);
  s.require(v > 0.0, key, "must be positive");
  return v;
}

inline double non_negative(const Section & s, const char * key, double fallback)
{
  const double v = s.number(key, fallback);
  s.require(v >= 0.0, key, "must be >= 0");
  return v;
}

inline MotionNoiseParams read_motion_noise(const Section & s, const MotionNoiseParams & d)
{
  s.allow_only({"trans_per_m", "trans_per_rad", "rot_per_rad", "rot_per_m"});
  return {
    non_negative(s, "trans_per_m", d.trans_per_m), non_negative(s, "trans_per_rad", d.trans_per_rad),
    non_negative(s, "rot_per_rad", d.rot_per_rad), non_negative(s, "rot_per_m", d.rot_per_m)};
}

inline nlohmann::json parse_json_file(const std::filesystem::path & path, const char * what)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(std::string("cannot read ") + what + " " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline std::filesystem::path existing_file(
  const std::filesystem::path & base, const std::string & rel, const std::string & field)
{
  const std::filesystem::path p = std::filesystem::path(rel).is_absolute() ?
    std::filesystem::path(rel) : base / rel;
  if (!std::filesystem::is_regular_file(p)) {
    throw ConfigError(field + ": file not found: " + p.string());
  }
  return p;
}

}  // namespace detail

/// Builds a configuration from a parsed document. Relative map paths are
/// resolved against `base_dir`. Absent fields keep their defaults.
inline AppConfig parse_config(const nlohmann::json & doc, const std::filesystem::path & base_dir)
{
  using detail::Section;
  AppConfig cfg;
  const Section root(doc, "");
  root.allow_only({"map", "seed", "filter", "sensor_model", "matcher", "multihyp", "sensor"});

  if (!root.has("map")) {
    throw ConfigError("map: required section missing");
  }
  {
    const Section m = root.section("map");
    m.allow_only({"image", "metadata"});
    cfg.map_image = detail::existing_file(base_dir, m.text("image"), "map.image");
    cfg.map_metadata = detail::existing_file(base_dir, m.text("metadata"), "map.metadata");
  }
  cfg.seed = root.count("seed", 0);

  FilterConfig & f = cfg.localizer.filter;
  if (root.has("filter")) {
    const Section s = root.section("filter");
    s.allow_only(
      {"particles_min", "particles_max", "initial_particles", "initial_std", "spawn_std",
        "motion_noise", "winner_pct", "loser_pct", "jitter", "grow_above", "shrink_below"});
    f.bounds.min = s.count("particles_min", f.bounds.min);
    f.bounds.max = s.count("particles_max", f.bounds.max);
    s.require(f.bounds.min >= 1, "particles_min", "must be >= 1");
    s.require(f.bounds.max >= f.bounds.min, "particles_max", "must be >= particles_min");
    f.initial_particles = s.count("initial_particles", f.initial_particles);
    s.require(
      f.bounds.contains(f.initial_particles), "initial_particles",
      "must lie in [particles_min, particles_max]");
    f.initial_std = s.pose_std("initial_std", f.initial_std);
    f.spawn_std = s.pose_std("spawn_std", f.spawn_std);
    if (s.has("motion_noise")) {
      f.noise = detail::read_motion_noise(s.section("motion_noise"), f.noise);
    }
    f.reseed.winner_pct = detail::fraction(s, "winner_pct", f.reseed.winner_pct);
    f.reseed.loser_pct = detail::fraction(s, "loser_pct", f.reseed.loser_pct);
    s.require(
      f.reseed.winner_pct + f.reseed.loser_pct <= 1.0 + 1e-12, "loser_pct",
      "winner_pct + loser_pct must not exceed 1");
    f.reseed.jitter = s.pose_std("jitter", f.reseed.jitter);
    f.adapt.grow_above = detail::positive(s, "grow_above", f.adapt.grow_above);
    f.adapt.shrink_below = detail::positive(s, "shrink_below", f.adapt.shrink_below);
    s.require(f.adapt.grow_above > f.adapt.shrink_below, "grow_above", "must exceed shrink_below");
  }

  SensorModelParams & sm = cfg.localizer.sensor;
  if (root.has("sensor_model")) {
    const Section s = root.section("sensor_model");
    s.allow_only({"sigma", "hit_threshold_factor", "max_usable_range", "beam_stride"});
    sm.sigma = detail::positive(s, "sigma", sm.sigma);
    sm.hit_threshold_factor = detail::positive(s, "hit_threshold_factor", sm.hit_threshold_factor);
    sm.max_usable_range = detail::positive(s, "max_usable_range", sm.max_usable_range);
    const auto stride = s.count("beam_stride", static_cast<std::uint64_t>(sm.beam_stride));
    s.require(stride >= 1 && stride <= 1000000, "beam_stride", "must lie in [1, 1000000]");
    sm.beam_stride = static_cast<int>(stride);
  }

  MatcherParams & mp = cfg.localizer.matcher;
  if (root.has("matcher")) {
    const Section s = root.section("matcher");
    s.allow_only({"levels", "keep_per_level", "min_score", "refine_yaw_steps"});
    const auto levels = s.count("levels", static_cast<std::uint64_t>(mp.levels));
    s.require(levels >= 1 && levels <= 16, "levels", "must lie in [1, 16]");
    mp.levels = static_cast<int>(levels);
    mp.keep_per_level = s.count("keep_per_level", mp.keep_per_level);
    s.require(mp.keep_per_level >= 1, "keep_per_level", "must be >= 1");
    mp.min_score = detail::fraction(s, "min_score", mp.min_score);
    const auto refine = s.count("refine_yaw_steps", static_cast<std::uint64_t>(mp.refine_yaw_steps));
    s.require(refine <= 8, "refine_yaw_steps", "must lie in [0, 8]");
    mp.refine_yaw_steps = static_cast<int>(refine);
  }

  MultiHypParams & h = cfg.localizer.multihyp;
  if (root.has("multihyp")) {
    const Section s = root.section("multihyp");
    s.allow_only(
      {"destroy_below", "spawn_above", "merge_dist", "merge_yaw", "max_hypotheses",
        "quality_alpha", "spawn_only_when_empty", "predict_hz", "correct_hz", "reseed_hz",
        "match_period", "stall_timeout"});
    h.destroy_below = detail::fraction(s, "destroy_below", h.destroy_below);
    h.spawn_above = detail::fraction(s, "spawn_above", h.spawn_above);
    h.merge_dist = detail::positive(s, "merge_dist", h.merge_dist);
    h.merge_yaw = detail::positive(s, "merge_yaw", h.merge_yaw);
    h.max_hypotheses = s.count("max_hypotheses", h.max_hypotheses);
    s.require(h.max_hypotheses >= 1, "max_hypotheses", "must be >= 1");
    h.quality_alpha = detail::fraction(s, "quality_alpha", h.quality_alpha);
    s.require(h.quality_alpha > 0.0, "quality_alpha", "must be positive");
    h.spawn_only_when_empty = s.flag("spawn_only_when_empty", h.spawn_only_when_empty);
    h.predict_hz = detail::positive(s, "predict_hz", h.predict_hz);
    h.correct_hz = detail::positive(s, "correct_hz", h.correct_hz);
    h.reseed_hz = detail::positive(s, "reseed_hz", h.reseed_hz);
    h.match_period = detail::positive(s, "match_period", h.match_period);
    h.stall_timeout = detail::positive(s, "stall_timeout", h.stall_timeout);
  }

  SensorSpec & ss = cfg.sensor;
  if (root.has("sensor")) {
    const Section s = root.section("sensor");
    s.allow_only(
      {"beam_count", "angle_min", "angle_increment", "range_max", "range_noise_std", "mount"});
    const auto beams = s.count("beam_count", static_cast<std::uint64_t>(ss.beam_count));
    s.require(beams >= 1 && beams <= 100000, "beam_count", "must lie in [1, 100000]");
    ss.beam_count = static_cast<int>(beams);
    ss.angle_min = s.number("angle_min", ss.angle_min);
    ss.angle_increment = s.number("angle_increment", ss.angle_increment);
    ss.range_max = detail::positive(s, "range_max", ss.range_max);
    ss.range_noise_std = detail::non_negative(s, "range_noise_std", ss.range_noise_std);
    ss.mount = s.pose("mount", ss.mount);
  }
  cfg.localizer.base_to_laser = ss.mount;

  try {
    cfg.localizer.validate();
    ss.validate();
  } catch (const ParameterError & e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline AppConfig load_config(const std::filesystem::path & path)
{
  const nlohmann::json doc = detail::parse_json_file(path, "config");
  return parse_config(doc, path.parent_path());
}

/// Scenario document: duration, rates, odometry noise, waypoints and kidnaps.
inline ScenarioScript parse_scenario(const nlohmann::json & doc, std::uint64_t default_seed)
{
  using detail::Section;
  const Section root(doc, "scenario");
  root.allow_only({"duration", "odom_hz", "scan_hz", "seed", "odom_noise", "waypoints", "kidnaps"});
  ScenarioScript s;
  s.seed = root.count("seed", default_seed);
  s.odom_hz = detail::positive(root, "odom_hz", s.odom_hz);
  s.scan_hz = detail::positive(root, "scan_hz", s.scan_hz);
  if (root.has("duration")) {
    s.duration = detail::non_negative(root, "duration", 0.0);
  }
  if (root.has("odom_noise")) {
    s.odom_noise = detail::read_motion_noise(root.section("odom_noise"), s.odom_noise);
  }
  if (!root.has("waypoints") || !root.raw("waypoints").is_array()) {
    throw ConfigError("scenario.waypoints must be an array");
  }
  std::size_t i = 0;
  for (const auto & w : root.raw("waypoints")) {
    const Section ws(w, "scenario.waypoints[" + std::to_string(i++) + "]");
    ws.allow_only({"t", "pose", "cmd"});
    if (!ws.has("t")) {
      throw ConfigError(ws.name("t") + " is required");
    }
    const double t = ws.number("t", 0.0);
    if (ws.has("pose") == ws.has("cmd")) {
      throw ConfigError(ws.where() + " needs exactly one of pose or cmd");
    }
    if (ws.has("pose")) {
      s.waypoints.push_back(Waypoint::at(t, ws.pose("pose", {})));
    } else {
      const auto c = ws.numbers("cmd", 2);
      s.waypoints.push_back(Waypoint::command(t, c[0], c[1]));
    }
  }
  if (root.has("kidnaps")) {
    if (!root.raw("kidnaps").is_array()) {
      throw ConfigError("scenario.kidnaps must be an array");
    }
    i = 0;
    for (const auto & k : root.raw("kidnaps")) {
      const Section ks(k, "scenario.kidnaps[" + std::to_string(i++) + "]");
      ks.allow_only({"t", "pose"});
      if (!ks.has("t") || !ks.has("pose")) {
        throw ConfigError(ks.where() + " needs t and pose");
      }
      s.kidnaps.push_back({ks.number("t", 0.0), ks.pose("pose", {})});
    }
  }
  return s;
}

inline ScenarioScript load_scenario(const std::filesystem::path & path, std::uint64_t default_seed)
{
  return parse_scenario(detail::parse_json_file(path, "scenario"), default_seed);
}

}  // namespace mhamcl

#endif  // MHAMCL__CONFIG_HPP_
