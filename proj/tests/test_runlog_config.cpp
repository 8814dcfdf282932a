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

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mhamcl/config.hpp"
#include "mhamcl/runlog.hpp"
#include "support/experiments.hpp"
#include "support/tempdir.hpp"

namespace
{

using namespace mhamcl;
namespace tw = mhamcl::testing;
using nlohmann::json;

std::string config_error(const json & doc, const std::filesystem::path & base)
{
  try {
    parse_config(doc, base);
  } catch (const ConfigError & e) {
    return e.what();
  }
  return "";
}

class ConfigTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    save_map(tw::room(2.0, 2.0, 0.1), dir_ / "map.pgm", dir_ / "map.yaml");
  }

  json minimal() const
  {
    return json{{"map", {{"image", "map.pgm"}, {"metadata", "map.yaml"}}}};
  }

  tw::ScratchDir dir_{"config"};
};

TEST(RunLog, RoundTripIsLossless)
{
  const auto grid = tw::distinctive_room();
  std::vector<Record> records = simulate(grid, tw::tracking_scenario(2, 1.0), tw::experiment_lidar());
  Covariance3 cov{};
  cov[0] = 0.1234567890123;
  cov[7] = cov[5] = -1e-17;
  records.push_back(EstimateRecord{1.0, Transform2D{1.0 / 3.0, 2.0, -3.0}, cov, 0.5, 2, 7});
  records.push_back(WarningRecord{1.0, "input stall: \"quoted\""});
  std::stringstream buf;
  write_run_log(buf, records);
  EXPECT_EQ(read_run_log(buf), records);
}

TEST(RunLog, LineFormats)
{
  EXPECT_EQ(
    to_json_line(OdomRecord{0.5, Transform2D{1.0, 2.0, 0.25}}),
    R"({"t":0.5,"type":"odom","x":1.0,"y":2.0,"yaw":0.25})");
  LaserScan s;
  s.stamp = 1.0;
  s.angle_min = -1.0;
  s.angle_increment = 0.5;
  s.range_max = 4.0;
  s.ranges = {1.0, 2.5};
  EXPECT_EQ(
    to_json_line(ScanRecord{s}),
    R"({"t":1.0,"type":"scan","angle_min":-1.0,"angle_inc":0.5,"range_max":4.0,"ranges":[1.0,2.5]})");
  const json e = json::parse(to_json_line(EstimateRecord{2.0, {}, {}, 0.75, 3, 4}));
  EXPECT_EQ(e["type"], "estimate");
  EXPECT_EQ(e["cov"].size(), 9u);
  EXPECT_EQ(e["n_hyp"], 3);
  EXPECT_EQ(e["hyp_id"], 4);
}

TEST(RunLog, UnknownTypesAreSkippedWithAWarning)
{
  std::stringstream in;
  in << R"({"t":0.0,"type":"odom","x":0,"y":0,"yaw":0})" << "\n\n"
     << R"({"t":0.1,"type":"imu","wx":1})" << "\n"
     << R"({"t":0.2,"type":"gt","x":1,"y":2,"yaw":3})" << "\n";
  std::vector<std::string> warnings;
  const auto records = read_run_log(in, [&](const std::string & w) {warnings.push_back(w);});
  ASSERT_EQ(records.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<GroundTruthRecord>(records[1]));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 3"), std::string::npos);
}

TEST(RunLog, TimeMustNotGoBackwards)
{
  std::stringstream in;
  in << R"({"t":1.0,"type":"odom","x":0,"y":0,"yaw":0})" << "\n"
     << R"({"t":1.0,"type":"gt","x":0,"y":0,"yaw":0})" << "\n"
     << R"({"t":0.5,"type":"odom","x":0,"y":0,"yaw":0})" << "\n";
  EXPECT_THROW(read_run_log(in), FormatError);
}

TEST(RunLog, MalformedLinesNameTheLine)
{
  for (const std::string bad : {
      R"({"t":0.0,"type":"odom","x":0,"y":0})", R"({"t":"x","type":"odom","x":0,"y":0,"yaw":0})",
      R"([1,2])", R"({"t":0.0,"type":"odom",)"})
  {
    std::stringstream in;
    in << R"({"t":0.0,"type":"gt","x":0,"y":0,"yaw":0})" << "\n" << bad << "\n";
    try {
      read_run_log(in);
      ADD_FAILURE() << bad;
    } catch (const FormatError & e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST_F(ConfigTest, MinimalConfigTakesDefaults)
{
  const AppConfig cfg = parse_config(minimal(), dir_.path());
  EXPECT_EQ(cfg.map_image, dir_ / "map.pgm");
  EXPECT_EQ(cfg.localizer.multihyp.max_hypotheses, 5u);
  EXPECT_EQ(cfg.localizer.multihyp.match_period, 5.0);
  EXPECT_EQ(cfg.seed, 0u);
}

TEST_F(ConfigTest, FieldsAreApplied)
{
  json doc = minimal();
  doc["seed"] = 42;
  doc["filter"] = {{"particles_min", 50}, {"particles_max", 500}, {"initial_particles", 200},
    {"motion_noise", {{"trans_per_m", 0.1}}}, {"jitter", {0.1, 0.1, 0.05}}};
  doc["sensor_model"] = {{"sigma", 0.08}, {"beam_stride", 4}};
  doc["matcher"] = {{"levels", 3}, {"keep_per_level", 8}, {"refine_yaw_steps", 0}};
  doc["multihyp"] = {{"max_hypotheses", 3}, {"spawn_only_when_empty", true}};
  doc["sensor"] = {{"beam_count", 180}, {"mount", {0.1, 0.0, 0.0}}};
  const AppConfig cfg = parse_config(doc, dir_.path());
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.localizer.filter.bounds.min, 50u);
  EXPECT_EQ(cfg.localizer.filter.initial_particles, 200u);
  EXPECT_EQ(cfg.localizer.filter.noise.trans_per_m, 0.1);
  EXPECT_EQ(cfg.localizer.filter.reseed.jitter.yaw, 0.05);
  EXPECT_EQ(cfg.localizer.sensor.sigma, 0.08);
  EXPECT_EQ(cfg.localizer.sensor.beam_stride, 4);
  EXPECT_EQ(cfg.localizer.matcher.levels, 3);
  EXPECT_EQ(cfg.localizer.matcher.refine_yaw_steps, 0);
  EXPECT_EQ(cfg.localizer.multihyp.max_hypotheses, 3u);
  EXPECT_TRUE(cfg.localizer.multihyp.spawn_only_when_empty);
  EXPECT_EQ(cfg.sensor.beam_count, 180);
  EXPECT_EQ(cfg.localizer.base_to_laser, (Transform2D{0.1, 0.0, 0.0}));
}

TEST_F(ConfigTest, OutOfRangeFieldsAreNamed)
{
  const std::vector<std::pair<json, std::string>> cases{
    {{{"filter", {{"winner_pct", 1.5}}}}, "filter.winner_pct"},
    {{{"filter", {{"winner_pct", 0.6}, {"loser_pct", 0.6}}}}, "filter.loser_pct"},
    {{{"filter", {{"particles_min", 10}, {"particles_max", 5}}}}, "filter.particles_max"},
    {{{"filter", {{"initial_particles", 5000}}}}, "filter.initial_particles"},
    {{{"filter", {{"jitter", {0.1, -0.1, 0.0}}}}}, "filter.jitter"},
    {{{"filter", {{"motion_noise", {{"trans_per_m", -1}}}}}}, "filter.motion_noise.trans_per_m"},
    {{{"sensor_model", {{"sigma", 0.0}}}}, "sensor_model.sigma"},
    {{{"sensor_model", {{"beam_stride", 0}}}}, "sensor_model.beam_stride"},
    {{{"matcher", {{"levels", 0}}}}, "matcher.levels"},
    {{{"matcher", {{"min_score", 2}}}}, "matcher.min_score"},
    {{{"multihyp", {{"reseed_hz", 0}}}}, "multihyp.reseed_hz"},
    {{{"multihyp", {{"destroy_below", -0.1}}}}, "multihyp.destroy_below"},
    {{{"multihyp", {{"max_hypotheses", 0}}}}, "multihyp.max_hypotheses"},
    {{{"sensor", {{"range_max", -1}}}}, "sensor.range_max"},
    {{{"sensor", {{"mount", {1, 2}}}}}, "sensor.mount"},
    {{{"seed", -3}}, "seed"},
    {{{"filter", {{"bogus", 1}}}}, "filter.bogus"},
    {{{"extra", 1}}, "extra"},
  };
  for (const auto & [patch, field] : cases) {
    json doc = minimal();
    doc.merge_patch(patch);
    const std::string msg = config_error(doc, dir_.path());
    EXPECT_NE(msg.find(field), std::string::npos) << field << " -> '" << msg << "'";
  }
}

TEST_F(ConfigTest, MissingMapNamesThePath)
{
  json doc = minimal();
  doc["map"]["image"] = "nowhere.pgm";
  const std::string msg = config_error(doc, dir_.path());
  EXPECT_NE(msg.find("nowhere.pgm"), std::string::npos) << msg;
  EXPECT_NE(config_error(json{{"seed", 1}}, dir_.path()).find("map"), std::string::npos);
}

TEST_F(ConfigTest, LoadResolvesPathsAgainstTheConfigFile)
{
  const auto path = dir_.write("cfg.json", minimal().dump());
  const AppConfig cfg = load_config(path);
  EXPECT_EQ(cfg.map_metadata, dir_ / "map.yaml");
  EXPECT_THROW(load_config(dir_ / "absent.json"), ConfigError);
  EXPECT_THROW(load_config(dir_.write("broken.json", "{ not json")), ConfigError);
}

TEST(Scenario, ParsesWaypointsKidnapsAndSeed)
{
  const json doc = json::parse(R"({
    "duration": 12, "odom_hz": 50, "scan_hz": 5,
    "odom_noise": {"trans_per_m": 0.02, "rot_per_rad": 0.01},
    "waypoints": [{"t": 0, "pose": [1, 1, 0]}, {"t": 5, "pose": [2, 1, 0]}, {"t": 6, "cmd": [0.2, 0.1]}],
    "kidnaps": [{"t": 8, "pose": [3, 3, 1]}]})");
  const ScenarioScript s = parse_scenario(doc, 77);
  EXPECT_EQ(s.seed, 77u);
  EXPECT_EQ(s.end_time(), 12.0);
  EXPECT_EQ(s.odom_hz, 50.0);
  ASSERT_EQ(s.waypoints.size(), 3u);
  EXPECT_FALSE(s.waypoints[2].pose.has_value());
  EXPECT_EQ(s.waypoints[2].w, 0.1);
  ASSERT_EQ(s.kidnaps.size(), 1u);
  EXPECT_EQ(s.kidnaps[0].pose, (Transform2D{3, 3, 1}));
  EXPECT_EQ(s.odom_noise.trans_per_m, 0.02);

  json seeded = doc;
  seeded["seed"] = 5;
  EXPECT_EQ(parse_scenario(seeded, 77).seed, 5u);
}

TEST(Scenario, ErrorsNameTheEntry)
{
  auto err = [](const char * text) {
      try {
        parse_scenario(json::parse(text), 0);
      } catch (const ConfigError & e) {
        return std::string(e.what());
      }
      return std::string();
    };
  EXPECT_NE(err(R"({"waypoints": [{"t": 0}]})").find("waypoints[0]"), std::string::npos);
  EXPECT_NE(err(R"({"waypoints": [{"t": 0, "pose": [1, 1]}]})").find("waypoints[0].pose"), std::string::npos);
  EXPECT_NE(err(R"({"waypoints": [{"pose": [1, 1, 0]}]})").find("waypoints[0].t"), std::string::npos);
  EXPECT_NE(err(R"({"waypoints": [], "kidnap": []})").find("scenario.kidnap"), std::string::npos);
  EXPECT_NE(err(R"({"odom_hz": 0, "waypoints": []})").find("odom_hz"), std::string::npos);
  EXPECT_NE(err(R"({})").find("waypoints"), std::string::npos);
}

}  // namespace
