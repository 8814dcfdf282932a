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
#include "mhamcl/commands.hpp"
#include "support/tempdir.hpp"
#include "support/worlds.hpp"

namespace
{

using namespace mhamcl;
namespace tw = mhamcl::testing;
using nlohmann::json;

const char * kShortScenario = R"({
  "duration": 6, "seed": 3,
  "odom_noise": {"trans_per_m": 0.02, "rot_per_rad": 0.02},
  "waypoints": [{"t": 0, "pose": [1.2, 1.2, 0]}, {"t": 6, "pose": [3.0, 1.2, 0]}]})";

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    save_map(tw::distinctive_room(0.05), dir_ / "room.pgm", dir_ / "room.yaml");
    config_ = dir_.write(
      "config.json",
      json{
        {"map", {{"image", "room.pgm"}, {"metadata", "room.yaml"}}},
        {"sensor_model", {{"sigma", 0.05}, {"beam_stride", 6}}}}.dump());
    scenario_ = dir_.write("scenario.json", kShortScenario);
  }

  int simulate(const std::filesystem::path & out)
  {
    return cmd_simulate({config_, scenario_, out, std::nullopt}, err_);
  }

  int localize(const std::filesystem::path & log, const std::filesystem::path & out, std::uint64_t seed)
  {
    return cmd_localize({config_, log, out, seed, std::nullopt, false, std::nullopt}, err_);
  }

  tw::ScratchDir dir_{"cli"};
  std::filesystem::path config_;
  std::filesystem::path scenario_;
  std::ostringstream err_;
};

TEST_F(CliTest, PipelineProducesEstimatesAndSummary)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk) << err_.str();
  ASSERT_EQ(
    cmd_localize(
      {config_, dir_ / "run.log", dir_ / "est.log", 1, std::string("1.2 1.2 0"), false,
        dir_ / "timing.csv"},
      err_),
    kExitOk) << err_.str();
  ASSERT_EQ(
    cmd_bench({dir_ / "est.log", dir_ / "run.log", dir_ / "bench", dir_ / "timing.csv"}, err_),
    kExitOk) << err_.str();

  const json summary = json::parse(tw::slurp(dir_ / "bench" / "summary.json"));
  EXPECT_GE(summary["samples"].get<int>(), 55);
  EXPECT_LT(summary["position_error"]["median"].get<double>(), 0.1);
  EXPECT_TRUE(summary["recovery"]["recovered"].get<bool>());
  EXPECT_GT(summary["cpu_seconds"]["mean"].get<double>(), 0.0);
  const std::string csv = tw::slurp(dir_ / "bench" / "errors.csv");
  EXPECT_EQ(csv.rfind("t,pos_err,yaw_err,quality,uncertainty,n_hyp,cpu_s\n", 0), 0u);
  EXPECT_NE(tw::slurp(dir_ / "timing.csv").find("t,cpu_s\n"), std::string::npos);
}

TEST_F(CliTest, SameInputsAndSeedGiveIdenticalFiles)
{
  ASSERT_EQ(simulate(dir_ / "a.log"), kExitOk);
  ASSERT_EQ(simulate(dir_ / "b.log"), kExitOk);
  EXPECT_EQ(tw::slurp(dir_ / "a.log"), tw::slurp(dir_ / "b.log"));
  ASSERT_EQ(localize(dir_ / "a.log", dir_ / "e1.log", 9), kExitOk);
  ASSERT_EQ(localize(dir_ / "a.log", dir_ / "e2.log", 9), kExitOk);
  ASSERT_EQ(localize(dir_ / "a.log", dir_ / "e3.log", 10), kExitOk);
  EXPECT_EQ(tw::slurp(dir_ / "e1.log"), tw::slurp(dir_ / "e2.log"));
  EXPECT_NE(tw::slurp(dir_ / "e1.log"), tw::slurp(dir_ / "e3.log"));
}

TEST_F(CliTest, MissingMapIsAUsageErrorNamingThePath)
{
  const auto config = dir_.write(
    "bad.json", R"({"map": {"image": "gone.pgm", "metadata": "room.yaml"}})");
  EXPECT_EQ(cmd_simulate({config, scenario_, dir_ / "x.log", std::nullopt}, err_), kExitUsage);
  EXPECT_NE(err_.str().find("gone.pgm"), std::string::npos) << err_.str();
  EXPECT_FALSE(std::filesystem::exists(dir_ / "x.log"));
}

TEST_F(CliTest, BadInitialPoseIsAUsageError)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk);
  EXPECT_EQ(
    cmd_localize(
      {config_, dir_ / "run.log", dir_ / "e.log", std::nullopt, std::string("1 2"), false,
        std::nullopt},
      err_),
    kExitUsage);
  EXPECT_NE(err_.str().find("--initial-pose"), std::string::npos);
}

TEST_F(CliTest, LocalizeNeedsScans)
{
  const auto log = dir_.write(
    "odom.log", R"({"t":0.0,"type":"odom","x":0,"y":0,"yaw":0})" "\n");
  EXPECT_EQ(localize(log, dir_ / "e.log", 1), kExitFailure);
  EXPECT_NE(err_.str().find("no scan"), std::string::npos) << err_.str();
}

TEST_F(CliTest, BenchWithoutGroundTruthFails)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk);
  ASSERT_EQ(localize(dir_ / "run.log", dir_ / "est.log", 1), kExitOk);
  EXPECT_EQ(cmd_bench({dir_ / "est.log", dir_ / "est.log", dir_ / "bench"}, err_), kExitFailure);
  EXPECT_NE(err_.str().find("no ground truth"), std::string::npos) << err_.str();
  EXPECT_FALSE(std::filesystem::exists(dir_ / "bench" / "summary.json"));
}

TEST_F(CliTest, BenchRecoveryIsMeasuredFromTheGivenTime)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk);
  ASSERT_EQ(localize(dir_ / "run.log", dir_ / "est.log", 1), kExitOk);
  BenchOptions opt{dir_ / "est.log", dir_ / "run.log", dir_ / "bench"};
  opt.recovery_from = 0.55;
  ASSERT_EQ(cmd_bench(opt, err_), kExitOk) << err_.str();
  const json summary = json::parse(tw::slurp(dir_ / "bench" / "summary.json"));
  EXPECT_EQ(summary["recovery"]["from"].get<double>(), 0.55);
  opt.threshold = 0.0;
  EXPECT_EQ(cmd_bench(opt, err_), kExitUsage);
}

TEST_F(CliTest, MatchRanksCandidatesForTheNearestScan)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk);
  std::ostringstream table;
  ASSERT_EQ(cmd_match({config_, dir_ / "run.log", 0.02, 0.05, std::nullopt}, table, err_), kExitOk)
    << err_.str();
  std::istringstream rows(table.str());
  std::string header, first;
  std::getline(rows, header);
  std::getline(rows, first);
  EXPECT_EQ(header, "rank,x,y,yaw,score,level,accepted");
  double rank = 0, x = 0, y = 0;
  char c1 = 0, c2 = 0;
  std::istringstream(first) >> rank >> c1 >> x >> c2 >> y;
  EXPECT_EQ(rank, 1);
  EXPECT_NEAR(x, 1.2, 0.15);
  EXPECT_NEAR(y, 1.2, 0.15);

  EXPECT_EQ(cmd_match({config_, dir_ / "run.log", 100.0, 0.05, std::nullopt}, table, err_), kExitFailure);
  EXPECT_NE(err_.str().find("no scan within"), std::string::npos);
}

TEST_F(CliTest, MatchOnAnUnknownMapGivesAnEmptyTable)
{
  ASSERT_EQ(simulate(dir_ / "run.log"), kExitOk);
  save_map(
    OccupancyGrid(200, 200, 0.05, {}, CellState::Unknown), dir_ / "room.pgm", dir_ / "room.yaml");
  std::ostringstream table;
  ASSERT_EQ(
    cmd_match({config_, dir_ / "run.log", 1.0, 0.05, dir_ / "m.csv"}, table, err_), kExitOk)
    << err_.str();
  EXPECT_TRUE(table.str().empty());
  EXPECT_EQ(tw::slurp(dir_ / "m.csv"), "rank,x,y,yaw,score,level,accepted\n");
}

TEST(PoseText, AcceptsSpacesAndCommas)
{
  EXPECT_EQ(parse_pose_text("1, 2.5,-0.5"), (Transform2D{1.0, 2.5, -0.5}));
  EXPECT_THROW(parse_pose_text("1 2 3 4"), ConfigError);
  EXPECT_THROW(parse_pose_text("1 2 nan"), ConfigError);
}

}  // namespace
