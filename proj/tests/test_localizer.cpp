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

#include <cmath>
#include <vector>

#include "mhamcl/localizer.hpp"
#include "mhamcl/metrics.hpp"
#include "support/experiments.hpp"

namespace
{

using namespace mhamcl;
namespace tw = mhamcl::testing;

class LocalizerTest : public ::testing::Test
{
protected:
  static void SetUpTestSuite()
  {
    grid_ = new OccupancyGrid(tw::distinctive_room(0.05));
    pyramid_ = new GridPyramid(*grid_, tw::experiment_config().matcher.levels);
    log_ = new std::vector<Record>(simulate(*grid_, tw::tracking_scenario(4, 10.0), tw::experiment_lidar()));
  }

  static void TearDownTestSuite()
  {
    delete log_;
    delete pyramid_;
    delete grid_;
  }

  static OccupancyGrid * grid_;
  static GridPyramid * pyramid_;
  static std::vector<Record> * log_;
};

OccupancyGrid * LocalizerTest::grid_ = nullptr;
GridPyramid * LocalizerTest::pyramid_ = nullptr;
std::vector<Record> * LocalizerTest::log_ = nullptr;

TEST_F(LocalizerTest, PhaseCountsFollowTheDefaultRates)
{
  const LocalizerConfig config = tw::experiment_config();
  const ReplayResult r = replay(*log_, *pyramid_, config, Transform2D{1.2, 1.2, 0.0}, 1);
  // Rate times span: 10 s at 100 / 10 / 0.3 / 0.2 Hz.
  EXPECT_NEAR(static_cast<double>(r.counts.predict), 1000.0, 1.0);
  EXPECT_NEAR(static_cast<double>(r.counts.correct), 100.0, 1.0);
  EXPECT_NEAR(static_cast<double>(r.counts.reseed), 3.0, 1.0);
  EXPECT_NEAR(static_cast<double>(r.counts.match), 2.0, 1.0);
  EXPECT_EQ(r.timings.size(), r.counts.correct);
  EXPECT_EQ(tw::records_of<EstimateRecord>(r.output).size(), r.counts.correct);
}

TEST_F(LocalizerTest, NoScansMeansNoEstimates)
{
  std::vector<Record> odom_only;
  for (const Record & rec : *log_) {
    if (std::holds_alternative<OdomRecord>(rec)) {
      odom_only.push_back(rec);
    }
  }
  const ReplayResult r = replay(odom_only, *pyramid_, tw::experiment_config(), Transform2D{1.2, 1.2, 0.0}, 1);
  EXPECT_EQ(r.counts.correct, 0u);
  EXPECT_TRUE(tw::records_of<EstimateRecord>(r.output).empty());
  EXPECT_GT(r.counts.predict, 900u);
}

TEST_F(LocalizerTest, ReplayIsDeterministicPerSeed)
{
  const LocalizerConfig config = tw::experiment_config();
  const ReplayResult a = replay(*log_, *pyramid_, config, Transform2D{1.2, 1.2, 0.0}, 11);
  const ReplayResult b = replay(*log_, *pyramid_, config, Transform2D{1.2, 1.2, 0.0}, 11);
  const ReplayResult c = replay(*log_, *pyramid_, config, Transform2D{1.2, 1.2, 0.0}, 12);
  EXPECT_EQ(a.output, b.output);
  EXPECT_NE(a.output, c.output);
}

TEST_F(LocalizerTest, KnownStartTracks)
{
  const ReplayResult r = replay(*log_, *pyramid_, tw::experiment_config(), Transform2D{1.2, 1.2, 0.0}, 3);
  const auto te = trajectory_error(tw::records_of<EstimateRecord>(r.output), tw::records_of<GroundTruthRecord>(*log_));
  EXPECT_LT(te.position.median, 0.1);
}

TEST_F(LocalizerTest, UnknownStartBootstrapsFromTheMatcher)
{
  const ReplayResult r = replay(*log_, *pyramid_, tw::experiment_config(), std::nullopt, 3);
  const auto estimates = tw::records_of<EstimateRecord>(r.output);
  ASSERT_FALSE(estimates.empty());
  EXPECT_GE(r.counts.match, 1u);
  const auto te = trajectory_error(estimates, tw::records_of<GroundTruthRecord>(*log_));
  const auto rec = recovery_time(te.series, 0.3, 5.0);
  ASSERT_TRUE(rec.has_value());
  EXPECT_LT(*rec, 1.0);
}

TEST_F(LocalizerTest, OutputAlwaysComesFromTheBestHypothesis)
{
  LocalizerConfig config = tw::experiment_config();
  config.multihyp.max_hypotheses = 3;
  config.multihyp.spawn_above = 0.0;
  config.multihyp.match_period = 1.0;
  std::size_t checked = 0;
  Localizer * self = nullptr;
  Localizer loc(
    *pyramid_, config, Transform2D{1.2, 1.2, 0.0}, 5, [&](const Record & rec) {
      if (const auto * e = std::get_if<EstimateRecord>(&rec)) {
        const auto b = best(self->hypotheses());
        ASSERT_TRUE(b.has_value());
        EXPECT_EQ(b->id, e->hyp_id);
        EXPECT_EQ(b->quality, e->quality);
        EXPECT_EQ(static_cast<std::size_t>(e->n_hyp), self->hypotheses().size());
        EXPECT_LE(self->hypotheses().size(), config.multihyp.max_hypotheses);
        EXPECT_GE(self->hypotheses().size(), 1u);
        ++checked;
      }
    });
  self = &loc;
  for (const Record & rec : *log_) {
    if (const auto * o = std::get_if<OdomRecord>(&rec)) {
      loc.on_odom(o->t, o->pose);
    } else if (const auto * s = std::get_if<ScanRecord>(&rec)) {
      loc.on_scan(s->scan);
    }
  }
  loc.finish();
  EXPECT_GT(checked, 90u);
}

TEST_F(LocalizerTest, InputGapRaisesAStallWarning)
{
  std::vector<Record> gapped;
  for (const Record & rec : *log_) {
    const double t = record_time(rec);
    if (t < 4.0 || t > 6.0) {
      gapped.push_back(rec);
    }
  }
  const ReplayResult r = replay(gapped, *pyramid_, tw::experiment_config(), Transform2D{1.2, 1.2, 0.0}, 1);
  const auto warnings = tw::records_of<WarningRecord>(r.output);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NEAR(warnings[0].t, 6.0, 0.02);
  EXPECT_NE(warnings[0].message.find("stall"), std::string::npos);
  // No estimate is produced inside the gap.
  for (const auto & e : tw::records_of<EstimateRecord>(r.output)) {
    EXPECT_FALSE(e.t > 4.0 && e.t < 6.0) << e.t;
  }
}

TEST_F(LocalizerTest, RejectsTimeReversedInput)
{
  Localizer loc(*pyramid_, tw::experiment_config(), Transform2D{1.2, 1.2, 0.0}, 1, [](const Record &) {});
  loc.on_odom(1.0, Transform2D{});
  EXPECT_THROW(loc.on_odom(0.5, Transform2D{}), ParameterError);
}

TEST_F(LocalizerTest, InvalidConfigurationIsRejected)
{
  LocalizerConfig config = tw::experiment_config();
  config.multihyp.correct_hz = 0.0;
  EXPECT_THROW(
    Localizer(*pyramid_, config, std::nullopt, 1, [](const Record &) {}), ParameterError);
}

}  // namespace
