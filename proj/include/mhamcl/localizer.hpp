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

#ifndef MHAMCL__LOCALIZER_HPP_
#define MHAMCL__LOCALIZER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mhamcl/filter.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/gridmap.hpp"
#include "mhamcl/matcher.hpp"
#include "mhamcl/multihyp.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/records.hpp"

namespace mhamcl
{

struct PhaseCounts
{
  std::size_t predict{0};
  std::size_t correct{0};
  std::size_t reseed{0};
  std::size_t match{0};
};

struct CorrectionTiming
{
  double t{0.0};
  double cpu_seconds{0.0};
};

/// Named random streams split from one seed.
struct RandomStreams
{
  explicit RandomStreams(std::uint64_t seed)
  : motion(make_stream(seed, "motion")), reseed(make_stream(seed, "reseed")),
    init(make_stream(seed, "init")) {}

  Rng motion;
  Rng reseed;
  Rng init;
};

/// Drives every phase at its own rate on the input clock: prediction of all
/// hypotheses, correction with quality/prune/merge and estimate output,
/// reseed with size adaptation, and periodic map matching for new hypotheses.
///
/// A tick at time T runs once odometry covers T and every input stamped up
/// to T has been seen, so replaying the same log always yields the same
/// output.
class Localizer
{
public:
  using Sink = std::function<void (const Record &)>;

  Localizer(
    const GridPyramid & pyramid, LocalizerConfig config,
    std::optional<Transform2D> initial_pose, std::uint64_t seed, Sink sink)
  : pyramid_(pyramid), config_(std::move(config)), initial_pose_(initial_pose),
    streams_(seed), sink_(std::move(sink)), hypotheses_(config_.multihyp)
  {
    config_.validate();
  }

  void on_odom(double t, const Transform2D & odom_to_base)
  {
    observe(t);
    odom_.insert(t, odom_to_base);
    if (!t0_) {
      t0_ = t;
      hypotheses_ = start(initial_pose_, config_, streams_.init, t);
    }
    pump(false);
    report_gap(t);
  }

  void on_scan(const LaserScan & scan)
  {
    observe(scan.stamp);
    pending_scans_.push_back(scan);
    pump(false);
    report_gap(scan.stamp);
  }

  /// Runs the remaining ticks covered by the input.
  void finish() {pump(true);}

  const PhaseCounts & counts() const {return counts_;}
  const HypothesisSet & hypotheses() const {return hypotheses_;}
  const std::vector<CorrectionTiming> & timings() const {return timings_;}

private:
  static constexpr double kTickEpsilon = 1e-9;

  enum Phase { kPredict = 0, kCorrect, kReseed, kMatch, kPhaseCount };

  double period(int phase) const
  {
    const MultiHypParams & p = config_.multihyp;
    switch (phase) {
      case kPredict: return 1.0 / p.predict_hz;
      case kCorrect: return 1.0 / p.correct_hz;
      case kReseed: return 1.0 / p.reseed_hz;
      default: return p.match_period;
    }
  }

  double due(int phase) const
  {
    return *t0_ + static_cast<double>(ticks_[static_cast<std::size_t>(phase)]) * period(phase);
  }

  void observe(double t)
  {
    if (latest_seen_ && t < *latest_seen_) {
      throw ParameterError("Localizer: inputs must be time-ordered");
    }
    gap_ = latest_seen_ ? t - *latest_seen_ : 0.0;
    latest_seen_ = t;
  }

  void report_gap(double t)
  {
    if (gap_ > config_.multihyp.stall_timeout) {
      sink_(WarningRecord{t, "input stall: no data for " + std::to_string(gap_) + " s"});
    }
    gap_ = 0.0;
  }

  void pump(bool final)
  {
    if (!t0_) {
      return;
    }
    while (true) {
      double tick = std::numeric_limits<double>::infinity();
      for (int ph = 0; ph < kPhaseCount; ++ph) {
        tick = std::min(tick, due(ph));
      }
      if (!odom_.covers(tick)) {
        return;
      }
      if (final ? tick > *latest_seen_ + kTickEpsilon : !(tick < *latest_seen_)) {
        return;
      }
      for (int ph = 0; ph < kPhaseCount; ++ph) {
        if (due(ph) <= tick + kTickEpsilon) {
          run_phase(ph, tick);
          ++ticks_[static_cast<std::size_t>(ph)];
        }
      }
    }
  }

  void run_phase(int phase, double tick)
  {
    switch (phase) {
      case kPredict: predict_all(tick); break;
      case kCorrect: correct_all(tick); break;
      case kReseed: reseed_all(); break;
      default: match(); break;
    }
  }

  void predict_all(double tick)
  {
    ++counts_.predict;
    const double oldest = odom_.span().first;
    for (Hypothesis & h : hypotheses_.hypotheses()) {
      const double from = std::max(h.set.last_prediction_time, oldest);
      if (from < tick) {
        predict(h.set, odom_delta(odom_, from, tick), config_.filter.noise, streams_.motion);
      }
      h.set.last_prediction_time = tick;
    }
  }

  std::optional<LaserScan> take_scan(double tick)
  {
    std::optional<LaserScan> newest;
    while (!pending_scans_.empty() && pending_scans_.front().stamp <= tick + kTickEpsilon) {
      newest = std::move(pending_scans_.front());
      pending_scans_.pop_front();
    }
    return newest;
  }

  void correct_all(double tick)
  {
    auto scan = take_scan(tick);
    if (!scan) {
      return;
    }
    ++counts_.correct;
    last_scan_ = std::move(scan);
    const auto started = std::chrono::steady_clock::now();

    const std::vector<Beam> beams = select_beams(*last_scan_, config_.sensor);
    if (!beams.empty()) {
      for (Hypothesis & h : hypotheses_.hypotheses()) {
        const CorrectionResult r = correct(
          h.set, beams, pyramid_.base(), config_.base_to_laser, config_.sensor);
        update_quality(h, r.degenerate ? 0.0 : quality(h.set), config_.multihyp.quality_alpha);
      }
    }
    if (hypotheses_.empty() && !bootstrapped_) {
      bootstrapped_ = true;
      match();
    }
    prune(hypotheses_);
    merge(hypotheses_);

    if (!beams.empty()) {
      if (auto b = best(hypotheses_)) {
        sink_(
          EstimateRecord{
            tick, b->estimate.mean, b->estimate.covariance, b->quality,
            static_cast<int>(hypotheses_.size()), b->id});
      }
    }
    const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started;
    timings_.push_back({tick, spent.count()});
  }

  void reseed_all()
  {
    ++counts_.reseed;
    for (Hypothesis & h : hypotheses_.hypotheses()) {
      if (!h.set.beams_used) {
        continue;
      }
      reseed(h.set, config_.filter.reseed, streams_.reseed);
      adapt_size(h.set, estimate(h.set), config_.filter.adapt, config_.filter.reseed, streams_.reseed);
    }
  }

  void match()
  {
    ++counts_.match;
    if (!last_scan_) {
      return;
    }
    const MatchResult result = cascade_match(
      pyramid_, *last_scan_, config_.base_to_laser, config_.sensor, config_.matcher);
    const std::vector<MatchCandidate> candidates = refine_candidates(
      pyramid_.base(), *last_scan_, result.candidates, config_.base_to_laser, config_.sensor,
      config_.matcher);
    const double stamp = std::max(last_scan_->stamp, odom_.span().first);
    on_match_results(hypotheses_, candidates, config_.filter, streams_.init, stamp);
  }

  const GridPyramid & pyramid_;
  LocalizerConfig config_;
  std::optional<Transform2D> initial_pose_;
  RandomStreams streams_;
  Sink sink_;

  HypothesisSet hypotheses_;
  TimedTransformBuffer odom_{120.0};
  std::deque<LaserScan> pending_scans_;
  std::optional<LaserScan> last_scan_;
  std::optional<double> t0_;
  std::optional<double> latest_seen_;
  double gap_{0.0};
  bool bootstrapped_{false};
  std::array<std::size_t, kPhaseCount> ticks_{0, 0, 1, 1};

  PhaseCounts counts_;
  std::vector<CorrectionTiming> timings_;
};

struct ReplayResult
{
  std::vector<Record> output;  // estimate and warning records in time order
  PhaseCounts counts;
  std::vector<CorrectionTiming> timings;
};

/// Feeds a recorded run through a Localizer on the log clock. Ground truth
/// and earlier outputs in the log are ignored.
inline ReplayResult replay(
  std::span<const Record> log, const GridPyramid & pyramid, const LocalizerConfig & config,
  const std::optional<Transform2D> & initial_pose, std::uint64_t seed)
{
  ReplayResult result;
  Localizer loc(
    pyramid, config, initial_pose, seed,
    [&result](const Record & r) {result.output.push_back(r);});
  for (const Record & r : log) {
    if (const auto * o = std::get_if<OdomRecord>(&r)) {
      loc.on_odom(o->t, o->pose);
    } else if (const auto * s = std::get_if<ScanRecord>(&r)) {
      loc.on_scan(s->scan);
    }
  }
  loc.finish();
  result.counts = loc.counts();
  result.timings = loc.timings();
  return result;
}

}  // namespace mhamcl

#endif  // MHAMCL__LOCALIZER_HPP_
