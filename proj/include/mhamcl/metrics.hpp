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

#ifndef MHAMCL__METRICS_HPP_
#define MHAMCL__METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/records.hpp"

namespace mhamcl
{

/// Positional spread of an estimate: sqrt of the largest eigenvalue of the
/// (x, y) covariance block.
inline double uncertainty(const PoseEstimate & estimate, double tolerance = 1e-12)
{
  const double a = estimate.cov(0, 0);
  const double d = estimate.cov(1, 1);
  const double b01 = estimate.cov(0, 1);
  const double b10 = estimate.cov(1, 0);
  const double scale = std::max({std::fabs(a), std::fabs(d), std::fabs(b01), 1.0});
  if (!std::isfinite(a) || !std::isfinite(d) || !std::isfinite(b01) || !std::isfinite(b10) ||
    std::fabs(b01 - b10) > 1e-9 * scale)
  {
    throw NumericError("uncertainty: covariance is not a finite symmetric matrix");
  }
  const double b = 0.5 * (b01 + b10);
  const double mid = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  if (mid - radius < -tolerance) {
    throw NumericError("uncertainty: covariance is not positive semi-definite");
  }
  return std::sqrt(std::max(0.0, mid + radius));
}

struct ErrorSample
{
  double t{0.0};
  double position_error{0.0};
  double yaw_error{0.0};
  double quality{0.0};
  double uncertainty{0.0};
  int hypothesis_count{0};
  double cpu_seconds{0.0};
};

using ErrorSeries = std::vector<ErrorSample>;

struct Stats
{
  double mean{0.0};
  double stddev{0.0};
  double median{0.0};
};

inline Stats summarize(std::vector<double> values)
{
  Stats s;
  if (values.empty()) {
    return s;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) {
    sq += (v - s.mean) * (v - s.mean);
  }
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

struct TrajectoryErrorResult
{
  ErrorSeries series;
  Stats position;
  Stats yaw;
};

/// Ground truth interpolated at arbitrary times (linear position, shortest-arc yaw).
class GroundTruthTrack
{
public:
  explicit GroundTruthTrack(std::span<const GroundTruthRecord> samples)
  : samples_(samples.begin(), samples.end())
  {
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (samples_[i].t < samples_[i - 1].t) {
        throw ParameterError("ground truth must be time-ordered");
      }
    }
  }

  bool empty() const {return samples_.empty();}

  std::optional<Transform2D> at(double t) const
  {
    if (samples_.empty() || t < samples_.front().t || t > samples_.back().t) {
      return std::nullopt;
    }
    auto hi = std::lower_bound(
      samples_.begin(), samples_.end(), t,
      [](const GroundTruthRecord & r, double v) {return r.t < v;});
    if (hi->t == t || hi == samples_.begin()) {
      return hi->pose;
    }
    auto lo = std::prev(hi);
    return interpolate(lo->pose, hi->pose, (t - lo->t) / (hi->t - lo->t));
  }

private:
  std::vector<GroundTruthRecord> samples_;
};

/// Matches each estimate against ground truth at its own timestamp.
/// `cpu_seconds`, when given, is indexed like `estimates`.
inline TrajectoryErrorResult trajectory_error(
  std::span<const EstimateRecord> estimates, std::span<const GroundTruthRecord> ground_truth,
  std::span<const double> cpu_seconds = {})
{
  const GroundTruthTrack track(ground_truth);
  TrajectoryErrorResult result;
  std::vector<double> pos, yaw;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const EstimateRecord & e = estimates[i];
    if (i > 0 && !(e.t > estimates[i - 1].t)) {
      throw ParameterError("estimates must be strictly time-ordered");
    }
    const auto gt = track.at(e.t);
    if (!gt) {
      continue;
    }
    ErrorSample s;
    s.t = e.t;
    s.position_error = std::hypot(e.pose.x() - gt->x(), e.pose.y() - gt->y());
    s.yaw_error = std::fabs(angle_diff(e.pose.yaw(), gt->yaw()));
    s.quality = e.quality;
    s.uncertainty = uncertainty(PoseEstimate{e.pose, e.cov}, 1e-9);
    s.hypothesis_count = e.n_hyp;
    s.cpu_seconds = i < cpu_seconds.size() ? cpu_seconds[i] : 0.0;
    result.series.push_back(s);
    pos.push_back(s.position_error);
    yaw.push_back(s.yaw_error);
  }
  if (result.series.empty()) {
    throw ParameterError("trajectory_error: estimates and ground truth do not overlap in time");
  }
  result.position = summarize(std::move(pos));
  result.yaw = summarize(std::move(yaw));
  return result;
}

/// Time from the first sample until the position error first drops below
/// `threshold` and stays there for `hold` seconds. nullopt if that never happens.
inline std::optional<double> recovery_time(
  std::span<const ErrorSample> series, double threshold, double hold)
{
  if (!(threshold > 0.0) || !(hold >= 0.0)) {
    throw ParameterError("recovery_time: need threshold > 0 and hold >= 0");
  }
  if (series.empty()) {
    return std::nullopt;
  }
  std::optional<double> run_start;
  for (const ErrorSample & s : series) {
    if (s.position_error < threshold) {
      if (!run_start) {
        run_start = s.t;
      }
      if (s.t - *run_start >= hold) {
        return *run_start - series.front().t;
      }
    } else {
      run_start.reset();
    }
  }
  return std::nullopt;
}

struct PhaseStats
{
  std::size_t samples{0};
  double mean_quality{0.0};
  double mean_uncertainty{0.0};
};

struct QualityUncertaintyReport
{
  PhaseStats correct;    // position_error < threshold
  PhaseStats incorrect;  // position_error >= threshold
};

inline QualityUncertaintyReport quality_vs_uncertainty(
  std::span<const ErrorSample> series, double threshold)
{
  QualityUncertaintyReport r;
  for (const ErrorSample & s : series) {
    PhaseStats & p = s.position_error < threshold ? r.correct : r.incorrect;
    ++p.samples;
    p.mean_quality += s.quality;
    p.mean_uncertainty += s.uncertainty;
  }
  for (PhaseStats * p : {&r.correct, &r.incorrect}) {
    if (p->samples > 0) {
      p->mean_quality /= static_cast<double>(p->samples);
      p->mean_uncertainty /= static_cast<double>(p->samples);
    }
  }
  return r;
}

inline constexpr const char * kErrorSeriesCsvHeader = "t,pos_err,yaw_err,quality,uncertainty,n_hyp,cpu_s";

inline void write_error_series_csv(std::ostream & out, std::span<const ErrorSample> series)
{
  const auto precision = out.precision(10);
  out << kErrorSeriesCsvHeader << '\n';
  for (const ErrorSample & s : series) {
    out << s.t << ',' << s.position_error << ',' << s.yaw_error << ',' << s.quality << ','
        << s.uncertainty << ',' << s.hypothesis_count << ',' << s.cpu_seconds << '\n';
  }
  out.precision(precision);
}

}  // namespace mhamcl

#endif  // MHAMCL__METRICS_HPP_
