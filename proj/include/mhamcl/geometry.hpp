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

#ifndef MHAMCL__GEOMETRY_HPP_
#define MHAMCL__GEOMETRY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <deque>
#include <iterator>
#include <mutex>
#include <numbers>
#include <ranges>
#include <shared_mutex>
#include <string>
#include <utility>

#include "mhamcl/errors.hpp"

namespace mhamcl
{

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle)
{
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) {
    wrapped += kTwoPi;
  }
  return wrapped;
}

/// Signed shortest-arc difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b)
{
  return normalize_angle(a - b);
}

struct Point2
{
  double x{0.0};
  double y{0.0};
};

/// Planar rigid transform. The heading is kept normalized.
class Transform2D
{
public:
  constexpr Transform2D() = default;
  Transform2D(double x, double y, double yaw)
  : x_(x), y_(y), yaw_(normalize_angle(yaw)) {}

  static Transform2D identity() {return Transform2D{};}

  double x() const {return x_;}
  double y() const {return y_;}
  double yaw() const {return yaw_;}

  Point2 apply(const Point2 & p) const
  {
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    return {x_ + c * p.x - s * p.y, y_ + s * p.x + c * p.y};
  }

  Transform2D inverse() const
  {
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    return {-c * x_ - s * y_, s * x_ - c * y_, -yaw_};
  }

  friend Transform2D operator*(const Transform2D & a, const Transform2D & b)
  {
    const Point2 t = a.apply({b.x_, b.y_});
    return {t.x, t.y, a.yaw_ + b.yaw_};
  }

  friend bool operator==(const Transform2D &, const Transform2D &) = default;

private:
  double x_{0.0};
  double y_{0.0};
  double yaw_{0.0};
};

inline Transform2D compose(const Transform2D & a, const Transform2D & b) {return a * b;}
inline Transform2D invert(const Transform2D & t) {return t.inverse();}

/// Linear in position, shortest arc in heading. s = 0 gives a, s = 1 gives b.
inline Transform2D interpolate(const Transform2D & a, const Transform2D & b, double s)
{
  return {
    a.x() + s * (b.x() - a.x()),
    a.y() + s * (b.y() - a.y()),
    a.yaw() + s * angle_diff(b.yaw(), a.yaw())};
}

/// Row-major 3x3 covariance over (x, y, yaw).
using Covariance3 = std::array<double, 9>;

struct PoseEstimate
{
  Transform2D mean;
  Covariance3 covariance{};

  double cov(int row, int col) const {return covariance[static_cast<std::size_t>(row * 3 + col)];}
};

struct WeightedPose
{
  Transform2D pose;
  double weight{0.0};
};

template<typename T>
concept WeightedPoseLike = requires(const T & t) {
  {t.pose} -> std::convertible_to<Transform2D>;
  {t.weight} -> std::convertible_to<double>;
};

/// Weighted mean (circular mean in yaw) and population covariance of a
/// weighted set of poses. Yaw deviations are taken along the shortest arc.
template<std::ranges::forward_range R>
requires WeightedPoseLike<std::ranges::range_value_t<R>>
PoseEstimate weighted_mean_cov(const R & poses)
{
  double total = 0.0;
  double sx = 0.0, sy = 0.0, ss = 0.0, sc = 0.0;
  for (const auto & p : poses) {
    if (!(p.weight >= 0.0)) {
      throw ParameterError("weighted_mean_cov: negative or NaN weight");
    }
    total += p.weight;
    sx += p.weight * p.pose.x();
    sy += p.weight * p.pose.y();
    ss += p.weight * std::sin(p.pose.yaw());
    sc += p.weight * std::cos(p.pose.yaw());
  }
  if (!(total > 0.0)) {
    throw DegenerateInputError("weighted_mean_cov: all weights are zero");
  }

  PoseEstimate out;
  out.mean = Transform2D{sx / total, sy / total, std::atan2(ss, sc)};

  Covariance3 acc{};
  for (const auto & p : poses) {
    const std::array<double, 3> d{
      p.pose.x() - out.mean.x(),
      p.pose.y() - out.mean.y(),
      angle_diff(p.pose.yaw(), out.mean.yaw())};
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = r; c < 3; ++c) {
        acc[r * 3 + c] += p.weight * d[r] * d[c];
      }
    }
  }
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = r; c < 3; ++c) {
      out.covariance[r * 3 + c] = acc[r * 3 + c] / total;
      out.covariance[c * 3 + r] = out.covariance[r * 3 + c];
    }
  }
  return out;
}

/// Time-indexed history of one frame pair (e.g. odom -> base). Samples are
/// strictly increasing in time; lookups interpolate and never extrapolate.
///
/// One writer and any number of readers may use the buffer concurrently.
class TimedTransformBuffer
{
public:
  explicit TimedTransformBuffer(double capacity_seconds = 60.0)
  : capacity_(capacity_seconds)
  {
    if (!(capacity_seconds > 0.0)) {
      throw ParameterError("TimedTransformBuffer: capacity must be positive");
    }
  }

  TimedTransformBuffer(const TimedTransformBuffer &) = delete;
  TimedTransformBuffer & operator=(const TimedTransformBuffer &) = delete;

  void insert(double stamp, const Transform2D & transform)
  {
    std::unique_lock lock(mutex_);
    if (!samples_.empty() && !(stamp > samples_.back().first)) {
      throw ParameterError("TimedTransformBuffer: timestamps must be strictly increasing");
    }
    samples_.emplace_back(stamp, transform);
    // Keep the newest sample at or before the retention horizon so the
    // horizon itself stays inside the interval.
    const double horizon = stamp - capacity_;
    while (samples_.size() > 2 && samples_[1].first <= horizon) {
      samples_.pop_front();
    }
  }

  Transform2D lookup(double stamp) const
  {
    std::shared_lock lock(mutex_);
    return lookup_locked(stamp);
  }

  /// odom2bf(t0)^-1 * odom2bf(t1).
  Transform2D delta(double t0, double t1) const
  {
    std::shared_lock lock(mutex_);
    if (t0 > t1) {
      throw ParameterError("odom_delta: t0 must not exceed t1");
    }
    if (t0 == t1) {
      lookup_locked(t0);
      return Transform2D::identity();
    }
    return lookup_locked(t0).inverse() * lookup_locked(t1);
  }

  bool empty() const
  {
    std::shared_lock lock(mutex_);
    return samples_.empty();
  }

  std::size_t size() const
  {
    std::shared_lock lock(mutex_);
    return samples_.size();
  }

  /// Stored interval; only meaningful when non-empty.
  std::pair<double, double> span() const
  {
    std::shared_lock lock(mutex_);
    if (samples_.empty()) {
      throw OutOfRangeError("TimedTransformBuffer: empty");
    }
    return {samples_.front().first, samples_.back().first};
  }

  bool covers(double stamp) const
  {
    std::shared_lock lock(mutex_);
    return !samples_.empty() && stamp >= samples_.front().first &&
           stamp <= samples_.back().first;
  }

private:
  Transform2D lookup_locked(double stamp) const
  {
    if (samples_.empty() || stamp < samples_.front().first || stamp > samples_.back().first) {
      throw OutOfRangeError("TimedTransformBuffer: time " + std::to_string(stamp) +
                            " outside stored interval");
    }
    auto hi = std::lower_bound(
      samples_.begin(), samples_.end(), stamp,
      [](const auto & sample, double t) {return sample.first < t;});
    if (hi->first == stamp) {
      return hi->second;
    }
    auto lo = std::prev(hi);
    const double s = (stamp - lo->first) / (hi->first - lo->first);
    return interpolate(lo->second, hi->second, s);
  }

  double capacity_;
  std::deque<std::pair<double, Transform2D>> samples_;
  mutable std::shared_mutex mutex_;
};

inline Transform2D lookup_interpolated(const TimedTransformBuffer & buffer, double stamp)
{
  return buffer.lookup(stamp);
}

inline Transform2D odom_delta(const TimedTransformBuffer & buffer, double t0, double t1)
{
  return buffer.delta(t0, t1);
}

}  // namespace mhamcl

#endif  // MHAMCL__GEOMETRY_HPP_
