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

#ifndef MHAMCL__SCAN_HPP_
#define MHAMCL__SCAN_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mhamcl/errors.hpp"

namespace mhamcl
{

/// Planar range scan; beam j points at angle_min + j * angle_increment in the
/// laser frame.
struct LaserScan
{
  double stamp{0.0};
  double angle_min{0.0};
  double angle_increment{0.0};
  double range_max{0.0};
  std::vector<double> ranges;

  double angle(std::size_t j) const {return angle_min + static_cast<double>(j) * angle_increment;}

  friend bool operator==(const LaserScan &, const LaserScan &) = default;
};

struct SensorModelParams
{
  double sigma{0.05};
  double hit_threshold_factor{2.0};
  double max_usable_range{std::numeric_limits<double>::infinity()};
  int beam_stride{1};

  void validate() const
  {
    if (!(sigma > 0.0)) {
      throw ParameterError("sensor_model.sigma must be positive");
    }
    if (!(hit_threshold_factor > 0.0)) {
      throw ParameterError("sensor_model.hit_threshold_factor must be positive");
    }
    if (!(max_usable_range > 0.0)) {
      throw ParameterError("sensor_model.max_usable_range must be positive");
    }
    if (beam_stride < 1) {
      throw ParameterError("sensor_model.beam_stride must be >= 1");
    }
  }

  double hit_threshold() const {return hit_threshold_factor * sigma;}
};

struct Beam
{
  double angle{0.0};
  double range{0.0};
};

/// Every beam_stride-th beam with a finite range in (0, min(range_max, max_usable_range)).
inline std::vector<Beam> select_beams(const LaserScan & scan, const SensorModelParams & params)
{
  if (scan.ranges.empty()) {
    throw ParameterError("laser scan has no ranges");
  }
  const double limit = std::min(scan.range_max, params.max_usable_range);
  std::vector<Beam> beams;
  beams.reserve(scan.ranges.size() / static_cast<std::size_t>(params.beam_stride) + 1);
  for (std::size_t j = 0; j < scan.ranges.size(); j += static_cast<std::size_t>(params.beam_stride)) {
    const double r = scan.ranges[j];
    if (std::isfinite(r) && r > 0.0 && r < limit) {
      beams.push_back({scan.angle(j), r});
    }
  }
  return beams;
}

}  // namespace mhamcl

#endif  // MHAMCL__SCAN_HPP_
