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

#ifndef MHAMCL__RECORDS_HPP_
#define MHAMCL__RECORDS_HPP_

#include <string>
#include <variant>

#include "mhamcl/geometry.hpp"
#include "mhamcl/scan.hpp"

namespace mhamcl
{

// One line of a run log each.

struct OdomRecord
{
  double t{0.0};
  Transform2D pose;  // odom -> base

  friend bool operator==(const OdomRecord &, const OdomRecord &) = default;
};

struct ScanRecord
{
  LaserScan scan;

  friend bool operator==(const ScanRecord &, const ScanRecord &) = default;
};

struct GroundTruthRecord
{
  double t{0.0};
  Transform2D pose;  // map -> base

  friend bool operator==(const GroundTruthRecord &, const GroundTruthRecord &) = default;
};

struct EstimateRecord
{
  double t{0.0};
  Transform2D pose;
  Covariance3 cov{};
  double quality{0.0};
  int n_hyp{0};
  long hyp_id{0};

  friend bool operator==(const EstimateRecord &, const EstimateRecord &) = default;
};

struct WarningRecord
{
  double t{0.0};
  std::string message;

  friend bool operator==(const WarningRecord &, const WarningRecord &) = default;
};

using Record = std::variant<OdomRecord, ScanRecord, GroundTruthRecord, EstimateRecord, WarningRecord>;

inline double record_time(const Record & r)
{
  return std::visit(
    [](const auto & rec) -> double {
      if constexpr (std::is_same_v<std::decay_t<decltype(rec)>, ScanRecord>) {
        return rec.scan.stamp;
      } else {
        return rec.t;
      }
    }, r);
}

}  // namespace mhamcl

#endif  // MHAMCL__RECORDS_HPP_
