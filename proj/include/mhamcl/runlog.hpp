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

#ifndef MHAMCL__RUNLOG_HPP_
#define MHAMCL__RUNLOG_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mhamcl/errors.hpp"
#include "mhamcl/records.hpp"

namespace mhamcl
{

/// JSON-lines run log: one record per line, keyed by "type".
using LogWarning = std::function<void (const std::string &)>;

namespace detail
{

using ojson = nlohmann::ordered_json;

inline ojson pose_json(double t, const char * type, const Transform2D & p)
{
  return ojson{{"t", t}, {"type", type}, {"x", p.x()}, {"y", p.y()}, {"yaw", p.yaw()}};
}

template<typename T>
T field(const ojson & j, const char * key, std::size_t line)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    throw FormatError("run log line " + std::to_string(line) + ": missing \"" + key + "\"");
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception &) {
    throw FormatError("run log line " + std::to_string(line) + ": bad \"" + key + "\"");
  }
}

inline Transform2D pose_field(const ojson & j, std::size_t line)
{
  return {field<double>(j, "x", line), field<double>(j, "y", line), field<double>(j, "yaw", line)};
}

}  // namespace detail

inline std::string to_json_line(const Record & record)
{
  using detail::ojson;
  const ojson j = std::visit(
    [](const auto & r) -> ojson {
      using T = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<T, OdomRecord>) {
        return detail::pose_json(r.t, "odom", r.pose);
      } else if constexpr (std::is_same_v<T, GroundTruthRecord>) {
        return detail::pose_json(r.t, "gt", r.pose);
      } else if constexpr (std::is_same_v<T, ScanRecord>) {
        return ojson{
          {"t", r.scan.stamp}, {"type", "scan"}, {"angle_min", r.scan.angle_min},
          {"angle_inc", r.scan.angle_increment}, {"range_max", r.scan.range_max},
          {"ranges", r.scan.ranges}};
      } else if constexpr (std::is_same_v<T, EstimateRecord>) {
        ojson e = detail::pose_json(r.t, "estimate", r.pose);
        e["cov"] = r.cov;
        e["quality"] = r.quality;
        e["n_hyp"] = r.n_hyp;
        e["hyp_id"] = r.hyp_id;
        return e;
      } else {
        return ojson{{"t", r.t}, {"type", "warning"}, {"message", r.message}};
      }
    }, record);
  return j.dump();
}

inline void write_run_log(std::ostream & out, std::span<const Record> records)
{
  for (const Record & r : records) {
    out << to_json_line(r) << '\n';
  }
  if (!out) {
    throw FormatError("run log: write failed");
  }
}

inline void write_run_log(const std::filesystem::path & path, std::span<const Record> records)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  write_run_log(out, records);
}

/// Parses one line; returns false for an unknown record type.
inline bool parse_json_line(const std::string & text, std::size_t line, Record & out)
{
  using detail::field;
  detail::ojson j;
  try {
    j = detail::ojson::parse(text);
  } catch (const nlohmann::json::parse_error & e) {
    throw FormatError("run log line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw FormatError("run log line " + std::to_string(line) + ": not an object");
  }
  const auto type = field<std::string>(j, "type", line);
  const auto t = field<double>(j, "t", line);
  if (type == "odom") {
    out = OdomRecord{t, detail::pose_field(j, line)};
  } else if (type == "gt") {
    out = GroundTruthRecord{t, detail::pose_field(j, line)};
  } else if (type == "scan") {
    LaserScan s;
    s.stamp = t;
    s.angle_min = field<double>(j, "angle_min", line);
    s.angle_increment = field<double>(j, "angle_inc", line);
    s.range_max = field<double>(j, "range_max", line);
    s.ranges = field<std::vector<double>>(j, "ranges", line);
    out = ScanRecord{std::move(s)};
  } else if (type == "estimate") {
    EstimateRecord e;
    e.t = t;
    e.pose = detail::pose_field(j, line);
    e.cov = field<Covariance3>(j, "cov", line);
    e.quality = field<double>(j, "quality", line);
    e.n_hyp = field<int>(j, "n_hyp", line);
    e.hyp_id = field<long>(j, "hyp_id", line);
    out = e;
  } else if (type == "warning") {
    out = WarningRecord{t, field<std::string>(j, "message", line)};
  } else {
    return false;
  }
  return true;
}

/// Reads a whole log. Blank lines are ignored, unknown types reported
/// through `warn` and skipped; timestamps must never decrease.
inline std::vector<Record> read_run_log(std::istream & in, const LogWarning & warn = {})
{
  std::vector<Record> records;
  std::string text;
  std::size_t line = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    Record r;
    if (!parse_json_line(text, line, r)) {
      if (warn) {
        warn("run log line " + std::to_string(line) + ": unknown record type skipped");
      }
      continue;
    }
    const double t = record_time(r);
    if (t < last_t) {
      throw FormatError("run log line " + std::to_string(line) + ": time goes backwards");
    }
    last_t = t;
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<Record> read_run_log(
  const std::filesystem::path & path, const LogWarning & warn = {})
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot read " + path.string());
  }
  return read_run_log(in, warn);
}

}  // namespace mhamcl

#endif  // MHAMCL__RUNLOG_HPP_
