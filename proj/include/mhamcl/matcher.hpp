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

#ifndef MHAMCL__MATCHER_HPP_
#define MHAMCL__MATCHER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/gridmap.hpp"
#include "mhamcl/scan.hpp"

namespace mhamcl
{

struct MatchCandidate
{
  Transform2D pose;
  double score{0.0};
  int level{0};
  CellIndex cell;
  int yaw_index{0};
};

struct MatcherParams
{
  static constexpr double kAngleStep = std::numbers::pi / 8.0;
  static constexpr int kOrientations = 16;

  int levels{4};
  std::size_t keep_per_level{16};
  double min_score{0.5};
  // Local polish applied before spawning: yaw offsets of k * pi / 64 for
  // |k| <= refine_yaw_steps, and half-cell shifts. Zero disables it.
  int refine_yaw_steps{4};

  void validate() const
  {
    if (levels < 1) {
      throw ParameterError("matcher.levels must be >= 1");
    }
    if (keep_per_level < 1) {
      throw ParameterError("matcher.keep_per_level must be >= 1");
    }
    if (!(min_score >= 0.0 && min_score <= 1.0)) {
      throw ParameterError("matcher.min_score must lie in [0,1]");
    }
    if (refine_yaw_steps < 0 || refine_yaw_steps > 8) {
      throw ParameterError("matcher.refine_yaw_steps must lie in [0,8]");
    }
  }

  /// Cap on level-0 pose evaluations per search.
  std::size_t leaf_budget() const {return keep_per_level * 4 * kOrientations;}
};

struct MatchStats
{
  std::size_t leaf_evaluations{0};  // exact level-0 scorings
  std::size_t node_evaluations{0};  // upper-bound computations at coarser levels
  std::size_t exhaustive_evaluations{0};  // Free cells x orientations
  bool budget_exhausted{false};
};

struct MatchResult
{
  std::vector<MatchCandidate> candidates;
  MatchStats stats;
};

inline double orientation(int yaw_index)
{
  return normalize_angle(yaw_index * MatcherParams::kAngleStep);
}

/// Number of beams whose window error at `pose` is within the hit threshold.
inline std::size_t count_hits(
  const OccupancyGrid & grid, std::span<const Beam> beams, const Transform2D & pose,
  const Transform2D & base_to_laser, double sigma, double hit_factor)
{
  const Transform2D laser = pose * base_to_laser;
  const double threshold = hit_factor * sigma;
  std::size_t hits = 0;
  for (const Beam & b : beams) {
    hits += beam_error(grid, laser, b.angle, b.range, sigma) <= threshold ? 1 : 0;
  }
  return hits;
}

/// Fraction of used beams that hit at `pose`: the population quality of a
/// single virtual particle.
inline double score_pose(
  const OccupancyGrid & grid, const LaserScan & scan, const Transform2D & pose,
  const Transform2D & base_to_laser, double sigma_eff, const SensorModelParams & sensor)
{
  const std::vector<Beam> beams = select_beams(scan, sensor);
  if (beams.empty()) {
    return 0.0;
  }
  const std::size_t hits = count_hits(
    grid, beams, pose, base_to_laser, sigma_eff, sensor.hit_threshold_factor);
  return static_cast<double>(hits) / static_cast<double>(beams.size());
}

namespace detail
{

inline int floor_div(int a, int b)
{
  const int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Occupancy of every 2^L x 2^L window of level-0 cells, indexed by the
// window's lowest corner. Corners range over [-(2^L - 1), width) so windows
// that only partly overlap the grid are covered too.
class WindowOccupancy
{
public:
  WindowOccupancy(const OccupancyGrid & grid, int level)
  : size_(1 << level), pad_(size_ - 1), width_(grid.width() + pad_), height_(grid.height() + pad_),
    cells_(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), 0)
  {
    // Separable max: along rows, then along columns.
    std::vector<std::uint8_t> rows(cells_.size(), 0);
    for (int r = 0; r < grid.height(); ++r) {
      for (int c = -pad_; c < grid.width(); ++c) {
        bool any = false;
        for (int k = std::max(c, 0); k < std::min(c + size_, grid.width()) && !any; ++k) {
          any = grid.occupied(k, r);
        }
        rows[index(c, r)] = any ? 1 : 0;
      }
    }
    for (int c = -pad_; c < grid.width(); ++c) {
      for (int r = -pad_; r < grid.height(); ++r) {
        bool any = false;
        for (int k = std::max(r, 0); k < std::min(r + size_, grid.height()) && !any; ++k) {
          any = rows[index(c, k)] != 0;
        }
        cells_[index(c, r)] = any ? 1 : 0;
      }
    }
  }

  /// True if some cell in [col, col + 2^L) x [row, row + 2^L) is Occupied.
  bool any(int col, int row) const
  {
    if (col < -pad_ || row < -pad_ || col >= width_ - pad_ || row >= height_ - pad_) {
      return false;
    }
    return cells_[index(col, row)] != 0;
  }

private:
  std::size_t index(int col, int row) const
  {
    return static_cast<std::size_t>(row + pad_) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col + pad_);
  }

  int size_;
  int pad_;
  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

// Exact top-k search over (Free level-0 cell x 16 orientations). A node is a
// block of level-0 cells (one pyramid cell at `level`) with a fixed
// orientation; its bound counts beams that could hit for some pose in the
// block, so no pose in the block scores above it.
class CascadeSearch
{
public:
  CascadeSearch(
    const GridPyramid & pyramid, std::span<const Beam> beams, const Transform2D & base_to_laser,
    const SensorModelParams & sensor, const MatcherParams & params)
  : pyramid_(pyramid), grid_(pyramid.base()), beams_(beams), mount_(base_to_laser),
    sigma_(sensor.sigma), hit_factor_(sensor.hit_threshold_factor), params_(params)
  {
    for (int level = 0; level < params.levels; ++level) {
      windows_.emplace_back(grid_, level);
    }
  }

  MatchResult run()
  {
    MatchResult out;
    out.stats.exhaustive_evaluations = grid_.count(CellState::Free) * MatcherParams::kOrientations;

    const int top = params_.levels - 1;
    const OccupancyGrid & top_grid = pyramid_.level(top);
    std::vector<Node> roots;
    for (int row = 0; row < top_grid.height(); ++row) {
      for (int col = 0; col < top_grid.width(); ++col) {
        if (!pyramid_.has_free(top, col, row)) {
          continue;
        }
        for (int k = 0; k < MatcherParams::kOrientations; ++k) {
          roots.push_back(make_node(top, col, row, k));
        }
      }
    }
    // Best-first: always expand the node with the highest bound.
    std::priority_queue<Node, std::vector<Node>, NodeAfter> open(NodeAfter{}, std::move(roots));
    while (!open.empty()) {
      const Node node = open.top();
      open.pop();
      if (prunable(node.bound, node.level, node.col, node.row, node.yaw)) {
        continue;
      }
      if (node.level == 0) {
        if (!visit_leaf(node.col, node.row, node.yaw)) {
          break;
        }
        continue;
      }
      const int child_level = node.level - 1;
      for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
          const int c = 2 * node.col + dc;
          const int r = 2 * node.row + dr;
          if (pyramid_.has_free(child_level, c, r)) {
            if (child_level == 0) {
              open.push(Node{0, c, r, node.yaw, node.bound});
            } else {
              open.push(make_node(child_level, c, r, node.yaw));
            }
          }
        }
      }
    }

    out.stats.leaf_evaluations = leaf_evaluations_;
    out.stats.node_evaluations = node_evaluations_;
    out.stats.budget_exhausted = budget_exhausted_;
    for (const Entry & e : best_) {
      const Point2 c = grid_.cell_center({e.col, e.row});
      out.candidates.push_back(
        MatchCandidate{
          Transform2D{c.x, c.y, orientation(e.yaw)},
          static_cast<double>(e.hits) / static_cast<double>(beams_.size()),
          0, CellIndex{e.col, e.row}, e.yaw});
    }
    return out;
  }

private:
  struct Node
  {
    int level;
    int col;
    int row;
    int yaw;
    std::size_t bound;
  };

  struct Entry
  {
    std::size_t hits;
    int row;
    int col;
    int yaw;
  };

  static bool entry_before(const Entry & a, const Entry & b)
  {
    if (a.hits != b.hits) {
      return a.hits > b.hits;
    }
    return std::tie(a.row, a.col, a.yaw) < std::tie(b.row, b.col, b.yaw);
  }

  // Priority order: higher bound first, then smaller (row, col, yaw), then
  // deeper level so ties resolve toward concrete poses.
  struct NodeAfter
  {
    bool operator()(const Node & a, const Node & b) const
    {
      if (a.bound != b.bound) {
        return a.bound < b.bound;
      }
      const int sa = 1 << a.level, sb = 1 << b.level;
      const auto ka = std::make_tuple(a.row * sa, a.col * sa, a.yaw, a.level);
      const auto kb = std::make_tuple(b.row * sb, b.col * sb, b.yaw, b.level);
      return ka > kb;
    }
  };

  // True when nothing under the node can enter the current top-k.
  bool prunable(std::size_t bound, int level, int col, int row, int yaw) const
  {
    if (best_.size() < params_.keep_per_level) {
      return false;
    }
    const Entry & kth = best_.back();
    if (bound != kth.hits) {
      return bound < kth.hits;
    }
    const int scale = 1 << level;
    return !entry_before(Entry{bound, row * scale, col * scale, yaw}, kth);
  }

  Node make_node(int level, int col, int row, int yaw)
  {
    ++node_evaluations_;
    return Node{level, col, row, yaw, upper_bound(level, col, row, yaw)};
  }

  std::size_t upper_bound(int level, int col, int row, int yaw) const
  {
    // A capped window error always counts as a hit when the threshold reaches 3 sigma.
    if (hit_factor_ >= 3.0) {
      return beams_.size();
    }
    const int scale = 1 << level;
    const Point2 c = grid_.cell_center({col * scale, row * scale});
    const Transform2D laser = Transform2D{c.x, c.y, orientation(yaw)} * mount_;
    const WindowOccupancy & windows = windows_[static_cast<std::size_t>(level)];
    const Point2 o = grid_.to_cell_units({laser.x(), laser.y()});
    const double heading = laser.yaw() - grid_.origin().yaw();
    const double threshold = hit_factor_ * sigma_;

    // Poses in the block shift every sample by whole cells, 0..scale-1 in
    // each axis. Samples that sit within rounding distance of a cell border
    // also try the neighbouring window.
    constexpr double kBorder = 1e-6;
    std::size_t bound = 0;
    for (const Beam & b : beams_) {
      const double du = std::cos(heading + b.angle) / grid_.resolution();
      const double dv = std::sin(heading + b.angle) / grid_.resolution();
      bool hit = false;
      for_each_window_sample(
        grid_, laser, b.angle, b.range, 3.0 * sigma_,
        [&](int sc, int sr, double d) {
          if (std::fabs(b.range - d) > threshold) {
            return true;
          }
          const double fu = o.x + d * du - sc;
          const double fv = o.y + d * dv - sr;
          const int c0 = fu < kBorder ? sc - 1 : sc, c1 = fu > 1.0 - kBorder ? sc + 1 : sc;
          const int r0 = fv < kBorder ? sr - 1 : sr, r1 = fv > 1.0 - kBorder ? sr + 1 : sr;
          for (int rr = r0; rr <= r1 && !hit; ++rr) {
            for (int cc = c0; cc <= c1 && !hit; ++cc) {
              hit = windows.any(cc, rr);
            }
          }
          return !hit;
        });
      bound += hit ? 1 : 0;
    }
    return bound;
  }

  // Returns false once the level-0 budget is spent.
  bool visit_leaf(int col, int row, int yaw)
  {
    if (leaf_evaluations_ >= params_.leaf_budget()) {
      budget_exhausted_ = true;
      return false;
    }
    ++leaf_evaluations_;
    const Point2 c = grid_.cell_center({col, row});
    const std::size_t hits = count_hits(
      grid_, beams_, Transform2D{c.x, c.y, orientation(yaw)}, mount_, sigma_, hit_factor_);
    const Entry e{hits, row, col, yaw};
    if (best_.size() == params_.keep_per_level && !entry_before(e, best_.back())) {
      return true;
    }
    best_.insert(std::upper_bound(best_.begin(), best_.end(), e, entry_before), e);
    if (best_.size() > params_.keep_per_level) {
      best_.pop_back();
    }
    return true;
  }

  const GridPyramid & pyramid_;
  const OccupancyGrid & grid_;
  std::span<const Beam> beams_;
  Transform2D mount_;
  double sigma_;
  double hit_factor_;
  MatcherParams params_;
  std::vector<WindowOccupancy> windows_;

  std::vector<Entry> best_;
  std::size_t leaf_evaluations_{0};
  std::size_t node_evaluations_{0};
  bool budget_exhausted_{false};
};

}  // namespace detail

/// Ranked pose candidates for one scan. The coarsest level is searched over
/// every cell covering free space and all 16 orientations; finer levels only
/// refine blocks whose bound can still beat the current top keep_per_level.
/// Candidates come back sorted by score, ties by (row, col, yaw index).
inline MatchResult cascade_match(
  const GridPyramid & pyramid, const LaserScan & scan, const Transform2D & base_to_laser,
  const SensorModelParams & sensor, const MatcherParams & params)
{
  params.validate();
  sensor.validate();
  if (pyramid.size() < params.levels) {
    throw ParameterError("cascade_match: pyramid has fewer levels than requested");
  }
  const std::vector<Beam> beams = select_beams(scan, sensor);
  if (beams.empty()) {
    return {};
  }
  return detail::CascadeSearch(pyramid, beams, base_to_laser, sensor, params).run();
}

/// Polishes each candidate off the search lattice. Poses within half a cell
/// and half an orientation step are scored and the best one replaces the
/// candidate when it scores strictly higher. The list is re-sorted by score;
/// the search keeps its own order for equal scores.
inline std::vector<MatchCandidate> refine_candidates(
  const OccupancyGrid & grid, const LaserScan & scan, std::vector<MatchCandidate> candidates,
  const Transform2D & base_to_laser, const SensorModelParams & sensor, const MatcherParams & params)
{
  params.validate();
  sensor.validate();
  const std::vector<Beam> beams = select_beams(scan, sensor);
  if (beams.empty() || params.refine_yaw_steps == 0) {
    return candidates;
  }
  const double n = static_cast<double>(beams.size());
  const double half = 0.5 * grid.resolution();
  const double yaw_step = MatcherParams::kAngleStep / 8.0;
  for (MatchCandidate & cand : candidates) {
    const Transform2D origin = cand.pose;
    std::size_t best_hits = count_hits(
      grid, beams, origin, base_to_laser, sensor.sigma, sensor.hit_threshold_factor);
    for (int k = -params.refine_yaw_steps; k <= params.refine_yaw_steps; ++k) {
      for (int iy = -1; iy <= 1; ++iy) {
        for (int ix = -1; ix <= 1; ++ix) {
          const Transform2D pose{
            origin.x() + ix * half, origin.y() + iy * half, origin.yaw() + k * yaw_step};
          const std::size_t hits = count_hits(
            grid, beams, pose, base_to_laser, sensor.sigma, sensor.hit_threshold_factor);
          if (hits > best_hits) {
            best_hits = hits;
            cand.pose = pose;
          }
        }
      }
    }
    cand.score = static_cast<double>(best_hits) / n;
  }
  std::stable_sort(
    candidates.begin(), candidates.end(),
    [](const MatchCandidate & a, const MatchCandidate & b) {return a.score > b.score;});
  return candidates;
}

}  // namespace mhamcl

#endif  // MHAMCL__MATCHER_HPP_
