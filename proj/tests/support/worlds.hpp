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

#ifndef MHAMCL_TESTS__WORLDS_HPP_
#define MHAMCL_TESTS__WORLDS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "mhamcl/gridmap.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/scan.hpp"
#include "mhamcl/sim.hpp"

namespace mhamcl::testing
{

/// Marks every cell whose center lies in [x0, x1] x [y0, y1] (meters).
inline void fill_box(
  OccupancyGrid & grid, double x0, double y0, double x1, double y1,
  CellState state = CellState::Occupied)
{
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      const Point2 c = grid.cell_center({col, row});
      if (c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1) {
        grid.set(col, row, state);
      }
    }
  }
}

/// Free room of size w x h meters with a wall `thickness` meters thick on
/// every side, origin at the outer corner.
inline OccupancyGrid room(double w, double h, double res = 0.05, double thickness = 0.1)
{
  OccupancyGrid g(
    static_cast<int>(std::lround(w / res)), static_cast<int>(std::lround(h / res)), res, {});
  fill_box(g, 0, 0, w, thickness);
  fill_box(g, 0, h - thickness, w, h);
  fill_box(g, 0, 0, thickness, h);
  fill_box(g, w - thickness, 0, w, h);
  return g;
}

/// 10 x 10 m room with asymmetric furniture, so every pose has a unique view.
inline OccupancyGrid distinctive_room(double res = 0.05)
{
  OccupancyGrid g = room(10.0, 10.0, res);
  fill_box(g, 2.0, 2.0, 3.0, 2.6);      // table
  fill_box(g, 6.5, 1.0, 6.8, 4.0);      // partition
  fill_box(g, 6.5, 4.0, 8.5, 4.3);      // L foot
  fill_box(g, 1.0, 6.5, 1.6, 8.5);      // shelf
  fill_box(g, 4.0, 7.0, 5.5, 7.4);      // bench
  fill_box(g, 8.2, 7.6, 8.8, 8.2);      // pillar
  fill_box(g, 3.8, 4.2, 4.2, 4.6);      // post
  return g;
}

/// Random rectangles on a bordered square grid until at least
/// `min_occupied` of the cells are Occupied.
inline OccupancyGrid random_structured(
  std::uint64_t seed, int size = 48, double res = 0.1, double min_occupied = 0.3)
{
  std::mt19937_64 rng(seed);
  OccupancyGrid g(size, size, res, {});
  for (int i = 0; i < size; ++i) {
    g.set(i, 0, CellState::Occupied);
    g.set(i, size - 1, CellState::Occupied);
    g.set(0, i, CellState::Occupied);
    g.set(size - 1, i, CellState::Occupied);
  }
  std::uniform_int_distribution<int> pos(1, size - 2);
  std::uniform_int_distribution<int> len(1, size / 6);
  const auto target = static_cast<std::size_t>(min_occupied * size * size);
  while (g.count(CellState::Occupied) < target) {
    const int c0 = pos(rng), r0 = pos(rng);
    const int w = len(rng), h = len(rng);
    for (int r = r0; r < std::min(size - 1, r0 + h); ++r) {
      for (int c = c0; c < std::min(size - 1, c0 + w); ++c) {
        g.set(c, r, CellState::Occupied);
      }
    }
  }
  return g;
}

inline SensorSpec noiseless_lidar(int beams = 360, double range_max = 12.0)
{
  SensorSpec s;
  s.beam_count = beams;
  s.angle_min = -std::numbers::pi;
  s.angle_increment = 2.0 * std::numbers::pi / beams;
  s.range_max = range_max;
  s.range_noise_std = 0.0;
  return s;
}

inline LaserScan scan_at(
  const OccupancyGrid & grid, const Transform2D & pose, const SensorSpec & spec,
  std::uint64_t seed = 1)
{
  Rng rng(seed);
  return scan_raycast(grid, pose * spec.mount, spec, rng);
}

}  // namespace mhamcl::testing

#endif  // MHAMCL_TESTS__WORLDS_HPP_
