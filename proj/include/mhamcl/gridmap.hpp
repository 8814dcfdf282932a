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

#ifndef MHAMCL__GRIDMAP_HPP_
#define MHAMCL__GRIDMAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/geometry.hpp"

namespace mhamcl
{

enum class CellState : std::uint8_t { Free, Occupied, Unknown };

struct CellIndex
{
  int col{0};
  int row{0};

  friend auto operator<=>(const CellIndex &, const CellIndex &) = default;
};

/// Row-major occupancy raster. Cell (0, 0) has its lower-left corner at
/// `origin`; columns grow along the origin x axis, rows along its y axis.
class OccupancyGrid
{
public:
  OccupancyGrid(
    int width, int height, double resolution, const Transform2D & origin,
    CellState fill = CellState::Free)
  : OccupancyGrid(width, height, resolution, origin,
      std::vector<CellState>(checked_area(width, height), fill)) {}

  OccupancyGrid(
    int width, int height, double resolution, const Transform2D & origin,
    std::vector<CellState> cells)
  : width_(width), height_(height), resolution_(resolution), origin_(origin),
    inverse_origin_(origin.inverse()), cells_(std::move(cells))
  {
    if (width < 1 || height < 1) {
      throw ParameterError("OccupancyGrid: width and height must be >= 1");
    }
    if (!(resolution > 0.0)) {
      throw ParameterError("OccupancyGrid: resolution must be positive");
    }
    if (cells_.size() != checked_area(width, height)) {
      throw ParameterError("OccupancyGrid: cell count does not match width * height");
    }
  }

  int width() const {return width_;}
  int height() const {return height_;}
  double resolution() const {return resolution_;}
  const Transform2D & origin() const {return origin_;}
  const std::vector<CellState> & cells() const {return cells_;}

  bool contains(int col, int row) const
  {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }

  CellState at(int col, int row) const {return cells_[index(col, row)];}
  CellState at(CellIndex c) const {return at(c.col, c.row);}

  void set(int col, int row, CellState state) {cells_[index(col, row)] = state;}

  /// Out-of-bounds cells are not occupied.
  bool occupied(int col, int row) const
  {
    return contains(col, row) && cells_[index(col, row)] == CellState::Occupied;
  }

  /// Map-frame point expressed in continuous cell units of the grid frame.
  Point2 to_cell_units(const Point2 & p) const
  {
    const Point2 g = inverse_origin_.apply(p);
    return {g.x / resolution_, g.y / resolution_};
  }

  std::optional<CellIndex> world_to_cell(const Point2 & p) const
  {
    const Point2 u = to_cell_units(p);
    const double col = std::floor(u.x);
    const double row = std::floor(u.y);
    if (col < 0.0 || row < 0.0 || col >= width_ || row >= height_) {
      return std::nullopt;
    }
    return CellIndex{static_cast<int>(col), static_cast<int>(row)};
  }

  Point2 cell_center(CellIndex c) const
  {
    return origin_.apply({(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_});
  }

  std::size_t count(CellState state) const
  {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), state));
  }

private:
  static std::size_t checked_area(int width, int height)
  {
    if (width < 1 || height < 1) {
      throw ParameterError("OccupancyGrid: width and height must be >= 1");
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  std::size_t index(int col, int row) const
  {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_;
  int height_;
  double resolution_;
  Transform2D origin_;
  Transform2D inverse_origin_;
  std::vector<CellState> cells_;
};

inline std::optional<CellIndex> world_to_cell(const OccupancyGrid & grid, const Point2 & p)
{
  return grid.world_to_cell(p);
}

// ---------------------------------------------------------------------------
// Multi-resolution pyramid

/// Halves the grid: each coarse cell aggregates its (up to 4) children with
/// Occupied > Unknown > Free precedence.
inline OccupancyGrid coarsen(const OccupancyGrid & grid)
{
  const int w = (grid.width() + 1) / 2;
  const int h = (grid.height() + 1) / 2;
  std::vector<CellState> cells(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      bool any_occupied = false;
      bool any_unknown = false;
      for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
          const int c = 2 * col + dc;
          const int r = 2 * row + dr;
          if (!grid.contains(c, r)) {
            continue;
          }
          const CellState s = grid.at(c, r);
          any_occupied |= s == CellState::Occupied;
          any_unknown |= s == CellState::Unknown;
        }
      }
      cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(w) +
        static_cast<std::size_t>(col)] =
        any_occupied ? CellState::Occupied :
        (any_unknown ? CellState::Unknown : CellState::Free);
    }
  }
  return OccupancyGrid(w, h, grid.resolution() * 2.0, grid.origin(), std::move(cells));
}

/// Level 0 is the original grid; level k + 1 is coarsen(level k). Alongside
/// the occupancy levels, each level records whether a coarse cell covers at
/// least one Free level-0 cell, which is what candidate search needs.
class GridPyramid
{
public:
  GridPyramid(OccupancyGrid base, int levels)
  {
    if (levels < 1) {
      throw ParameterError("GridPyramid: levels must be >= 1");
    }
    levels_.push_back(std::move(base));
    std::vector<std::uint8_t> free0(levels_[0].cells().size());
    std::transform(
      levels_[0].cells().begin(), levels_[0].cells().end(), free0.begin(),
      [](CellState s) {return static_cast<std::uint8_t>(s == CellState::Free);});
    has_free_.push_back(std::move(free0));

    for (int k = 1; k < levels; ++k) {
      const OccupancyGrid & fine = levels_.back();
      OccupancyGrid coarse = coarsen(fine);
      std::vector<std::uint8_t> free(coarse.cells().size(), 0);
      const auto & fine_free = has_free_.back();
      for (int row = 0; row < fine.height(); ++row) {
        for (int col = 0; col < fine.width(); ++col) {
          if (fine_free[static_cast<std::size_t>(row * fine.width() + col)]) {
            free[static_cast<std::size_t>((row / 2) * coarse.width() + col / 2)] = 1;
          }
        }
      }
      levels_.push_back(std::move(coarse));
      has_free_.push_back(std::move(free));
    }
  }

  int size() const {return static_cast<int>(levels_.size());}
  const OccupancyGrid & level(int k) const {return levels_.at(static_cast<std::size_t>(k));}
  const OccupancyGrid & base() const {return levels_.front();}

  /// True when the cell at `level` covers at least one Free level-0 cell.
  bool has_free(int level, int col, int row) const
  {
    const OccupancyGrid & g = this->level(level);
    return g.contains(col, row) &&
           has_free_[static_cast<std::size_t>(level)][static_cast<std::size_t>(row * g.width() + col)];
  }

private:
  std::vector<OccupancyGrid> levels_;
  std::vector<std::vector<std::uint8_t>> has_free_;
};

// ---------------------------------------------------------------------------
// Beam window search

/// Visits the samples of a beam at half-cell spacing between
/// max(0, measured - half_width) and measured + half_width. The visitor gets
/// (col, row, distance) in level-0 cell coordinates and returns false to stop.
template<typename Visitor>
void for_each_window_sample(
  const OccupancyGrid & grid, const Transform2D & beam_origin, double angle,
  double measured, double half_width, Visitor && visit)
{
  const double step = grid.resolution() * 0.5;
  const double d_begin = std::max(0.0, measured - half_width);
  const double d_end = measured + half_width;
  const int samples = static_cast<int>(std::floor((d_end - d_begin) / step + 1e-9));

  const Point2 o = grid.to_cell_units({beam_origin.x(), beam_origin.y()});
  const double heading = beam_origin.yaw() + angle - grid.origin().yaw();
  const double du = std::cos(heading) / grid.resolution();
  const double dv = std::sin(heading) / grid.resolution();

  for (int k = 0; k <= samples; ++k) {
    const double d = d_begin + k * step;
    const int col = static_cast<int>(std::floor(o.x + d * du));
    const int row = static_cast<int>(std::floor(o.y + d * dv));
    if (!visit(col, row, d)) {
      return;
    }
  }
}

/// Discrepancy between a measured range and the nearest occupied cell along
/// the beam, searched only inside measured +/- 3 sigma. Capped at 3 sigma when
/// the window holds no obstacle. Unknown cells count as not occupied.
inline double beam_error(
  const OccupancyGrid & grid, const Transform2D & beam_origin, double angle,
  double measured, double sigma)
{
  const double cap = 3.0 * sigma;
  double best = cap;
  for_each_window_sample(
    grid, beam_origin, angle, measured, cap,
    [&](int col, int row, double d) {
      if (grid.occupied(col, row)) {
        best = std::min(best, std::fabs(measured - d));
      }
      return best > 0.0;
    });
  return best;
}

// ---------------------------------------------------------------------------
// File I/O: binary PGM image plus `key: value` metadata

struct MapMetadata
{
  double resolution{0.05};
  Transform2D origin;
  double occupied_thresh{0.35};
  double free_thresh{0.65};
};

namespace detail
{

inline std::string trim(const std::string & s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string & text, const std::string & key)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) {
      return v;
    }
  } catch (const std::exception &) {
  }
  throw FormatError("map metadata: key '" + key + "' has a non-numeric value '" + text + "'");
}

// Skips whitespace and '#' comments in a PGM header.
inline void skip_pgm_space(std::istream & in)
{
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pgm_int(std::istream & in, const std::string & what)
{
  skip_pgm_space(in);
  int v = -1;
  if (!(in >> v) || v < 0) {
    throw FormatError("PGM: could not read " + what);
  }
  return v;
}

}  // namespace detail

inline MapMetadata load_map_metadata(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw FormatError("map metadata: cannot open " + path.string());
  }
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      throw FormatError("map metadata: expected 'key: value', got '" + t + "'");
    }
    entries[detail::trim(t.substr(0, colon))] = detail::trim(t.substr(colon + 1));
  }

  auto require = [&](const std::string & key) -> const std::string & {
      auto it = entries.find(key);
      if (it == entries.end()) {
        throw FormatError("map metadata: missing key '" + key + "' in " + path.string());
      }
      return it->second;
    };

  MapMetadata meta;
  meta.resolution = detail::parse_double(require("resolution"), "resolution");
  meta.occupied_thresh = detail::parse_double(require("occupied_thresh"), "occupied_thresh");
  meta.free_thresh = detail::parse_double(require("free_thresh"), "free_thresh");

  std::string origin = require("origin");
  std::replace_if(
    origin.begin(), origin.end(),
    [](char c) {return c == '[' || c == ']' || c == ',';}, ' ');
  std::istringstream os(origin);
  double ox = 0.0, oy = 0.0, oyaw = 0.0;
  std::string extra;
  if (!(os >> ox >> oy >> oyaw) || (os >> extra)) {
    throw FormatError("map metadata: 'origin' must hold three numbers (x y yaw)");
  }
  meta.origin = Transform2D{ox, oy, oyaw};

  if (!(meta.resolution > 0.0)) {
    throw FormatError("map metadata: 'resolution' must be positive");
  }
  if (!(meta.occupied_thresh >= 0.0 && meta.free_thresh <= 1.0 &&
    meta.occupied_thresh < meta.free_thresh))
  {
    throw FormatError("map metadata: need 0 <= occupied_thresh < free_thresh <= 1");
  }
  return meta;
}

/// Raw 8-bit grayscale P5 image, first row first.
struct GrayImage
{
  int width{0};
  int height{0};
  std::vector<std::uint8_t> pixels;
};

inline GrayImage load_pgm(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("PGM: cannot open " + path.string());
  }
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw FormatError("PGM: " + path.string() + " is not a binary (P5) image");
  }
  GrayImage img;
  img.width = detail::read_pgm_int(in, "width");
  img.height = detail::read_pgm_int(in, "height");
  const int maxval = detail::read_pgm_int(in, "maxval");
  if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 255) {
    throw FormatError("PGM: " + path.string() + " must be a non-empty 8-bit image");
  }
  if (!std::isspace(in.get())) {
    throw FormatError("PGM: malformed header in " + path.string());
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  in.read(reinterpret_cast<char *>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("PGM: truncated pixel data in " + path.string());
  }
  if (maxval != 255) {
    for (auto & p : img.pixels) {
      p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
    }
  }
  return img;
}

/// Pixel value to occupancy: dark is occupied, bright is free.
inline CellState classify_pixel(std::uint8_t v, double occupied_thresh, double free_thresh)
{
  if (v <= 255.0 * occupied_thresh) {
    return CellState::Occupied;
  }
  if (v >= 255.0 * free_thresh) {
    return CellState::Free;
  }
  return CellState::Unknown;
}

/// The image's top row is the grid's highest row.
inline OccupancyGrid load_map(
  const std::filesystem::path & image_path, const std::filesystem::path & metadata_path)
{
  const MapMetadata meta = load_map_metadata(metadata_path);
  const GrayImage img = load_pgm(image_path);
  std::vector<CellState> cells(img.pixels.size());
  for (int r = 0; r < img.height; ++r) {
    const int row = img.height - 1 - r;
    for (int c = 0; c < img.width; ++c) {
      cells[static_cast<std::size_t>(row * img.width + c)] = classify_pixel(
        img.pixels[static_cast<std::size_t>(r * img.width + c)],
        meta.occupied_thresh, meta.free_thresh);
    }
  }
  return OccupancyGrid(img.width, img.height, meta.resolution, meta.origin, std::move(cells));
}

inline void save_map(
  const OccupancyGrid & grid, const std::filesystem::path & image_path,
  const std::filesystem::path & metadata_path)
{
  std::ofstream img(image_path, std::ios::binary);
  if (!img) {
    throw FormatError("cannot write " + image_path.string());
  }
  img << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int row = grid.height() - 1; row >= 0; --row) {
    for (int col = 0; col < grid.width(); ++col) {
      const CellState s = grid.at(col, row);
      const char v = static_cast<char>(
        s == CellState::Occupied ? 0 : (s == CellState::Free ? 255 : 128));
      img.put(v);
    }
  }

  std::ofstream meta(metadata_path);
  if (!meta) {
    throw FormatError("cannot write " + metadata_path.string());
  }
  meta.precision(17);
  meta << "image: " << image_path.filename().string() << '\n'
       << "resolution: " << grid.resolution() << '\n'
       << "origin: [" << grid.origin().x() << ", " << grid.origin().y() << ", "
       << grid.origin().yaw() << "]\n"
       << "occupied_thresh: 0.35\n"
       << "free_thresh: 0.65\n";
}

}  // namespace mhamcl

#endif  // MHAMCL__GRIDMAP_HPP_
