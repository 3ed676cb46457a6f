#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapnav/floorplan.hpp"

namespace mapnav {

enum class CellType : uint8_t { Wall = 0, Free = 1, Door = 2 };

// Rasterized view of a floor plan. Cell (row, col) covers a resolution-sized
// square; row 0 is the bottom edge. The grid pads the map bounds by one wall
// thickness on every side so the outer wall is part of the image.
struct OccupancyGrid {
  double resolution = 1.0;
  Point origin;  // world coordinates of the grid's lower-left corner
  int width = 0;
  int height = 0;
  std::vector<CellType> kind;
  std::vector<int16_t> room_at;  // room index per cell, -1 outside rooms
  std::vector<int16_t> door_at;  // door index per cell, -1 off doors
  std::vector<std::string> room_ids;  // source order
  std::vector<std::string> door_ids;
  std::vector<std::vector<int>> door_cells;  // per door, flat cell indices

  int index(int row, int col) const { return row * width + col; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  CellType at(int row, int col) const { return kind[static_cast<size_t>(index(row, col))]; }

  Point cell_center(int row, int col) const {
    return {origin.x + (col + 0.5) * resolution, origin.y + (row + 0.5) * resolution};
  }
  std::pair<int, int> cell_of(const Point& p) const {
    return {static_cast<int>(std::floor((p.y - origin.y) / resolution)),
            static_cast<int>(std::floor((p.x - origin.x) / resolution))};
  }

  int room_index(std::string_view name) const {
    std::string key = normalize_id(name);
    for (size_t i = 0; i < room_ids.size(); ++i) {
      if (normalize_id(room_ids[i]) == key) return static_cast<int>(i);
    }
    return -1;
  }
  int door_index(std::string_view name) const {
    std::string key = normalize_id(strip_leading_word_ci(trim(name), "door"));
    for (size_t i = 0; i < door_ids.size(); ++i) {
      if (normalize_id(door_ids[i]) == key) return static_cast<int>(i);
    }
    return -1;
  }

  // Door cell whose center sits nearest the door segment's midpoint.
  std::pair<int, int> door_center_cell(int door) const {
    const std::vector<int>& cells = door_cells[static_cast<size_t>(door)];
    int best = cells.front();
    double best_d = 1e300;
    for (int c : cells) {
      Point p = cell_center(c / width, c % width);
      double d = std::hypot(p.x - door_mid_[static_cast<size_t>(door)].x,
                            p.y - door_mid_[static_cast<size_t>(door)].y);
      if (d < best_d - kGeomEps ||
          (std::fabs(d - best_d) <= kGeomEps && c < best)) {
        best_d = d;
        best = c;
      }
    }
    return {best / width, best % width};
  }

  friend OccupancyGrid rasterize(const FloorPlan& fp, double resolution);

 private:
  std::vector<Point> door_mid_;
};

namespace detail {

// Interior test robust to rooms built from several touching rects: the point
// and four axis neighbors at distance delta must all lie in the closed union.
inline bool interior_of_room(const Room& room, const Point& p, double delta) {
  auto in_union = [&](double x, double y) {
    for (const Rect& rc : room.rects) {
      if (rc.contains({x, y}, kGeomEps)) return true;
    }
    return false;
  };
  return in_union(p.x, p.y) && in_union(p.x - delta, p.y) && in_union(p.x + delta, p.y) &&
         in_union(p.x, p.y - delta) && in_union(p.x, p.y + delta);
}

}  // namespace detail

// Converts the vector map into cells. Preconditions keep the raster faithful:
// the resolution must not exceed the wall thickness (walls stay closed) nor
// half of any door's width (doors stay open). Throws MapError naming the
// door or room when the raster degenerates anyway.
inline OccupancyGrid rasterize(const FloorPlan& fp, double resolution) {
  validate_floorplan(fp);
  if (!(resolution > 0)) throw MapError("resolution must be positive");
  if (resolution > fp.wall_thickness + kGeomEps) {
    throw MapError("resolution " + std::to_string(resolution) +
                   " is coarser than the wall thickness " + std::to_string(fp.wall_thickness));
  }
  for (const Door& d : fp.doors) {
    if (resolution > d.width / 2.0 + kGeomEps) {
      throw MapError("resolution " + std::to_string(resolution) + " would seal door " + d.id +
                     " (width " + std::to_string(d.width) + ")");
    }
  }

  OccupancyGrid g;
  g.resolution = resolution;
  const double t = fp.wall_thickness;
  g.origin = {fp.bounds.x - t, fp.bounds.y - t};
  g.width = static_cast<int>(std::ceil((fp.bounds.w + 2 * t) / resolution - kGeomEps));
  g.height = static_cast<int>(std::ceil((fp.bounds.h + 2 * t) / resolution - kGeomEps));
  size_t cells = static_cast<size_t>(g.width) * static_cast<size_t>(g.height);
  g.kind.assign(cells, CellType::Wall);
  g.room_at.assign(cells, -1);
  g.door_at.assign(cells, -1);

  for (const Room& r : fp.rooms) g.room_ids.push_back(r.id);
  for (const Door& d : fp.doors) {
    g.door_ids.push_back(d.id);
    g.door_mid_.push_back(d.segment.midpoint());
  }

  const double delta = std::min(resolution, t) * 1e-6;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      Point p = g.cell_center(row, col);
      for (size_t ri = 0; ri < fp.rooms.size(); ++ri) {
        if (detail::interior_of_room(fp.rooms[ri], p, delta)) {
          size_t i = static_cast<size_t>(g.index(row, col));
          g.kind[i] = CellType::Free;
          g.room_at[i] = static_cast<int16_t>(ri);
          break;
        }
      }
    }
  }

  // Carve door openings out of the walls. The carve region is the segment
  // extruded one wall thickness to either side; only wall cells change.
  g.door_cells.resize(fp.doors.size());
  for (size_t di = 0; di < fp.doors.size(); ++di) {
    Rect carve = fp.doors[di].segment.extruded(t);
    auto [r0, c0] = g.cell_of({carve.x, carve.y});
    auto [r1, c1] = g.cell_of({carve.x1(), carve.y1()});
    for (int row = std::max(0, r0); row <= std::min(g.height - 1, r1); ++row) {
      for (int col = std::max(0, c0); col <= std::min(g.width - 1, c1); ++col) {
        size_t i = static_cast<size_t>(g.index(row, col));
        if (g.kind[i] != CellType::Wall) continue;
        if (!carve.contains(g.cell_center(row, col), kGeomEps)) continue;
        g.kind[i] = CellType::Door;
        g.door_at[i] = static_cast<int16_t>(di);
        g.door_cells[di].push_back(g.index(row, col));
      }
    }
    if (g.door_cells[di].empty()) {
      throw MapError("door " + fp.doors[di].id + " produced no door cells at resolution " +
                     std::to_string(resolution));
    }
  }

  // Raster sanity: each door must be passable between its two rooms, and each
  // room must come out as one connected region.
  for (size_t di = 0; di < fp.doors.size(); ++di) {
    const Door& d = fp.doors[di];
    int ra = g.room_index(d.room_a);
    int rb = g.room_index(d.room_b);
    std::deque<int> q;
    std::unordered_map<int, bool> seen;
    bool reached_b = false;
    for (int cell : g.door_cells[di]) {
      int row = cell / g.width, col = cell % g.width;
      bool touches_a = false;
      for (auto [dr, dc] : std::initializer_list<std::pair<int, int>>{
               {-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        int nr = row + dr, nc = col + dc;
        if (!g.in_bounds(nr, nc)) continue;
        size_t ni = static_cast<size_t>(g.index(nr, nc));
        if (g.kind[ni] == CellType::Free && g.room_at[ni] == ra) touches_a = true;
      }
      if (touches_a) {
        q.push_back(cell);
        seen[cell] = true;
      }
    }
    while (!q.empty()) {
      int cell = q.front();
      q.pop_front();
      int row = cell / g.width, col = cell % g.width;
      for (auto [dr, dc] : std::initializer_list<std::pair<int, int>>{
               {-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        int nr = row + dr, nc = col + dc;
        if (!g.in_bounds(nr, nc)) continue;
        size_t ni = static_cast<size_t>(g.index(nr, nc));
        if (g.kind[ni] == CellType::Free && g.room_at[ni] == rb) reached_b = true;
        if (g.kind[ni] == CellType::Door && g.door_at[ni] == static_cast<int>(di) &&
            !seen[g.index(nr, nc)]) {
          seen[g.index(nr, nc)] = true;
          q.push_back(g.index(nr, nc));
        }
      }
    }
    if (!reached_b) {
      throw MapError("door " + d.id + " is sealed at resolution " + std::to_string(resolution));
    }
  }

  for (size_t ri = 0; ri < fp.rooms.size(); ++ri) {
    int start = -1;
    int count = 0;
    for (size_t i = 0; i < cells; ++i) {
      if (g.room_at[i] == static_cast<int>(ri)) {
        ++count;
        if (start < 0) start = static_cast<int>(i);
      }
    }
    if (count == 0) {
      throw MapError("room " + fp.rooms[ri].id + " vanished at resolution " +
                     std::to_string(resolution));
    }
    std::vector<char> seen(cells, 0);
    std::deque<int> q{start};
    seen[static_cast<size_t>(start)] = 1;
    int reached = 0;
    while (!q.empty()) {
      int cell = q.front();
      q.pop_front();
      ++reached;
      int row = cell / g.width, col = cell % g.width;
      for (auto [dr, dc] : std::initializer_list<std::pair<int, int>>{
               {-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        int nr = row + dr, nc = col + dc;
        if (!g.in_bounds(nr, nc)) continue;
        int ni = g.index(nr, nc);
        if (!seen[static_cast<size_t>(ni)] && g.room_at[static_cast<size_t>(ni)] ==
                                                  static_cast<int>(ri)) {
          seen[static_cast<size_t>(ni)] = 1;
          q.push_back(ni);
        }
      }
    }
    if (reached != count) {
      throw MapError("room " + fp.rooms[ri].id + " is disconnected at resolution " +
                     std::to_string(resolution));
    }
  }
  return g;
}

// Portable graymap: walls 0, free space 255, doors 128. Binary P5, rows top
// to bottom.
inline std::string pgm_bytes(const OccupancyGrid& g) {
  std::string out = "P5\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n";
  out.reserve(out.size() + static_cast<size_t>(g.width) * static_cast<size_t>(g.height));
  for (int row = g.height - 1; row >= 0; --row) {
    for (int col = 0; col < g.width; ++col) {
      switch (g.at(row, col)) {
        case CellType::Wall: out.push_back(static_cast<char>(0)); break;
        case CellType::Free: out.push_back(static_cast<char>(255)); break;
        case CellType::Door: out.push_back(static_cast<char>(128)); break;
      }
    }
  }
  return out;
}

inline void write_pgm(const OccupancyGrid& g, const std::string& path) {
  write_file(path, pgm_bytes(g));
}

}  // namespace mapnav
