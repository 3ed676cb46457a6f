#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "mapnav/grid.hpp"

namespace mapnav {

// Shortest 4-connected path over the grid. Unit step cost, Manhattan
// heuristic. `door_open` is indexed by door and gates door cells; free cells
// are always passable, walls never. Ties break on (f, row, col) so equal-cost
// queries always return the same path.
inline std::optional<std::vector<std::pair<int, int>>> astar_path(
    const OccupancyGrid& g, std::pair<int, int> from, std::pair<int, int> to,
    const std::vector<char>& door_open) {
  auto passable = [&](int idx) {
    CellType k = g.kind[static_cast<size_t>(idx)];
    if (k == CellType::Free) return true;
    if (k == CellType::Door) {
      int d = g.door_at[static_cast<size_t>(idx)];
      return d >= 0 && static_cast<size_t>(d) < door_open.size() && door_open[static_cast<size_t>(d)];
    }
    return false;
  };
  if (!g.in_bounds(from.first, from.second) || !g.in_bounds(to.first, to.second)) {
    return std::nullopt;
  }
  int start = g.index(from.first, from.second);
  int goal = g.index(to.first, to.second);
  if (!passable(start) || !passable(goal)) return std::nullopt;
  if (start == goal) return std::vector<std::pair<int, int>>{from};

  auto h = [&](int idx) {
    return std::abs(idx / g.width - to.first) + std::abs(idx % g.width - to.second);
  };

  size_t cells = g.kind.size();
  std::vector<int> dist(cells, -1);
  std::vector<int> parent(cells, -1);
  std::vector<char> closed(cells, 0);
  using Entry = std::tuple<int, int>;  // (f, cell index); index order encodes (row, col)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  dist[static_cast<size_t>(start)] = 0;
  open.emplace(h(start), start);

  while (!open.empty()) {
    auto [f, cur] = open.top();
    open.pop();
    if (closed[static_cast<size_t>(cur)]) continue;
    closed[static_cast<size_t>(cur)] = 1;
    if (cur == goal) break;
    int row = cur / g.width, col = cur % g.width;
    for (auto [dr, dc] :
         std::initializer_list<std::pair<int, int>>{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
      int nr = row + dr, nc = col + dc;
      if (!g.in_bounds(nr, nc)) continue;
      int ni = g.index(nr, nc);
      if (!passable(ni) || closed[static_cast<size_t>(ni)]) continue;
      int nd = dist[static_cast<size_t>(cur)] + 1;
      if (dist[static_cast<size_t>(ni)] < 0 || nd < dist[static_cast<size_t>(ni)]) {
        dist[static_cast<size_t>(ni)] = nd;
        parent[static_cast<size_t>(ni)] = cur;
        open.emplace(nd + h(ni), ni);
      }
    }
  }
  if (dist[static_cast<size_t>(goal)] < 0 || !closed[static_cast<size_t>(goal)]) {
    return std::nullopt;
  }
  std::vector<std::pair<int, int>> path;
  for (int cur = goal; cur != -1; cur = parent[static_cast<size_t>(cur)]) {
    path.emplace_back(cur / g.width, cur % g.width);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace mapnav
