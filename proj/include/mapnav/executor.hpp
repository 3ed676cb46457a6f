#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mapnav/astar.hpp"
#include "mapnav/graph.hpp"
#include "mapnav/jsonio.hpp"
#include "mapnav/validate.hpp"

namespace mapnav {

enum class StepStatus {
  Ok,
  UnknownAction,
  UnknownTarget,
  NotAdjacent,   // door action issued from the wrong room or too far away
  DoorClosed,
  NoPath,
  Blocked,       // no usable cell on the far side
};

inline std::string to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Ok: return "ok";
    case StepStatus::UnknownAction: return "unknown_action";
    case StepStatus::UnknownTarget: return "unknown_target";
    case StepStatus::NotAdjacent: return "not_adjacent";
    case StepStatus::DoorClosed: return "door_closed";
    case StepStatus::NoPath: return "no_path";
    case StepStatus::Blocked: return "blocked";
  }
  return "ok";
}

struct StepRecord {
  size_t index = 0;
  std::string action;
  StepStatus status = StepStatus::Ok;
  std::pair<int, int> pose_after{0, 0};
  std::string room_after;
  double distance = 0.0;  // world units moved during this step
};

struct ExecutionLog {
  bool success = false;
  std::string final_room;
  std::optional<size_t> failing_index;
  std::string detail;
  double total_distance = 0.0;
  std::vector<StepRecord> steps;
  std::vector<std::pair<int, int>> trajectory;  // every grid cell visited, in order
};

// Free cell of `room` that is 4-adjacent to a cell of `door`, preferring the
// cell nearest the door's center (ties: lowest row, then column).
inline std::optional<std::pair<int, int>> approach_pose(const OccupancyGrid& g, int door,
                                                        int room) {
  auto center = g.door_center_cell(door);
  std::optional<std::pair<int, int>> best;
  int best_d = 0;
  for (int cell : g.door_cells[static_cast<size_t>(door)]) {
    int row = cell / g.width, col = cell % g.width;
    for (auto [dr, dc] :
         std::initializer_list<std::pair<int, int>>{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
      int nr = row + dr, nc = col + dc;
      if (!g.in_bounds(nr, nc)) continue;
      size_t ni = static_cast<size_t>(g.index(nr, nc));
      if (g.kind[ni] != CellType::Free || g.room_at[ni] != room) continue;
      int d = std::abs(nr - center.first) + std::abs(nc - center.second);
      if (!best || d < best_d || (d == best_d && std::pair{nr, nc} < *best)) {
        best = {nr, nc};
        best_d = d;
      }
    }
  }
  return best;
}

namespace detail {

inline std::pair<int, int> anchor_cell(const OccupancyGrid& g, const Room& room, int room_idx) {
  auto cell = g.cell_of(room.anchor());
  if (g.in_bounds(cell.first, cell.second)) {
    size_t i = static_cast<size_t>(g.index(cell.first, cell.second));
    if (g.kind[i] == CellType::Free && g.room_at[i] == room_idx) return cell;
  }
  // Anchor cell got eaten by rounding; fall back to the room cell nearest it.
  Point a = room.anchor();
  std::pair<int, int> best{-1, -1};
  double best_d = 1e300;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      size_t i = static_cast<size_t>(g.index(row, col));
      if (g.room_at[i] != room_idx || g.kind[i] != CellType::Free) continue;
      Point p = g.cell_center(row, col);
      double d = std::hypot(p.x - a.x, p.y - a.y);
      if (d < best_d - kGeomEps) {
        best_d = d;
        best = {row, col};
      }
    }
  }
  if (best.first < 0) throw MapError("room " + room.id + " has no free cells");
  return best;
}

inline int resolve_room_index(const FloorPlan& fp, const OccupancyGrid& g,
                              std::string_view name) {
  int idx = g.room_index(name);
  if (idx >= 0) return idx;
  const Room* r = fp.find_room(name);
  if (r) return g.room_index(r->id);
  return -1;
}

}  // namespace detail

// Drives a plan across the rasterized map. The robot starts at the anchor of
// the task's start room; each movement is an A* walk, so a step fails if the
// grid offers no route. Success requires every step to land and the final
// position to sit in the goal room.
inline ExecutionLog execute_plan(const FloorPlan& fp, const OccupancyGrid& g, const NavTask& task,
                                 const Plan& plan, const DoorStates& initial = {}) {
  ExecutionLog log;
  int start_idx = detail::resolve_room_index(fp, g, task.start_room);
  int goal_idx = detail::resolve_room_index(fp, g, task.goal_room);
  if (start_idx < 0) throw MapError("unknown start room " + task.start_room);
  if (goal_idx < 0) throw MapError("unknown goal room " + task.goal_room);

  std::vector<char> open(fp.doors.size(), 0);
  for (size_t i = 0; i < fp.doors.size(); ++i) {
    auto it = initial.overrides.find(normalize_id(fp.doors[i].id));
    bool is_open = it != initial.overrides.end() ? it->second : fp.doors[i].open_by_default;
    open[i] = is_open ? 1 : 0;
  }

  std::pair<int, int> pos =
      detail::anchor_cell(g, fp.rooms[static_cast<size_t>(start_idx)], start_idx);
  log.trajectory.push_back(pos);
  auto room_of = [&](std::pair<int, int> c) {
    return static_cast<int>(g.room_at[static_cast<size_t>(g.index(c.first, c.second))]);
  };

  auto fail = [&](size_t i, const Action& a, StepStatus st, std::string why) {
    StepRecord rec;
    rec.index = i;
    rec.action = a.display();
    rec.status = st;
    rec.pose_after = pos;
    rec.room_after = g.room_ids[static_cast<size_t>(room_of(pos))];
    log.steps.push_back(rec);
    log.failing_index = i;
    log.detail = std::move(why);
    log.success = false;
    log.final_room = rec.room_after;
    return log;
  };

  auto walk = [&](std::pair<int, int> target) -> std::optional<double> {
    auto path = astar_path(g, pos, target, open);
    if (!path) return std::nullopt;
    for (size_t k = 1; k < path->size(); ++k) log.trajectory.push_back((*path)[k]);
    double dist = (static_cast<double>(path->size()) - 1.0) * g.resolution;
    pos = target;
    return dist;
  };

  for (size_t i = 0; i < plan.actions.size(); ++i) {
    const Action& a = plan.actions[i];
    int cur_room = room_of(pos);
    double moved = 0.0;

    if (a.verb == Verb::Undefined) {
      return fail(i, a, StepStatus::UnknownAction, "action " + a.display() + " is not available");
    }

    if (a.verb == Verb::GoTo) {
      if (plan.profile == Profile::Strict) {
        return fail(i, a, StepStatus::UnknownAction,
                    "GoTo is not part of the door-level command set");
      }
      int target = detail::resolve_room_index(fp, g, a.target);
      if (target < 0) {
        return fail(i, a, StepStatus::UnknownTarget, "no room named " + a.target);
      }
      if (target != cur_room) {
        bool connected = false;
        for (size_t di = 0; di < fp.doors.size(); ++di) {
          if (!open[di]) continue;
          int ra = g.room_index(fp.doors[di].room_a);
          int rb = g.room_index(fp.doors[di].room_b);
          if ((ra == cur_room && rb == target) || (rb == cur_room && ra == target)) {
            connected = true;
            break;
          }
        }
        if (!connected) {
          return fail(i, a, StepStatus::DoorClosed,
                      "no open door joins " + g.room_ids[static_cast<size_t>(cur_room)] +
                          " and " + a.target);
        }
      }
      auto cell = detail::anchor_cell(g, fp.rooms[static_cast<size_t>(target)], target);
      auto d = walk(cell);
      if (!d) return fail(i, a, StepStatus::NoPath, "no route to " + a.target);
      moved = *d;
    } else {
      int door = g.door_index(a.target);
      if (door < 0) {
        return fail(i, a, StepStatus::UnknownTarget, "no door named " + a.target);
      }
      const Door& dd = fp.doors[static_cast<size_t>(door)];
      int ra = g.room_index(dd.room_a);
      int rb = g.room_index(dd.room_b);

      if (a.verb == Verb::ApproachDoor) {
        if (cur_room != ra && cur_room != rb) {
          return fail(i, a, StepStatus::NotAdjacent,
                      "door " + dd.id + " does not touch " +
                          g.room_ids[static_cast<size_t>(cur_room)]);
        }
        auto pose = approach_pose(g, door, cur_room);
        if (!pose) return fail(i, a, StepStatus::Blocked, "no clear cell beside " + dd.id);
        auto d = walk(*pose);
        if (!d) return fail(i, a, StepStatus::NoPath, "no route to door " + dd.id);
        moved = *d;
      } else if (a.verb == Verb::OpenDoor) {
        if (cur_room != ra && cur_room != rb) {
          return fail(i, a, StepStatus::NotAdjacent,
                      "door " + dd.id + " does not touch " +
                          g.room_ids[static_cast<size_t>(cur_room)]);
        }
        int cheb = g.width + g.height;
        for (int cell : g.door_cells[static_cast<size_t>(door)]) {
          int dr = std::abs(cell / g.width - pos.first);
          int dc = std::abs(cell % g.width - pos.second);
          cheb = std::min(cheb, std::max(dr, dc));
        }
        if (cheb > 2) {
          return fail(i, a, StepStatus::NotAdjacent,
                      "too far from door " + dd.id + " to open it");
        }
        open[static_cast<size_t>(door)] = 1;
      } else {  // GoThrough
        if (cur_room != ra && cur_room != rb) {
          return fail(i, a, StepStatus::NotAdjacent,
                      "door " + dd.id + " does not touch " +
                          g.room_ids[static_cast<size_t>(cur_room)]);
        }
        if (!open[static_cast<size_t>(door)]) {
          return fail(i, a, StepStatus::DoorClosed, "door " + dd.id + " is closed");
        }
        int far = (cur_room == ra) ? rb : ra;
        // Mirror the pose across the door line so short hops stay short.
        Point pc = g.cell_center(pos.first, pos.second);
        Point mirrored = pc;
        if (dd.segment.vertical()) {
          mirrored.x = 2 * dd.segment.a.x - pc.x;
        } else {
          mirrored.y = 2 * dd.segment.a.y - pc.y;
        }
        auto cell = g.cell_of(mirrored);
        bool usable = g.in_bounds(cell.first, cell.second);
        if (usable) {
          size_t ci = static_cast<size_t>(g.index(cell.first, cell.second));
          usable = g.kind[ci] == CellType::Free && g.room_at[ci] == far;
        }
        if (!usable) {
          auto pose = approach_pose(g, door, far);
          if (!pose) {
            return fail(i, a, StepStatus::Blocked, "no landing cell past door " + dd.id);
          }
          cell = *pose;
        }
        auto d = walk(cell);
        if (!d) return fail(i, a, StepStatus::NoPath, "no route through door " + dd.id);
        moved = *d;
      }
    }

    StepRecord rec;
    rec.index = i;
    rec.action = a.display();
    rec.status = StepStatus::Ok;
    rec.pose_after = pos;
    rec.room_after = g.room_ids[static_cast<size_t>(room_of(pos))];
    rec.distance = moved;
    log.total_distance += moved;
    log.steps.push_back(rec);
  }

  log.final_room = g.room_ids[static_cast<size_t>(room_of(pos))];
  log.success = !log.failing_index &&
                normalize_id(log.final_room) == normalize_id(g.room_ids[static_cast<size_t>(goal_idx)]);
  if (!log.failing_index && !log.success) {
    log.detail = "plan ended in " + log.final_room + " instead of " + task.goal_room;
  }
  return log;
}

inline Json execution_log_to_json(const ExecutionLog& log) {
  Json j;
  j["success"] = log.success;
  j["final_room"] = log.final_room;
  if (log.failing_index) j["failing_index"] = *log.failing_index;
  if (!log.detail.empty()) j["detail"] = log.detail;
  j["total_distance"] = log.total_distance;
  Json steps = Json::array();
  for (const StepRecord& s : log.steps) {
    Json e;
    e["index"] = s.index;
    e["action"] = s.action;
    e["status"] = to_string(s.status);
    e["pose"] = Json::array({s.pose_after.first, s.pose_after.second});
    e["room"] = s.room_after;
    e["distance"] = s.distance;
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  j["trajectory_cells"] = log.trajectory.size();
  return j;
}

}  // namespace mapnav
