#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mapnav/floorplan.hpp"
#include "mapnav/plan.hpp"

namespace mapnav {

struct GraphEdge {
  std::string door_id;
  int a = -1;  // room indices; a < b never guaranteed, use other_end()
  int b = -1;
  bool open_by_default = false;

  int other_end(int room) const { return room == a ? b : a; }
  bool touches(int room) const { return room == a || room == b; }
};

// Rooms as nodes, doors as edges. Multigraph: two rooms may share several
// doors. Node order is sorted canonical room id; edge order is sorted door id,
// so every traversal below is deterministic.
struct ConnectivityGraph {
  std::vector<std::string> rooms;       // canonical ids
  std::vector<std::string> room_names;  // display names, aligned with rooms
  std::vector<GraphEdge> edges;
  std::vector<std::vector<std::pair<int, int>>> adj;  // room -> [(edge, other room)]

  int room_index(std::string_view name) const {
    std::string key = normalize_id(name);
    auto it = room_lookup_.find(key);
    if (it == room_lookup_.end()) return -1;
    if (it->second < 0) throw MapError("ambiguous room name: " + std::string(name));
    return it->second;
  }
  int require_room(std::string_view name) const {
    int i = room_index(name);
    if (i < 0) throw MapError("unknown room: " + std::string(name));
    return i;
  }
  int door_index(std::string_view name) const {
    std::string key = normalize_id(strip_leading_word_ci(trim(name), "door"));
    auto it = door_lookup_.find(key);
    return it == door_lookup_.end() ? -1 : it->second;
  }
  int require_door(std::string_view name) const {
    int i = door_index(name);
    if (i < 0) throw MapError("unknown door: " + std::string(name));
    return i;
  }

  friend ConnectivityGraph build_connectivity(const FloorPlan& fp);

 private:
  // Values < 0 mark display names shared by several rooms; looking those up
  // is an error rather than a silent pick.
  std::unordered_map<std::string, int> room_lookup_;
  std::unordered_map<std::string, int> door_lookup_;
};

inline ConnectivityGraph build_connectivity(const FloorPlan& fp) {
  validate_floorplan(fp);

  ConnectivityGraph g;
  std::vector<int> order(fp.rooms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int l, int r) { return fp.rooms[static_cast<size_t>(l)].id <
                                       fp.rooms[static_cast<size_t>(r)].id; });
  for (int src : order) {
    const Room& r = fp.rooms[static_cast<size_t>(src)];
    int idx = static_cast<int>(g.rooms.size());
    g.rooms.push_back(r.id);
    g.room_names.push_back(r.name);
    g.room_lookup_[normalize_id(r.id)] = idx;
  }
  // Display names are secondary lookup keys; ids win on collision and names
  // shared by distinct rooms become ambiguous.
  for (size_t i = 0; i < g.rooms.size(); ++i) {
    std::string key = normalize_id(g.room_names[i]);
    auto it = g.room_lookup_.find(key);
    if (it == g.room_lookup_.end()) {
      g.room_lookup_[key] = static_cast<int>(i);
    } else if (it->second != static_cast<int>(i) &&
               normalize_id(g.rooms[static_cast<size_t>(std::max(it->second, 0))]) != key) {
      it->second = -1;
    }
  }

  std::vector<const Door*> doors;
  for (const Door& d : fp.doors) doors.push_back(&d);
  std::sort(doors.begin(), doors.end(),
            [](const Door* l, const Door* r) { return l->id < r->id; });
  g.adj.resize(g.rooms.size());
  for (const Door* d : doors) {
    GraphEdge e;
    e.door_id = d->id;
    e.a = g.room_index(d->room_a);
    e.b = g.room_index(d->room_b);
    e.open_by_default = d->open_by_default;
    int idx = static_cast<int>(g.edges.size());
    g.door_lookup_[normalize_id(d->id)] = idx;
    g.adj[static_cast<size_t>(e.a)].push_back({idx, e.b});
    g.adj[static_cast<size_t>(e.b)].push_back({idx, e.a});
    g.edges.push_back(std::move(e));
  }
  return g;
}

// Fewest door crossings between two rooms; nullopt when unreachable.
inline std::optional<int> room_hop_distance(const ConnectivityGraph& g, std::string_view from,
                                            std::string_view to) {
  int s = g.require_room(from);
  int t = g.require_room(to);
  std::vector<int> dist(g.rooms.size(), -1);
  dist[static_cast<size_t>(s)] = 0;
  std::deque<int> q{s};
  while (!q.empty()) {
    int cur = q.front();
    q.pop_front();
    if (cur == t) return dist[static_cast<size_t>(cur)];
    for (auto [edge, next] : g.adj[static_cast<size_t>(cur)]) {
      if (dist[static_cast<size_t>(next)] < 0) {
        dist[static_cast<size_t>(next)] = dist[static_cast<size_t>(cur)] + 1;
        q.push_back(next);
      }
    }
  }
  return std::nullopt;
}

// Sampling intent for a task; degenerate marks start == goal.
enum class Difficulty { Easy, Hard, Degenerate };

inline const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Hard: return "hard";
    case Difficulty::Degenerate: return "degenerate";
  }
  return "degenerate";
}

struct NavTask {
  std::string map_id;
  std::string start_room;
  std::string goal_room;
  Difficulty difficulty = Difficulty::Hard;
};

// Classification by measured hop distance: 1 hop is easy, 3 hops is hard,
// anything else (including unreachable and degenerate) is other.
enum class TaskClass { Easy, Hard, Other };

inline const char* to_string(TaskClass c) {
  switch (c) {
    case TaskClass::Easy: return "easy";
    case TaskClass::Hard: return "hard";
    case TaskClass::Other: return "other";
  }
  return "other";
}

inline TaskClass classify_task(const ConnectivityGraph& g, const NavTask& task) {
  auto d = room_hop_distance(g, task.start_room, task.goal_room);
  if (d && *d == 1) return TaskClass::Easy;
  if (d && *d == 3) return TaskClass::Hard;
  return TaskClass::Other;
}

// Shortest plan from start to goal using the ApproachDoor/OpenDoor/GoThrough
// triple per crossing. Among all shortest routes the lexicographically
// smallest door-id sequence is chosen, so output is a pure function of the
// map. Throws NoPathError when the goal is unreachable.
inline Plan oracle_plan(const ConnectivityGraph& g, const NavTask& task) {
  int start = g.require_room(task.start_room);
  int goal = g.require_room(task.goal_room);

  Plan plan;
  plan.profile = Profile::Strict;
  if (start == goal) return plan;

  // Distance-to-goal table, then greedy descent taking the smallest door id
  // among edges that step one hop closer.
  std::vector<int> dist(g.rooms.size(), -1);
  dist[static_cast<size_t>(goal)] = 0;
  std::deque<int> q{goal};
  while (!q.empty()) {
    int cur = q.front();
    q.pop_front();
    for (auto [edge, next] : g.adj[static_cast<size_t>(cur)]) {
      if (dist[static_cast<size_t>(next)] < 0) {
        dist[static_cast<size_t>(next)] = dist[static_cast<size_t>(cur)] + 1;
        q.push_back(next);
      }
    }
  }
  if (dist[static_cast<size_t>(start)] < 0) {
    throw NoPathError("no route from " + task.start_room + " to " + task.goal_room);
  }

  int cur = start;
  while (cur != goal) {
    int best_edge = -1;
    int best_next = -1;
    for (auto [edge, next] : g.adj[static_cast<size_t>(cur)]) {
      if (dist[static_cast<size_t>(next)] != dist[static_cast<size_t>(cur)] - 1) continue;
      if (best_edge < 0 || g.edges[static_cast<size_t>(edge)].door_id <
                               g.edges[static_cast<size_t>(best_edge)].door_id) {
        best_edge = edge;
        best_next = next;
      }
    }
    const std::string& door = g.edges[static_cast<size_t>(best_edge)].door_id;
    plan.actions.push_back({Verb::ApproachDoor, door, ""});
    plan.actions.push_back({Verb::OpenDoor, door, ""});
    plan.actions.push_back({Verb::GoThrough, door, ""});
    cur = best_next;
  }
  return plan;
}

}  // namespace mapnav
