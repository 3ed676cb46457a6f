#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapnav/graph.hpp"
#include "mapnav/plan.hpp"

namespace mapnav {

// Door open/closed overrides keyed by canonical door id; anything absent
// falls back to the door's open_by_default flag.
struct DoorStates {
  std::unordered_map<std::string, bool> overrides;

  bool is_open(const ConnectivityGraph& g, int edge) const {
    const GraphEdge& e = g.edges[static_cast<size_t>(edge)];
    auto it = overrides.find(normalize_id(e.door_id));
    return it != overrides.end() ? it->second : e.open_by_default;
  }
  void set(std::string_view door_id, bool open) { overrides[normalize_id(door_id)] = open; }
};

struct ValidateOptions {
  // Pedantic mode additionally requires OpenDoor/GoThrough(d) to follow an
  // ApproachDoor(d) issued since the cursor last moved; default mode tracks
  // room membership and door states only.
  bool pedantic = false;
};

// Replays the plan on the connectivity graph with a room cursor and returns
// the first failure, or correct when the cursor ends at the goal.
inline Verdict validate_plan(const ConnectivityGraph& g, const NavTask& task, const Plan& plan,
                             const DoorStates& initial = {}, ValidateOptions opts = {}) {
  int cur = g.require_room(task.start_room);
  int goal = g.require_room(task.goal_room);
  DoorStates states = initial;

  Verdict v;
  v.trace.push_back(g.rooms[static_cast<size_t>(cur)]);

  auto fail = [&](Outcome o, size_t i, std::string detail) {
    v.outcome = o;
    v.failing_index = i;
    v.detail = std::move(detail);
    return v;
  };

  int approached = -1;  // edge approached since the cursor last moved
  for (size_t i = 0; i < plan.actions.size(); ++i) {
    const Action& a = plan.actions[i];
    const std::string& here = g.rooms[static_cast<size_t>(cur)];

    if (a.verb == Verb::Undefined) {
      return fail(Outcome::UnknownAction, i, "undefined action '" + a.raw_verb + "'");
    }
    if (a.verb == Verb::GoTo) {
      if (plan.profile == Profile::Strict) {
        return fail(Outcome::UnknownAction, i, "GoTo is not part of the strict profile");
      }
      int room = g.room_index(a.target);
      if (room < 0) return fail(Outcome::UnknownTarget, i, "unknown room '" + a.target + "'");
      if (room != cur) {
        bool connected = false;
        for (auto [edge, next] : g.adj[static_cast<size_t>(cur)]) {
          if (next == room && states.is_open(g, edge)) connected = true;
        }
        if (!connected) {
          return fail(Outcome::InfeasibleAction, i,
                      "no open door connects " + here + " to " + a.target);
        }
        cur = room;
        approached = -1;
        v.trace.push_back(g.rooms[static_cast<size_t>(cur)]);
      } else {
        v.trace.push_back(here);
      }
      continue;
    }

    int edge = g.door_index(a.target);
    if (edge < 0) return fail(Outcome::UnknownTarget, i, "unknown door '" + a.target + "'");
    const GraphEdge& e = g.edges[static_cast<size_t>(edge)];
    bool incident = e.touches(cur);

    switch (a.verb) {
      case Verb::ApproachDoor:
        if (!incident) {
          return fail(Outcome::InfeasibleAction, i,
                      "door " + e.door_id + " is not on the boundary of " + here);
        }
        approached = edge;
        v.trace.push_back(here);
        break;
      case Verb::OpenDoor:
        if (!incident) {
          return fail(Outcome::InfeasibleAction, i,
                      "door " + e.door_id + " is not reachable from " + here);
        }
        if (opts.pedantic && approached != edge) {
          return fail(Outcome::InfeasibleAction, i,
                      "OpenDoor(" + e.door_id + ") without approaching it first");
        }
        states.set(e.door_id, true);
        v.trace.push_back(here);
        break;
      case Verb::GoThrough: {
        if (!incident) {
          return fail(Outcome::InfeasibleAction, i,
                      "door " + e.door_id + " is not on the boundary of " + here);
        }
        if (!states.is_open(g, edge)) {
          return fail(Outcome::InfeasibleAction, i, "door " + e.door_id + " is closed");
        }
        if (opts.pedantic && approached != edge) {
          return fail(Outcome::InfeasibleAction, i,
                      "GoThrough(" + e.door_id + ") without approaching it first");
        }
        cur = e.other_end(cur);
        approached = -1;
        v.trace.push_back(g.rooms[static_cast<size_t>(cur)]);
        break;
      }
      default:
        return fail(Outcome::UnknownAction, i, "undefined action");
    }
  }

  if (cur == goal) {
    v.outcome = Outcome::Correct;
    v.detail = "plan reaches " + task.goal_room;
  } else {
    v.outcome = Outcome::GoalNotReached;
    v.detail = "plan ends in " + g.rooms[static_cast<size_t>(cur)] + ", goal is " +
               g.rooms[static_cast<size_t>(goal)];
  }
  return v;
}

// ---------------------------------------------------------------------------
// Connectivity claims: a model's description of which doors join which rooms,
// graded against the true graph.

struct ClaimEdge {
  std::string door;
  std::string room_a;
  std::string room_b;
};

struct ConnectivityClaim {
  std::vector<ClaimEdge> edges;
};

struct EdgeGrade {
  size_t matched = 0;
  size_t claimed = 0;  // after dedup
  size_t actual = 0;
  double precision = 1.0;
  double recall = 1.0;
};

namespace detail {

// Canonical comparable key for an edge: door id plus unordered room pair.
// Claimed room names resolve through the graph when possible so display names
// and ids compare equal.
inline std::string edge_key(const ConnectivityGraph& g, std::string_view door,
                            std::string_view room_a, std::string_view room_b) {
  auto canon = [&](std::string_view name) {
    std::string key = normalize_id(name);
    try {
      int idx = g.room_index(key);
      if (idx >= 0) return normalize_id(g.rooms[static_cast<size_t>(idx)]);
    } catch (const MapError&) {
      // ambiguous display name: fall through to the raw normalized string
    }
    return key;
  };
  std::string a = canon(room_a);
  std::string b = canon(room_b);
  if (b < a) std::swap(a, b);
  return normalize_id(strip_leading_word_ci(trim(door), "door")) + "\x1f" + a + "\x1f" + b;
}

}  // namespace detail

inline EdgeGrade grade_connectivity(const ConnectivityGraph& g, const ConnectivityClaim& claim) {
  std::set<std::string> actual;
  for (const GraphEdge& e : g.edges) {
    actual.insert(detail::edge_key(g, e.door_id, g.rooms[static_cast<size_t>(e.a)],
                                   g.rooms[static_cast<size_t>(e.b)]));
  }
  std::set<std::string> claimed;
  for (const ClaimEdge& e : claim.edges) {
    claimed.insert(detail::edge_key(g, e.door, e.room_a, e.room_b));
  }

  EdgeGrade grade;
  grade.claimed = claimed.size();
  grade.actual = actual.size();
  for (const std::string& k : claimed) {
    if (actual.count(k)) ++grade.matched;
  }
  grade.precision = grade.claimed ? static_cast<double>(grade.matched) / grade.claimed : 1.0;
  grade.recall = grade.actual ? static_cast<double>(grade.matched) / grade.actual : 1.0;
  return grade;
}

// Extracts a connectivity claim from model text. Prefers a JSON object with a
// "connections" array of {door, rooms: [a, b]}; falls back to "D1: A -- B"
// lines. Returns an empty claim when neither appears.
inline ConnectivityClaim parse_connectivity_claim(std::string_view text) {
  ConnectivityClaim claim;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    size_t end = detail::balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    Json candidate = Json::parse(text.substr(i, end - i + 1), nullptr, false);
    if (candidate.is_discarded() || !candidate.is_object()) continue;
    if (!candidate.contains("connections") || !candidate.at("connections").is_array()) continue;
    for (const Json& e : candidate.at("connections")) {
      if (!e.is_object() || !e.contains("door") || !e.at("door").is_string()) continue;
      if (!e.contains("rooms") || !e.at("rooms").is_array() || e.at("rooms").size() != 2)
        continue;
      if (!e.at("rooms")[0].is_string() || !e.at("rooms")[1].is_string()) continue;
      claim.edges.push_back({e.at("door").get<std::string>(),
                             e.at("rooms")[0].get<std::string>(),
                             e.at("rooms")[1].get<std::string>()});
    }
    return claim;
  }

  // Line fallback: "<door>: <room> -- <room>".
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = trim(
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    size_t colon = line.find(':');
    size_t sep = line.find(" -- ");
    if (colon != std::string::npos && sep != std::string::npos && colon < sep) {
      std::string door = trim(std::string_view(line).substr(0, colon));
      std::string a = trim(std::string_view(line).substr(colon + 1, sep - colon - 1));
      std::string b = trim(std::string_view(line).substr(sep + 4));
      if (!door.empty() && !a.empty() && !b.empty()) claim.edges.push_back({door, a, b});
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return claim;
}

}  // namespace mapnav
