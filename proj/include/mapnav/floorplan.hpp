#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mapnav/jsonio.hpp"
#include "mapnav/geometry.hpp"
#include "mapnav/util.hpp"

namespace mapnav {

struct Room {
  std::string id;
  std::string name;  // display name; defaults to id
  std::vector<Rect> rects;

  const Rect& largest_rect() const {
    size_t best = 0;
    for (size_t i = 1; i < rects.size(); ++i) {
      if (rects[i].area() > rects[best].area() + kGeomEps) best = i;
    }
    return rects[best];
  }
  // Anchor for labels and robot placement: centroid of the largest rect.
  Point anchor() const { return largest_rect().center(); }

  bool contains_strict(const Point& p, double eps = kGeomEps) const {
    for (const Rect& r : rects) {
      if (r.contains_strict(p, eps)) return true;
    }
    return false;
  }
  double gap_to(const Rect& other) const {
    double g = std::numeric_limits<double>::infinity();
    for (const Rect& r : rects) g = std::min(g, rect_gap(r, other));
    return g;
  }
  double gap_to_segment(const Segment& s) const { return gap_to(s.bounding()); }
};

struct Door {
  std::string id;
  std::string room_a;
  std::string room_b;
  Segment segment;
  double width = 0.0;
  bool open_by_default = false;
};

enum class LabelKind { Center, DecisionPoint, OpenSpace };

inline const char* to_string(LabelKind k) {
  switch (k) {
    case LabelKind::Center: return "center";
    case LabelKind::DecisionPoint: return "decision_point";
    case LabelKind::OpenSpace: return "open_space";
  }
  return "center";
}

inline std::optional<LabelKind> label_kind_from_string(std::string_view s) {
  if (s == "center") return LabelKind::Center;
  if (s == "decision_point") return LabelKind::DecisionPoint;
  if (s == "open_space") return LabelKind::OpenSpace;
  return std::nullopt;
}

struct Label {
  std::string room;
  std::string text;
  Point anchor;
  LabelKind kind = LabelKind::Center;
};

struct FloorPlan {
  std::string map_id;
  Rect bounds;
  double wall_thickness = 0.0;
  std::vector<Room> rooms;
  std::vector<Door> doors;
  std::vector<Label> labels;

  const Room* room_by_id(std::string_view id) const {
    for (const Room& r : rooms) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }
  const Door* door_by_id(std::string_view id) const {
    for (const Door& d : doors) {
      if (d.id == id) return &d;
    }
    return nullptr;
  }

  // Lookup by id or display name, case- and whitespace-insensitive. Returns
  // nullptr when nothing matches; throws when a display name is ambiguous.
  const Room* find_room(std::string_view name) const {
    std::string key = normalize_id(name);
    for (const Room& r : rooms) {
      if (normalize_id(r.id) == key) return &r;
    }
    const Room* hit = nullptr;
    for (const Room& r : rooms) {
      if (normalize_id(r.name) == key) {
        if (hit) throw MapError("ambiguous room name: " + std::string(name));
        hit = &r;
      }
    }
    return hit;
  }
  const Door* find_door(std::string_view name) const {
    std::string key = normalize_id(strip_leading_word_ci(trim(name), "door"));
    for (const Door& d : doors) {
      if (normalize_id(d.id) == key) return &d;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

class DisjointSet {
 public:
  explicit DisjointSet(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), size_t{0});
  }
  size_t find(size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(size_t a, size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<size_t> parent_;
};

}  // namespace detail

// Checks every structural invariant of a floor plan and throws MapError naming
// the offending entity on the first violation.
inline void validate_floorplan(const FloorPlan& fp) {
  if (fp.map_id.empty()) throw MapError("map_id must be non-empty");
  if (!(fp.bounds.w > 0) || !(fp.bounds.h > 0)) throw MapError("bounds must have positive size");
  if (!(fp.wall_thickness > 0)) throw MapError("wall_thickness must be positive");
  if (fp.rooms.empty()) throw MapError("map has no rooms");

  std::unordered_map<std::string, std::string> room_keys;  // normalized -> id
  for (const Room& r : fp.rooms) {
    if (r.id.empty()) throw MapError("room with empty id");
    std::string key = normalize_id(r.id);
    auto [it, fresh] = room_keys.emplace(key, r.id);
    if (!fresh) {
      throw MapError("room ids collide after normalization: '" + it->second + "' vs '" + r.id +
                     "'");
    }
    if (r.rects.empty()) throw MapError("room " + r.id + " has no rects");
    for (const Rect& rc : r.rects) {
      if (!(rc.w > 0) || !(rc.h > 0)) throw MapError("room " + r.id + " has a degenerate rect");
      if (!fp.bounds.contains_rect(rc)) {
        throw MapError("room " + r.id + " extends outside the map bounds");
      }
    }
    // A room's rects must form one connected region (touching counts).
    detail::DisjointSet ds(r.rects.size());
    for (size_t i = 0; i < r.rects.size(); ++i) {
      for (size_t j = i + 1; j < r.rects.size(); ++j) {
        if (rect_gap(r.rects[i], r.rects[j]) <= kGeomEps) ds.unite(i, j);
      }
    }
    for (size_t i = 1; i < r.rects.size(); ++i) {
      if (ds.find(i) != ds.find(0)) {
        throw MapError("room " + r.id + " is split into disconnected rects");
      }
    }
  }

  // Distinct rooms must not overlap, and must keep a wall-thick gap so the
  // rasterizer can always place wall cells between them.
  for (size_t i = 0; i < fp.rooms.size(); ++i) {
    for (size_t j = i + 1; j < fp.rooms.size(); ++j) {
      for (const Rect& a : fp.rooms[i].rects) {
        for (const Rect& b : fp.rooms[j].rects) {
          double g = rect_gap(a, b);
          if (g < fp.wall_thickness - kGeomEps) {
            if (rect_overlap_area(a, b) > kGeomEps) {
              throw MapError("rooms " + fp.rooms[i].id + " and " + fp.rooms[j].id + " overlap");
            }
            throw MapError("rooms " + fp.rooms[i].id + " and " + fp.rooms[j].id +
                           " are closer than the wall thickness");
          }
        }
      }
    }
  }

  std::unordered_map<std::string, std::string> door_keys;
  for (const Door& d : fp.doors) {
    if (d.id.empty()) throw MapError("door with empty id");
    std::string key = normalize_id(d.id);
    auto [it, fresh] = door_keys.emplace(key, d.id);
    if (!fresh) {
      throw MapError("door ids collide after normalization: '" + it->second + "' vs '" + d.id +
                     "'");
    }
    if (room_keys.count(key)) throw MapError("door id collides with a room id: " + d.id);

    const Room* a = fp.find_room(d.room_a);
    const Room* b = fp.find_room(d.room_b);
    if (!a) throw MapError("door " + d.id + " references unknown room: " + d.room_a);
    if (!b) throw MapError("door " + d.id + " references unknown room: " + d.room_b);
    if (a == b) throw MapError("door " + d.id + " connects a room to itself");

    if (!(d.width > 0)) throw MapError("door " + d.id + " must have positive width");
    if (!d.segment.axis_aligned()) throw MapError("door " + d.id + " segment is not axis-aligned");
    double len = d.segment.length();
    if (len <= kGeomEps) throw MapError("door " + d.id + " segment has zero length");
    if (std::fabs(len - d.width) > std::max(kGeomEps, 0.05 * d.width)) {
      throw MapError("door " + d.id + " width disagrees with its segment length");
    }
    if (!fp.bounds.contains(d.segment.a, kGeomEps) || !fp.bounds.contains(d.segment.b, kGeomEps)) {
      throw MapError("door " + d.id + " extends outside the map bounds");
    }

    for (const Room& r : fp.rooms) {
      for (const Rect& rc : r.rects) {
        if (segment_crosses_rect_interior(d.segment, rc)) {
          throw MapError("door " + d.id + " segment crosses the interior of room " + r.id);
        }
      }
    }

    // The segment must sit in the wall band between its two rooms: close to
    // both, and its wall-thick extrusion must actually reach into both.
    if (a->gap_to_segment(d.segment) > fp.wall_thickness + kGeomEps) {
      throw MapError("door " + d.id + " segment is too far from room " + a->id);
    }
    if (b->gap_to_segment(d.segment) > fp.wall_thickness + kGeomEps) {
      throw MapError("door " + d.id + " segment is too far from room " + b->id);
    }
    Rect carve = d.segment.extruded(fp.wall_thickness);
    for (const Room* r : {a, b}) {
      double reach = 0.0;
      for (const Rect& rc : r->rects) reach = std::max(reach, rect_overlap_area(carve, rc));
      if (reach <= kGeomEps) {
        throw MapError("door " + d.id + " does not open into room " + r->id);
      }
    }
  }

  for (size_t i = 0; i < fp.labels.size(); ++i) {
    const Label& lb = fp.labels[i];
    const Room* r = fp.find_room(lb.room);
    if (!r) throw MapError("label '" + lb.text + "' references unknown room: " + lb.room);
    bool inside = false;
    for (const Rect& rc : r->rects) {
      if (rc.contains(lb.anchor, kGeomEps)) inside = true;
    }
    if (!inside) {
      throw MapError("label '" + lb.text + "' anchor lies outside room " + r->id);
    }
  }
}

// ---------------------------------------------------------------------------
// JSON serialization

enum class LoadMode { Strict, Lenient };

namespace detail {

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                       const std::string& context, LoadMode mode,
                       std::vector<std::string>* warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) known = true;
    }
    if (!known) {
      std::string msg = "unknown key '" + it.key() + "' in " + context;
      if (mode == LoadMode::Strict) throw MapError(msg);
      if (warnings) warnings->push_back(msg);
    }
  }
}

inline double get_number(const Json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw MapError("missing key '" + std::string(key) + "' in " + context);
  const Json& v = j.at(key);
  if (!v.is_number()) throw MapError("key '" + std::string(key) + "' in " + context +
                                     " must be a number");
  return v.get<double>();
}

inline std::string get_string(const Json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw MapError("missing key '" + std::string(key) + "' in " + context);
  const Json& v = j.at(key);
  if (!v.is_string()) throw MapError("key '" + std::string(key) + "' in " + context +
                                     " must be a string");
  return v.get<std::string>();
}

inline const Json& get_array(const Json& j, const char* key, const std::string& context,
                             size_t exact_size = 0) {
  if (!j.contains(key)) throw MapError("missing key '" + std::string(key) + "' in " + context);
  const Json& v = j.at(key);
  if (!v.is_array()) throw MapError("key '" + std::string(key) + "' in " + context +
                                    " must be an array");
  if (exact_size && v.size() != exact_size) {
    throw MapError("key '" + std::string(key) + "' in " + context + " must have " +
                   std::to_string(exact_size) + " elements");
  }
  return v;
}

inline Rect rect_from_json(const Json& v, const std::string& context) {
  if (!v.is_array() || v.size() != 4) throw MapError(context + " must be [x, y, w, h]");
  for (const Json& e : v) {
    if (!e.is_number()) throw MapError(context + " must contain numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

inline Point point_from_json(const Json& v, const std::string& context) {
  if (!v.is_array() || v.size() != 2) throw MapError(context + " must be [x, y]");
  for (const Json& e : v) {
    if (!e.is_number()) throw MapError(context + " must contain numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline FloorPlan floorplan_from_json(const Json& j, LoadMode mode = LoadMode::Strict,
                                     std::vector<std::string>* warnings = nullptr) {
  using namespace detail;
  if (!j.is_object()) throw MapError("map document must be a JSON object");
  check_keys(j, {"map_id", "bounds", "wall_thickness", "rooms", "doors", "labels"}, "map", mode,
             warnings);

  FloorPlan fp;
  fp.map_id = get_string(j, "map_id", "map");
  fp.bounds = rect_from_json(get_array(j, "bounds", "map", 4), "bounds");
  fp.wall_thickness = get_number(j, "wall_thickness", "map");

  for (const Json& rj : get_array(j, "rooms", "map")) {
    std::string ctx =
        "room " + (rj.is_object() && rj.contains("id") && rj.at("id").is_string()
                       ? rj.at("id").get<std::string>()
                       : std::to_string(fp.rooms.size()));
    if (!rj.is_object()) throw MapError(ctx + " must be an object");
    check_keys(rj, {"id", "name", "rects"}, ctx, mode, warnings);
    Room r;
    r.id = get_string(rj, "id", ctx);
    r.name = rj.contains("name") ? get_string(rj, "name", ctx) : r.id;
    for (const Json& rc : get_array(rj, "rects", ctx)) {
      r.rects.push_back(rect_from_json(rc, ctx + " rect"));
    }
    fp.rooms.push_back(std::move(r));
  }

  for (const Json& dj : get_array(j, "doors", "map")) {
    std::string ctx =
        "door " + (dj.is_object() && dj.contains("id") && dj.at("id").is_string()
                       ? dj.at("id").get<std::string>()
                       : std::to_string(fp.doors.size()));
    if (!dj.is_object()) throw MapError(ctx + " must be an object");
    check_keys(dj, {"id", "rooms", "segment", "width", "open_by_default"}, ctx, mode, warnings);
    Door d;
    d.id = get_string(dj, "id", ctx);
    const Json& rooms = get_array(dj, "rooms", ctx, 2);
    if (!rooms[0].is_string() || !rooms[1].is_string()) {
      throw MapError(ctx + " rooms must be two room ids");
    }
    d.room_a = rooms[0].get<std::string>();
    d.room_b = rooms[1].get<std::string>();
    const Json& seg = get_array(dj, "segment", ctx, 2);
    d.segment.a = point_from_json(seg[0], ctx + " segment");
    d.segment.b = point_from_json(seg[1], ctx + " segment");
    d.width = get_number(dj, "width", ctx);
    if (dj.contains("open_by_default")) {
      if (!dj.at("open_by_default").is_boolean()) {
        throw MapError(ctx + " open_by_default must be a boolean");
      }
      d.open_by_default = dj.at("open_by_default").get<bool>();
    }
    fp.doors.push_back(std::move(d));
  }

  if (j.contains("labels")) {
    for (const Json& lj : get_array(j, "labels", "map")) {
      std::string ctx = "label " + std::to_string(fp.labels.size());
      if (!lj.is_object()) throw MapError(ctx + " must be an object");
      check_keys(lj, {"room", "text", "anchor", "kind"}, ctx, mode, warnings);
      Label lb;
      lb.room = get_string(lj, "room", ctx);
      lb.text = get_string(lj, "text", ctx);
      lb.anchor = point_from_json(get_array(lj, "anchor", ctx, 2), ctx + " anchor");
      std::string kind = get_string(lj, "kind", ctx);
      auto k = label_kind_from_string(kind);
      if (!k) throw MapError(ctx + " has unknown kind '" + kind + "'");
      lb.kind = *k;
      fp.labels.push_back(std::move(lb));
    }
  }

  // Canonicalize references so downstream code can compare ids exactly.
  for (Door& d : fp.doors) {
    if (const Room* r = fp.find_room(d.room_a)) d.room_a = r->id;
    if (const Room* r = fp.find_room(d.room_b)) d.room_b = r->id;
  }
  for (Label& lb : fp.labels) {
    if (const Room* r = fp.find_room(lb.room)) lb.room = r->id;
  }
  return fp;
}

inline Json floorplan_to_json(const FloorPlan& fp) {
  Json j;
  j["map_id"] = fp.map_id;
  j["bounds"] = {fp.bounds.x, fp.bounds.y, fp.bounds.w, fp.bounds.h};
  j["wall_thickness"] = fp.wall_thickness;
  j["rooms"] = Json::array();
  for (const Room& r : fp.rooms) {
    Json rj;
    rj["id"] = r.id;
    rj["name"] = r.name;
    rj["rects"] = Json::array();
    for (const Rect& rc : r.rects) rj["rects"].push_back({rc.x, rc.y, rc.w, rc.h});
    j["rooms"].push_back(std::move(rj));
  }
  j["doors"] = Json::array();
  for (const Door& d : fp.doors) {
    Json dj;
    dj["id"] = d.id;
    dj["rooms"] = {d.room_a, d.room_b};
    dj["segment"] = {{d.segment.a.x, d.segment.a.y}, {d.segment.b.x, d.segment.b.y}};
    dj["width"] = d.width;
    if (d.open_by_default) dj["open_by_default"] = true;
    j["doors"].push_back(std::move(dj));
  }
  j["labels"] = Json::array();
  for (const Label& lb : fp.labels) {
    Json lj;
    lj["room"] = lb.room;
    lj["text"] = lb.text;
    lj["anchor"] = {lb.anchor.x, lb.anchor.y};
    lj["kind"] = to_string(lb.kind);
    j["labels"].push_back(std::move(lj));
  }
  return j;
}

// Loads, parses, and validates a map file.
inline FloorPlan load_floorplan(const std::string& path, LoadMode mode = LoadMode::Strict,
                                std::vector<std::string>* warnings = nullptr) {
  std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw MapError("map file is not valid JSON: " + path);
  FloorPlan fp = floorplan_from_json(j, mode, warnings);
  validate_floorplan(fp);
  return fp;
}

inline void save_floorplan(const FloorPlan& fp, const std::string& path) {
  write_file(path, floorplan_to_json(fp).dump(2) + "\n");
}

}  // namespace mapnav
