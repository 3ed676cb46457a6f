#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "mapnav/floorplan.hpp"

namespace mapnav {

// Controls where the seam door goes when a map is doubled. Everything is
// optional; defaults pick the largest-contact room on the right edge and the
// best-facing room of the copy.
struct BridgeSpec {
  std::optional<std::string> room;         // original-side room, must touch the right edge
  std::optional<std::string> attach_room;  // base name of the copy-side room (left edge)
  std::optional<double> width;             // defaults to the narrowest existing door
  std::optional<double> at;                // y (or x) center of the seam door
};

namespace detail {

// Smallest " (k)" suffix, k >= 2, that collides with no existing room id.
inline std::string pick_copy_suffix(const FloorPlan& fp) {
  std::unordered_set<std::string> taken;
  for (const Room& r : fp.rooms) taken.insert(normalize_id(r.id));
  for (int k = 2;; ++k) {
    std::string suffix = " (" + std::to_string(k) + ")";
    bool clash = false;
    for (const Room& r : fp.rooms) {
      if (taken.count(normalize_id(r.id + suffix))) clash = true;
    }
    if (!clash) return suffix;
  }
}

inline std::optional<int> door_number(const std::string& id) {
  if (id.size() < 2 || id[0] != 'D') return std::nullopt;
  for (size_t i = 1; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return std::nullopt;
  }
  return std::stoi(id.substr(1));
}

// Y-spans along which the room touches the given vertical line.
inline std::vector<std::pair<double, double>> edge_spans(const Room& r, double x) {
  std::vector<std::pair<double, double>> spans;
  for (const Rect& rc : r.rects) {
    if (std::fabs(rc.x - x) <= kGeomEps || std::fabs(rc.x1() - x) <= kGeomEps) {
      spans.push_back({rc.y, rc.y1()});
    }
  }
  return spans;
}

}  // namespace detail

// Duplicates the map side by side and joins the halves with one new door
// through the seam wall. Copy rooms and labels get a " (k)" suffix; copy door
// ids continue the D-number sequence after the seam door, so a map with doors
// D1..D9 gains seam door D10 and copies D11..D19.
inline FloorPlan double_map(const FloorPlan& original, const BridgeSpec& spec = {}) {
  validate_floorplan(original);
  const double t = original.wall_thickness;
  const double right = original.bounds.x1();
  const double dx = original.bounds.w + t;

  // Original-side bridge room: honor the spec, or pick the room with the
  // longest contact along the right bounds edge.
  const Room* bridge_room = nullptr;
  if (spec.room) {
    bridge_room = original.find_room(*spec.room);
    if (!bridge_room) throw MapError("bridge room not found: " + *spec.room);
    if (detail::edge_spans(*bridge_room, right).empty()) {
      throw MapError("bridge room " + bridge_room->id + " does not touch the right map edge");
    }
  } else {
    double best = 0.0;
    for (const Room& r : original.rooms) {
      double contact = 0.0;
      for (auto [lo, hi] : detail::edge_spans(r, right)) contact += hi - lo;
      if (contact > best + kGeomEps ||
          (contact > kGeomEps && std::fabs(contact - best) <= kGeomEps && bridge_room &&
           r.id < bridge_room->id)) {
        best = contact;
        bridge_room = &r;
      }
    }
    if (!bridge_room) throw MapError("no room touches the right map edge; cannot place a bridge");
  }

  // Copy-side attach room (identified by its original): must touch the left
  // bounds edge; default is the one whose left-edge span overlaps the bridge
  // room's right-edge span the most.
  const double left = original.bounds.x;
  const Room* attach = nullptr;
  double overlap_lo = 0.0, overlap_hi = 0.0;
  auto overlap_with_bridge = [&](const Room& r, double* lo_out, double* hi_out) {
    double best_len = 0.0;
    for (auto [alo, ahi] : detail::edge_spans(*bridge_room, right)) {
      for (auto [blo, bhi] : detail::edge_spans(r, left)) {
        double lo = std::max(alo, blo), hi = std::min(ahi, bhi);
        if (hi - lo > best_len) {
          best_len = hi - lo;
          *lo_out = lo;
          *hi_out = hi;
        }
      }
    }
    return best_len;
  };
  if (spec.attach_room) {
    attach = original.find_room(*spec.attach_room);
    if (!attach) throw MapError("bridge attach room not found: " + *spec.attach_room);
    if (overlap_with_bridge(*attach, &overlap_lo, &overlap_hi) <= kGeomEps) {
      throw MapError("attach room " + attach->id + " does not face the bridge room " +
                     bridge_room->id + " across the seam");
    }
  } else {
    double best_len = 0.0;
    for (const Room& r : original.rooms) {
      double lo, hi;
      double len = overlap_with_bridge(r, &lo, &hi);
      if (len > best_len + kGeomEps) {
        best_len = len;
        attach = &r;
        overlap_lo = lo;
        overlap_hi = hi;
      }
    }
    if (!attach) {
      throw MapError("no room of the copy faces bridge room " + bridge_room->id +
                     " across the seam");
    }
  }

  double width = 0.0;
  if (spec.width) {
    width = *spec.width;
  } else {
    for (const Door& d : original.doors) width = width > 0 ? std::min(width, d.width) : d.width;
    if (!(width > 0)) width = std::min(2.0, (overlap_hi - overlap_lo) / 2.0);
  }
  if (overlap_hi - overlap_lo < width - kGeomEps) {
    throw MapError("seam door of width " + std::to_string(width) + " does not fit between " +
                   bridge_room->id + " and the copy of " + attach->id);
  }
  double center = spec.at ? *spec.at : (overlap_lo + overlap_hi) / 2.0;
  center = std::clamp(center, overlap_lo + width / 2.0, overlap_hi - width / 2.0);

  FloorPlan out;
  out.map_id = original.map_id + "_doubled";
  out.bounds = original.bounds;
  out.bounds.w = original.bounds.w * 2 + t;
  out.wall_thickness = t;

  const std::string suffix = detail::pick_copy_suffix(original);
  auto shifted = [&](Rect rc) {
    rc.x += dx;
    return rc;
  };

  for (const Room& r : original.rooms) out.rooms.push_back(r);
  for (const Room& r : original.rooms) {
    Room copy;
    copy.id = r.id + suffix;
    copy.name = r.name + suffix;
    for (const Rect& rc : r.rects) copy.rects.push_back(shifted(rc));
    out.rooms.push_back(std::move(copy));
  }

  int next_number = 0;
  for (const Door& d : original.doors) {
    if (auto n = detail::door_number(d.id)) next_number = std::max(next_number, *n);
  }

  for (const Door& d : original.doors) out.doors.push_back(d);

  Door bridge;
  bridge.id = "D" + std::to_string(++next_number);
  bridge.room_a = bridge_room->id;
  bridge.room_b = attach->id + suffix;
  bridge.width = width;
  bridge.segment.a = {right + t / 2.0, center - width / 2.0};
  bridge.segment.b = {right + t / 2.0, center + width / 2.0};
  out.doors.push_back(bridge);

  for (const Door& d : original.doors) {
    Door copy = d;
    copy.id = detail::door_number(d.id) ? "D" + std::to_string(++next_number) : d.id + suffix;
    copy.room_a = d.room_a + suffix;
    copy.room_b = d.room_b + suffix;
    copy.segment.a.x += dx;
    copy.segment.b.x += dx;
    out.doors.push_back(std::move(copy));
  }

  for (const Label& lb : original.labels) out.labels.push_back(lb);
  for (const Label& lb : original.labels) {
    Label copy = lb;
    copy.room = lb.room + suffix;
    copy.text = lb.text + suffix;
    copy.anchor.x += dx;
    out.labels.push_back(std::move(copy));
  }

  validate_floorplan(out);
  return out;
}

// ---------------------------------------------------------------------------
// Labeling schemes

enum class LabelScheme { Sparse, Dense };

inline const char* to_string(LabelScheme s) {
  return s == LabelScheme::Sparse ? "sparse" : "dense";
}

inline std::optional<LabelScheme> label_scheme_from_string(std::string_view s) {
  if (s == "sparse") return LabelScheme::Sparse;
  if (s == "dense") return LabelScheme::Dense;
  return std::nullopt;
}

struct LabelingOptions {
  // Rects larger than this fraction of the map bounds get an extra open-space
  // label under the dense scheme.
  double open_area_fraction = 0.25;
};

namespace detail {

// Pulls a point into the rect, inset from the edges so the anchor stays
// strictly interior.
inline Point clamp_into(const Rect& rc, Point p, double inset) {
  double ix = std::min(inset, rc.w / 4.0);
  double iy = std::min(inset, rc.h / 4.0);
  p.x = std::clamp(p.x, rc.x + ix, rc.x1() - ix);
  p.y = std::clamp(p.y, rc.y + iy, rc.y1() - iy);
  return p;
}

}  // namespace detail

// Replaces the label set wholesale (so the operation is idempotent). Sparse
// puts one room-name label at each room's anchor. Dense adds a room-name
// label beside every door on both sides, plus one per large open rect that is
// not already carrying the anchor label.
inline FloorPlan apply_labeling(const FloorPlan& original, LabelScheme scheme,
                                const LabelingOptions& options = {}) {
  validate_floorplan(original);
  FloorPlan out = original;
  out.labels.clear();

  for (const Room& r : out.rooms) {
    out.labels.push_back({r.id, r.name, r.anchor(), LabelKind::Center});
  }
  if (scheme == LabelScheme::Sparse) return out;

  for (const Door& d : out.doors) {
    Point mid = d.segment.midpoint();
    for (const std::string& room_id : {d.room_a, d.room_b}) {
      const Room* r = out.find_room(room_id);
      const Rect* nearest = &r->rects.front();
      for (const Rect& rc : r->rects) {
        if (rect_gap(rc, d.segment.bounding()) < rect_gap(*nearest, d.segment.bounding())) {
          nearest = &rc;
        }
      }
      Point anchor = detail::clamp_into(*nearest, mid, out.wall_thickness);
      out.labels.push_back({r->id, r->name, anchor, LabelKind::DecisionPoint});
    }
  }

  double threshold = options.open_area_fraction * out.bounds.area();
  for (const Room& r : out.rooms) {
    Point taken = r.anchor();
    for (const Rect& rc : r.rects) {
      if (rc.area() > threshold && !(rc.center() == taken)) {
        out.labels.push_back({r.id, r.name, rc.center(), LabelKind::OpenSpace});
      }
    }
  }

  validate_floorplan(out);
  return out;
}

}  // namespace mapnav
