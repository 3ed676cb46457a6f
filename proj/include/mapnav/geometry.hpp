#pragma once

#include <algorithm>
#include <cmath>

namespace mapnav {

inline constexpr double kGeomEps = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Axis-aligned rectangle, origin at the lower-left corner.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x1() const { return x + w; }
  double y1() const { return y + h; }
  double area() const { return w * h; }
  Point center() const { return {x + w / 2.0, y + h / 2.0}; }

  bool contains(const Point& p, double eps = 0.0) const {
    return p.x >= x - eps && p.x <= x1() + eps && p.y >= y - eps && p.y <= y1() + eps;
  }
  // Strictly interior by more than eps on every side.
  bool contains_strict(const Point& p, double eps = kGeomEps) const {
    return p.x > x + eps && p.x < x1() - eps && p.y > y + eps && p.y < y1() - eps;
  }
  bool contains_rect(const Rect& r, double eps = kGeomEps) const {
    return r.x >= x - eps && r.y >= y - eps && r.x1() <= x1() + eps && r.y1() <= y1() + eps;
  }
};

// Gap between two 1-D intervals; 0 when they touch or overlap.
inline double interval_gap(double a0, double a1, double b0, double b1) {
  return std::max({0.0, b0 - a1, a0 - b1});
}

// Positive overlap length of two 1-D intervals (0 when disjoint).
inline double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline double rect_gap(const Rect& a, const Rect& b) {
  double dx = interval_gap(a.x, a.x1(), b.x, b.x1());
  double dy = interval_gap(a.y, a.y1(), b.y, b.y1());
  return std::hypot(dx, dy);
}

inline double rect_overlap_area(const Rect& a, const Rect& b) {
  return interval_overlap(a.x, a.x1(), b.x, b.x1()) * interval_overlap(a.y, a.y1(), b.y, b.y1());
}

struct Segment {
  Point a;
  Point b;

  bool vertical(double eps = kGeomEps) const { return std::fabs(a.x - b.x) <= eps; }
  bool horizontal(double eps = kGeomEps) const { return std::fabs(a.y - b.y) <= eps; }
  bool axis_aligned(double eps = kGeomEps) const { return vertical(eps) || horizontal(eps); }
  double length() const { return std::hypot(b.x - a.x, b.y - a.y); }
  Point midpoint() const { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

  // Degenerate rect covering the segment (zero thickness on one axis).
  Rect bounding() const {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::fabs(b.x - a.x), std::fabs(b.y - a.y)};
  }

  // Inflated perpendicular to the segment axis; used for door carving.
  Rect extruded(double amount) const {
    Rect r = bounding();
    if (vertical()) {
      r.x -= amount;
      r.w += 2 * amount;
    } else {
      r.y -= amount;
      r.h += 2 * amount;
    }
    return r;
  }
};

inline double rect_segment_gap(const Rect& r, const Segment& s) {
  return rect_gap(r, s.bounding());
}

// True when the segment passes through the open interior of the rect (touching
// the boundary does not count).
inline bool segment_crosses_rect_interior(const Segment& s, const Rect& r,
                                          double eps = kGeomEps) {
  Rect sb = s.bounding();
  double ox = interval_overlap(sb.x, sb.x1(), r.x + eps, r.x1() - eps);
  double oy = interval_overlap(sb.y, sb.y1(), r.y + eps, r.y1() - eps);
  if (s.vertical(eps)) return s.a.x > r.x + eps && s.a.x < r.x1() - eps && oy > eps;
  if (s.horizontal(eps)) return s.a.y > r.y + eps && s.a.y < r.y1() - eps && ox > eps;
  return ox > eps && oy > eps;  // non-axis-aligned segments are rejected elsewhere
}

}  // namespace mapnav
