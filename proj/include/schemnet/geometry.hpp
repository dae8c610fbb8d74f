#pragma once

#include <algorithm>
#include <cmath>
#include <compare>

namespace schemnet {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned pixel box; covers columns [x, x+w) and rows [y, y+h).
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  long area() const { return static_cast<long>(w) * h; }
  bool contains(Point p) const { return p.x >= x && p.x < right() && p.y >= y && p.y < bottom(); }

  BBox expanded(int d) const { return {x - d, y - d, w + 2 * d, h + 2 * d}; }

  bool intersects(const BBox& o) const {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline BBox intersection(const BBox& a, const BBox& b) {
  int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  int x1 = std::min(a.right(), b.right()), y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

inline BBox bbox_union(const BBox& a, const BBox& b) {
  if (a.w == 0 || a.h == 0) return b;
  if (b.w == 0 || b.h == 0) return a;
  int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  int x1 = std::max(a.right(), b.right()), y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

inline double iou(const BBox& a, const BBox& b) {
  long inter = intersection(a, b).area();
  long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Euclidean distance from a point to the closest point of the box (0 inside).
inline double distance_to_box(double px, double py, const BBox& b) {
  double cx = std::clamp(px, static_cast<double>(b.x), static_cast<double>(b.right() - 1));
  double cy = std::clamp(py, static_cast<double>(b.y), static_cast<double>(b.bottom() - 1));
  return std::hypot(px - cx, py - cy);
}

// Chebyshev distance from a pixel to the box; 0 when inside.
inline int chebyshev_to_box(Point p, const BBox& b) {
  int dx = std::max({b.x - p.x, 0, p.x - (b.right() - 1)});
  int dy = std::max({b.y - p.y, 0, p.y - (b.bottom() - 1)});
  return std::max(dx, dy);
}

}  // namespace schemnet
