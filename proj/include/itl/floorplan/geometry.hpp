#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace itl {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

using Polygon = std::vector<Point>;

inline constexpr double kGeomTol = 1e-9;

struct BoundingBox {
  double min_x, min_y, max_x, max_y;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

/// Shoelace formula; positive for counter-clockwise vertex order.
inline double signed_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline double perimeter(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    s += std::hypot(b.x - a.x, b.y - a.y);
  }
  return s;
}

inline BoundingBox bounding_box(const Polygon& poly) {
  BoundingBox b{poly.front().x, poly.front().y, poly.front().x, poly.front().y};
  for (const Point& p : poly) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

inline bool is_rectilinear(const Polygon& poly) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const bool horiz = std::abs(a.y - b.y) <= kGeomTol;
    const bool vert = std::abs(a.x - b.x) <= kGeomTol;
    if (horiz == vert) return false;  // diagonal or zero-length edge
  }
  return true;
}

namespace detail {

struct AxisSegment {
  bool horizontal;
  double fixed;  // y for horizontal, x for vertical
  double lo, hi;
};

inline AxisSegment axis_segment(const Point& a, const Point& b) {
  if (std::abs(a.y - b.y) <= kGeomTol) return {true, a.y, std::min(a.x, b.x), std::max(a.x, b.x)};
  return {false, a.x, std::min(a.y, b.y), std::max(a.y, b.y)};
}

inline bool segments_touch(const AxisSegment& s, const AxisSegment& t) {
  if (s.horizontal == t.horizontal) {
    if (std::abs(s.fixed - t.fixed) > kGeomTol) return false;
    return std::min(s.hi, t.hi) >= std::max(s.lo, t.lo) - kGeomTol;
  }
  const AxisSegment& h = s.horizontal ? s : t;
  const AxisSegment& v = s.horizontal ? t : s;
  return v.fixed >= h.lo - kGeomTol && v.fixed <= h.hi + kGeomTol && h.fixed >= v.lo - kGeomTol &&
         h.fixed <= v.hi + kGeomTol;
}

}  // namespace detail

/// True when no two non-adjacent edges touch (rectilinear polygons only).
inline bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 4) return false;
  std::vector<detail::AxisSegment> seg;
  seg.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seg.push_back(detail::axis_segment(poly[i], poly[(i + 1) % n]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent collinear edges may not fold back over each other.
        if (seg[i].horizontal == seg[j].horizontal &&
            std::min(seg[i].hi, seg[j].hi) - std::max(seg[i].lo, seg[j].lo) > kGeomTol)
          return false;
        continue;
      }
      if (detail::segments_touch(seg[i], seg[j])) return false;
    }
  return true;
}

/// Even-odd rule; points exactly on the boundary are unspecified.
inline bool point_in_polygon(const Polygon& poly, Point p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

/// Area of the intersection of two rectilinear polygons, via the cells of the
/// grid spanned by both vertex coordinate sets.
inline double overlap_area(const Polygon& a, const Polygon& b) {
  std::vector<double> xs, ys;
  for (const Polygon* p : {&a, &b})
    for (const Point& q : *p) {
      xs.push_back(q.x);
      ys.push_back(q.y);
    }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double l, double r) { return std::abs(l - r) <= kGeomTol; }), v.end());
  };
  uniq(xs);
  uniq(ys);
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const Point c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (point_in_polygon(a, c) && point_in_polygon(b, c)) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  return area;
}

/// Total length of boundary shared by two polygons (collinear overlapping edges).
inline double shared_boundary_length(const Polygon& a, const Polygon& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto sa = detail::axis_segment(a[i], a[(i + 1) % a.size()]);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto sb = detail::axis_segment(b[j], b[(j + 1) % b.size()]);
      if (sa.horizontal != sb.horizontal || std::abs(sa.fixed - sb.fixed) > kGeomTol) continue;
      const double ov = std::min(sa.hi, sb.hi) - std::max(sa.lo, sb.lo);
      if (ov > 0.0) total += ov;
    }
  }
  return total;
}

/// Rotation by k * 90 degrees about the origin, counter-clockwise.
inline Polygon rotate90(const Polygon& poly, int k) {
  Polygon out = poly;
  k = ((k % 4) + 4) % 4;
  for (Point& p : out)
    for (int r = 0; r < k; ++r) p = Point{-p.y, p.x};
  return out;
}

inline Polygon translate(const Polygon& poly, double dx, double dy) {
  Polygon out = poly;
  for (Point& p : out) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

inline Polygon scale(const Polygon& poly, double s) {
  Polygon out = poly;
  for (Point& p : out) {
    p.x *= s;
    p.y *= s;
  }
  return out;
}

inline Polygon rectangle(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

}  // namespace itl
