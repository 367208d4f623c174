#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>

namespace spatialkit {

using Coord = std::int64_t;
using Area = std::int64_t;

/// Integer axis-aligned box in image pixels. y grows downward.
struct Rect {
  Coord x = 0;
  Coord y = 0;
  Coord w = 0;
  Coord h = 0;

  constexpr Coord left() const { return x; }
  constexpr Coord top() const { return y; }
  constexpr Coord right() const { return x + w; }
  constexpr Coord bottom() const { return y + h; }
  constexpr bool valid() const { return w >= 0 && h >= 0; }
  constexpr bool is_square() const { return w == h; }
  constexpr bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

std::ostream& operator<<(std::ostream& os, const Rect& r);

/// Exact centroid stored at twice its value so half-pixel centres stay integral.
struct DoubledPoint {
  Coord x2 = 0;
  Coord y2 = 0;

  double x() const { return static_cast<double>(x2) / 2.0; }
  double y() const { return static_cast<double>(y2) / 2.0; }
  friend constexpr bool operator==(const DoubledPoint&, const DoubledPoint&) = default;
};

/// Which quantity stands in for "area of the union of two boxes".
enum class UnionMode { exact, enclosing_box };

constexpr Area area(const Rect& r) { return r.w * r.h; }

constexpr Rect intersection(const Rect& a, const Rect& b) {
  const Coord l = std::max(a.left(), b.left());
  const Coord t = std::max(a.top(), b.top());
  const Coord r = std::min(a.right(), b.right());
  const Coord btm = std::min(a.bottom(), b.bottom());
  if (r <= l || btm <= t) return Rect{l, t, 0, 0};
  return Rect{l, t, r - l, btm - t};
}

constexpr Rect bounding_box(const Rect& a, const Rect& b) {
  const Coord l = std::min(a.left(), b.left());
  const Coord t = std::min(a.top(), b.top());
  return Rect{l, t, std::max(a.right(), b.right()) - l, std::max(a.bottom(), b.bottom()) - t};
}

constexpr Area intersection_area(const Rect& a, const Rect& b) { return area(intersection(a, b)); }

constexpr Area union_area(const Rect& a, const Rect& b) {
  return area(a) + area(b) - intersection_area(a, b);
}

constexpr Area enclosing_box_area(const Rect& a, const Rect& b) { return area(bounding_box(a, b)); }

constexpr Area union_area(const Rect& a, const Rect& b, UnionMode mode) {
  return mode == UnionMode::exact ? union_area(a, b) : enclosing_box_area(a, b);
}

constexpr DoubledPoint doubled_centroid(const Rect& r) { return {2 * r.x + r.w, 2 * r.y + r.h}; }

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

/// (x + w/2, y + h/2); exact for every integer box since halves are dyadic.
inline Centroid centroid(const Rect& r) {
  const auto c = doubled_centroid(r);
  return {c.x(), c.y()};
}

/// Squared diagonal, exact.
constexpr Area diagonal_sq(const Rect& r) { return r.w * r.w + r.h * r.h; }
double diagonal(const Rect& r);

/// Four times the squared centroid distance, exact.
constexpr Area centroid_distance_sq4(const Rect& a, const Rect& b) {
  const auto ca = doubled_centroid(a);
  const auto cb = doubled_centroid(b);
  const Coord dx = ca.x2 - cb.x2;
  const Coord dy = ca.y2 - cb.y2;
  return dx * dx + dy * dy;
}
double centroid_distance(const Rect& a, const Rect& b);

struct SquareCrop {
  Rect rect;
  bool truncated = false;  // the pair did not fit inside the image
};

/// Minimal square around both boxes, grown by `expansion` (a fraction of its
/// side, in [0, 0.10]) about its centre, then moved to lie inside a
/// `image_w` x `image_h` image. Growth is capped at the image's short side.
/// When the pair itself exceeds the short side the square is clamped to it
/// and `truncated` is set.
SquareCrop enclosing_square(const Rect& a, const Rect& b, Coord image_w, Coord image_h, double expansion);

/// Rounds half up (floor(v + 0.5)), the rule used for COCO float boxes.
Coord round_half_up(double v);

}  // namespace spatialkit
