#include "spatialkit/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace spatialkit {

std::ostream& operator<<(std::ostream& os, const Rect& r) {
  return os << '(' << r.x << ',' << r.y << ',' << r.w << ',' << r.h << ')';
}

double diagonal(const Rect& r) {
  return std::sqrt(static_cast<double>(diagonal_sq(r)));
}

double centroid_distance(const Rect& a, const Rect& b) {
  return std::sqrt(static_cast<double>(centroid_distance_sq4(a, b))) / 2.0;
}

Coord round_half_up(double v) {
  return static_cast<Coord>(std::floor(v + 0.5));
}

namespace {

// Start of a window of length `side` centred on [lo, hi), slid into [0, limit).
Coord place(Coord lo, Coord hi, Coord side, Coord limit) {
  // floor((lo + hi - side) / 2) keeps the span inside whenever hi - lo <= side.
  const Coord twice = lo + hi - side;
  Coord start = twice >= 0 ? twice / 2 : -((-twice + 1) / 2);
  return std::clamp<Coord>(start, 0, limit - side);
}

}  // namespace

SquareCrop enclosing_square(const Rect& a, const Rect& b, Coord image_w, Coord image_h, double expansion) {
  if (image_w <= 0 || image_h <= 0) throw std::invalid_argument("enclosing_square: empty image");
  if (!(expansion >= 0.0 && expansion <= 0.10)) {
    throw std::invalid_argument("enclosing_square: expansion must lie in [0, 0.10]");
  }
  const Rect span = bounding_box(a, b);
  const Coord minimal = std::max(span.w, span.h);
  const Coord limit = std::min(image_w, image_h);

  SquareCrop out;
  Coord side = minimal + static_cast<Coord>(std::floor(static_cast<double>(minimal) * expansion));
  if (minimal > limit) out.truncated = true;
  side = std::min(side, limit);

  out.rect.w = out.rect.h = side;
  out.rect.x = place(span.left(), span.right(), side, image_w);
  out.rect.y = place(span.top(), span.bottom(), side, image_h);
  return out;
}

}  // namespace spatialkit
