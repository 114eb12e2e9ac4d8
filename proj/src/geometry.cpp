#include "geoaff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geoaff {

double Bbox::diagonal() const {
  const double dx = max_x - min_x;
  const double dy = max_y - min_y;
  return std::sqrt(dx * dx + dy * dy);
}

double ring_signed_area(const Ring& ring) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    acc += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return 0.5 * acc;
}

bool ring_is_closed(const Ring& ring) {
  if (ring.size() < 2) return false;
  return ring.front().x == ring.back().x && ring.front().y == ring.back().y;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Strict proper intersection: the open interiors of segments ab and cd cross.
bool segments_properly_cross(const Point& a, const Point& b, const Point& c,
                             const Point& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

}  // namespace

bool ring_self_intersects(const Ring& ring) {
  if (ring.size() < 4) return false;
  const std::size_t m = ring.size() - 1;  // edge count (ring is closed)
  for (std::size_t i = 0; i + 1 < m; ++i) {
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;  // adjacent through the closure
      if (segments_properly_cross(ring[i], ring[i + 1], ring[j], ring[j + 1])) {
        return true;
      }
    }
  }
  return false;
}

double multipolygon_area(const MultiPolygon& g) {
  double acc = 0.0;
  for (const Polygon& p : g.parts) {
    acc += ring_signed_area(p.exterior);
    for (const Ring& h : p.holes) acc += ring_signed_area(h);  // holes are CW => negative
  }
  return acc;
}

Point multipolygon_centroid(const MultiPolygon& g) {
  double a2 = 0.0;   // 2 * signed area
  double cx6 = 0.0;  // 6 * area * centroid_x
  double cy6 = 0.0;
  auto accumulate = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const double w = ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
      a2 += w;
      cx6 += (ring[i].x + ring[i + 1].x) * w;
      cy6 += (ring[i].y + ring[i + 1].y) * w;
    }
  };
  for (const Polygon& p : g.parts) {
    accumulate(p.exterior);
    for (const Ring& h : p.holes) accumulate(h);
  }
  if (a2 != 0.0) {
    return Point{cx6 / (3.0 * a2), cy6 / (3.0 * a2)};
  }
  // Degenerate: average the distinct vertices instead.
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (const Polygon& p : g.parts) {
    for (std::size_t i = 0; i + 1 < p.exterior.size(); ++i) {
      sx += p.exterior[i].x;
      sy += p.exterior[i].y;
      ++n;
    }
  }
  if (n == 0) return Point{0.0, 0.0};
  return Point{sx / double(n), sy / double(n)};
}

Bbox multipolygon_bounds(const MultiPolygon& g) {
  Bbox b{std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()};
  for (const Polygon& p : g.parts) {
    for (const Point& pt : p.exterior) {
      b.min_x = std::min(b.min_x, pt.x);
      b.min_y = std::min(b.min_y, pt.y);
      b.max_x = std::max(b.max_x, pt.x);
      b.max_y = std::max(b.max_y, pt.y);
    }
  }
  return b;
}

Bbox combined_bounds(const std::vector<MultiPolygon>& gs) {
  Bbox b{std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()};
  for (const MultiPolygon& g : gs) {
    const Bbox gb = multipolygon_bounds(g);
    b.min_x = std::min(b.min_x, gb.min_x);
    b.min_y = std::min(b.min_y, gb.min_y);
    b.max_x = std::max(b.max_x, gb.max_x);
    b.max_y = std::max(b.max_y, gb.max_y);
  }
  return b;
}

std::vector<TractId> GeometrySet::sorted_ids() const {
  std::vector<TractId> ids;
  ids.reserve(rows.size());
  for (const auto& [id, geom] : rows) ids.push_back(id);
  return ids;  // std::map iterates in sorted order already
}

}  // namespace geoaff
