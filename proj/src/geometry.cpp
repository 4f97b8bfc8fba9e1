#include "rshape/geometry.hpp"

#include <algorithm>

namespace rshape {

namespace {

void consider(Contact& best, const Eigen::Vector2d& centre, const Eigen::Vector2d& feature) {
  const Eigen::Vector2d d = centre - feature;
  const double dist = d.norm();
  if (dist < best.distance && dist > 0.0) {
    best.distance = dist;
    best.normal = d / dist;
  }
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

Contact find_contact(const Eigen::Vector2d& centre, double radius, const std::vector<Polygon>& obstacles) {
  Contact best;
  for (const auto& poly : obstacles) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& a = poly[i];
      const Eigen::Vector2d& b = poly[(i + 1) % n];
      // cheap reject on the segment's bounding box
      if (centre.x() + radius < std::min(a.x(), b.x()) || centre.x() - radius > std::max(a.x(), b.x()) ||
          centre.y() + radius < std::min(a.y(), b.y()) || centre.y() - radius > std::max(a.y(), b.y()))
        continue;
      consider(best, centre, closest_point_on_segment<double>(centre, a, b));
    }
  }
  if (centre.x() < radius && centre.x() < best.distance) best = Contact{{1.0, 0.0}, centre.x()};
  if (1.0 - centre.x() < radius && 1.0 - centre.x() < best.distance) best = Contact{{-1.0, 0.0}, 1.0 - centre.x()};
  if (centre.y() < radius && centre.y() < best.distance) best = Contact{{0.0, 1.0}, centre.y()};
  if (1.0 - centre.y() < radius && 1.0 - centre.y() < best.distance) best = Contact{{0.0, -1.0}, 1.0 - centre.y()};
  if (best.distance >= radius) return Contact{};
  return best;
}

bool disc_collides(const Eigen::Vector2d& centre, double radius, const std::vector<Polygon>& obstacles) {
  if (centre.x() < radius || centre.y() < radius || centre.x() > 1.0 - radius || centre.y() > 1.0 - radius)
    return true;
  for (const auto& poly : obstacles)
    if (point_in_polygon<double>(centre, poly)) return true;
  return find_contact(centre, radius, obstacles).distance < radius;
}

bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace rshape
