#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace rshape {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Polygon = std::vector<Eigen::Vector2d>;

/// Elastic reflection of `v` about the unit contact normal `n`: v - 2 (v.n) n.
template <typename DerivedV, typename DerivedN>
auto reflect(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedN>& n) {
  using Scalar = typename DerivedV::Scalar;
  Point2<Scalar> out = v - Scalar(2) * v.dot(n) * n;
  return out;
}

template <typename Scalar>
Point2<Scalar> closest_point_on_segment(const Point2<Scalar>& p, const Point2<Scalar>& a,
                                        const Point2<Scalar>& b) {
  const Point2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0)) return a;
  Scalar t = (p - a).dot(ab) / len2;
  t = std::clamp(t, Scalar(0), Scalar(1));
  return a + t * ab;
}

/// Even-odd rule; points on the boundary may report either side.
template <typename Scalar>
bool point_in_polygon(const Point2<Scalar>& p, const std::vector<Point2<Scalar>>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

/// Nearest contact between a disc and a set of obstacles.
struct Contact {
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();  // unit, pointing from obstacle to disc centre
  double distance = std::numeric_limits<double>::infinity();
};

/// Deepest contact of a disc of `radius` at `centre` with the polygons and the
/// unit-square border, or distance = inf when the disc is free. Vertex
/// contacts yield the centre-to-vertex normal.
Contact find_contact(const Eigen::Vector2d& centre, double radius,
                     const std::vector<Polygon>& obstacles);

/// True when the centre lies inside a polygon or the disc overlaps any edge or
/// the border.
bool disc_collides(const Eigen::Vector2d& centre, double radius,
                   const std::vector<Polygon>& obstacles);

bool polygon_is_simple(const Polygon& poly);

}  // namespace rshape
