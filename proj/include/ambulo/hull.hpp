#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ambulo/geometry.hpp"

namespace ambulo {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Convex hull by monotone chain, counter-clockwise, collinear interior
/// points dropped. Collinear input collapses to the extreme pair; a single
/// distinct point yields itself.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  if (points.empty()) throw std::invalid_argument("convex_hull: empty input");
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return a == b; }),
               points.end());
  const size_t n = points.size();
  if (n <= 2) return points;

  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  return hull;
}

/// Perimeter of the convex hull. The 2-point degenerate hull counts the
/// segment out and back (2x its length), so a straight walk still scores
/// high; a single point scores 0.
inline double hull_perimeter(const std::vector<Vec2>& points) {
  const std::vector<Vec2> hull = convex_hull(points);
  if (hull.size() == 1) return 0.0;
  if (hull.size() == 2) return 2.0 * (hull[1] - hull[0]).norm();
  double perimeter = 0.0;
  for (size_t i = 0; i < hull.size(); ++i)
    perimeter += (hull[(i + 1) % hull.size()] - hull[i]).norm();
  return perimeter;
}

}  // namespace ambulo
