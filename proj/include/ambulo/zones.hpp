#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambulo/geometry.hpp"

namespace ambulo {

using Polygon = std::vector<Vec2>;

/// a*d - b*c via Kahan's fma algorithm: the sign is reliable (error below
/// 1.5 ulp of the result) and an exact zero stays exactly zero, which keeps
/// on-edge tests stable.
inline double robust_det(double a, double b, double c, double d) {
  const double w = b * c;
  const double e = std::fma(b, c, -w);
  const double f = std::fma(a, d, -w);
  return f - e;
}

/// Sign of the cross product (b - a) x (p - a).
inline double orient2(const Vec2& a, const Vec2& b, const Vec2& p) {
  return robust_det(b.x() - a.x(), b.y() - a.y(), p.x() - a.x(), p.y() - a.y());
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  if (orient2(a, b, p) != 0.0) return false;
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

inline bool on_polygon_boundary(const Polygon& poly, const Vec2& p) {
  for (size_t i = 0; i < poly.size(); ++i)
    if (on_segment(poly[i], poly[(i + 1) % poly.size()], p)) return true;
  return false;
}

/// Closed-polygon containment: boundary counts as inside, interior resolved
/// by ray casting.
inline bool point_in_polygon(const Polygon& poly, const Vec2& p) {
  if (on_polygon_boundary(poly, p)) return true;
  bool inside = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = orient2(c, d, a);
  const double d2 = orient2(c, d, b);
  const double d3 = orient2(a, b, c);
  const double d4 = orient2(a, b, d);
  if (((d1 > 0) != (d2 > 0)) && d1 != 0 && d2 != 0 && ((d3 > 0) != (d4 > 0)) && d3 != 0 && d4 != 0)
    return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

inline bool segments_cross_properly(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = orient2(c, d, a);
  const double d2 = orient2(c, d, b);
  const double d3 = orient2(a, b, c);
  const double d4 = orient2(a, b, d);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

inline double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    twice += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  return 0.5 * std::abs(twice);
}

inline bool polygon_self_intersects(const Polygon& poly) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
    }
  }
  return false;
}

inline Vec2 polygon_centroid(const Polygon& poly) {
  double twice = 0.0;
  Vec2 acc = Vec2::Zero();
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double w = poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
    twice += w;
    acc += w * (poly[j] + poly[i]);
  }
  if (twice == 0.0) return poly.front();
  return acc / (3.0 * twice);
}

/// Shared-interior test used for overlap warnings. Shared edges between
/// adjacent zones do not count as overlap.
inline bool polygons_overlap(const Polygon& a, const Polygon& b) {
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      if (segments_cross_properly(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
        return true;
  auto strictly_inside = [](const Polygon& poly, const Vec2& p) {
    return point_in_polygon(poly, p) && !on_polygon_boundary(poly, p);
  };
  for (const Vec2& v : a)
    if (strictly_inside(b, v)) return true;
  for (const Vec2& v : b)
    if (strictly_inside(a, v)) return true;
  return strictly_inside(b, polygon_centroid(a)) || strictly_inside(a, polygon_centroid(b));
}

/// A purpose-specific floor area, defined independently from the walls.
struct Zone {
  std::string name;
  Polygon polygon;
  bool covered = false;  // inside some sensor's field of view
};

struct ZoneIssue {
  enum class Level { warning, error };
  Level level;
  std::string message;
};

/// Ordered zone list; classification returns the first containing zone, so
/// covered zones are conventionally listed before uncovered ones.
class ZoneMap {
 public:
  ZoneMap() = default;
  explicit ZoneMap(std::vector<Zone> zones) : zones_(std::move(zones)) {}

  const std::vector<Zone>& zones() const { return zones_; }

  const Zone* find(const std::string& name) const {
    for (const Zone& z : zones_)
      if (z.name == name) return &z;
    return nullptr;
  }

  /// First zone (list order) whose closed polygon contains p, if any.
  /// Classification is on the floor projection; heights are ignored.
  std::optional<std::string> classify(const Vec2& p) const {
    for (const Zone& z : zones_)
      if (point_in_polygon(z.polygon, p)) return z.name;
    return std::nullopt;
  }

  std::vector<std::string> zone_names() const {
    std::vector<std::string> names;
    for (const Zone& z : zones_) names.push_back(z.name);
    return names;
  }

  std::vector<std::string> covered_names() const {
    std::vector<std::string> names;
    for (const Zone& z : zones_)
      if (z.covered) names.push_back(z.name);
    return names;
  }

  std::vector<ZoneIssue> validate() const {
    std::vector<ZoneIssue> issues;
    std::map<std::string, int> seen;
    for (const Zone& z : zones_) {
      if (++seen[z.name] == 2)
        issues.push_back({ZoneIssue::Level::error, "duplicate zone name: " + z.name});
      if (z.polygon.size() < 3) {
        issues.push_back({ZoneIssue::Level::error, "zone " + z.name + " has fewer than 3 vertices"});
        continue;
      }
      if (polygon_self_intersects(z.polygon))
        issues.push_back({ZoneIssue::Level::error, "zone " + z.name + " polygon self-intersects"});
      else if (polygon_area(z.polygon) == 0.0)
        issues.push_back({ZoneIssue::Level::error, "zone " + z.name + " has zero area"});
    }
    for (size_t i = 0; i < zones_.size(); ++i) {
      for (size_t j = i + 1; j < zones_.size(); ++j) {
        if (!zones_[i].covered || !zones_[j].covered) continue;
        if (zones_[i].polygon.size() < 3 || zones_[j].polygon.size() < 3) continue;
        if (polygons_overlap(zones_[i].polygon, zones_[j].polygon))
          issues.push_back({ZoneIssue::Level::warning, "covered zones " + zones_[i].name + " and " +
                                                           zones_[j].name + " overlap"});
      }
    }
    return issues;
  }

  bool has_errors() const {
    for (const ZoneIssue& issue : validate())
      if (issue.level == ZoneIssue::Level::error) return true;
    return false;
  }

 private:
  std::vector<Zone> zones_;
};

inline ZoneMap zone_map_from_json(const nlohmann::json& j) {
  std::vector<Zone> zones;
  for (const auto& jz : j) {
    Zone z;
    z.name = jz.at("name").get<std::string>();
    z.covered = jz.at("covered").get<bool>();
    for (const auto& jv : jz.at("vertices"))
      z.polygon.emplace_back(jv.at(0).get<double>(), jv.at(1).get<double>());
    zones.push_back(std::move(z));
  }
  return ZoneMap(std::move(zones));
}

inline nlohmann::json zone_map_to_json(const ZoneMap& map) {
  nlohmann::json j = nlohmann::json::array();
  for (const Zone& z : map.zones()) {
    nlohmann::json jz;
    jz["name"] = z.name;
    jz["covered"] = z.covered;
    nlohmann::json verts = nlohmann::json::array();
    for (const Vec2& v : z.polygon) verts.push_back({v.x(), v.y()});
    jz["vertices"] = std::move(verts);
    j.push_back(std::move(jz));
  }
  return j;
}

inline ZoneMap load_zone_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open zone file: " + path);
  nlohmann::json j;
  in >> j;
  return zone_map_from_json(j);
}

/// Built-in apartment layout: an 80 m^2 three-room flat. Four covered areas
/// (kitchen, dining-room, bedroom, office) listed before the uncovered ones
/// (bathroom, living-room, outside). A 0.7 m unzoned hallway band at
/// y in (4.3, 5.0) separates the north and south areas.
inline ZoneMap default_zone_map() {
  auto rect = [](double x0, double y0, double x1, double y1) {
    return Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  std::vector<Zone> zones;
  zones.push_back({"kitchen", rect(0.0, 5.0, 3.0, 8.0), true});
  zones.push_back({"dining-room", rect(3.5, 5.0, 6.5, 8.0), true});
  zones.push_back({"bedroom", rect(7.0, 5.0, 10.0, 8.0), true});
  zones.push_back({"office", rect(6.7, 0.0, 10.0, 4.3), true});
  zones.push_back({"bathroom", rect(0.0, 0.0, 2.2, 4.3), false});
  zones.push_back({"living-room", rect(2.4, 0.0, 6.5, 4.3), false});
  zones.push_back({"outside", rect(-3.0, 0.0, -0.7, 8.0), false});
  return ZoneMap(std::move(zones));
}

}  // namespace ambulo
