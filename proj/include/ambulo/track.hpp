#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "ambulo/geometry.hpp"

namespace ambulo {

/// Tracked identity: one per-sensor tracker slot. There is no cross-sensor
/// re-identification; the same physical person seen by two sensors carries
/// two keys.
struct PersonKey {
  std::string sensor;
  int local_id = 0;

  friend bool operator==(const PersonKey& a, const PersonKey& b) {
    return a.sensor == b.sensor && a.local_id == b.local_id;
  }
  friend bool operator<(const PersonKey& a, const PersonKey& b) {
    return std::tie(a.sensor, a.local_id) < std::tie(b.sensor, b.local_id);
  }

  std::string str() const { return sensor + "/user" + std::to_string(local_id); }
};

/// One center-of-mass fix in the sensor's own frame.
struct Detection {
  std::string sensor;
  int local_id = 0;
  double stamp = 0.0;
  Vec3 position = Vec3::Zero();

  PersonKey key() const { return {sensor, local_id}; }
};

/// A detection projected into the apartment frame.
struct TrackSample {
  PersonKey person;
  double stamp = 0.0;
  Vec3 position_apartment = Vec3::Zero();
};

/// A gap-free run of samples for one tracked identity; the unit of artifact
/// filtering. Stamps are strictly increasing.
struct TrackSequence {
  PersonKey person;
  std::vector<std::pair<double, Vec3>> samples;  // (stamp, position_apartment)

  double t_start() const { return samples.front().first; }
  double t_end() const { return samples.back().first; }

  std::vector<Vec2> floor_points() const {
    std::vector<Vec2> pts;
    pts.reserve(samples.size());
    for (const auto& [t, p] : samples) pts.emplace_back(p.x(), p.y());
    return pts;
  }
};

}  // namespace ambulo
