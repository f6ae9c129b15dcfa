#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "ambulo/hull.hpp"
#include "ambulo/track.hpp"
#include "ambulo/zones.hpp"

namespace ambulo {

/// Artifact-removal thresholds. A sequence whose floor-projected convex hull
/// perimeter stays below perimeter_threshold is a static false detection
/// (fridge, shelf); one whose center-of-mass acceleration exceeds
/// accel_threshold is a mixed trajectory.
struct FilterConfig {
  double perimeter_threshold = 1.0;  // meters
  double accel_threshold = 50.0;     // m/s^2
};

enum class RemovalReason { none, static_perimeter, high_acceleration };

inline const char* to_string(RemovalReason reason) {
  switch (reason) {
    case RemovalReason::static_perimeter: return "static-perimeter";
    case RemovalReason::high_acceleration: return "high-acceleration";
    default: return "none";
  }
}

struct FilterVerdict {
  size_t sequence_index = 0;
  bool kept = true;
  RemovalReason reason = RemovalReason::none;
  double hull_perimeter = 0.0;  // m
  double max_accel = 0.0;       // m/s^2
};

/// Largest center-of-mass acceleration over interior samples, from the
/// non-uniform central second difference (exact for quadratic motion,
/// tolerant of jittered stamps). Fewer than 3 samples cannot be estimated
/// and return 0.
inline double max_acceleration(const TrackSequence& seq) {
  if (seq.samples.size() < 3) return 0.0;
  double worst = 0.0;
  for (size_t i = 1; i + 1 < seq.samples.size(); ++i) {
    const auto& [t0, p0] = seq.samples[i - 1];
    const auto& [t1, p1] = seq.samples[i];
    const auto& [t2, p2] = seq.samples[i + 1];
    const double dt0 = t1 - t0;
    const double dt1 = t2 - t1;
    const Vec3 v0 = (p1 - p0) / dt0;
    const Vec3 v1 = (p2 - p1) / dt1;
    const double a = (2.0 * (v1 - v0) / (dt0 + dt1)).norm();
    worst = std::max(worst, a);
  }
  return worst;
}

/// Applies both removal criteria to whole sequences, static-perimeter first.
/// Verdicts preserve input order.
inline std::vector<FilterVerdict> apply_filter(const std::vector<TrackSequence>& seqs,
                                               const FilterConfig& cfg) {
  std::vector<FilterVerdict> verdicts;
  verdicts.reserve(seqs.size());
  for (size_t i = 0; i < seqs.size(); ++i) {
    FilterVerdict v;
    v.sequence_index = i;
    v.hull_perimeter = hull_perimeter(seqs[i].floor_points());
    v.max_accel = max_acceleration(seqs[i]);
    if (v.hull_perimeter < cfg.perimeter_threshold) {
      v.kept = false;
      v.reason = RemovalReason::static_perimeter;
    } else if (v.max_accel > cfg.accel_threshold) {
      v.kept = false;
      v.reason = RemovalReason::high_acceleration;
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

inline std::vector<TrackSequence> kept_sequences(const std::vector<TrackSequence>& seqs,
                                                 const std::vector<FilterVerdict>& verdicts) {
  std::vector<TrackSequence> kept;
  for (const FilterVerdict& v : verdicts)
    if (v.kept) kept.push_back(seqs[v.sequence_index]);
  return kept;
}

struct BridgeConfig {
  double max_gap = 60.0;          // seconds (one day-hour on the 60x clock)
  double max_displacement = 0.5;  // meters, floor distance
};

/// Merges consecutive kept sequences of one person across a detection gap
/// when both boundary positions sit in the same zone and close together;
/// the gap is filled with synthetic samples at the boundary positions.
/// Off by default in the pipeline.
inline std::vector<TrackSequence> bridge_gaps(std::vector<TrackSequence> seqs, const ZoneMap& map,
                                              const BridgeConfig& cfg = {}) {
  std::sort(seqs.begin(), seqs.end(), [](const TrackSequence& a, const TrackSequence& b) {
    return a.person < b.person || (a.person == b.person && a.t_start() < b.t_start());
  });
  std::vector<TrackSequence> merged;
  for (TrackSequence& seq : seqs) {
    if (!merged.empty() && merged.back().person == seq.person) {
      TrackSequence& prev = merged.back();
      // Copies, not references: the loop below grows prev.samples.
      const auto [t_end, p_end] = prev.samples.back();
      const auto [t_next, p_next] = seq.samples.front();
      const double gap = t_next - t_end;
      const double displacement = (p_next.head<2>() - p_end.head<2>()).norm();
      const auto zone_end = map.classify(p_end.head<2>());
      const auto zone_next = map.classify(p_next.head<2>());
      if (gap > 0.0 && gap <= cfg.max_gap && displacement <= cfg.max_displacement && zone_end &&
          zone_end == zone_next) {
        const double mid = t_end + gap / 2.0;
        for (double t = t_end + 1.0; t < t_next; t += 1.0)
          prev.samples.emplace_back(t, t < mid ? p_end : p_next);
        prev.samples.insert(prev.samples.end(), seq.samples.begin(), seq.samples.end());
        continue;
      }
    }
    merged.push_back(std::move(seq));
  }
  std::sort(merged.begin(), merged.end(), [](const TrackSequence& a, const TrackSequence& b) {
    return a.t_start() < b.t_start() || (a.t_start() == b.t_start() && a.person < b.person);
  });
  return merged;
}

/// CSV export: person_key,t_start,t_end,kept,reason,hull_perimeter_m,max_accel_mps2
inline std::string verdicts_to_csv(const std::vector<TrackSequence>& seqs,
                                   const std::vector<FilterVerdict>& verdicts) {
  std::string csv = "person_key,t_start,t_end,kept,reason,hull_perimeter_m,max_accel_mps2\n";
  char buf[256];
  for (const FilterVerdict& v : verdicts) {
    const TrackSequence& seq = seqs[v.sequence_index];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%d,%s,%.6g,%.6g\n", seq.person.str().c_str(),
                  seq.t_start(), seq.t_end(), v.kept ? 1 : 0, to_string(v.reason),
                  v.hull_perimeter, v.max_accel);
    csv += buf;
  }
  return csv;
}

}  // namespace ambulo
