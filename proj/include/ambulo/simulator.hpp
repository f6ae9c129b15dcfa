#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambulo/ambulatogram.hpp"
#include "ambulo/geometry.hpp"
#include "ambulo/rng.hpp"
#include "ambulo/track.hpp"
#include "ambulo/transform_tree.hpp"
#include "ambulo/zones.hpp"

namespace ambulo {

/// "HH:MM" day-clock string -> seconds of day.
inline double parse_daytime(const std::string& hhmm) {
  const size_t colon = hhmm.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("bad day time: " + hhmm);
  const int h = std::stoi(hhmm.substr(0, colon));
  const int m = std::stoi(hhmm.substr(colon + 1));
  const bool midnight_end = h == 24 && m == 0;  // "24:00" allowed as an end bound
  if ((h < 0 || h >= 24 || m < 0 || m >= 60) && !midnight_end)
    throw std::invalid_argument("bad day time: " + hhmm);
  return h * 3600.0 + m * 60.0;
}

/// Scenario clock: t = 0 is 01:00 (the scenario starts in a static sleeping
/// phase); day times before 01:00 wrap to the end of the run.
inline double daytime_to_scenario(double day_seconds, double compression) {
  double shifted = day_seconds - 3600.0;
  if (shifted < 0.0) shifted += 86400.0;
  return shifted / compression;
}

enum class Posture { standing, sitting, lying };

inline Posture posture_from_string(const std::string& s) {
  if (s == "standing") return Posture::standing;
  if (s == "sitting") return Posture::sitting;
  if (s == "lying") return Posture::lying;
  throw std::invalid_argument("unknown posture: " + s);
}

inline double posture_height(Posture p) {
  switch (p) {
    case Posture::sitting: return 0.8;
    case Posture::lying: return 0.45;
    default: return 1.0;
  }
}

struct Activity {
  std::string person;
  std::string zone;
  double start = 0.0;  // scenario seconds
  double end = 0.0;
  Posture posture = Posture::standing;
  std::optional<Vec2> at;   // anchor override (defaults to zone centroid)
  std::vector<Vec2> route;  // explicit transit waypoints into this activity
  std::vector<Vec2> moves;  // positions cycled through during the activity
  double move_dwell = 45.0;
};

struct GhostSpawn {
  Vec2 position = Vec2::Zero();
  double z = 0.9;
  double start = 0.0;  // scenario seconds
  double end = 0.0;
};

/// Detection-corruption model. Sensor noise is isotropic Gaussian with
/// marginal sigma position_sigma, split into a per-track bias and an AR(1)
/// fast component so it behaves like real tracker output rather than
/// per-frame white noise.
struct NoiseModel {
  double position_sigma = 0.05;
  double noise_rho = 0.995;  // AR(1) coefficient of the fast component
  std::vector<GhostSpawn> ghosts;
  double swap_rate = 0.006;  // per frame per close pair
  double swap_distance = 0.5;
  double dropout_static = 0.08;  // per 5 s window when speed < 0.05 m/s
  double dropout_lying = 0.45;   // elevated variant while lying
  double fragmentation = 0.004;  // track-id renewal per sample, seated persons
  std::uint64_t seed = 42;
};

struct ScenarioScript {
  double compression = 60.0;  // 24 h into 24 min
  double sample_rate_hz = 30.0;
  double walk_speed = 1.2;    // m/s on the scenario clock
  double sway_sigma = 0.05;   // idle random-walk radius
  double corridor_y = 4.65;   // hallway line used for automatic routing
  std::vector<std::string> persons;
  std::vector<Activity> activities;
  NoiseModel noise;

  double span() const { return 86400.0 / compression; }
};

struct PersonTruth {
  std::string name;
  std::vector<Vec3> position;    // per frame, apartment frame, sway included
  std::vector<bool> is_static;   // nominal speed < 0.05 m/s
  std::vector<Posture> posture;  // activity posture; standing in transit
};

struct CompiledScenario {
  double rate_hz = 30.0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<PersonTruth> persons;
  std::vector<PresenceInterval> reference;

  size_t n_frames() const { return persons.empty() ? 0 : persons.front().position.size(); }
};

struct SensorConfig {
  std::string frame;
  RigidTransform pose;  // pose of the sensor in the apartment frame
  std::vector<Polygon> fov;
  int max_tracks = 6;

  bool sees(const Vec2& p) const {
    for (const Polygon& poly : fov)
      if (point_in_polygon(poly, p)) return true;
    return false;
  }
};

namespace detail {

/// Piecewise-linear 3D track with exact windowed averaging, used to smooth
/// velocity discontinuities at path corners.
class KnotTrack {
 public:
  void append(double t, const Vec3& p) {
    if (!t_.empty() && t <= t_.back() + 1e-12) {
      p_.back() = p;
      return;
    }
    t_.push_back(t);
    p_.push_back(p);
  }

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  const Vec3& last_point() const { return p_.back(); }
  bool empty() const { return t_.empty(); }

  void finalize() {
    prefix_.assign(t_.size(), Vec3::Zero());
    for (size_t i = 1; i < t_.size(); ++i)
      prefix_[i] = prefix_[i - 1] + 0.5 * (p_[i] + p_[i - 1]) * (t_[i] - t_[i - 1]);
  }

  Vec3 value(double t) const {
    if (t <= t_.front()) return p_.front();
    if (t >= t_.back()) return p_.back();
    const size_t hi = upper_index(t);
    if (p_[hi - 1] == p_[hi]) return p_[hi];  // holds are bit-exact
    const double alpha = (t - t_[hi - 1]) / (t_[hi] - t_[hi - 1]);
    return (1.0 - alpha) * p_[hi - 1] + alpha * p_[hi];
  }

  /// Average over [t - w/2, t + w/2], clipped to the track span. Windows
  /// inside one linear segment shortcut to the exact value, so smoothing
  /// only acts near corners.
  Vec3 smoothed(double t, double w) const {
    const double a = std::max(t - 0.5 * w, t_.front());
    const double b = std::min(t + 0.5 * w, t_.back());
    if (b - a < 1e-9) return value(t);
    if (a > t_.front() && b < t_.back() && upper_index(a) == upper_index(b)) return value(t);
    return (integral_to(b) - integral_to(a)) / (b - a);
  }

 private:
  size_t upper_index(double t) const {
    return static_cast<size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  }

  Vec3 integral_to(double t) const {
    if (t <= t_.front()) return Vec3::Zero();
    if (t >= t_.back()) return prefix_.back();
    const size_t hi = upper_index(t);
    const Vec3 at = value(t);
    return prefix_[hi - 1] + 0.5 * (p_[hi - 1] + at) * (t - t_[hi - 1]);
  }

  std::vector<double> t_;
  std::vector<Vec3> p_;
  std::vector<Vec3> prefix_;
};

inline double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

inline Vec2 polyline_point(const std::vector<Vec2>& pts, double s) {
  for (size_t i = 1; i < pts.size(); ++i) {
    const double seg = (pts[i] - pts[i - 1]).norm();
    if (s <= seg || i + 1 == pts.size()) {
      if (seg == 0.0) return pts[i];
      const double alpha = std::clamp(s / seg, 0.0, 1.0);
      return (1.0 - alpha) * pts[i - 1] + alpha * pts[i];
    }
    s -= seg;
  }
  return pts.back();
}

/// Last arc length at which the polyline is still inside the polygon
/// (scanned at 1 cm resolution).
inline double last_inside(const std::vector<Vec2>& pts, const Polygon& poly) {
  const double len = polyline_length(pts);
  double last = 0.0;
  const double step = 0.01;
  for (double s = 0.0; s <= len + step * 0.5; s += step) {
    if (point_in_polygon(poly, polyline_point(pts, std::min(s, len)))) last = std::min(s, len);
  }
  return last;
}

/// First arc length at which the polyline enters the polygon.
inline double first_inside(const std::vector<Vec2>& pts, const Polygon& poly) {
  const double len = polyline_length(pts);
  const double step = 0.01;
  for (double s = 0.0; s <= len + step * 0.5; s += step) {
    if (point_in_polygon(poly, polyline_point(pts, std::min(s, len)))) return std::min(s, len);
  }
  return len;
}

}  // namespace detail

inline void validate_script(const ScenarioScript& script, const ZoneMap& map) {
  if (script.compression <= 0.0) throw std::invalid_argument("compression must be > 0");
  if (script.persons.empty()) throw std::invalid_argument("scenario has no persons");
  std::map<std::string, std::vector<const Activity*>> per_person;
  for (const Activity& act : script.activities) {
    if (!map.find(act.zone))
      throw std::invalid_argument("activity in unknown zone: " + act.zone);
    if (std::find(script.persons.begin(), script.persons.end(), act.person) ==
        script.persons.end())
      throw std::invalid_argument("activity for unknown person: " + act.person);
    if (act.end <= act.start)
      throw std::invalid_argument("activity with non-positive duration for " + act.person +
                                  " in " + act.zone);
    const Polygon& poly = map.find(act.zone)->polygon;
    if (act.at && !point_in_polygon(poly, *act.at))
      throw std::invalid_argument("activity anchor outside zone " + act.zone);
    for (const Vec2& move : act.moves)
      if (!point_in_polygon(poly, move))
        throw std::invalid_argument("activity move point outside zone " + act.zone);
    per_person[act.person].push_back(&act);
  }
  for (const std::string& person : script.persons) {
    const auto it = per_person.find(person);
    if (it == per_person.end())
      throw std::invalid_argument("person " + person + " has no activities");
    const auto& acts = it->second;
    for (size_t i = 1; i < acts.size(); ++i) {
      if (acts[i]->start < acts[i - 1]->end)
        throw std::invalid_argument("overlapping activities for " + person);
      if (acts[i]->start < acts[i - 1]->start)
        throw std::invalid_argument("activities out of order for " + person);
    }
    if (acts.front()->start > 1e-9)
      throw std::invalid_argument("scenario must start in a static phase: first activity of " +
                                  person + " begins after t=0");
  }
}

/// Compiles the script into per-person ground truth plus the reference
/// presence intervals.
///
/// Within an activity the person idles at the anchor (mean-reverting random
/// walk, sigma = sway_sigma), optionally cycling through its move points.
/// Between activities the person walks at walk_speed, auto-routed through
/// the hallway line so transits never cut through unrelated zones, and
/// timed so zone boundary crossings happen just inside the activity
/// intervals they belong to. Uncovered-zone activities produce reference
/// intervals but no measured counterpart.
inline CompiledScenario compile(const ScenarioScript& script, const ZoneMap& map,
                                std::uint64_t seed) {
  validate_script(script, map);
  const double span = script.span();
  const double speed = script.walk_speed;
  const double margin = 0.3;  // seconds between boundary crossing and interval edge

  CompiledScenario out;
  out.rate_hz = script.sample_rate_hz;
  out.t0 = 0.0;
  out.t1 = span;

  for (const Activity& act : script.activities)
    out.reference.push_back({act.person, act.zone, act.start, act.end});

  const size_t n_frames = static_cast<size_t>(std::floor(span * script.sample_rate_hz));

  for (size_t pi = 0; pi < script.persons.size(); ++pi) {
    const std::string& person = script.persons[pi];
    std::vector<const Activity*> acts;
    for (const Activity& act : script.activities)
      if (act.person == person) acts.push_back(&act);

    auto anchor_of = [&](const Activity& act) -> Vec2 {
      if (act.at) return *act.at;
      // Stacked per-person offsets keep co-located people from coinciding.
      return polygon_centroid(map.find(act.zone)->polygon) +
             Vec2(0.0, 0.4 * static_cast<double>(pi));
    };

    detail::KnotTrack track;
    double cur_t = 0.0;
    Vec2 cur_xy = anchor_of(*acts.front());
    double cur_z = posture_height(acts.front()->posture);
    track.append(0.0, Vec3(cur_xy.x(), cur_xy.y(), cur_z));

    auto hold_until = [&](double t, double z) {
      if (t <= cur_t) return;
      if (z != cur_z) {
        const double ramp = std::min(1.5, t - cur_t);
        track.append(cur_t + ramp, Vec3(cur_xy.x(), cur_xy.y(), z));
        cur_z = z;
      }
      track.append(t, Vec3(cur_xy.x(), cur_xy.y(), cur_z));
      cur_t = t;
    };

    auto walk_polyline = [&](const std::vector<Vec2>& pts) {
      for (size_t i = 1; i < pts.size(); ++i) {
        const double seg = (pts[i] - pts[i - 1]).norm();
        if (seg == 0.0) continue;
        cur_t += seg / speed;
        cur_z = 1.0;  // people stand up to walk
        track.append(cur_t, Vec3(pts[i].x(), pts[i].y(), cur_z));
        cur_xy = pts[i];
      }
    };

    for (size_t ai = 0; ai < acts.size(); ++ai) {
      const Activity& act = *acts[ai];
      const double z = posture_height(act.posture);
      const Activity* next = ai + 1 < acts.size() ? acts[ai + 1] : nullptr;

      // Dwell (and optionally cycle through move points) until it is time
      // to leave for the next activity.
      const double dwell_deadline = next ? act.end - 5.0 : span;
      if (!act.moves.empty()) {
        std::vector<Vec2> cycle{anchor_of(act)};
        cycle.insert(cycle.end(), act.moves.begin(), act.moves.end());
        size_t idx = 0;
        while (true) {
          const size_t nxt = (idx + 1) % cycle.size();
          const double hop = (cycle[nxt] - cycle[idx]).norm() / speed;
          if (cur_t + act.move_dwell + hop > dwell_deadline) break;
          hold_until(cur_t + act.move_dwell, z);
          walk_polyline({cycle[idx], cycle[nxt]});
          idx = nxt;
        }
      }
      if (!next) {
        hold_until(span, z);
        break;
      }

      const Vec2 next_anchor = anchor_of(*next);
      if (next->zone == act.zone) {
        // Task change within one zone; reposition at the boundary.
        hold_until(next->start, z);
        walk_polyline({cur_xy, next_anchor});
        continue;
      }

      const Polygon& src_poly = map.find(act.zone)->polygon;
      const Polygon& dst_poly = map.find(next->zone)->polygon;
      std::vector<Vec2> leg1, leg2;
      if (!next->route.empty()) {
        leg1 = {cur_xy};
        leg1.insert(leg1.end(), next->route.begin(), next->route.end());
        leg2 = {leg1.back(), next_anchor};
        leg1.pop_back();
        leg1.push_back(leg2.front());
      } else {
        const Vec2 wait_point(next_anchor.x(), script.corridor_y);
        leg1 = {cur_xy, Vec2(cur_xy.x(), script.corridor_y), wait_point};
        leg2 = {wait_point, next_anchor};
      }

      const double s_exit = detail::last_inside(leg1, src_poly);
      const double s_enter = detail::first_inside(leg2, dst_poly);
      // Cross out of the old zone just before its interval closes and into
      // the new one just after its interval opens.
      const double depart = std::max(cur_t, act.end - margin - s_exit / speed);
      hold_until(depart, z);
      walk_polyline(leg1);
      const double start_leg2 = next->start + margin - s_enter / speed;
      hold_until(std::max(cur_t, start_leg2), 1.0);
      walk_polyline(leg2);
    }
    track.finalize();

    // Sample, smooth corners, add idle sway.
    PersonTruth truth;
    truth.name = person;
    truth.position.resize(n_frames);
    truth.is_static.resize(n_frames);
    truth.posture.resize(n_frames);
    const double smooth_window = 0.4;
    Rng sway_rng(derive_seed(seed, "sway/" + person));
    Ar1 sway_x(script.sway_sigma, 0.998), sway_y(script.sway_sigma, 0.998),
        sway_z(script.sway_sigma * 0.3, 0.998);
    const double dt = 1.0 / script.sample_rate_hz;
    size_t act_cursor = 0;
    for (size_t k = 0; k < n_frames; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Vec3 nominal = track.smoothed(t, smooth_window);
      const Vec3 ahead = track.smoothed(t + dt, smooth_window);
      const double nominal_speed = (ahead.head<2>() - nominal.head<2>()).norm() / dt;
      truth.position[k] =
          nominal + Vec3(sway_x.step(sway_rng), sway_y.step(sway_rng), sway_z.step(sway_rng));
      truth.is_static[k] = nominal_speed < 0.05;
      while (act_cursor < acts.size() && t >= acts[act_cursor]->end) ++act_cursor;
      truth.posture[k] = (act_cursor < acts.size() && t >= acts[act_cursor]->start)
                             ? acts[act_cursor]->posture
                             : Posture::standing;
    }
    out.persons.push_back(std::move(truth));
  }
  return out;
}

struct SenseCounters {
  std::uint64_t emitted = 0;
  std::uint64_t truncated_capacity = 0;
  std::uint64_t swaps = 0;
  std::uint64_t track_births = 0;
};

struct SenseResult {
  std::vector<Detection> detections;  // stamp-sorted
  SenseCounters counters;
};

namespace detail {

struct TrackState {
  int slot = -1;
  Vec3 bias = Vec3::Zero();
};

}  // namespace detail

/// Runs the sensors over the ground truth: per frame, each person inside a
/// sensor's field of view yields a detection in that sensor's frame with
/// correlated Gaussian noise. Dropout suppresses static persons, ghosts emit
/// persistent near-static detections, fragmentation renews track ids of
/// seated persons, and close pairs can have their ids swapped from one frame
/// onward. Concurrent tracks per sensor are capped; excess people go
/// unreported.
inline SenseResult sense(const CompiledScenario& truth, const std::vector<SensorConfig>& sensors,
                         const NoiseModel& noise, std::uint64_t seed) {
  SenseResult out;
  const double dt = 1.0 / truth.rate_hz;
  const size_t n_frames = truth.n_frames();
  const size_t n_persons = truth.persons.size();
  const size_t n_entities = n_persons + noise.ghosts.size();  // persons then ghosts

  // Per-5s-window dropout probabilities to per-frame hazards.
  auto frame_hazard = [&](double p_window) {
    return 1.0 - std::pow(1.0 - std::min(p_window, 0.999999), dt / 5.0);
  };
  const double hazard_static = frame_hazard(noise.dropout_static);
  const double hazard_lying = frame_hazard(noise.dropout_lying);

  struct SensorState {
    std::vector<detail::TrackState> tracks;       // per entity
    std::vector<double> slot_quarantine_until;    // per slot
    std::vector<int> slot_entity;                 // per slot, -1 free
    std::vector<Rng> noise_rng;  // per entity
    std::vector<Ar1> ar_x, ar_y, ar_z;
    std::vector<Rng> swap_rng;
  };

  std::vector<SensorState> states(sensors.size());
  for (size_t si = 0; si < sensors.size(); ++si) {
    SensorState& st = states[si];
    st.tracks.resize(n_entities);
    st.slot_quarantine_until.assign(static_cast<size_t>(sensors[si].max_tracks), -1.0);
    st.slot_entity.assign(static_cast<size_t>(sensors[si].max_tracks), -1);
    const double sigma_fast = 0.6 * noise.position_sigma;
    for (size_t e = 0; e < n_entities; ++e) {
      st.noise_rng.emplace_back(derive_seed(seed, "noise/" + sensors[si].frame + "/" + std::to_string(e)));
      st.ar_x.emplace_back(sigma_fast, noise.noise_rho);
      st.ar_y.emplace_back(sigma_fast, noise.noise_rho);
      st.ar_z.emplace_back(sigma_fast, noise.noise_rho);
    }
    st.swap_rng.emplace_back(derive_seed(seed, "swap/" + sensors[si].frame));
  }

  std::vector<Rng> dropout_rng, frag_rng, ghost_rng;
  std::vector<double> dropout_until(n_persons, -1.0);
  for (size_t p = 0; p < n_persons; ++p) {
    dropout_rng.emplace_back(derive_seed(seed, "dropout/" + truth.persons[p].name));
    frag_rng.emplace_back(derive_seed(seed, "frag/" + truth.persons[p].name));
  }
  std::vector<Ar1> ghost_jit_x, ghost_jit_y;
  for (size_t g = 0; g < noise.ghosts.size(); ++g) {
    ghost_rng.emplace_back(derive_seed(seed, "ghost/" + std::to_string(g)));
    ghost_jit_x.emplace_back(0.02, noise.noise_rho);
    ghost_jit_y.emplace_back(0.02, noise.noise_rho);
  }

  const double sigma_bias = 0.8 * noise.position_sigma;

  for (size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) * dt;

    // True entity positions this frame.
    std::vector<Vec3> entity_pos(n_entities);
    std::vector<bool> entity_present(n_entities, false);
    for (size_t p = 0; p < n_persons; ++p) {
      entity_pos[p] = truth.persons[p].position[k];
      entity_present[p] = true;
    }
    for (size_t g = 0; g < noise.ghosts.size(); ++g) {
      const GhostSpawn& ghost = noise.ghosts[g];
      const bool active = t >= ghost.start && t < ghost.end;
      entity_pos[n_persons + g] = Vec3(ghost.position.x() + ghost_jit_x[g].step(ghost_rng[g]),
                                       ghost.position.y() + ghost_jit_y[g].step(ghost_rng[g]),
                                       ghost.z);
      entity_present[n_persons + g] = active;
    }

    // Dropout episodes for static persons.
    for (size_t p = 0; p < n_persons; ++p) {
      if (!entity_present[p]) continue;
      if (t < dropout_until[p]) {
        entity_present[p] = false;
        continue;
      }
      if (!truth.persons[p].is_static[k]) continue;
      const double hazard =
          truth.persons[p].posture[k] == Posture::lying ? hazard_lying : hazard_static;
      if (dropout_rng[p].bernoulli(hazard)) {
        dropout_until[p] = t + std::clamp(dropout_rng[p].exponential(8.0), 4.0, 20.0);
        entity_present[p] = false;
      }
    }

    for (size_t si = 0; si < sensors.size(); ++si) {
      const SensorConfig& sensor = sensors[si];
      SensorState& st = states[si];

      // Advance noise processes every frame to keep streams stable.
      std::vector<Vec3> fast(n_entities);
      for (size_t e = 0; e < n_entities; ++e)
        fast[e] = Vec3(st.ar_x[e].step(st.noise_rng[e]), st.ar_y[e].step(st.noise_rng[e]),
                       st.ar_z[e].step(st.noise_rng[e]));

      // Visibility, releases, fragmentation.
      for (size_t e = 0; e < n_entities; ++e) {
        const bool visible =
            entity_present[e] && sensor.sees(Vec2(entity_pos[e].x(), entity_pos[e].y()));
        detail::TrackState& track = st.tracks[e];
        if (!visible) {
          if (track.slot >= 0) {
            st.slot_entity[static_cast<size_t>(track.slot)] = -1;
            st.slot_quarantine_until[static_cast<size_t>(track.slot)] = t + 2.5;
            track.slot = -1;
          }
          continue;
        }
        if (track.slot >= 0 && e < n_persons && truth.persons[e].is_static[k] &&
            truth.persons[e].posture[k] != Posture::standing &&
            frag_rng[e].bernoulli(noise.fragmentation)) {
          st.slot_entity[static_cast<size_t>(track.slot)] = -1;
          st.slot_quarantine_until[static_cast<size_t>(track.slot)] = t + 2.5;
          track.slot = -1;
        }
        if (track.slot < 0) {
          int slot = -1;
          for (size_t s = 0; s < st.slot_entity.size(); ++s) {
            if (st.slot_entity[s] < 0 && st.slot_quarantine_until[s] <= t) {
              slot = static_cast<int>(s);
              break;
            }
          }
          if (slot < 0) {  // quarantine pressure: reuse any free slot
            for (size_t s = 0; s < st.slot_entity.size(); ++s) {
              if (st.slot_entity[s] < 0) {
                slot = static_cast<int>(s);
                break;
              }
            }
          }
          if (slot < 0) {
            ++out.counters.truncated_capacity;
            continue;
          }
          track.slot = slot;
          st.slot_entity[static_cast<size_t>(slot)] = static_cast<int>(e);
          track.bias = Vec3(st.noise_rng[e].gauss(0.0, sigma_bias),
                            st.noise_rng[e].gauss(0.0, sigma_bias),
                            st.noise_rng[e].gauss(0.0, sigma_bias));
          ++out.counters.track_births;
        }
      }

      // Identity swaps between close pairs, exchanged from this frame on.
      for (size_t s1 = 0; s1 < st.slot_entity.size(); ++s1) {
        for (size_t s2 = s1 + 1; s2 < st.slot_entity.size(); ++s2) {
          const int e1 = st.slot_entity[s1];
          const int e2 = st.slot_entity[s2];
          if (e1 < 0 || e2 < 0) continue;
          const double dist = (entity_pos[static_cast<size_t>(e1)] -
                               entity_pos[static_cast<size_t>(e2)])
                                  .norm();
          if (dist >= noise.swap_distance) continue;
          if (!st.swap_rng.front().bernoulli(noise.swap_rate)) continue;
          std::swap(st.slot_entity[s1], st.slot_entity[s2]);
          std::swap(st.tracks[static_cast<size_t>(e1)].slot,
                    st.tracks[static_cast<size_t>(e2)].slot);
          ++out.counters.swaps;
        }
      }

      // Emit, slot order.
      const RigidTransform to_sensor = sensor.pose.inverse();
      for (size_t s = 0; s < st.slot_entity.size(); ++s) {
        const int e = st.slot_entity[s];
        if (e < 0) continue;
        const Vec3 noisy = entity_pos[static_cast<size_t>(e)] +
                           st.tracks[static_cast<size_t>(e)].bias + fast[static_cast<size_t>(e)];
        out.detections.push_back(
            {sensor.frame, static_cast<int>(s), t, transform_point(to_sensor, noisy)});
        ++out.counters.emitted;
      }
    }
  }
  return out;
}

}  // namespace ambulo
