#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambulo/filter.hpp"
#include "ambulo/simulator.hpp"
#include "ambulo/transform_tree.hpp"
#include "ambulo/zones.hpp"

namespace ambulo {

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline Vec2 vec2_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

// ---------------------------------------------------------------------------
// Scenario script

inline ScenarioScript scenario_from_json(const nlohmann::json& j) {
  ScenarioScript s;
  s.compression = j.value("compression", 60.0);
  s.sample_rate_hz = j.value("sample_rate_hz", 30.0);
  s.walk_speed = j.value("walk_speed_mps", 1.2);
  s.sway_sigma = j.value("sway_sigma_m", 0.05);
  s.corridor_y = j.value("corridor_y_m", 4.65);
  for (const auto& p : j.at("persons")) s.persons.push_back(p.get<std::string>());
  auto to_scenario = [&](const std::string& hhmm) {
    return daytime_to_scenario(parse_daytime(hhmm), s.compression);
  };
  for (const auto& ja : j.at("activities")) {
    Activity act;
    act.person = ja.at("person").get<std::string>();
    act.zone = ja.at("zone").get<std::string>();
    act.start = to_scenario(ja.at("start").get<std::string>());
    act.end = to_scenario(ja.at("end").get<std::string>());
    act.posture = posture_from_string(ja.value("posture", "standing"));
    if (ja.contains("at")) act.at = vec2_from_json(ja.at("at"));
    if (ja.contains("route"))
      for (const auto& jw : ja.at("route")) act.route.push_back(vec2_from_json(jw));
    if (ja.contains("moves"))
      for (const auto& jm : ja.at("moves")) act.moves.push_back(vec2_from_json(jm));
    act.move_dwell = ja.value("move_dwell_s", 45.0);
    s.activities.push_back(std::move(act));
  }
  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    NoiseModel& n = s.noise;
    n.position_sigma = jn.value("position_sigma_m", n.position_sigma);
    n.noise_rho = jn.value("noise_rho", n.noise_rho);
    n.swap_rate = jn.value("swap_rate", n.swap_rate);
    n.swap_distance = jn.value("swap_distance_m", n.swap_distance);
    n.dropout_static = jn.value("dropout_static", n.dropout_static);
    n.dropout_lying = jn.value("dropout_lying", n.dropout_lying);
    n.fragmentation = jn.value("fragmentation", n.fragmentation);
    n.seed = jn.value("seed", n.seed);
    if (jn.contains("ghosts")) {
      for (const auto& jg : jn.at("ghosts")) {
        GhostSpawn g;
        g.position = vec2_from_json(jg.at("position"));
        g.z = jg.value("z", 0.9);
        g.start = to_scenario(jg.at("start").get<std::string>());
        g.end = to_scenario(jg.at("end").get<std::string>());
        n.ghosts.push_back(g);
      }
    }
  }
  return s;
}

inline ScenarioScript load_scenario(const std::string& path) {
  return scenario_from_json(load_json(path));
}

// ---------------------------------------------------------------------------
// Sensor configuration (static transform edges + fields of view)

struct SensorSetup {
  std::string apartment_frame = "apartment";
  std::vector<SensorConfig> sensors;
};

inline SensorSetup sensors_from_json(const nlohmann::json& j) {
  SensorSetup setup;
  setup.apartment_frame = j.value("apartment_frame", "apartment");
  for (const auto& js : j.at("sensors")) {
    SensorConfig s;
    s.frame = js.at("frame").get<std::string>();
    const auto& jt = js.at("translation");
    const Vec3 t(jt.at(0).get<double>(), jt.at(1).get<double>(), jt.at(2).get<double>());
    if (js.contains("rotation")) {
      const auto& jq = js.at("rotation");  // [w, x, y, z]
      s.pose = RigidTransform(
          t, Quat(jq.at(0).get<double>(), jq.at(1).get<double>(), jq.at(2).get<double>(),
                  jq.at(3).get<double>()));
    } else {
      s.pose = RigidTransform::from_yaw_deg(t, js.value("yaw_deg", 0.0));
    }
    if (js.contains("fov"))
      for (const auto& jring : js.at("fov")) {
        Polygon ring;
        for (const auto& jv : jring) ring.push_back(vec2_from_json(jv));
        s.fov.push_back(std::move(ring));
      }
    s.max_tracks = js.value("max_tracks", 6);
    setup.sensors.push_back(std::move(s));
  }
  return setup;
}

inline SensorSetup load_sensors(const std::string& path) {
  return sensors_from_json(load_json(path));
}

/// Installs the apartment->sensor static edges into a transform tree.
inline void install_static_transforms(TransformTree& tree, const SensorSetup& setup) {
  for (const SensorConfig& s : setup.sensors)
    tree.set_static(setup.apartment_frame, s.frame, s.pose);
}

// ---------------------------------------------------------------------------
// Built-in defaults (identical to the files shipped under configs/)

inline const char* default_scenario_text() {
  return R"json({
  "compression": 60,
  "sample_rate_hz": 30,
  "walk_speed_mps": 1.2,
  "sway_sigma_m": 0.05,
  "corridor_y_m": 4.65,
  "persons": ["resident", "visitor"],
  "activities": [
    {"person": "resident", "zone": "bedroom",     "start": "01:00", "end": "06:55", "posture": "lying"},
    {"person": "resident", "zone": "bathroom",    "start": "07:10", "end": "07:25", "posture": "standing"},
    {"person": "resident", "zone": "kitchen",     "start": "07:40", "end": "08:10", "posture": "standing",
     "moves": [[0.8, 6.9], [2.3, 7.1], [1.5, 5.9]], "move_dwell_s": 8},
    {"person": "resident", "zone": "dining-room", "start": "08:20", "end": "08:45", "posture": "sitting",
     "moves": [[4.6, 6.2], [5.4, 6.7]], "move_dwell_s": 12},
    {"person": "resident", "zone": "outside",     "start": "09:00", "end": "10:30", "posture": "standing"},
    {"person": "resident", "zone": "kitchen",     "start": "10:45", "end": "11:35", "posture": "standing",
     "moves": [[0.8, 6.9], [2.3, 7.1], [1.5, 5.9]], "move_dwell_s": 8},
    {"person": "resident", "zone": "dining-room", "start": "11:50", "end": "12:30", "posture": "sitting",
     "moves": [[4.6, 6.2], [5.4, 6.7]], "move_dwell_s": 12},
    {"person": "resident", "zone": "office",      "start": "12:45", "end": "14:30", "posture": "sitting",
     "moves": [[9.2, 3.4], [8.0, 1.6]], "move_dwell_s": 20},
    {"person": "resident", "zone": "living-room", "start": "14:45", "end": "16:00", "posture": "sitting"},
    {"person": "resident", "zone": "kitchen",     "start": "16:10", "end": "16:40", "posture": "standing",
     "moves": [[0.8, 6.9], [2.3, 7.1], [1.5, 5.9]], "move_dwell_s": 8},
    {"person": "resident", "zone": "living-room", "start": "16:50", "end": "17:20", "posture": "sitting"},
    {"person": "resident", "zone": "dining-room", "start": "17:30", "end": "19:00", "posture": "sitting",
     "moves": [[4.6, 6.2], [5.4, 6.7]], "move_dwell_s": 12},
    {"person": "resident", "zone": "kitchen",     "start": "19:10", "end": "19:40", "posture": "standing",
     "moves": [[0.8, 6.9], [2.3, 7.1], [1.5, 5.9]], "move_dwell_s": 8},
    {"person": "resident", "zone": "living-room", "start": "19:55", "end": "21:30", "posture": "sitting"},
    {"person": "resident", "zone": "bathroom",    "start": "21:40", "end": "21:55", "posture": "standing"},
    {"person": "resident", "zone": "bedroom",     "start": "22:10", "end": "23:25", "posture": "sitting"},
    {"person": "resident", "zone": "bedroom",     "start": "23:25", "end": "00:59", "posture": "lying"},
    {"person": "visitor",  "zone": "outside",     "start": "01:00", "end": "17:15", "posture": "standing"},
    {"person": "visitor",  "zone": "dining-room", "start": "17:30", "end": "18:55", "posture": "sitting",
     "moves": [[5.35, 7.0], [4.65, 6.65]], "move_dwell_s": 15},
    {"person": "visitor",  "zone": "outside",     "start": "19:15", "end": "00:59", "posture": "standing"}
  ],
  "noise": {
    "position_sigma_m": 0.05,
    "noise_rho": 0.995,
    "swap_rate": 0.006,
    "swap_distance_m": 0.5,
    "dropout_static": 0.08,
    "dropout_lying": 0.45,
    "fragmentation": 0.004,
    "seed": 42,
    "ghosts": [
      {"zone": "kitchen", "position": [0.45, 7.55], "start": "13:00", "end": "24:00"},
      {"zone": "office",  "position": [9.6, 2.6],   "start": "02:30", "end": "09:30"}
    ]
  }
})json";
}

inline const char* default_sensors_text() {
  return R"json({
  "apartment_frame": "apartment",
  "sensors": [
    {"frame": "kinect1", "translation": [1.5, 7.85, 2.3], "yaw_deg": -90,
     "fov": [[[0.0, 5.0], [3.0, 5.0], [3.0, 8.0], [0.0, 8.0]]]},
    {"frame": "kinect2", "translation": [5.0, 7.85, 2.3], "yaw_deg": -90,
     "fov": [[[3.5, 5.0], [6.5, 5.0], [6.5, 8.0], [3.5, 8.0]]]},
    {"frame": "kinect3", "translation": [9.8, 7.8, 2.4],
     "rotation": [0.69035, -0.15305, 0.15305, 0.69035],
     "fov": [[[7.0, 5.0], [10.0, 5.0], [10.0, 8.0], [7.0, 8.0]],
             [[6.7, 0.0], [10.0, 0.0], [10.0, 4.3], [6.7, 4.3]]]}
  ]
})json";
}

inline ScenarioScript default_scenario() {
  return scenario_from_json(nlohmann::json::parse(default_scenario_text()));
}

inline SensorSetup default_sensors() {
  return sensors_from_json(nlohmann::json::parse(default_sensors_text()));
}

// ---------------------------------------------------------------------------
// Run configuration: defaults < config file < environment < flags.

struct RunConfig {
  std::string zones_path;     // empty = built-in default map
  std::string sensors_path;   // empty = built-in default sensors
  std::string scenario_path;  // empty = built-in default scenario
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;  // unset: scenario noise seed
  int runs = 1;
  double bin_width = 5.0;
  double gap_threshold = 2.0;
  double reorder_window = 0.2;
  double extrapolation_margin = 0.5;  // transform lookup clamp, seconds
  double streaming_retention = 300.0;
  FilterConfig filter;
  bool strict = false;
  bool bridge = false;
  BridgeConfig bridge_cfg;
  double realtime_speed = 0.0;  // 0 = batch

  void apply_file(const std::string& path) {
    const nlohmann::json j = load_json(path);
    zones_path = j.value("zones", zones_path);
    sensors_path = j.value("sensors", sensors_path);
    scenario_path = j.value("scenario", scenario_path);
    out_dir = j.value("out", out_dir);
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    runs = j.value("runs", runs);
    bin_width = j.value("bin_width_s", bin_width);
    gap_threshold = j.value("gap_threshold_s", gap_threshold);
    reorder_window = j.value("reorder_window_s", reorder_window);
    extrapolation_margin = j.value("extrapolation_margin_s", extrapolation_margin);
    streaming_retention = j.value("streaming_retention_s", streaming_retention);
    filter.perimeter_threshold = j.value("perimeter_threshold_m", filter.perimeter_threshold);
    filter.accel_threshold = j.value("accel_threshold_mps2", filter.accel_threshold);
    strict = j.value("strict", strict);
    bridge = j.value("bridge_gaps", bridge);
    bridge_cfg.max_gap = j.value("bridge_max_gap_s", bridge_cfg.max_gap);
    bridge_cfg.max_displacement = j.value("bridge_max_displacement_m", bridge_cfg.max_displacement);
  }

  void apply_env() {
    auto env_str = [](const char* name, std::string& target) {
      if (const char* v = std::getenv(name)) target = v;
    };
    env_str("AMBULO_ZONES", zones_path);
    env_str("AMBULO_SENSORS", sensors_path);
    env_str("AMBULO_SCENARIO", scenario_path);
    env_str("AMBULO_OUT", out_dir);
    if (const char* v = std::getenv("AMBULO_SEED")) seed = std::stoull(v);
    if (const char* v = std::getenv("AMBULO_RUNS")) runs = std::stoi(v);
  }

  ZoneMap zones() const {
    return zones_path.empty() ? default_zone_map() : load_zone_map(zones_path);
  }
  SensorSetup sensors() const {
    return sensors_path.empty() ? default_sensors() : load_sensors(sensors_path);
  }
  ScenarioScript scenario() const {
    return scenario_path.empty() ? default_scenario() : load_scenario(scenario_path);
  }
  std::uint64_t master_seed(const ScenarioScript& script) const {
    return seed ? *seed : script.noise.seed;
  }
};

/// Per-run seeds derived from the master seed, mirroring the repeated-runs
/// protocol.
inline std::uint64_t run_seed(std::uint64_t master, int run_index) {
  return derive_seed(master, "run/" + std::to_string(run_index));
}

}  // namespace ambulo
