#include <doctest.h>

#include "ambulo/config.hpp"
#include "ambulo/filter.hpp"
#include "ambulo/pipeline.hpp"
#include "ambulo/simulator.hpp"

using namespace ambulo;

namespace {

ScenarioScript tiny_script(const std::string& zone, Posture posture = Posture::standing) {
  ScenarioScript s;
  s.compression = 60.0;
  s.persons = {"p"};
  Activity act;
  act.person = "p";
  act.zone = zone;
  act.start = 0.0;
  act.end = s.span();
  act.posture = posture;
  s.activities = {act};
  s.noise = NoiseModel{};
  s.noise.ghosts.clear();
  return s;
}

NoiseModel no_noise() {
  NoiseModel n;
  n.position_sigma = 0.0;
  n.swap_rate = 0.0;
  n.dropout_static = 0.0;
  n.dropout_lying = 0.0;
  n.fragmentation = 0.0;
  n.ghosts.clear();
  return n;
}

}  // namespace

TEST_CASE("day-clock parsing and the shrunk-day mapping") {
  CHECK(parse_daytime("00:00") == 0.0);
  CHECK(parse_daytime("18:00") == 18 * 3600.0);
  CHECK_THROWS(parse_daytime("24:01"));
  CHECK_THROWS(parse_daytime("25:00"));
  CHECK_THROWS(parse_daytime("12:60"));
  CHECK_THROWS(parse_daytime("noon"));
  // 18:00 at compression 60 lands at scenario second 1020.
  CHECK(daytime_to_scenario(parse_daytime("18:00"), 60.0) == 1020.0);
  CHECK(daytime_to_scenario(parse_daytime("01:00"), 60.0) == 0.0);
  // Times before 01:00 wrap to the end of the run.
  CHECK(daytime_to_scenario(parse_daytime("00:55"), 60.0) == 1435.0);
  // "24:00" is accepted as an end-of-day bound.
  CHECK(daytime_to_scenario(parse_daytime("24:00"), 60.0) == 1380.0);
}

TEST_CASE("script validation") {
  const ZoneMap map = default_zone_map();
  ScenarioScript s = tiny_script("bedroom");
  CHECK_NOTHROW(validate_script(s, map));

  ScenarioScript unknown_zone = s;
  unknown_zone.activities[0].zone = "garage";
  CHECK_THROWS(validate_script(unknown_zone, map));

  ScenarioScript overlapping = s;
  Activity second = s.activities[0];
  second.start = 100.0;
  second.end = 200.0;
  overlapping.activities[0].end = 150.0;
  overlapping.activities.push_back(second);
  CHECK_THROWS(validate_script(overlapping, map));

  ScenarioScript late_start = s;
  late_start.activities[0].start = 100.0;
  CHECK_THROWS(validate_script(late_start, map));

  ScenarioScript no_acts = s;
  no_acts.persons.push_back("stranger");
  CHECK_THROWS(validate_script(no_acts, map));

  ScenarioScript bad_anchor = s;
  bad_anchor.activities[0].at = Vec2(50.0, 50.0);
  CHECK_THROWS(validate_script(bad_anchor, map));

  ScenarioScript bad_move = s;
  bad_move.activities[0].moves.push_back(Vec2(-50.0, 0.0));
  CHECK_THROWS(validate_script(bad_move, map));
}

TEST_CASE("compile: a single sleep activity stays anchored in the bedroom") {
  const ZoneMap map = default_zone_map();
  const ScenarioScript s = tiny_script("bedroom", Posture::lying);
  const CompiledScenario truth = compile(s, map, 7);
  REQUIRE(truth.persons.size() == 1);
  REQUIRE(truth.reference.size() == 1);
  CHECK(truth.reference[0].zone == "bedroom");
  CHECK(truth.reference[0].t_start == 0.0);
  CHECK(truth.reference[0].t_end == s.span());
  const Polygon& bedroom = map.find("bedroom")->polygon;
  for (size_t k = 0; k < truth.n_frames(); k += 100) {
    const Vec3& p = truth.persons[0].position[k];
    CHECK(point_in_polygon(bedroom, Vec2(p.x(), p.y())));
    CHECK(truth.persons[0].is_static[k]);
    CHECK(truth.persons[0].posture[k] == Posture::lying);
  }
  // Lying height, modest sway.
  CHECK(truth.persons[0].position[500].z() == doctest::Approx(0.45).epsilon(0.2));
}

TEST_CASE("compile: default script produces the collaborative dinner window") {
  const ZoneMap map = default_zone_map();
  const ScenarioScript script = default_scenario();
  const CompiledScenario truth = compile(script, map, 11);
  const Ambulatogram ref = reference_ambulatogram(truth.reference, map, 5.0, 0.0, script.span());
  const int dining = ref.zone_index("dining-room");
  REQUIRE(dining >= 0);
  // Around 18:00 (scenario second 1020) two people share the dining room.
  CHECK(ref.count(static_cast<size_t>(dining), 204) == 2);
  const auto joint = copresence(ref, "dining-room", 30.0);
  REQUIRE(joint.size() == 1);
  CHECK(joint[0].t_start == doctest::Approx(990.0).epsilon(0.01));
  CHECK(joint[0].max_count == 2);
  // Uncovered activities exist in the reference: resident at the
  // supermarket around 09:20 plus the visitor who is out all morning.
  const int outside = ref.zone_index("outside");
  CHECK(ref.count(static_cast<size_t>(outside), 100) == 2);
}

TEST_CASE("compile: ground truth never exceeds a natural walking speed") {
  const ZoneMap map = default_zone_map();
  const ScenarioScript script = default_scenario();
  const CompiledScenario truth = compile(script, map, 3);
  const double dt = 1.0 / truth.rate_hz;
  for (const PersonTruth& person : truth.persons) {
    double top_speed = 0.0;
    for (size_t k = 1; k < person.position.size(); ++k) {
      const double v = (person.position[k].head<2>() - person.position[k - 1].head<2>()).norm() / dt;
      top_speed = std::max(top_speed, v);
    }
    CHECK(top_speed < 2.5);  // 1.2 m/s nominal plus sway
  }
}

TEST_CASE("sense: zero noise and zero sway give constant exact detections") {
  const ZoneMap map = default_zone_map();
  ScenarioScript s = tiny_script("kitchen");
  s.sway_sigma = 0.0;
  const CompiledScenario truth = compile(s, map, 5);
  const SensorSetup setup = default_sensors();
  const SenseResult r = sense(truth, setup.sensors, no_noise(), 5);
  REQUIRE(!r.detections.empty());
  CHECK(r.detections.size() == truth.n_frames());
  const RigidTransform pose = setup.sensors[0].pose;  // kitchen sensor
  const Vec3 anchor = truth.persons[0].position[0];
  for (size_t i = 0; i < r.detections.size(); i += 997) {
    CHECK(r.detections[i].sensor == "kinect1");
    CHECK(r.detections[i].local_id == 0);
    // Constant: every frame reports the identical sensor-frame position.
    CHECK(r.detections[i].position == r.detections[0].position);
    const Vec3 recovered = transform_point(pose, r.detections[i].position);
    CHECK((recovered - anchor).norm() < 1e-9);
  }
}

TEST_CASE("sense: detections only inside fields of view") {
  const ZoneMap map = default_zone_map();
  // living-room is uncovered: nothing may be emitted.
  const CompiledScenario truth = compile(tiny_script("living-room"), map, 6);
  const SensorSetup setup = default_sensors();
  const SenseResult r = sense(truth, setup.sensors, no_noise(), 6);
  CHECK(r.detections.empty());
}

TEST_CASE("sense: identical seeds give byte-identical streams") {
  const ZoneMap map = default_zone_map();
  const ScenarioScript script = default_scenario();
  const CompiledScenario truth = compile(script, map, 99);
  const SensorSetup setup = default_sensors();
  const SenseResult a = sense(truth, setup.sensors, script.noise, 99);
  const SenseResult b = sense(truth, setup.sensors, script.noise, 99);
  REQUIRE(a.detections.size() == b.detections.size());
  std::string ja, jb;
  for (size_t i = 0; i < a.detections.size(); ++i) {
    ja += detection_to_jsonl(a.detections[i]);
    jb += detection_to_jsonl(b.detections[i]);
  }
  CHECK(ja == jb);
  const SenseResult c = sense(truth, setup.sensors, script.noise, 100);
  bool all_same = a.detections.size() == c.detections.size();
  if (all_same)
    for (size_t i = 0; i < a.detections.size() && all_same; ++i)
      all_same = a.detections[i].position == c.detections[i].position;
  CHECK(!all_same);
}

TEST_CASE("sense: per-sensor capacity is never exceeded and excess is counted") {
  const ZoneMap map = default_zone_map();
  ScenarioScript s;
  s.persons.clear();
  for (int i = 0; i < 9; ++i) s.persons.push_back("p" + std::to_string(i));
  for (int i = 0; i < 9; ++i) {
    Activity act;
    act.person = "p" + std::to_string(i);
    act.zone = "kitchen";
    act.start = 0.0;
    act.end = 60.0;
    act.at = Vec2(0.6 + 0.25 * i, 6.0);
    s.activities.push_back(act);
  }
  s.compression = 1440.0;  // 60 s span
  const CompiledScenario truth = compile(s, map, 1);
  const SensorSetup setup = default_sensors();
  const SenseResult r = sense(truth, setup.sensors, no_noise(), 1);
  CHECK(r.counters.truncated_capacity > 0);
  std::map<double, std::set<int>> ids_at;
  for (const Detection& det : r.detections) {
    CHECK(det.sensor == "kinect1");
    ids_at[det.stamp].insert(det.local_id);
  }
  for (const auto& [stamp, ids] : ids_at) CHECK(ids.size() <= 6);
}

TEST_CASE("sense: a ghost spawn becomes a static-perimeter artifact") {
  const ZoneMap map = default_zone_map();
  ScenarioScript s = tiny_script("office");  // person far from the kitchen ghost
  NoiseModel noise = no_noise();
  noise.position_sigma = 0.05;
  GhostSpawn ghost;
  ghost.position = Vec2(0.45, 7.55);
  ghost.start = daytime_to_scenario(parse_daytime("13:00"), 60.0);
  ghost.end = daytime_to_scenario(parse_daytime("23:59"), 60.0);
  noise.ghosts = {ghost};
  s.noise = noise;
  const CompiledScenario truth = compile(s, map, 12);
  const SensorSetup setup = default_sensors();
  const SenseResult r = sense(truth, setup.sensors, noise, 12);

  // Run the tail of the pipeline on the kitchen sensor's stream.
  TransformTree tree;
  install_static_transforms(tree, setup);
  Topic<TrackSample> tracks("tracks");
  std::vector<TrackSample> collected;
  tracks.subscribe([&](const TrackSample& t) { collected.push_back(t); });
  Projector projector(tree, tracks);
  for (const Detection& det : r.detections)
    if (det.sensor == "kinect1") projector.on_detection(det);
  const SegmentResult seg = segment(collected, 2.0);
  REQUIRE(seg.sequences.size() == 1);
  const auto verdicts = apply_filter(seg.sequences, {});
  CHECK(!verdicts[0].kept);
  CHECK(verdicts[0].reason == RemovalReason::static_perimeter);
  CHECK(verdicts[0].hull_perimeter < 1.0);
}

TEST_CASE("sense: a forced swap between close persons trips the acceleration filter") {
  const ZoneMap map = default_zone_map();
  ScenarioScript s;
  s.persons = {"a", "b"};
  for (int i = 0; i < 2; ++i) {
    Activity act;
    act.person = s.persons[i];
    act.zone = "dining-room";
    act.start = 0.0;
    act.end = 120.0;
    act.posture = Posture::sitting;
    act.at = Vec2(5.0, 6.3 + 0.4 * i);  // 0.4 m apart
    s.activities.push_back(act);
  }
  s.compression = 720.0;  // 120 s span
  NoiseModel noise = no_noise();
  noise.swap_rate = 0.01;
  noise.swap_distance = 0.5;
  s.noise = noise;
  const CompiledScenario truth = compile(s, map, 21);
  const SensorSetup setup = default_sensors();
  const SenseResult r = sense(truth, setup.sensors, noise, 21);
  REQUIRE(r.counters.swaps > 0);

  TransformTree tree;
  install_static_transforms(tree, setup);
  Topic<TrackSample> tracks("tracks");
  std::vector<TrackSample> collected;
  tracks.subscribe([&](const TrackSample& t) { collected.push_back(t); });
  Projector projector(tree, tracks);
  for (const Detection& det : r.detections) projector.on_detection(det);
  const SegmentResult seg = segment(collected, 2.0);
  const auto verdicts = apply_filter(seg.sequences, {});
  bool accel_removed = false;
  double top = 0.0;
  for (const FilterVerdict& v : verdicts) {
    top = std::max(top, v.max_accel);
    if (!v.kept && v.reason == RemovalReason::high_acceleration) accel_removed = true;
  }
  CHECK(top > 50.0);
  CHECK(accel_removed);
}

TEST_CASE("default configs parse and cross-validate") {
  const ZoneMap map = default_zone_map();
  CHECK(map.validate().empty());
  const ScenarioScript script = default_scenario();
  CHECK_NOTHROW(validate_script(script, map));
  const SensorSetup setup = default_sensors();
  CHECK(setup.sensors.size() == 3);
  // Sensor fields of view cover exactly the covered zones.
  for (const Zone& zone : map.zones()) {
    const Vec2 c = polygon_centroid(zone.polygon);
    bool seen = false;
    for (const SensorConfig& sensor : setup.sensors) seen = seen || sensor.sees(c);
    CHECK(seen == zone.covered);
  }
  // Ghost positions sit inside covered zones.
  for (const GhostSpawn& g : script.noise.ghosts) {
    const auto zone = map.classify(g.position);
    REQUIRE(zone.has_value());
    CHECK(map.find(*zone)->covered);
  }
}
