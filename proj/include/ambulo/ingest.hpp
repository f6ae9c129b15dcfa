#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ambulo/topic_bus.hpp"
#include "ambulo/track.hpp"
#include "ambulo/transform_tree.hpp"

namespace ambulo {

/// Detection stream line: one JSON object per detection.
inline std::string detection_to_jsonl(const Detection& det) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"sensor\":\"%s\",\"local_id\":%d,\"stamp\":%.6f,\"x\":%.6f,\"y\":%.6f,\"z\":%.6f}",
                det.sensor.c_str(), det.local_id, det.stamp, det.position.x(), det.position.y(),
                det.position.z());
  return buf;
}

inline Detection detection_from_json(const nlohmann::json& j) {
  Detection det;
  det.sensor = j.at("sensor").get<std::string>();
  det.local_id = j.at("local_id").get<int>();
  det.stamp = j.at("stamp").get<double>();
  det.position = Vec3(j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>());
  if (det.stamp < 0.0) throw std::runtime_error("negative stamp");
  return det;
}

inline void write_detection_stream(const std::string& path, const std::vector<Detection>& dets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write detection stream: " + path);
  for (const Detection& det : dets) out << detection_to_jsonl(det) << '\n';
}

struct StreamReadResult {
  std::vector<Detection> detections;
  std::uint64_t malformed = 0;
};

/// Reads a .jsonl detection stream. Malformed lines are skipped and counted
/// unless strict, in which case they abort.
inline StreamReadResult read_detection_stream(const std::string& path, bool strict = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open detection stream: " + path);
  StreamReadResult result;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      result.detections.push_back(detection_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      if (strict)
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad detection: " +
                                 e.what());
      ++result.malformed;
    }
  }
  return result;
}

/// Projects detections into the apartment frame by inserting the per-user
/// dynamic edge and looking up the composed sensor-chain transform, then
/// publishes the result. Detections whose lookup fails are dropped and
/// counted.
class Projector {
 public:
  Projector(TransformTree& tree, Topic<TrackSample>& out, std::string apartment_frame = "apartment")
      : tree_(tree), out_(out), apartment_frame_(std::move(apartment_frame)) {}

  void on_detection(const Detection& det) {
    const std::string user_frame = det.key().str();
    try {
      tree_.insert({det.sensor, user_frame, det.stamp,
                    RigidTransform(det.position, Quat::Identity())});
      const RigidTransform to_apartment = tree_.lookup(apartment_frame_, user_frame, det.stamp);
      out_.publish({det.key(), det.stamp, transform_point(to_apartment, Vec3::Zero())});
    } catch (const TfError&) {
      ++dropped_;
    }
  }

  std::uint64_t dropped() const { return dropped_; }

 private:
  TransformTree& tree_;
  Topic<TrackSample>& out_;
  std::string apartment_frame_;
  std::uint64_t dropped_ = 0;
};

/// Splits per-person sample runs at gaps larger than gap_threshold.
/// Singleton sequences are allowed. Input must be stamp-ordered per person;
/// duplicate stamps are dropped and counted.
struct SegmentResult {
  std::vector<TrackSequence> sequences;
  std::uint64_t duplicate_stamps = 0;
};

inline SegmentResult segment(const std::vector<TrackSample>& samples, double gap_threshold) {
  SegmentResult result;
  std::map<PersonKey, std::vector<std::pair<double, Vec3>>> open;
  auto close = [&](const PersonKey& key, std::vector<std::pair<double, Vec3>>& run) {
    if (!run.empty()) {
      result.sequences.push_back({key, std::move(run)});
      run.clear();
    }
  };
  for (const TrackSample& s : samples) {
    auto& run = open[s.person];
    if (!run.empty()) {
      const double gap = s.stamp - run.back().first;
      if (gap < 0.0)
        throw std::runtime_error("segment: non-monotonic stamps for " + s.person.str());
      if (gap == 0.0) {
        ++result.duplicate_stamps;
        continue;
      }
      if (gap > gap_threshold) close(s.person, run);
    }
    open[s.person].emplace_back(s.stamp, s.position_apartment);
  }
  for (auto& [key, run] : open) close(key, run);
  std::sort(result.sequences.begin(), result.sequences.end(),
            [](const TrackSequence& a, const TrackSequence& b) {
              return a.t_start() < b.t_start() ||
                     (a.t_start() == b.t_start() && a.person < b.person);
            });
  return result;
}

/// Batch replay: publishes a stamp-sorted stream as fast as possible.
inline void replay(const std::vector<Detection>& stream, DetectionBus& bus) {
  for (const Detection& det : stream) bus.publish(det);
  bus.flush();
}

/// Timed replay: each detection is published when wall-clock time, scaled by
/// speed_factor, reaches its stamp. An infinite speed_factor degenerates to
/// batch replay.
inline void replay_realtime(const std::vector<Detection>& stream, DetectionBus& bus,
                            double speed_factor) {
  for (size_t i = 1; i < stream.size(); ++i)
    if (stream[i].stamp < stream[i - 1].stamp)
      throw std::runtime_error("replay_realtime: stream not sorted by stamp");
  if (std::isinf(speed_factor)) {
    replay(stream, bus);
    return;
  }
  if (speed_factor <= 0.0) throw std::invalid_argument("replay_realtime: speed_factor must be > 0");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const double first_stamp = stream.empty() ? 0.0 : stream.front().stamp;
  for (const Detection& det : stream) {
    const auto due = start + std::chrono::duration_cast<clock::duration>(
                                 std::chrono::duration<double>((det.stamp - first_stamp) /
                                                               speed_factor));
    std::this_thread::sleep_until(due);
    bus.publish(det);
  }
  bus.flush();
}

}  // namespace ambulo
