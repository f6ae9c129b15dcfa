#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ambulo/track.hpp"

namespace ambulo {

/// Named channel decoupling producers from consumers. Messages are retained
/// so late subscribers can replay the backlog; the origin of the data does
/// not matter to readers.
template <typename Message>
class Topic {
 public:
  explicit Topic(std::string name, size_t retain_capacity = SIZE_MAX)
      : name_(std::move(name)), retain_capacity_(retain_capacity) {}

  const std::string& name() const { return name_; }

  void publish(const Message& msg) {
    std::vector<std::function<void(const Message&)>> subs;
    {
      std::lock_guard lock(mutex_);
      retained_.push_back(msg);
      if (retained_.size() > retain_capacity_) retained_.erase(retained_.begin());
      subs = subscribers_;
    }
    for (auto& fn : subs) fn(msg);
  }

  /// Registers a consumer; with replay=true the retained backlog is
  /// delivered first, in publication order.
  void subscribe(std::function<void(const Message&)> fn, bool replay = true) {
    std::vector<Message> backlog;
    {
      std::lock_guard lock(mutex_);
      if (replay) backlog = retained_;
      subscribers_.push_back(fn);
    }
    for (const Message& msg : backlog) fn(msg);
  }

  std::vector<Message> snapshot() const {
    std::lock_guard lock(mutex_);
    return retained_;
  }

 private:
  std::string name_;
  size_t retain_capacity_;
  mutable std::mutex mutex_;
  std::vector<Message> retained_;
  std::vector<std::function<void(const Message&)>> subscribers_;
};

enum class PublishStatus { accepted, rejected_capacity, dropped_late };

/// Detection channel with stamp ordering and per-sensor capacity limits.
///
/// Messages may arrive up to reorder_window seconds late and are re-sorted
/// in a bounded buffer before delivery; anything later is dropped and
/// counted. A sensor reports at most max_tracks distinct local ids per
/// stamp; excess publications are rejected with a capacity error.
class DetectionBus {
 public:
  struct Counters {
    std::uint64_t published = 0;
    std::uint64_t rejected_capacity = 0;
    std::uint64_t dropped_late = 0;
  };

  explicit DetectionBus(Topic<Detection>& out, double reorder_window = 0.2, int max_tracks = 6)
      : out_(out), reorder_window_(reorder_window), max_tracks_(max_tracks) {}

  PublishStatus publish(const Detection& det) {
    std::lock_guard lock(mutex_);
    if (det.stamp < emitted_up_to_) {
      ++counters_.dropped_late;
      return PublishStatus::dropped_late;
    }
    auto& ids_at_stamp = active_[det.sensor][det.stamp];
    if (!ids_at_stamp.count(det.local_id) &&
        ids_at_stamp.size() >= static_cast<size_t>(max_tracks_)) {
      ++counters_.rejected_capacity;
      return PublishStatus::rejected_capacity;
    }
    ids_at_stamp.insert(det.local_id);
    pending_.push({det, seq_++});
    max_stamp_ = std::max(max_stamp_, det.stamp);
    drain(max_stamp_ - reorder_window_);
    prune(max_stamp_ - 2.0 * reorder_window_);
    ++counters_.published;
    return PublishStatus::accepted;
  }

  /// Delivers everything still held back; call at end of stream.
  void flush() {
    std::lock_guard lock(mutex_);
    drain(std::numeric_limits<double>::infinity());
  }

  Counters counters() const {
    std::lock_guard lock(mutex_);
    return counters_;
  }

 private:
  struct Pending {
    Detection det;
    std::uint64_t seq;
    // Min-heap by stamp; ties resolved by sensor, id, then arrival order so
    // delivery is deterministic.
    bool operator>(const Pending& other) const {
      return std::tie(det.stamp, det.sensor, det.local_id, seq) >
             std::tie(other.det.stamp, other.det.sensor, other.det.local_id, other.seq);
    }
  };

  void drain(double watermark) {
    while (!pending_.empty() && pending_.top().det.stamp <= watermark) {
      emitted_up_to_ = pending_.top().det.stamp;
      out_.publish(pending_.top().det);
      pending_.pop();
    }
  }

  void prune(double cutoff) {
    for (auto& [sensor, by_stamp] : active_)
      by_stamp.erase(by_stamp.begin(), by_stamp.lower_bound(cutoff));
  }

  Topic<Detection>& out_;
  double reorder_window_;
  int max_tracks_;
  mutable std::mutex mutex_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> pending_;
  std::map<std::string, std::map<double, std::set<int>>> active_;
  double max_stamp_ = -std::numeric_limits<double>::infinity();
  double emitted_up_to_ = -std::numeric_limits<double>::infinity();
  std::uint64_t seq_ = 0;
  Counters counters_;
};

}  // namespace ambulo
