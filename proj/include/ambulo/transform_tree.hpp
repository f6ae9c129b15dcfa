#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ambulo/geometry.hpp"

namespace ambulo {

struct StampedTransform {
  std::string parent;
  std::string child;
  double stamp = 0.0;  // seconds on the scenario clock
  RigidTransform xform;
};

class TfError : public std::runtime_error {
 public:
  enum class Kind { unknown_frame, disconnected, extrapolation, ambiguous_sample, bad_insert };

  TfError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Interpolates between two samples of the same edge at time t.
/// Translation is linear, rotation shortest-arc spherical.
inline RigidTransform interpolate(const StampedTransform& t0, const StampedTransform& t1,
                                  double t) {
  if (t0.parent != t1.parent || t0.child != t1.child)
    throw TfError(TfError::Kind::bad_insert, "interpolate: samples from different edges");
  if (t0.stamp == t1.stamp) {
    if (approx_equal(t0.xform, t1.xform, 1e-12)) return t0.xform;
    throw TfError(TfError::Kind::ambiguous_sample,
                  "interpolate: coincident stamps with differing transforms");
  }
  if (t < std::min(t0.stamp, t1.stamp) || t > std::max(t0.stamp, t1.stamp))
    throw TfError(TfError::Kind::extrapolation, "interpolate: t outside sample range");
  const double alpha = (t - t0.stamp) / (t1.stamp - t0.stamp);
  return blend(t0.xform, t1.xform, alpha);
}

/// A forest of timestamped rigid transforms between named frames.
///
/// Each child frame has at most one parent and edges are cycle-free, so any
/// reachable (target, source) pair has a unique path. Lookups compose
/// per-edge interpolated transforms along that path, inverting edges
/// traversed child-to-parent. Static edges hold one sample valid at all
/// times; dynamic edges are valid within their sample span plus a clamp
/// margin at each end.
///
/// Insertions and lookups may come from different threads; operations behave
/// as if applied in a single total order.
class TransformTree {
 public:
  struct Options {
    double extrapolation_margin = 0.5;   // seconds of clamp beyond buffer ends
    std::optional<double> retention;     // ring-buffer span; unset = unbounded
  };

  TransformTree() = default;
  explicit TransformTree(Options opts) : opts_(opts) {}

  /// Registers a static edge (single sample, valid for all time).
  /// Re-setting replaces the previous transform.
  void set_static(const std::string& parent, const std::string& child,
                  const RigidTransform& xform) {
    std::lock_guard lock(mutex_);
    Edge& edge = edge_for_insert(parent, child, /*is_static=*/true);
    edge.samples.assign(1, StampedTransform{parent, child, 0.0, xform});
  }

  /// Appends a sample to a dynamic edge. Stamps must be strictly increasing
  /// per edge.
  void insert(const StampedTransform& sample) {
    std::lock_guard lock(mutex_);
    Edge& edge = edge_for_insert(sample.parent, sample.child, /*is_static=*/false);
    if (!edge.samples.empty() && sample.stamp <= edge.samples.back().stamp)
      throw TfError(TfError::Kind::bad_insert,
                    "insert: non-increasing stamp on edge " + sample.parent + "->" + sample.child);
    edge.samples.push_back(sample);
    if (opts_.retention) {
      const double cutoff = sample.stamp - *opts_.retention;
      auto first = std::find_if(edge.samples.begin(), edge.samples.end(),
                                [&](const StampedTransform& s) { return s.stamp >= cutoff; });
      edge.samples.erase(edge.samples.begin(), first);
    }
  }

  bool has_frame(const std::string& frame) const {
    std::lock_guard lock(mutex_);
    return frames_.count(frame) > 0;
  }

  /// Transform mapping source-frame coordinates into the target frame at t.
  RigidTransform lookup(const std::string& target, const std::string& source, double t) const {
    std::lock_guard lock(mutex_);
    if (target == source) return RigidTransform::identity();
    if (!frames_.count(target)) throw TfError(TfError::Kind::unknown_frame, "unknown frame " + target);
    if (!frames_.count(source)) throw TfError(TfError::Kind::unknown_frame, "unknown frame " + source);

    const std::vector<std::string> up_target = ancestry(target);
    const std::vector<std::string> up_source = ancestry(source);
    if (up_target.back() != up_source.back())
      throw TfError(TfError::Kind::disconnected, "frames " + target + " and " + source +
                                                     " are not connected");

    // Lowest common ancestor: strip the shared root-side tail.
    size_t it = up_target.size(), is = up_source.size();
    while (it > 1 && is > 1 && up_target[it - 2] == up_source[is - 2]) {
      --it;
      --is;
    }
    // up_target[it-1] == up_source[is-1] == LCA.

    // source -> LCA composes edges child-to-parent directly.
    RigidTransform source_to_lca;
    for (size_t i = 0; i + 1 < is; ++i)
      source_to_lca = compose(edge_at(up_source[i + 1], up_source[i], t), source_to_lca);
    // target -> LCA, then invert.
    RigidTransform target_to_lca;
    for (size_t i = 0; i + 1 < it; ++i)
      target_to_lca = compose(edge_at(up_target[i + 1], up_target[i], t), target_to_lca);

    return compose(target_to_lca.inverse(), source_to_lca);
  }

 private:
  struct Edge {
    bool is_static = false;
    std::vector<StampedTransform> samples;  // stamp-ordered
  };

  Edge& edge_for_insert(const std::string& parent, const std::string& child, bool is_static) {
    if (parent == child)
      throw TfError(TfError::Kind::bad_insert, "edge with parent == child: " + parent);
    auto parent_it = parent_of_.find(child);
    if (parent_it != parent_of_.end() && parent_it->second != parent)
      throw TfError(TfError::Kind::bad_insert,
                    "frame " + child + " already has parent " + parent_it->second);
    // Adding parent->child creates a cycle iff child is an ancestor of parent.
    for (std::string frame = parent;;) {
      auto up = parent_of_.find(frame);
      if (up == parent_of_.end()) break;
      if (up->second == child)
        throw TfError(TfError::Kind::bad_insert, "edge " + parent + "->" + child + " closes a cycle");
      frame = up->second;
    }
    parent_of_[child] = parent;
    frames_.insert({parent, true});
    frames_.insert({child, true});
    Edge& edge = edges_[{parent, child}];
    if (!edge.samples.empty() && edge.is_static != is_static)
      throw TfError(TfError::Kind::bad_insert,
                    "edge " + parent + "->" + child + " changed static/dynamic kind");
    edge.is_static = is_static;
    return edge;
  }

  std::vector<std::string> ancestry(const std::string& frame) const {
    std::vector<std::string> chain{frame};
    for (std::string f = frame;;) {
      auto it = parent_of_.find(f);
      if (it == parent_of_.end()) break;
      chain.push_back(it->second);
      f = it->second;
    }
    return chain;
  }

  /// Value of edge parent->child at time t (interpolated, clamped, or thrown).
  RigidTransform edge_at(const std::string& parent, const std::string& child, double t) const {
    const Edge& edge = edges_.at({parent, child});
    if (edge.is_static) return edge.samples.front().xform;
    const auto& samples = edge.samples;
    if (samples.empty())
      throw TfError(TfError::Kind::extrapolation, "edge " + parent + "->" + child + " has no samples");
    const double eps = opts_.extrapolation_margin;
    if (t < samples.front().stamp) {
      if (t < samples.front().stamp - eps)
        throw TfError(TfError::Kind::extrapolation,
                      "lookup before first sample of " + parent + "->" + child);
      return samples.front().xform;  // clamp
    }
    if (t > samples.back().stamp) {
      if (t > samples.back().stamp + eps)
        throw TfError(TfError::Kind::extrapolation,
                      "lookup after last sample of " + parent + "->" + child);
      return samples.back().xform;  // clamp
    }
    auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const StampedTransform& s, double v) { return s.stamp < v; });
    if (hi->stamp == t) return hi->xform;  // stored sample, bit-exact
    return interpolate(*(hi - 1), *hi, t);
  }

  Options opts_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, Edge> edges_;
  std::map<std::string, std::string> parent_of_;
  std::map<std::string, bool> frames_;
};

}  // namespace ambulo
