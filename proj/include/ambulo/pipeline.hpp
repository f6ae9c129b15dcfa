#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ambulo/ambulatogram.hpp"
#include "ambulo/config.hpp"
#include "ambulo/filter.hpp"
#include "ambulo/ingest.hpp"
#include "ambulo/topic_bus.hpp"
#include "ambulo/track.hpp"
#include "ambulo/transform_tree.hpp"
#include "ambulo/zones.hpp"

namespace ambulo {

struct PipelineCounters {
  DetectionBus::Counters bus;
  std::uint64_t projection_drops = 0;
  std::uint64_t duplicate_stamps = 0;
  std::uint64_t malformed_lines = 0;
};

struct PipelineResult {
  std::vector<TrackSequence> sequences;
  std::vector<FilterVerdict> verdicts;
  Ambulatogram raw;       // built from all sequences, pre-filter
  Ambulatogram filtered;  // built from kept sequences only
  PipelineCounters counters;
};

/// Detections -> topic bus -> apartment-frame projection -> gap segmentation
/// -> artifact filter -> raw and filtered ambulatograms. The raw/filtered
/// pair is what the before/after timeline comparison is made of.
inline PipelineResult run_pipeline(const std::vector<Detection>& stream, const ZoneMap& map,
                                   const SensorSetup& setup, const RunConfig& cfg, double t0,
                                   double t1, double realtime_speed = 0.0) {
  TransformTree tree(realtime_speed > 0.0
                         ? TransformTree::Options{cfg.extrapolation_margin, cfg.streaming_retention}
                         : TransformTree::Options{cfg.extrapolation_margin, std::nullopt});
  install_static_transforms(tree, setup);

  Topic<Detection> detections("detections");
  Topic<TrackSample> tracks("tracks");
  DetectionBus bus(detections, cfg.reorder_window);
  Projector projector(tree, tracks, setup.apartment_frame);
  detections.subscribe([&](const Detection& det) { projector.on_detection(det); });
  std::vector<TrackSample> collected;
  tracks.subscribe([&](const TrackSample& s) { collected.push_back(s); });

  if (realtime_speed > 0.0)
    replay_realtime(stream, bus, realtime_speed);
  else
    replay(stream, bus);

  PipelineResult result;
  SegmentResult seg = segment(collected, cfg.gap_threshold);
  result.sequences = std::move(seg.sequences);
  result.verdicts = apply_filter(result.sequences, cfg.filter);

  std::vector<TrackSequence> kept = kept_sequences(result.sequences, result.verdicts);
  if (cfg.bridge) kept = bridge_gaps(std::move(kept), map, cfg.bridge_cfg);

  result.raw = build_ambulatogram(result.sequences, map, cfg.bin_width, t0, t1);
  result.filtered = build_ambulatogram(kept, map, cfg.bin_width, t0, t1);
  result.counters.bus = bus.counters();
  result.counters.projection_drops = projector.dropped();
  result.counters.duplicate_stamps = seg.duplicate_stamps;
  return result;
}

}  // namespace ambulo
