#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambulo/ambulatogram.hpp"

namespace ambulo {

/// Duration-weighted confusion entries for one zone, in seconds.
struct ZoneConfusion {
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;
};

/// Duration-based sensitivity/specificity of measured zone occupancy against
/// the reference, over covered zones only. Ratios with an empty denominator
/// are reported as absent, never coerced to 0 or 1.
struct EvalReport {
  std::string label;  // "raw" or "filtered"
  std::vector<std::string> zones;
  std::vector<ZoneConfusion> per_zone;
  ZoneConfusion total;

  std::optional<double> sensitivity() const {
    const double denom = total.tp + total.fn;
    if (denom <= 0.0) return std::nullopt;
    return total.tp / denom;
  }
  std::optional<double> specificity() const {
    const double denom = total.tn + total.fp;
    if (denom <= 0.0) return std::nullopt;
    return total.tn / denom;
  }
};

/// Occupancy is binary per zone and bin: anybody there or nobody. The
/// confusion durations accumulate actual bin durations, so a partial final
/// bin carries its true weight.
inline EvalReport evaluate(const Ambulatogram& measured, const Ambulatogram& reference,
                           const std::vector<std::string>& covered_zones,
                           const std::string& label = "") {
  if (!measured.same_grid(reference))
    throw std::invalid_argument("evaluate: measured and reference must share span and bins");
  if (covered_zones.empty()) throw std::invalid_argument("evaluate: no covered zones");
  EvalReport report;
  report.label = label;
  for (const std::string& zone : covered_zones) {
    const int zi = measured.zone_index(zone);
    if (zi < 0) throw std::invalid_argument("evaluate: unknown zone " + zone);
    ZoneConfusion zc;
    for (size_t b = 0; b < measured.n_bins(); ++b) {
      const bool om = measured.count(static_cast<size_t>(zi), b) > 0;
      const bool orf = reference.count(static_cast<size_t>(zi), b) > 0;
      const double w = measured.bin_duration(b);
      if (om && orf) zc.tp += w;
      else if (om && !orf) zc.fp += w;
      else if (!om && orf) zc.fn += w;
      else zc.tn += w;
    }
    report.zones.push_back(zone);
    report.per_zone.push_back(zc);
    report.total.tp += zc.tp;
    report.total.fp += zc.fp;
    report.total.tn += zc.tn;
    report.total.fn += zc.fn;
  }
  return report;
}

enum class BinLabel { tp, fp, tn, fn };

/// Per-bin classification for one covered zone, enabling false-positive /
/// false-negative callouts on the timeline figures.
inline std::vector<BinLabel> confusion_timeline(const Ambulatogram& measured,
                                                const Ambulatogram& reference,
                                                const std::string& zone) {
  if (!measured.same_grid(reference))
    throw std::invalid_argument("confusion_timeline: grids differ");
  const int zi = measured.zone_index(zone);
  if (zi < 0) throw std::invalid_argument("confusion_timeline: unknown zone " + zone);
  if (!measured.zone_covered(static_cast<size_t>(zi)))
    throw std::invalid_argument("confusion_timeline: zone " + zone +
                                " is uncovered (reference-only)");
  std::vector<BinLabel> labels;
  labels.reserve(measured.n_bins());
  for (size_t b = 0; b < measured.n_bins(); ++b) {
    const bool om = measured.count(static_cast<size_t>(zi), b) > 0;
    const bool orf = reference.count(static_cast<size_t>(zi), b) > 0;
    labels.push_back(om ? (orf ? BinLabel::tp : BinLabel::fp)
                        : (orf ? BinLabel::fn : BinLabel::tn));
  }
  return labels;
}

/// Integer percent, rounded half-up, or "n/a" when undefined.
inline std::string percent_cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  return std::to_string(static_cast<int>(std::floor(*v * 100.0 + 0.5))) + "%";
}

/// Two-row report: raw and filtered x sensitivity and specificity.
inline std::string report_table(const EvalReport& raw, const EvalReport& filtered) {
  char buf[160];
  std::string out = "              Sensitivity  Specificity\n";
  std::snprintf(buf, sizeof(buf), "%-14s %10s %12s\n", "Raw data",
                percent_cell(raw.sensitivity()).c_str(), percent_cell(raw.specificity()).c_str());
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-14s %10s %12s\n", "Filtered data",
                percent_cell(filtered.sensitivity()).c_str(),
                percent_cell(filtered.specificity()).c_str());
  out += buf;
  return out;
}

inline std::string eval_to_csv(const std::vector<EvalReport>& reports) {
  std::string csv = "label,zone,tp_s,fp_s,tn_s,fn_s,sensitivity,specificity\n";
  char buf[256];
  auto ratio_cell = [](std::optional<double> v) {
    if (!v) return std::string("n/a");
    char b[32];
    std::snprintf(b, sizeof(b), "%.6g", *v);
    return std::string(b);
  };
  for (const EvalReport& r : reports) {
    for (size_t i = 0; i < r.zones.size(); ++i) {
      const ZoneConfusion& zc = r.per_zone[i];
      const double sd = zc.tp + zc.fn, pd = zc.tn + zc.fp;
      std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g,%.6g,%s,%s\n", r.label.c_str(),
                    r.zones[i].c_str(), zc.tp, zc.fp, zc.tn, zc.fn,
                    ratio_cell(sd > 0 ? std::optional<double>(zc.tp / sd) : std::nullopt).c_str(),
                    ratio_cell(pd > 0 ? std::optional<double>(zc.tn / pd) : std::nullopt).c_str());
      csv += buf;
    }
    std::snprintf(buf, sizeof(buf), "%s,ALL,%.6g,%.6g,%.6g,%.6g,%s,%s\n", r.label.c_str(),
                  r.total.tp, r.total.fp, r.total.tn, r.total.fn,
                  ratio_cell(r.sensitivity()).c_str(), ratio_cell(r.specificity()).c_str());
    csv += buf;
  }
  return csv;
}

}  // namespace ambulo
