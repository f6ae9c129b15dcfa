#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambulo/track.hpp"
#include "ambulo/zones.hpp"

namespace ambulo {

/// Ground-truth stay: one person in one zone over [t_start, t_end).
struct PresenceInterval {
  std::string person;
  std::string zone;
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Per-zone step function of distinct-people count over time bins.
class Ambulatogram {
 public:
  Ambulatogram() = default;

  Ambulatogram(std::vector<std::string> zone_names, std::vector<bool> covered, double bin_width,
               double t0, double t1)
      : zone_names_(std::move(zone_names)),
        covered_(std::move(covered)),
        bin_width_(bin_width),
        t0_(t0),
        t1_(t1) {
    if (bin_width_ <= 0.0) throw std::invalid_argument("bin_width must be > 0");
    if (t1_ <= t0_) throw std::invalid_argument("empty time span");
    const size_t bins = static_cast<size_t>(std::ceil((t1_ - t0_) / bin_width_));
    counts_.assign(zone_names_.size(), std::vector<int>(bins, 0));
  }

  size_t n_zones() const { return zone_names_.size(); }
  size_t n_bins() const { return counts_.empty() ? 0 : counts_.front().size(); }
  double bin_width() const { return bin_width_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  const std::vector<std::string>& zone_names() const { return zone_names_; }
  bool zone_covered(size_t i) const { return covered_.at(i); }

  int zone_index(const std::string& zone) const {
    for (size_t i = 0; i < zone_names_.size(); ++i)
      if (zone_names_[i] == zone) return static_cast<int>(i);
    return -1;
  }

  const std::vector<int>& zone_counts(size_t zone) const { return counts_.at(zone); }
  int count(size_t zone, size_t bin) const { return counts_.at(zone).at(bin); }
  void set_count(size_t zone, size_t bin, int value) { counts_.at(zone).at(bin) = value; }
  void bump(size_t zone, size_t bin) { ++counts_.at(zone).at(bin); }

  /// Duration actually covered by a bin; the final bin may be partial.
  double bin_duration(size_t bin) const {
    return std::min(bin_width_, t1_ - (t0_ + static_cast<double>(bin) * bin_width_));
  }

  bool same_grid(const Ambulatogram& other) const {
    return bin_width_ == other.bin_width_ && t0_ == other.t0_ && n_bins() == other.n_bins() &&
           zone_names_ == other.zone_names_;
  }

  void set_coverage(const ZoneMap& map) {
    for (size_t i = 0; i < zone_names_.size(); ++i) {
      const Zone* z = map.find(zone_names_[i]);
      covered_[i] = z != nullptr && z->covered;
    }
  }

 private:
  std::vector<std::string> zone_names_;
  std::vector<bool> covered_;
  double bin_width_ = 0.0;
  double t0_ = 0.0;
  double t1_ = 0.0;
  std::vector<std::vector<int>> counts_;  // [zone][bin]
};

namespace detail {
inline int bin_of(const Ambulatogram& amb, double t) {
  if (t < amb.t0() || t >= amb.t1()) return -1;
  const int bin = static_cast<int>(std::floor((t - amb.t0()) / amb.bin_width()));
  return std::min<int>(bin, static_cast<int>(amb.n_bins()) - 1);
}
}  // namespace detail

/// Builds the measured people-count timeline. In each bin a person counts in
/// exactly one zone: the zone of the majority of their classified samples,
/// ties resolved toward the earlier zone in map order.
inline Ambulatogram build_ambulatogram(const std::vector<TrackSequence>& seqs, const ZoneMap& map,
                                       double bin_width, double t0, double t1) {
  std::vector<bool> covered;
  for (const Zone& z : map.zones()) covered.push_back(z.covered);
  Ambulatogram amb(map.zone_names(), covered, bin_width, t0, t1);

  // (person, bin) -> samples per zone
  std::map<std::pair<PersonKey, int>, std::map<size_t, int>> votes;
  for (const TrackSequence& seq : seqs) {
    for (const auto& [stamp, pos] : seq.samples) {
      const int bin = detail::bin_of(amb, stamp);
      if (bin < 0) continue;
      const auto zone = map.classify(Vec2(pos.x(), pos.y()));
      if (!zone) continue;
      const int zi = amb.zone_index(*zone);
      if (zi >= 0) ++votes[{seq.person, bin}][static_cast<size_t>(zi)];
    }
  }
  for (const auto& [key, per_zone] : votes) {
    size_t winner = 0;
    int best = -1;
    for (const auto& [zone, n] : per_zone) {
      if (n > best) {  // map iteration is zone-index-ordered, so ties keep the earlier zone
        best = n;
        winner = zone;
      }
    }
    amb.bump(winner, static_cast<size_t>(key.second));
  }
  return amb;
}

struct CopresenceInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  int max_count = 0;
};

/// Maximal runs of bins with at least two distinct people, lasting at least
/// min_duration.
inline std::vector<CopresenceInterval> copresence(const Ambulatogram& amb, const std::string& zone,
                                                  double min_duration) {
  const int zi = amb.zone_index(zone);
  if (zi < 0) throw std::invalid_argument("copresence: unknown zone " + zone);
  const auto& counts = amb.zone_counts(static_cast<size_t>(zi));
  std::vector<CopresenceInterval> intervals;
  size_t run_start = 0;
  int peak = 0;
  bool in_run = false;
  auto close_run = [&](size_t end_bin) {
    const double t_start = amb.t0() + static_cast<double>(run_start) * amb.bin_width();
    const double t_end = amb.t0() + static_cast<double>(end_bin) * amb.bin_width();
    if (t_end - t_start >= min_duration) intervals.push_back({t_start, t_end, peak});
  };
  for (size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] >= 2) {
      if (!in_run) {
        in_run = true;
        run_start = b;
        peak = 0;
      }
      peak = std::max(peak, counts[b]);
    } else if (in_run) {
      in_run = false;
      close_run(b);
    }
  }
  if (in_run) close_run(counts.size());
  return intervals;
}

/// Ground-truth timeline from scenario intervals, uncovered zones included.
inline Ambulatogram reference_ambulatogram(const std::vector<PresenceInterval>& intervals,
                                           const ZoneMap& map, double bin_width, double t0,
                                           double t1) {
  std::map<std::string, std::vector<const PresenceInterval*>> per_person;
  for (const PresenceInterval& iv : intervals) {
    if (iv.t_start >= iv.t_end)
      throw std::invalid_argument("presence interval with t_start >= t_end for " + iv.person);
    per_person[iv.person].push_back(&iv);
  }
  for (auto& [person, ivs] : per_person) {
    std::sort(ivs.begin(), ivs.end(), [](const PresenceInterval* a, const PresenceInterval* b) {
      return a->t_start < b->t_start;
    });
    for (size_t i = 1; i < ivs.size(); ++i)
      if (ivs[i]->t_start < ivs[i - 1]->t_end)
        throw std::invalid_argument("overlapping presence intervals for " + person);
  }

  std::vector<bool> covered;
  for (const Zone& z : map.zones()) covered.push_back(z.covered);
  Ambulatogram amb(map.zone_names(), covered, bin_width, t0, t1);
  const size_t bins = amb.n_bins();
  // distinct persons per (zone, bin)
  std::vector<std::vector<std::set<std::string>>> present(
      amb.n_zones(), std::vector<std::set<std::string>>(bins));
  for (const PresenceInterval& iv : intervals) {
    const int zi = amb.zone_index(iv.zone);
    if (zi < 0) throw std::invalid_argument("presence interval in unknown zone " + iv.zone);
    const double lo = std::max(iv.t_start, t0);
    const double hi = std::min(iv.t_end, t1);
    if (hi <= lo) continue;
    const auto first = static_cast<size_t>(std::floor((lo - t0) / bin_width));
    for (size_t b = first; b < bins; ++b) {
      const double bin_start = t0 + static_cast<double>(b) * bin_width;
      if (bin_start >= hi) break;
      present[static_cast<size_t>(zi)][b].insert(iv.person);
    }
  }
  for (size_t z = 0; z < amb.n_zones(); ++z)
    for (size_t b = 0; b < bins; ++b)
      amb.set_count(z, b, static_cast<int>(present[z][b].size()));
  return amb;
}

/// CSV: header zone,bin_start_s,count; one row per zone per bin; LF endings.
inline std::string ambulatogram_to_csv(const Ambulatogram& amb) {
  std::string csv = "zone,bin_start_s,count\n";
  char buf[128];
  for (size_t z = 0; z < amb.n_zones(); ++z) {
    for (size_t b = 0; b < amb.n_bins(); ++b) {
      std::snprintf(buf, sizeof(buf), "%s,%.6g,%d\n", amb.zone_names()[z].c_str(),
                    amb.t0() + static_cast<double>(b) * amb.bin_width(), amb.count(z, b));
      csv += buf;
    }
  }
  return csv;
}

inline Ambulatogram ambulatogram_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("zone,bin_start_s,count", 0) != 0)
    throw std::runtime_error("ambulatogram CSV: bad header");
  std::vector<std::string> zone_order;
  std::map<std::string, std::vector<std::pair<double, int>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("ambulatogram CSV: bad row: " + line);
    const std::string zone = line.substr(0, c1);
    const double bin_start = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const int count = std::stoi(line.substr(c2 + 1));
    if (!rows.count(zone)) zone_order.push_back(zone);
    rows[zone].emplace_back(bin_start, count);
  }
  if (zone_order.empty()) throw std::runtime_error("ambulatogram CSV: no rows");
  const auto& first = rows[zone_order.front()];
  const double t0 = first.front().first;
  const double w = first.size() > 1 ? first[1].first - t0 : 1.0;
  const double t1 = t0 + w * static_cast<double>(first.size());
  Ambulatogram amb(zone_order, std::vector<bool>(zone_order.size(), true), w, t0, t1);
  for (size_t z = 0; z < zone_order.size(); ++z) {
    const auto& r = rows[zone_order[z]];
    if (r.size() != amb.n_bins()) throw std::runtime_error("ambulatogram CSV: ragged zones");
    for (size_t b = 0; b < r.size(); ++b) amb.set_count(z, b, r[b].second);
  }
  return amb;
}

struct RenderOptions {
  double day_start_hour = 1.0;  // scenario t=0 on the day clock
  double compression = 60.0;    // day seconds per scenario second
};

namespace detail {

inline std::string svg_rows(const Ambulatogram& amb, bool covered_only, double x0, double y0,
                            double row_h, double px_per_bin) {
  auto color = [](int c) { return c >= 3 ? "#8e2800" : (c == 2 ? "#c0392b" : "#4a90d9"); };
  std::string out;
  char buf[256];
  double y = y0;
  for (size_t z = 0; z < amb.n_zones(); ++z) {
    if (covered_only && !amb.zone_covered(z)) continue;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                  x0 - 6.0, y + row_h - 4.0, amb.zone_names()[z].c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#f4f4f4\"/>\n",
                  x0, y, px_per_bin * static_cast<double>(amb.n_bins()), row_h - 2.0);
    out += buf;
    const auto& counts = amb.zone_counts(z);
    for (size_t b = 0; b < counts.size();) {
      if (counts[b] == 0) {
        ++b;
        continue;
      }
      size_t e = b;
      while (e < counts.size() && counts[e] == counts[b]) ++e;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                    x0 + px_per_bin * static_cast<double>(b), y,
                    px_per_bin * static_cast<double>(e - b), row_h - 2.0, color(counts[b]));
      out += buf;
      b = e;
    }
    y += row_h;
  }
  return out;
}

}  // namespace detail

/// Deterministic stacked timeline, measured panel above the reference panel.
/// Uncovered zones appear only in the reference. The time axis is labeled in
/// expanded day-clock hours.
inline std::string render_svg(const Ambulatogram& measured, const Ambulatogram& reference,
                              const RenderOptions& opts = {}) {
  if (!measured.same_grid(reference))
    throw std::invalid_argument("render: measured and reference grids differ");
  const double x0 = 110.0, plot_w = 880.0, row_h = 18.0;
  const double px_per_bin = plot_w / static_cast<double>(measured.n_bins());
  size_t measured_rows = 0;
  for (size_t z = 0; z < measured.n_zones(); ++z)
    if (measured.zone_covered(z)) ++measured_rows;
  const double panel1_y = 28.0;
  const double panel2_y = panel1_y + row_h * static_cast<double>(measured_rows) + 46.0;
  const double height = panel2_y + row_h * static_cast<double>(reference.n_zones()) + 40.0;

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\">\n",
                x0 + plot_w + 20.0, height);
  svg += buf;
  svg += "<text x=\"110\" y=\"16\" font-size=\"13\">measure</text>\n";
  svg += detail::svg_rows(measured, /*covered_only=*/true, x0, panel1_y, row_h, px_per_bin);
  std::snprintf(buf, sizeof(buf), "<text x=\"110\" y=\"%.2f\" font-size=\"13\">reference</text>\n",
                panel2_y - 12.0);
  svg += buf;
  svg += detail::svg_rows(reference, /*covered_only=*/false, x0, panel2_y, row_h, px_per_bin);

  // Day-clock ticks under the reference panel, every two hours.
  const double axis_y = panel2_y + row_h * static_cast<double>(reference.n_zones()) + 14.0;
  for (double hour = opts.day_start_hour;; hour += 2.0) {
    const double t = (hour - opts.day_start_hour) * 3600.0 / opts.compression;
    if (t > measured.t1() - measured.t0()) break;
    const double x = x0 + (t / (measured.t1() - measured.t0())) * plot_w;
    const int label_hour = static_cast<int>(hour) % 24;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\">"
                  "%02d:00</text>\n",
                  x, axis_y, label_hour);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ambulo
