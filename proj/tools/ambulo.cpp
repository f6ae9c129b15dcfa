// ambulo: simulate a shrunk-day multi-sensor recording, run the localization
// and artifact-removal pipeline on it, and score measured zone occupancy
// against the scripted reference.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "ambulo/config.hpp"
#include "ambulo/evaluation.hpp"
#include "ambulo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ambulo;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> zones, sensors, scenario, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<double> bin_width, gap_threshold, perimeter, accel;
  std::optional<double> bridge_max_gap, bridge_max_disp;
  bool strict = false;
  bool bridge = false;
};

void add_zone_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run-config JSON file");
  cmd->add_option("--zones", flags.zones, "zone map JSON (default: built-in LivINLab layout)");
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  add_zone_flags(cmd, flags);
  cmd->add_option("--sensors", flags.sensors, "sensor setup JSON (default: built-in)");
  cmd->add_option("--scenario", flags.scenario, "scenario script JSON (default: built-in)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--runs", flags.runs, "number of repeated runs");
  cmd->add_option("--bin-width", flags.bin_width, "ambulatogram bin width, scenario seconds");
  cmd->add_option("--gap-threshold", flags.gap_threshold, "sequence gap threshold, seconds");
  cmd->add_option("--perimeter-threshold", flags.perimeter, "static hull perimeter threshold, m");
  cmd->add_option("--accel-threshold", flags.accel, "acceleration threshold, m/s^2");
  cmd->add_flag("--strict", flags.strict, "abort on malformed stream lines");
  cmd->add_flag("--bridge-gaps", flags.bridge, "merge same-zone detection gaps (off by default)");
  cmd->add_option("--bridge-max-gap", flags.bridge_max_gap, "largest bridgeable gap, seconds");
  cmd->add_option("--bridge-max-displacement", flags.bridge_max_disp,
                  "largest bridgeable boundary displacement, m");
}

/// Precedence: flags > environment > config file > built-in defaults.
RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg.apply_file(flags.config_path);
  cfg.apply_env();
  if (flags.zones) cfg.zones_path = *flags.zones;
  if (flags.sensors) cfg.sensors_path = *flags.sensors;
  if (flags.scenario) cfg.scenario_path = *flags.scenario;
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.runs) cfg.runs = *flags.runs;
  if (flags.bin_width) cfg.bin_width = *flags.bin_width;
  if (flags.gap_threshold) cfg.gap_threshold = *flags.gap_threshold;
  if (flags.perimeter) cfg.filter.perimeter_threshold = *flags.perimeter;
  if (flags.accel) cfg.filter.accel_threshold = *flags.accel;
  if (flags.strict) cfg.strict = true;
  if (flags.bridge) cfg.bridge = true;
  if (flags.bridge_max_gap) cfg.bridge_cfg.max_gap = *flags.bridge_max_gap;
  if (flags.bridge_max_disp) cfg.bridge_cfg.max_displacement = *flags.bridge_max_disp;
  return cfg;
}

struct LoadedSetup {
  ZoneMap map;
  SensorSetup sensors;
  ScenarioScript script;
};

LoadedSetup load_and_validate(const RunConfig& cfg, bool need_scenario) {
  LoadedSetup setup{cfg.zones(), cfg.sensors(), {}};
  for (const ZoneIssue& issue : setup.map.validate()) {
    const bool error = issue.level == ZoneIssue::Level::error;
    std::cerr << (error ? "error: " : "warning: ") << issue.message << "\n";
  }
  if (setup.map.has_errors()) throw std::runtime_error("zone map failed validation");
  if (need_scenario) {
    setup.script = cfg.scenario();
    validate_script(setup.script, setup.map);
  }
  return setup;
}

std::uint64_t config_hash(const LoadedSetup& setup, const RunConfig& cfg) {
  const std::string blob = zone_map_to_json(setup.map).dump() +
                           nlohmann::json(cfg.scenario_path.empty()
                                              ? std::string(default_scenario_text())
                                              : read_file(cfg.scenario_path))
                               .dump() +
                           std::to_string(cfg.bin_width) + ":" + std::to_string(cfg.gap_threshold);
  return hash_label(blob);
}

nlohmann::json intervals_to_json(const std::vector<PresenceInterval>& intervals, double t0,
                                 double t1) {
  nlohmann::json out;
  out["span"] = {t0, t1};
  nlohmann::json arr = nlohmann::json::array();
  for (const PresenceInterval& iv : intervals)
    arr.push_back({{"person", iv.person},
                   {"zone", iv.zone},
                   {"t_start", iv.t_start},
                   {"t_end", iv.t_end}});
  out["intervals"] = std::move(arr);
  return out;
}

std::vector<PresenceInterval> intervals_from_json(const nlohmann::json& j) {
  std::vector<PresenceInterval> out;
  const nlohmann::json& arr = j.is_array() ? j : j.at("intervals");
  for (const auto& jv : arr)
    out.push_back({jv.at("person").get<std::string>(), jv.at("zone").get<std::string>(),
                   jv.at("t_start").get<double>(), jv.at("t_end").get<double>()});
  return out;
}

struct RunArtifacts {
  SenseResult sensed;
  std::vector<PresenceInterval> reference;
};

RunArtifacts simulate_one(const LoadedSetup& setup, std::uint64_t seed) {
  const CompiledScenario truth = compile(setup.script, setup.map, seed);
  RunArtifacts art;
  art.sensed = sense(truth, setup.sensors.sensors, setup.script.noise, seed);
  art.reference = truth.reference;
  return art;
}

void write_simulation(const fs::path& dir, const LoadedSetup& setup, const RunConfig& cfg,
                      int run_index, std::uint64_t seed, const RunArtifacts& art) {
  fs::create_directories(dir);
  write_detection_stream((dir / "detections.jsonl").string(), art.sensed.detections);
  write_file((dir / "intervals.json").string(),
             intervals_to_json(art.reference, 0.0, setup.script.span()).dump(2) + "\n");
  nlohmann::json manifest;
  manifest["master_seed"] = cfg.master_seed(setup.script);
  manifest["run_index"] = run_index;
  manifest["run_seed"] = seed;
  manifest["config_hash"] = config_hash(setup, cfg);
  manifest["sample_rate_hz"] = setup.script.sample_rate_hz;
  manifest["compression"] = setup.script.compression;
  manifest["span_s"] = {0.0, setup.script.span()};
  manifest["counts"] = {{"emitted", art.sensed.counters.emitted},
                        {"truncated_capacity", art.sensed.counters.truncated_capacity},
                        {"swaps", art.sensed.counters.swaps},
                        {"track_births", art.sensed.counters.track_births}};
  manifest["files"] = {{"detections", "detections.jsonl"}, {"intervals", "intervals.json"}};
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

struct RunOutputs {
  EvalReport raw;
  EvalReport filtered;
};

/// The measured pipeline plus artifact files for one detection stream.
RunOutputs process_stream(const fs::path& dir, const LoadedSetup& setup, const RunConfig& cfg,
                          const std::vector<Detection>& stream,
                          const std::vector<PresenceInterval>& reference, double t1,
                          std::uint64_t malformed, const std::string& label_suffix,
                          double realtime_speed) {
  fs::create_directories(dir);
  const PipelineResult result =
      run_pipeline(stream, setup.map, setup.sensors, cfg, 0.0, t1, realtime_speed);
  const Ambulatogram ref = reference_ambulatogram(reference, setup.map, cfg.bin_width, 0.0, t1);

  write_file((dir / "verdicts.csv").string(), verdicts_to_csv(result.sequences, result.verdicts));
  write_file((dir / "ambulatogram_raw.csv").string(), ambulatogram_to_csv(result.raw));
  write_file((dir / "ambulatogram_filtered.csv").string(), ambulatogram_to_csv(result.filtered));
  write_file((dir / "ambulatogram_reference.csv").string(), ambulatogram_to_csv(ref));
  RenderOptions render_opts;
  render_opts.compression = setup.script.compression > 0 ? setup.script.compression : 60.0;
  write_file((dir / "figure_raw.svg").string(), render_svg(result.raw, ref, render_opts));
  write_file((dir / "figure_filtered.svg").string(), render_svg(result.filtered, ref, render_opts));

  nlohmann::json report;
  auto joint_of = [&](const Ambulatogram& amb) {
    nlohmann::json joint = nlohmann::json::object();
    for (const std::string& zone : setup.map.covered_names()) {
      nlohmann::json zones_arr = nlohmann::json::array();
      for (const CopresenceInterval& iv : copresence(amb, zone, 2.0 * cfg.bin_width))
        zones_arr.push_back(
            {{"t_start", iv.t_start}, {"t_end", iv.t_end}, {"max_count", iv.max_count}});
      if (!zones_arr.empty()) joint[zone] = std::move(zones_arr);
    }
    return joint;
  };
  report["copresence"] = {{"raw", joint_of(result.raw)}, {"filtered", joint_of(result.filtered)}};
  report["counters"] = {{"published", result.counters.bus.published},
                        {"rejected_capacity", result.counters.bus.rejected_capacity},
                        {"dropped_late", result.counters.bus.dropped_late},
                        {"projection_drops", result.counters.projection_drops},
                        {"duplicate_stamps", result.counters.duplicate_stamps},
                        {"malformed_lines", malformed},
                        {"sequences", result.sequences.size()}};
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  RunOutputs out{
      evaluate(result.raw, ref, setup.map.covered_names(), "raw" + label_suffix),
      evaluate(result.filtered, ref, setup.map.covered_names(), "filtered" + label_suffix)};
  return out;
}

EvalReport pool(const std::vector<EvalReport>& reports, const std::string& label) {
  EvalReport total;
  total.label = label;
  if (!reports.empty()) {
    total.zones = reports.front().zones;
    total.per_zone.assign(total.zones.size(), {});
  }
  for (const EvalReport& r : reports) {
    for (size_t i = 0; i < r.per_zone.size(); ++i) {
      total.per_zone[i].tp += r.per_zone[i].tp;
      total.per_zone[i].fp += r.per_zone[i].fp;
      total.per_zone[i].tn += r.per_zone[i].tn;
      total.per_zone[i].fn += r.per_zone[i].fn;
    }
    total.total.tp += r.total.tp;
    total.total.fp += r.total.fp;
    total.total.tn += r.total.tn;
    total.total.fn += r.total.fn;
  }
  return total;
}

int cmd_simulate(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  const LoadedSetup setup = load_and_validate(cfg, /*need_scenario=*/true);
  const std::uint64_t master = cfg.master_seed(setup.script);
  for (int k = 0; k < cfg.runs; ++k) {
    const std::uint64_t seed = run_seed(master, k);
    const RunArtifacts art = simulate_one(setup, seed);
    const fs::path dir = fs::path(cfg.out_dir) / ("run" + std::to_string(k));
    write_simulation(dir, setup, cfg, k, seed, art);
    std::cout << dir.string() << ": " << art.sensed.counters.emitted << " detections, seed "
              << seed << "\n";
  }
  return 0;
}

int cmd_run(const CommonFlags& flags, const std::string& stream_path,
            const std::string& reference_path, double t1, double realtime_speed) {
  const RunConfig cfg = resolve(flags);
  LoadedSetup setup = load_and_validate(cfg, /*need_scenario=*/false);
  // Scenario is only needed for figure axis labels; fall back quietly.
  try {
    setup.script = cfg.scenario();
  } catch (const std::exception&) {
    setup.script = {};
  }
  const StreamReadResult stream = read_detection_stream(stream_path, cfg.strict);
  std::vector<PresenceInterval> reference;
  if (!reference_path.empty()) reference = intervals_from_json(load_json(reference_path));
  const RunOutputs outputs = process_stream(cfg.out_dir, setup, cfg, stream.detections, reference,
                                            t1, stream.malformed, "", realtime_speed);
  write_file((fs::path(cfg.out_dir) / "eval_report.csv").string(),
             eval_to_csv({outputs.raw, outputs.filtered}));
  std::cout << report_table(outputs.raw, outputs.filtered);
  return 0;
}

int cmd_eval(const std::string& raw_csv, const std::string& filtered_csv,
             const std::string& reference_path, const CommonFlags& flags,
             const std::string& out_csv) {
  const RunConfig cfg = resolve(flags);
  const ZoneMap map = cfg.zones();
  Ambulatogram raw = ambulatogram_from_csv(read_file(raw_csv));
  Ambulatogram filtered = ambulatogram_from_csv(read_file(filtered_csv));
  raw.set_coverage(map);
  filtered.set_coverage(map);
  Ambulatogram reference = [&] {
    if (reference_path.size() > 5 &&
        reference_path.compare(reference_path.size() - 5, 5, ".json") == 0) {
      return reference_ambulatogram(intervals_from_json(load_json(reference_path)), map,
                                    raw.bin_width(), raw.t0(), raw.t1());
    }
    Ambulatogram amb = ambulatogram_from_csv(read_file(reference_path));
    amb.set_coverage(map);
    return amb;
  }();
  const EvalReport r_raw = evaluate(raw, reference, map.covered_names(), "raw");
  const EvalReport r_filtered = evaluate(filtered, reference, map.covered_names(), "filtered");
  if (!out_csv.empty()) write_file(out_csv, eval_to_csv({r_raw, r_filtered}));
  std::cout << report_table(r_raw, r_filtered);
  return 0;
}

int cmd_render(const std::string& measured_csv, const std::string& reference_csv,
               const CommonFlags& flags, const std::string& out_svg) {
  const RunConfig cfg = resolve(flags);
  const ZoneMap map = cfg.zones();
  Ambulatogram measured = ambulatogram_from_csv(read_file(measured_csv));
  Ambulatogram reference = ambulatogram_from_csv(read_file(reference_csv));
  measured.set_coverage(map);
  reference.set_coverage(map);
  write_file(out_svg, render_svg(measured, reference));
  std::cout << out_svg << "\n";
  return 0;
}

int cmd_all(const CommonFlags& flags, double realtime_speed) {
  const RunConfig cfg = resolve(flags);
  const LoadedSetup setup = load_and_validate(cfg, /*need_scenario=*/true);
  std::vector<EvalReport> raw_runs, filtered_runs;
  const std::uint64_t master = cfg.master_seed(setup.script);
  for (int k = 0; k < cfg.runs; ++k) {
    const std::uint64_t seed = run_seed(master, k);
    const RunArtifacts art = simulate_one(setup, seed);
    const fs::path dir = fs::path(cfg.out_dir) / ("run" + std::to_string(k));
    write_simulation(dir, setup, cfg, k, seed, art);
    // Re-read the stream from disk so this equals the staged file pipeline.
    const StreamReadResult stream =
        read_detection_stream((dir / "detections.jsonl").string(), cfg.strict);
    const std::string suffix = "[run" + std::to_string(k) + "]";
    const RunOutputs outputs =
        process_stream(dir, setup, cfg, stream.detections, art.reference, setup.script.span(),
                       stream.malformed, suffix, realtime_speed);
    raw_runs.push_back(outputs.raw);
    filtered_runs.push_back(outputs.filtered);
  }
  const EvalReport raw_pooled = pool(raw_runs, "raw");
  const EvalReport filtered_pooled = pool(filtered_runs, "filtered");
  std::vector<EvalReport> all_reports{raw_pooled, filtered_pooled};
  all_reports.insert(all_reports.end(), raw_runs.begin(), raw_runs.end());
  all_reports.insert(all_reports.end(), filtered_runs.begin(), filtered_runs.end());
  write_file((fs::path(cfg.out_dir) / "eval_report.csv").string(), eval_to_csv(all_reports));
  const std::string table = report_table(raw_pooled, filtered_pooled);
  write_file((fs::path(cfg.out_dir) / "table.txt").string(), table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-person indoor co-presence pipeline (simulate, run, eval, render)"};
  app.require_subcommand(1);

  CommonFlags sim_flags, run_flags, eval_flags, render_flags, all_flags;
  std::string stream_path, reference_path, raw_csv, filtered_csv, measured_csv, reference_csv;
  std::string out_svg = "figure.svg", eval_out_csv;
  double run_t1 = 1440.0;
  double realtime_run = 0.0, realtime_all = 0.0;

  CLI::App* simulate = app.add_subcommand("simulate", "generate detection streams + references");
  add_common(simulate, sim_flags);

  CLI::App* run = app.add_subcommand("run", "run the pipeline on a detection stream");
  add_common(run, run_flags);
  run->add_option("--stream", stream_path, "detection .jsonl stream")->required();
  run->add_option("--reference", reference_path, "reference intervals.json (optional)");
  run->add_option("--t1", run_t1, "scenario span end, seconds");
  run->add_option("--realtime", realtime_run, "paced replay speed factor (0 = batch)");

  CLI::App* eval = app.add_subcommand("eval", "score measured ambulatograms against a reference");
  add_zone_flags(eval, eval_flags);
  eval->add_option("--raw", raw_csv, "raw ambulatogram CSV")->required();
  eval->add_option("--filtered", filtered_csv, "filtered ambulatogram CSV")->required();
  eval->add_option("--reference", reference_path, "reference: intervals.json or ambulatogram CSV")
      ->required();
  eval->add_option("--out-csv", eval_out_csv, "evaluation CSV output path");

  CLI::App* render = app.add_subcommand("render", "render measured vs reference timelines");
  add_zone_flags(render, render_flags);
  render->add_option("--measured", measured_csv, "measured ambulatogram CSV")->required();
  render->add_option("--reference", reference_csv, "reference ambulatogram CSV")->required();
  render->add_option("--out", out_svg, "output SVG path");

  CLI::App* all = app.add_subcommand("all", "simulate + run + eval + render");
  add_common(all, all_flags);
  all->add_option("--realtime", realtime_all, "paced replay speed factor (0 = batch)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (run->parsed()) return cmd_run(run_flags, stream_path, reference_path, run_t1, realtime_run);
    if (eval->parsed())
      return cmd_eval(raw_csv, filtered_csv, reference_path, eval_flags, eval_out_csv);
    if (render->parsed()) return cmd_render(measured_csv, reference_csv, render_flags, out_svg);
    if (all->parsed()) return cmd_all(all_flags, realtime_all);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
