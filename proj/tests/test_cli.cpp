// End-to-end checks of the command-line tool, driven through a subprocess.
// Skipped when AMBULO_CLI is not set (ctest sets it to the built binary).
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ambulo/ambulatogram.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("AMBULO_CLI"); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ambulo_cli_tests" / name;
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir.parent_path());
  return dir;
}

}  // namespace

TEST_CASE("cli: simulate writes stream, intervals and manifest per run") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("simulate");
  REQUIRE(run_cli("simulate --seed 7 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "run0" / "detections.jsonl"));
  CHECK(fs::exists(out / "run0" / "intervals.json"));
  const std::string manifest = ambulo::read_file((out / "run0" / "manifest.json").string());
  CHECK(manifest.find("\"master_seed\": 7") != std::string::npos);
  CHECK(manifest.find("run_seed") != std::string::npos);
  CHECK(manifest.find("config_hash") != std::string::npos);
}

TEST_CASE("cli: --runs 3 produces three stream/reference pairs") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("runs3");
  REQUIRE(run_cli("simulate --runs 3 --out " + out.string()) == 0);
  for (int k = 0; k < 3; ++k) {
    CHECK(fs::exists(out / ("run" + std::to_string(k)) / "detections.jsonl"));
    CHECK(fs::exists(out / ("run" + std::to_string(k)) / "intervals.json"));
  }
  CHECK(!fs::exists(out / "run3"));
}

TEST_CASE("cli: missing zones file exits 2 with no partial output") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("missing_zones");
  CHECK(run_cli("simulate --zones /nonexistent/zones.json --out " + out.string()) == 2);
  CHECK(!fs::exists(out));
}

TEST_CASE("cli: empty stream run succeeds with empty outputs") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("empty_stream");
  fs::create_directories(out);
  const fs::path stream = out / "empty.jsonl";
  std::ofstream(stream.string()).close();
  REQUIRE(run_cli("run --stream " + stream.string() + " --out " + out.string()) == 0);
  const std::string verdicts = ambulo::read_file((out / "verdicts.csv").string());
  CHECK(verdicts == "person_key,t_start,t_end,kept,reason,hull_perimeter_m,max_accel_mps2\n");
  const ambulo::Ambulatogram raw =
      ambulo::ambulatogram_from_csv(ambulo::read_file((out / "ambulatogram_raw.csv").string()));
  for (size_t z = 0; z < raw.n_zones(); ++z)
    for (size_t b = 0; b < raw.n_bins(); ++b) CHECK(raw.count(z, b) == 0);
}

TEST_CASE("cli: strict mode aborts on malformed lines, default counts them") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("strict");
  fs::create_directories(out);
  const fs::path stream = out / "bad.jsonl";
  {
    std::ofstream f(stream.string());
    f << R"({"sensor":"kinect1","local_id":0,"stamp":1.0,"x":0,"y":0,"z":0})" << "\n";
    f << "garbage\n";
  }
  CHECK(run_cli("run --stream " + stream.string() + " --out " + out.string()) == 0);
  const std::string report = ambulo::read_file((out / "report.json").string());
  CHECK(report.find("\"malformed_lines\": 1") != std::string::npos);
  CHECK(run_cli("run --strict --stream " + stream.string() + " --out " + out.string()) == 2);
}

TEST_CASE("cli: staged simulate/run/eval matches the all subcommand") {
  if (!cli_path()) return;
  const fs::path all_out = fresh_dir("staged_all");
  const fs::path staged = fresh_dir("staged_steps");
  REQUIRE(run_cli("all --seed 11 --out " + all_out.string()) == 0);
  REQUIRE(run_cli("simulate --seed 11 --out " + staged.string()) == 0);
  REQUIRE(run_cli("run --stream " + (staged / "run0" / "detections.jsonl").string() +
                  " --reference " + (staged / "run0" / "intervals.json").string() + " --out " +
                  (staged / "pipeline").string()) == 0);
  for (const char* artifact : {"verdicts.csv", "ambulatogram_raw.csv", "ambulatogram_filtered.csv",
                               "ambulatogram_reference.csv", "figure_raw.svg",
                               "figure_filtered.svg"}) {
    CHECK(ambulo::read_file((all_out / "run0" / artifact).string()) ==
          ambulo::read_file((staged / "pipeline" / artifact).string()));
  }
  // eval on the staged CSV artifacts reproduces the run's summary.
  const fs::path eval_csv = staged / "eval.csv";
  REQUIRE(run_cli("eval --raw " + (staged / "pipeline" / "ambulatogram_raw.csv").string() +
                  " --filtered " + (staged / "pipeline" / "ambulatogram_filtered.csv").string() +
                  " --reference " + (staged / "run0" / "intervals.json").string() + " --out-csv " +
                  eval_csv.string()) == 0);
  const std::string eval_text = ambulo::read_file(eval_csv.string());
  CHECK(eval_text.find("raw,ALL,") != std::string::npos);
  CHECK(eval_text.find("filtered,ALL,") != std::string::npos);
}

TEST_CASE("cli: eval rejects mismatched spans") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("eval_mismatch");
  fs::create_directories(out);
  // Two tiny ambulatogram CSVs with different grids.
  ambulo::write_file((out / "a.csv").string(),
                     "zone,bin_start_s,count\nkitchen,0,1\nkitchen,5,0\n");
  ambulo::write_file((out / "b.csv").string(),
                     "zone,bin_start_s,count\nkitchen,0,1\nkitchen,10,0\n");
  CHECK(run_cli("eval --raw " + (out / "a.csv").string() + " --filtered " +
                (out / "b.csv").string() + " --reference " + (out / "a.csv").string()) == 2);
}

TEST_CASE("cli: render emits an SVG from ambulatogram CSVs") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("render");
  REQUIRE(run_cli("all --seed 3 --out " + out.string()) == 0);
  const fs::path svg = out / "re_rendered.svg";
  REQUIRE(run_cli("render --measured " + (out / "run0" / "ambulatogram_filtered.csv").string() +
                  " --reference " + (out / "run0" / "ambulatogram_reference.csv").string() +
                  " --out " + svg.string()) == 0);
  const std::string content = ambulo::read_file(svg.string());
  CHECK(content.rfind("<svg", 0) == 0);
  CHECK(content.find("</svg>") != std::string::npos);
}

TEST_CASE("cli: environment variables override defaults, flags beat both") {
  if (!cli_path()) return;
  const fs::path out = fresh_dir("env");
  const fs::path out2 = fresh_dir("env_flag");
  // AMBULO_OUT steers output when --out is absent.
  std::string cmd = std::string("AMBULO_OUT=") + out.string() + " " + cli_path() +
                    " simulate --seed 5 >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(out / "run0" / "detections.jsonl"));
  // --out wins over the environment.
  cmd = std::string("AMBULO_OUT=") + out.string() + " " + cli_path() + " simulate --seed 5 --out " +
        out2.string() + " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(out2 / "run0" / "detections.jsonl"));
}
