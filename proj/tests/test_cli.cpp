#include "doctest.h"

#include "dscaler/commands.hpp"
#include "dscaler/config.hpp"
#include "dscaler/errors.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

using namespace dscaler;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dscaler_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DSCALER_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* const kSmall = R"([kernel]
family = brownian

[sweep]
N_list = 8, 16, 32, 64
schedules = total:1, per_sensor:1
)";

}  // namespace

TEST_CASE("defaults and basic parsing") {
  const RunConfig d = parse_config("");
  CHECK(d.kernel.family == "brownian");
  REQUIRE(d.kernel.class_a.has_value());
  CHECK(d.sweep.N_list == std::vector<Index>{64, 128, 256, 512, 1024});
  CHECK(d.sweep.schedules == std::vector<PowerSchedule>{PowerSchedule{Total{1.0}}});

  const RunConfig c = parse_config(kSmall);
  CHECK(c.sweep.N_list == std::vector<Index>{8, 16, 32, 64});
  CHECK(c.sweep.schedules.size() == 2);
  CHECK(c.sweep.schedules[1] == PowerSchedule{PerSensor{1.0}});
}

TEST_CASE("serialized config parses back to the same config") {
  RunConfig cfg = parse_config(R"([kernel]
family = ou
sigma2 = 2.5
eta = 0.3
T0 = 1.7

[class_a]
B = 2

[channel]
gain_mode = seeded_uniform
gain_seed = 77
h_lower = 0.25
K_uses = 3

[sweep]
N_list = 4, 9, 100
schedules = polynomial:-0.33333333333333331, near_exponential:0.2, sub_threshold
simulate = true
seed = 1234567890123

[sim]
noise_variance = 0.1
dump_trials = trials.csv

[run]
jobs = 2
)");
  CHECK(cfg.kernel.class_a->B == 2.0);
  const std::string text = serialize_config(cfg);
  const RunConfig back = parse_config(text);
  CHECK(back == cfg);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  cfg.sweep.seed += 1;
  CHECK(config_hash(back) != config_hash(cfg));

  const RunConfig none = parse_config("[kernel]\nclass_a = none\n");
  CHECK_FALSE(none.kernel.class_a.has_value());
  CHECK(parse_config(serialize_config(none)) == none);
}

TEST_CASE("override precedence: --set over environment over file") {
  const std::string text = "[sweep]\nseed = 5\n";
  CHECK(parse_config(text).sweep.seed == 5);
  CHECK(parse_config(text, {}, std::string("6")).sweep.seed == 6);
  CHECK(parse_config(text, {parse_override("sweep.seed=7")}, std::string("6")).sweep.seed == 7);
  CHECK(parse_config(text, {{"kernel.family", "ou"}}).kernel.family == "ou");
  // Later overrides win.
  CHECK(parse_config("", {{"run.jobs", "1"}, {"run.jobs", "3"}}).jobs == 3);
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_config("[kernel]\nfamliy = ou\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[colour]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[kernel]\nfamily = wiener\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[kernel]\nT0 = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[kernel]\nT0 = one\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nN_list = 8, x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nsimulate = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nschedules = total\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[kernel]\nfamily = custom\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[kernel]\nclass_a = none\n[class_a]\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[class_a]\nx = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[channel]\nh_lower = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[spectrum]\nsource = guess\n"), ConfigError);
  CHECK_THROWS_AS(parse_override("sweep.seed"), ConfigError);
  CHECK_THROWS_AS(parse_override("seed=1"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dscaler.ini"), ConfigError);
}

TEST_CASE("custom kernel tables") {
  const fs::path dir = scratch("table");
  spit(dir / "k.csv", "2,1,0.5\n1,2,1\n0.5,1,2\n");
  const MatrixXd t = load_table_csv((dir / "k.csv").string());
  CHECK(t.rows() == 3);
  CHECK(t(0, 2) == 0.5);
  spit(dir / "bad.csv", "1,2\n3\n");
  CHECK_THROWS_AS(load_table_csv((dir / "bad.csv").string()), ConfigError);
  const RunConfig cfg = parse_config("[kernel]\nfamily = custom\ntable = " + (dir / "k.csv").string() + "\n");
  CHECK_FALSE(cfg.kernel.class_a.has_value());
  CHECK(eval_kernel(build_kernel(cfg), 0.0, 0.0) == doctest::Approx(2.0));
  fs::remove_all(dir);
}

TEST_CASE("spectrum command writes the eigenvalue CSV") {
  const fs::path dir = scratch("spectrum");
  std::ostringstream out, err;
  cmd_spectrum(parse_config("", {{"output.dir", dir.string()}}), out, err);
  std::istringstream in(slurp(dir / "spectrum.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,value");
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 10);

  cmd_spectrum(parse_config("", {{"output.dir", dir.string()}, {"spectrum.count", "0"}}), out, err);
  CHECK(slurp(dir / "spectrum.csv") == "k,value\n");

  cmd_spectrum(parse_config("", {{"output.dir", dir.string()}, {"spectrum.source", "nystrom"}}), out, err);
  std::istringstream ny(slurp(dir / "spectrum.csv"));
  n = -1;
  while (std::getline(ny, line)) ++n;
  CHECK(n == 128);

  const RunConfig custom = parse_config("[kernel]\nfamily = custom\ntable = x.csv\n", {{"output.dir", dir.string()}});
  CHECK(run_command([&] { cmd_spectrum(custom, out, err); }, err) == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("bounds command prints one JSON row") {
  std::ostringstream out, err;
  cmd_bounds(parse_config(""), 64, out, err);
  const json j = json::parse(out.str());
  CHECK(j["N"] == 64);
  CHECK(j["regime"] == "InWindow");
  CHECK(j["D_l"].get<double>() <= j["D_u"].get<double>());
  CHECK(j["sim_mean"].is_null());

  std::ostringstream out2;
  cmd_bounds(parse_config("[bounds]\nschedule = sub_threshold\n"), 64, out2, err);
  CHECK(json::parse(out2.str())["regime"] == "SubThreshold");
  CHECK(err.str().find("below the power threshold") != std::string::npos);

  const fs::path dir = scratch("bounds");
  const std::string dump = (dir / "trials.csv").string();
  std::ostringstream out3;
  cmd_bounds(parse_config("[bounds]\nsimulate = true\n[sweep]\ntrials = 30\n[sim]\ndump_trials = " + dump + "\n"), 16,
             out3, err);
  CHECK(json::parse(out3.str())["sim_mean"].is_number());
  CHECK(slurp(dump).rfind("trial,distortion\n", 0) == 0);
  fs::remove_all(dir);

  CHECK(run_command([&] { cmd_bounds(parse_config(""), 1, out, err); }, err) == kExitConfig);
}

TEST_CASE("check-class-a command") {
  std::ostringstream out, err;
  cmd_check_class_a(parse_config("[kernel]\nclass_a = none\n"), out, err);
  CHECK(json::parse(out.str())["status"] == "not claimed");

  std::ostringstream out2;
  cmd_check_class_a(parse_config(""), out2, err);
  const json j = json::parse(out2.str());
  CHECK(j["status"] == "pass");
  CHECK(j["conditions"].size() == 3);

  std::ostringstream out3;
  cmd_check_class_a(parse_config("[kernel]\nfamily = ou\n[class_a]\nB = 1\n"), out3, err);
  CHECK(json::parse(out3.str())["status"] == "fail");
}

TEST_CASE("sweep command writes CSV and summary") {
  const fs::path dir = scratch("sweep");
  std::ostringstream out, err;
  const RunConfig cfg = parse_config(kSmall, {{"output.dir", dir.string()}});
  cmd_sweep(cfg, out, err);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
  const json s = json::parse(slurp(dir / "summary.json"));
  CHECK(s["config_hash"] == config_hash(cfg));
  CHECK(parse_config(s["config"].get<std::string>()) == cfg);
  CHECK(s["rows_file"] == "sweep.csv");
  CHECK(s["regimes"]["total:1"] == "InWindow");
  CHECK(s["regimes"]["per_sensor:1"] == "InWindow");
  // Two schedules, two columns each.
  CHECK(s["fits"].size() == 4);
  for (const auto& f : s["fits"]) {
    CHECK(f["expected_slope"] == -1.0);
    CHECK(f["n_points"] == 4);
    CHECK(f.contains("warning"));  // log(NP) span is short at these N
  }
  CHECK(s["fit_warnings"].empty());

  cmd_sweep(cfg, out, err);
  CHECK(slurp(dir / "sweep.csv") == csv);
  fs::remove_all(dir);
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("binary");
  spit(dir / "ok.ini", kSmall);
  spit(dir / "bad.ini", "[kernel]\nfamily = wiener\n");
  const std::string ok = "-c " + (dir / "ok.ini").string() + " -o " + (dir / "out").string();
  CHECK(run_cli(ok + " sweep") == 0);
  CHECK(fs::exists(dir / "out" / "sweep.csv"));
  const std::string first = slurp(dir / "out" / "sweep.csv");
  CHECK(run_cli(ok + " -j 1 sweep") == 0);
  CHECK(slurp(dir / "out" / "sweep.csv") == first);
  CHECK(run_cli(ok + " bounds -N 32") == 0);
  CHECK(run_cli(ok + " bounds -N 1") == 1);
  CHECK(run_cli(ok + " spectrum") == 0);
  CHECK(run_cli(ok + " check-class-a") == 0);
  CHECK(run_cli(ok + " config --hash") == 0);
  CHECK(run_cli("-c " + (dir / "bad.ini").string() + " spectrum") == 1);
  CHECK(run_cli(ok + " --set sweep.nope=1 sweep") == 1);
  CHECK(run_cli(ok + " --set sweep.seed sweep") == 1);
  CHECK(run_cli("-c " + (dir / "missing.ini").string() + " sweep") == 1);
  CHECK(run_cli(ok) == 1);
  CHECK(run_cli(ok + " frobnicate") == 1);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes create parent directories") {
  const fs::path dir = scratch("atomic");
  const fs::path target = dir / "a" / "b" / "f.txt";
  write_file_atomic(target.string(), "one");
  write_file_atomic(target.string(), "two");
  CHECK(slurp(target) == "two");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
  fs::remove_all(dir);
}
