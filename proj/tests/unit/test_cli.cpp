// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynsim/config/run_config.hpp"

namespace fs = std::filesystem;
using namespace dynsim;
using nlohmann::json;

namespace {

const fs::path kRoot = DYNSIM_SOURCE_DIR;

struct Run {
  int code = -1;
  std::string out;
};

// Runs a shell command line, capturing stdout and stderr together.
Run sh(const std::string& cmd) {
  Run r;
  FILE* p = ::popen((cmd + " 2>&1").c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p) != nullptr) {
    r.out += buf;
  }
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return r;
}

std::string cli(const std::string& args) { return std::string(DYNSIM_CLI) + " " + args; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dynsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    n += line.empty() ? 0 : 1;
  }
  return n;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("run config: defaults, paths and errors") {
  const fs::path dir = scratch("config");
  const json j{{"scene", (kRoot / "scenes" / "store.scene").string()}, {"seed", 5}};
  const RunConfig cfg = parse_run_config(j, dir);
  CHECK(cfg.seed == 5);
  CHECK(cfg.dt == 0.1);
  CHECK(cfg.output == dir / "out");
  CHECK_FALSE(cfg.robot.has_value());
  CHECK_THROWS_AS(episode_template(cfg), ConfigError);

  const RunConfig bench = load_run_config(kRoot / "configs" / "store_bench.json");
  REQUIRE(bench.robot.has_value());
  CHECK(bench.bench.human_counts == std::vector<std::size_t>{10, 15, 20});
  const RunConfig again = parse_run_config(run_config_to_json(bench), "/");
  CHECK(run_config_to_json(again) == run_config_to_json(bench));

  json no_seed = j;
  no_seed.erase("seed");
  CHECK_THROWS_AS(parse_run_config(no_seed, dir), ConfigError);
  json missing = j;
  missing["scene"] = "nowhere.scene";
  CHECK_THROWS_WITH_AS(parse_run_config(missing, dir),
                       ("scene file not found: " + (dir / "nowhere.scene").string()).c_str(),
                       ConfigError);
  json unknown = j;
  unknown["sped"] = 3;
  CHECK_THROWS_AS(parse_run_config(unknown, dir), ConfigError);
  json bad_tension = j;
  bad_tension["smoothing"] = {{"tension", 1.5}};
  CHECK_THROWS_AS(parse_run_config(bad_tension, dir), ConfigError);
}

TEST_CASE("cli simulate: empty scene, row counts, determinism") {
  const fs::path dir = scratch("simulate");
  const std::string empty_cfg = (dir / "empty.json").string();
  write(empty_cfg, json{{"scene", (kRoot / "scenes" / "empty_20x20.scene").string()},
                        {"seed", 1}}.dump());
  Run r = sh(cli("--config " + empty_cfg + " --out " + (dir / "e").string() + " simulate"));
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "e" / "trajectories.txt") == 0);

  const std::string cfg = (kRoot / "configs" / "supermarket_sim.json").string();
  r = sh(cli("--config " + cfg + " --out " + (dir / "a").string() + " simulate --frames 100"));
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "a" / "trajectories.txt") == 1000);
  r = sh(cli("--config " + cfg + " --out " + (dir / "b").string() + " simulate --frames 100"));
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "a" / "trajectories.txt") == slurp(dir / "b" / "trajectories.txt"));
  const json manifest = json::parse(slurp(dir / "a" / "simulate_manifest.json"));
  CHECK(manifest["rows"] == 1000);
  CHECK(manifest["seed"] == 7);

  r = sh(cli("--config " + cfg + " --seed 8 --out " + (dir / "c").string() +
                " simulate --frames 100"));
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "a" / "trajectories.txt") != slurp(dir / "c" / "trajectories.txt"));
}

TEST_CASE("cli bench: one cell, replay, config errors") {
  const fs::path dir = scratch("bench");
  const std::string cfg = (kRoot / "configs" / "store_bench.json").string();
  Run r = sh(cli("--config " + cfg + " --out " + dir.string() +
                    " bench --humans 10 --episodes 1"));
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "bench_table.tsv") == 2);
  r = sh(cli("bench --replay " + (dir / "bench_manifest.json").string() +
                " --cell 0 --episode 0"));
  CHECK(r.code == 0);
  CHECK(r.out.find("replay identical") != std::string::npos);

  write(dir / "bad.json", R"({"scene": "gone.scene", "seed": 1})");
  r = sh(cli("--config " + (dir / "bad.json").string() + " bench"));
  CHECK(r.code == 2);
  CHECK(r.out.find((dir / "gone.scene").string()) != std::string::npos);
  CHECK(sh(cli("bench --frobnicate")).code == 2);
}

TEST_CASE("cli calibrate: identity, synthetic transform, degenerate input") {
  const fs::path dir = scratch("calibrate");
  const fs::path fx = kRoot / "tests" / "fixtures";
  Run r = sh(cli("--out " + dir.string() + " calibrate " +
                    (fx / "calib_pairs_identity.txt").string()));
  REQUIRE(r.code == 0);
  Calibration c = read_calibration(dir / "calibration.json");
  CHECK(frobenius_distance(c.transform.rotation, Mat3::identity()) < 1e-12);
  CHECK(norm(c.transform.translation) < 1e-12);

  r = sh(cli("--out " + dir.string() + " calibrate " + (fx / "calib_pairs_rot90z.txt").string()));
  REQUIRE(r.code == 0);
  c = read_calibration(dir / "calibration.json");
  Mat3 rz;
  rz.m = {0, -1, 0, 1, 0, 0, 0, 0, 1};
  CHECK(frobenius_distance(c.transform.rotation, rz) < 1e-12);
  CHECK(norm(c.transform.translation - Vec3{1, 2, 3}) < 1e-12);

  r = sh(cli("--out " + dir.string() + " calibrate " + (fx / "calib_pairs_two.txt").string()));
  CHECK(r.code == 2);
  CHECK(r.out.find("need at least 3 correspondences") != std::string::npos);
}

TEST_CASE("cli export: dataset report and camera path") {
  const fs::path dir = scratch("export");
  const std::string cfg = (kRoot / "configs" / "supermarket_sim.json").string();
  REQUIRE(sh(cli("--config " + cfg + " --out " + dir.string() + " simulate --frames 40")).code ==
          0);
  Run r = sh(cli("--config " + cfg + " --out " + dir.string() + " export --camera --dataset " +
                    (dir / "trajectories.txt").string()));
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(dir / "prediction_report.json"));
  CHECK(report["tasks"] == 10 * (40 - 20 + 1));
  CHECK(report["ade"].get<double>() >= 0.0);
  CHECK(line_count(dir / "camera_path.csv") == 1 + 3 * 63 + 1);
  CHECK(sh(cli("export")).code == 2);
}

TEST_CASE("cli serve: bind, transcript replay, port in use, interrupt") {
  const fs::path dir = scratch("serve");
  const std::string cfg = (kRoot / "configs" / "serve.json").string();
  // Live run with one client that issues a task and waits for its ack.
  const std::string live_run =
      "python3 -c \"import json,socket,subprocess,sys; "
      "p=subprocess.Popen(['" + std::string(DYNSIM_CLI) + "','--config','" + cfg + "','--out','" +
      dir.string() + "','serve','--port','0','--duration','1.5'],stdout=subprocess.PIPE,text=True); "
      "port=int(p.stdout.readline().rsplit(':',1)[1]); "
      "s=socket.create_connection(('127.0.0.1',port)); f=s.makefile('r'); "
      "s.sendall(b'{\\\"kind\\\":\\\"issue_task\\\",\\\"payload\\\":{\\\"prompt\\\":"
      "\\\"Pick up the apple\\\"},\\\"client_tag\\\":\\\"a\\\"}\\n'); "
      "acks=[m for m in map(json.loads,f) if m['type']=='ack']; "
      "sys.exit(p.wait() if acks and acks[0]['client_tag']=='a' else 9)\"";
  REQUIRE(sh(live_run).code == 0);
  REQUIRE(fs::exists(dir / "transcript.jsonl"));
  REQUIRE(fs::exists(dir / "final_snapshot.json"));
  Run r = sh(cli("--out " + (dir / "replay").string() + " serve --replay " +
                    (dir / "transcript.jsonl").string()));
  REQUIRE(r.code == 0);
  const json live = json::parse(slurp(dir / "final_snapshot.json"));
  const json replay = json::parse(slurp(dir / "replay" / "replay_snapshot.json"));
  CHECK(live == replay);
  CHECK(live["tick"].get<std::uint64_t>() > 0);
  REQUIRE(live["tasks"].size() == 1);
  CHECK(live["tasks"][0]["prompt"] == "Pick up the apple");

  // Port in use.
  const std::string busy =
      "python3 -c \"import socket,subprocess,sys; s=socket.socket(); s.bind(('127.0.0.1',0)); "
      "s.listen(); p=s.getsockname()[1]; "
      "sys.exit(subprocess.call(['" + std::string(DYNSIM_CLI) + "','--config','" + cfg +
      "','--out','" + (dir / "busy").string() + "','serve','--port',str(p),'--duration','0.2']))\"";
  r = sh(busy);
  CHECK(r.code == 3);

  // SIGINT stops the service with the interrupted code.
  r = sh("sh -c '" + cli("--config " + cfg + " --out " + (dir / "int").string() +
                            " serve --port 0") +
         " & pid=$! ; sleep 0.5 ; kill -INT $pid ; wait $pid ; exit $?'");
  CHECK(r.code == 130);
  CHECK(fs::exists(dir / "int" / "transcript.jsonl"));
}
