// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

// dynsim: simulate | bench | calibrate | export | serve

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dynsim/bench/config_json.hpp"
#include "dynsim/config/run_config.hpp"
#include "dynsim/sync/bridge.hpp"
#include "dynsim/sync/transport.hpp"
#include "dynsim/traj/dataset.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dynsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitInterrupted = 130;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

class Interrupted : public std::runtime_error {
 public:
  Interrupted() : std::runtime_error("interrupted") {}
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
};

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) {
    std::cerr << "dynsim: " << msg << '\n';
  }
}

RunConfig load(const Globals& g) {
  if (g.config.empty()) {
    throw ConfigError("--config is required for this command");
  }
  RunConfig cfg = load_run_config(g.config);
  if (g.seed) {
    cfg.seed = *g.seed;
  }
  if (!g.out.empty()) {
    cfg.output = g.out;
  }
  return cfg;
}

fs::path out_dir(const Globals& g, const std::optional<RunConfig>& cfg) {
  const fs::path dir = !g.out.empty() ? fs::path(g.out) : cfg ? cfg->output : fs::path("out");
  fs::create_directories(dir);
  return dir;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) {
    throw std::runtime_error("cannot write " + p.string());
  }
  out << j.dump(2) << '\n';
}

// --- simulate ---------------------------------------------------------------

struct SimulateOpts {
  std::optional<double> duration;
  std::optional<std::size_t> frames;
};

int cmd_simulate(const Globals& g, const SimulateOpts& o) {
  const RunConfig cfg = load(g);
  const std::size_t frames =
      o.frames ? *o.frames
               : static_cast<std::size_t>(std::llround(o.duration.value_or(cfg.simulate.duration) / cfg.dt));

  WorldState world = spawn_pedestrians(make_world(cfg.scene, cfg.seed), cfg.pedestrians);
  TrajectoryRecorder recorder(cfg.simulate.record_stride);
  for (std::size_t f = 0; f < frames; ++f) {
    if (g_interrupted) {
      throw Interrupted();
    }
    if (f > 0) {
      step_world_in_place(world, cfg.dt, crowd_tick(world, cfg.orca, cfg.dt));
    }
    recorder.observe(world);
  }

  const fs::path dir = out_dir(g, cfg);
  const fs::path data = dir / "trajectories.txt";
  write_eth(data, recorder.rows());
  const json config = run_config_to_json(cfg);
  write_json(dir / "simulate_manifest.json",
             {{"format", "dynsim-simulate-manifest/1"},
              {"config", config},
              {"config_hash", fnv1a_hex(config.dump())},
              {"seed", cfg.seed},
              {"frames", frames},
              {"record_stride", cfg.simulate.record_stride},
              {"pedestrians", world.agents.size()},
              {"rows", recorder.rows().size()},
              {"dataset", data.filename().string()},
              {"dataset_hash", file_hash(data)}});
  std::cout << "frames " << frames << " pedestrians " << world.agents.size() << " rows "
            << recorder.rows().size() << " -> " << data.string() << '\n';
  return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchOpts {
  std::vector<std::size_t> humans;
  std::optional<std::size_t> episodes;
  std::optional<unsigned> threads;
  std::string replay;
  std::size_t cell = 0;
  std::size_t episode = 0;
};

int cmd_bench_replay(const BenchOpts& o) {
  std::ifstream in(o.replay);
  if (!in) {
    throw ConfigError("cannot open manifest " + o.replay);
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(o.replay + ": " + e.what());
  }
  const EpisodeResult replayed = replay_manifest_episode(manifest, o.cell, o.episode);
  const EpisodeResult recorded =
      manifest.at("cells").at(o.cell).at("episodes").at(o.episode).get<EpisodeResult>();
  std::cout << json(replayed).dump() << '\n';
  if (!(replayed == recorded)) {
    std::cerr << "dynsim: replay differs from the manifest entry\n";
    return kExitRuntime;
  }
  std::cout << "replay identical\n";
  return kExitOk;
}

int cmd_bench(const Globals& g, const BenchOpts& o) {
  if (!o.replay.empty()) {
    return cmd_bench_replay(o);
  }
  const RunConfig cfg = load(g);
  SuiteConfig suite = suite_config(cfg);
  if (!o.humans.empty()) {
    suite.human_counts = o.humans;
  }
  if (o.episodes) {
    suite.episodes_per_cell = *o.episodes;
  }
  if (o.threads) {
    suite.threads = *o.threads;
  }
  suite.cancel = &g_interrupted;
  log(g, "running " + std::to_string(suite.human_counts.size() * suite.episodes_per_cell) +
             " episodes");
  SuiteResult result;
  try {
    result = run_suite(suite, orca_robot_policy(suite.base.orca, suite.base.dt));
  } catch (const SuiteCancelled&) {
    throw Interrupted();
  }
  const std::string table = format_table(result);
  const fs::path dir = out_dir(g, cfg);
  std::ofstream(dir / "bench_table.tsv") << table;
  write_json(dir / "bench_manifest.json", suite_manifest(suite, result));
  std::cout << table;
  log(g, "wrote " + (dir / "bench_manifest.json").string());
  return kExitOk;
}

// --- calibrate --------------------------------------------------------------

int cmd_calibrate(const Globals& g, const std::string& pairs_path) {
  const std::vector<Correspondence> pairs = read_correspondences(pairs_path);
  const Calibration c = estimate_calibration(pairs);
  const fs::path dir = out_dir(g, std::nullopt);
  const fs::path file = dir / "calibration.json";
  write_calibration(file, c, pairs.size());

  double worst = 0.0;
  for (const Correspondence& p : pairs) {
    worst = std::max(worst, norm(apply_transform(c.transform, p.real) - p.virt));
  }
  write_json(dir / "calibrate_manifest.json",
             {{"format", "dynsim-calibrate-manifest/1"},
              {"pairs_file", fs::absolute(pairs_path).string()},
              {"pairs_hash", file_hash(pairs_path)},
              {"pairs", pairs.size()},
              {"output", file.filename().string()}});
  const Mat3& r = c.transform.rotation;
  const Vec3& t = c.transform.translation;
  std::printf("pairs %zu residual_rms %.9g max_residual %.9g\n", pairs.size(), c.residual_rms, worst);
  for (int row = 0; row < 3; ++row) {
    std::printf("R %.12f %.12f %.12f\n", r(row, 0), r(row, 1), r(row, 2));
  }
  std::printf("t %.12f %.12f %.12f\n", t.x, t.y, t.z);
  return kExitOk;
}

// --- export -----------------------------------------------------------------

struct ExportOpts {
  std::string dataset;
  std::string waypoints;
  bool camera = false;
  std::size_t obs = kDefaultObsFrames;
  std::size_t pred = kDefaultPredFrames;
};

std::vector<Vec2> read_waypoints(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open waypoints file " + path.string());
  }
  std::vector<Vec2> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    Vec2 v;
    std::string extra;
    if (!(fields >> v.x >> v.y) || (fields >> extra)) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 2 numbers");
    }
    out.push_back(v);
  }
  return out;
}

int cmd_export(const Globals& g, const ExportOpts& o) {
  std::optional<RunConfig> cfg;
  if (!g.config.empty()) {
    cfg = load(g);
  }
  if (o.dataset.empty() && o.waypoints.empty() && !o.camera) {
    throw ConfigError("export needs --dataset, --waypoints or --camera");
  }
  const fs::path dir = out_dir(g, cfg);
  json manifest{{"format", "dynsim-export-manifest/1"}};
  if (cfg) {
    manifest["config"] = run_config_to_json(*cfg);
  }

  if (!o.dataset.empty()) {
    std::vector<DatasetRow> rows;
    try {
      rows = read_eth(o.dataset);
    } catch (const DatasetError& e) {
      throw ConfigError(e.what());
    }
    const double frame_dt = cfg ? cfg->dt : 0.1;
    const std::vector<Trajectory> trajs = rows_to_trajectories(rows, frame_dt);
    const PredictionScore score = evaluate_constant_velocity(trajs, o.obs, o.pred);
    json per_agent = json::array();
    for (const Trajectory& t : trajs) {
      json pts = json::array();
      for (const TrajectorySample& s : t.samples) {
        pts.push_back({s.time, s.position.x, s.position.y});
      }
      per_agent.push_back({{"agent", t.agent_id}, {"samples", pts}});
    }
    write_json(dir / "trajectories.json", per_agent);
    const json report{{"baseline", "constant_velocity"},
                      {"obs_frames", o.obs},
                      {"pred_frames", o.pred},
                      {"tasks", score.tasks},
                      {"ade", score.tasks ? json(score.ade) : json(nullptr)},
                      {"fde", score.tasks ? json(score.fde) : json(nullptr)}};
    write_json(dir / "prediction_report.json", report);
    manifest["dataset"] = {{"input", fs::absolute(o.dataset).string()},
                           {"input_hash", file_hash(o.dataset)},
                           {"agents", trajs.size()},
                           {"rows", rows.size()},
                           {"report", report}};
    std::cout << "agents " << trajs.size() << " rows " << rows.size() << " prediction tasks "
              << score.tasks;
    if (score.tasks > 0) {
      std::cout << " ade " << score.ade << " fde " << score.fde;
    }
    std::cout << '\n';
  }

  if (!o.waypoints.empty() || o.camera) {
    const std::vector<Vec2> waypoints =
        !o.waypoints.empty() ? read_waypoints(o.waypoints)
                             : (cfg ? cfg->smoothing.waypoints : std::vector<Vec2>{});
    const double tension = cfg ? cfg->smoothing.tension : kDefaultTension;
    const SampleOptions sample = cfg ? cfg->smoothing.sample : SampleOptions{};
    SmoothResult smooth;
    try {
      smooth = smooth_waypoints(waypoints, tension);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("waypoints: ") + e.what());
    }
    const SampledPath path = sample_path(smooth.path, sample);
    const fs::path csv = dir / "camera_path.csv";
    std::ofstream out(csv);
    out << "time,x,y,heading_x,heading_y\n";
    char buf[160];
    for (std::size_t i = 0; i < path.trajectory.samples.size(); ++i) {
      const TrajectorySample& s = path.trajectory.samples[i];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.time, s.position.x,
                    s.position.y, path.headings[i].x, path.headings[i].y);
      out << buf;
    }
    const double turn = max_heading_change(path.headings);
    const double corner = max_corner_turn(waypoints);
    manifest["camera"] = {{"waypoints", waypoints.size()},
                          {"collapsed", smooth.collapsed},
                          {"tension", tension},
                          {"samples", path.trajectory.samples.size()},
                          {"max_heading_change_rad", turn},
                          {"max_corner_turn_rad", corner},
                          {"output", csv.filename().string()}};
    std::printf("camera samples %zu max_heading_change %.4f rad (polyline corner %.4f rad)\n",
                path.trajectory.samples.size(), turn, corner);
  }
  write_json(dir / "export_manifest.json", manifest);
  return kExitOk;
}

// --- serve ------------------------------------------------------------------

// Replays recorded frames at a fixed wall-clock period.
class PacedSource : public PoseSource {
 public:
  PacedSource(std::unique_ptr<PoseSource> inner, double period_s)
      : inner_(std::move(inner)), period_(period_s) {}
  std::optional<PoseFrame> next() override {
    std::this_thread::sleep_for(std::chrono::duration<double>(period_));
    return inner_->next();
  }

 private:
  std::unique_ptr<PoseSource> inner_;
  double period_;
};

struct ServeOpts {
  std::optional<std::uint16_t> port;
  std::optional<double> duration;
  std::string transcript;
  std::string replay;
};

json stable_snapshot(const Session& s) {
  Snapshot snap = s.snapshot();
  snap.stats = {};
  return to_json(snap);
}

int cmd_serve_replay(const Globals& g, const ServeOpts& o) {
  std::ifstream in(o.replay);
  if (!in) {
    throw ConfigError("cannot open transcript " + o.replay);
  }
  Transcript t;
  try {
    t = read_transcript(in);
  } catch (const std::exception& e) {
    throw ConfigError(o.replay + ": " + e.what());
  }
  const auto session = replay_transcript(t);
  const json snap = stable_snapshot(*session);
  const fs::path dir = out_dir(g, std::nullopt);
  write_json(dir / "replay_snapshot.json", snap);
  std::cout << snap.dump() << '\n';
  return kExitOk;
}

int cmd_serve(const Globals& g, const ServeOpts& o) {
  if (!o.replay.empty()) {
    return cmd_serve_replay(g, o);
  }
  RunConfig cfg = load(g);
  if (o.port) {
    cfg.serve.server.port = *o.port;
  }
  Session session(session_config(cfg));
  Server server(session, cfg.serve.server);
  std::cout << "listening on " << (cfg.serve.server.bind_any ? "0.0.0.0" : "127.0.0.1") << ':'
            << server.port() << std::endl;

  std::unique_ptr<StreamBridge> bridge;
  if (cfg.serve.pose_source) {
    const PoseSourceSection& src = *cfg.serve.pose_source;
    RigidTransform calib;
    if (src.calibration) {
      calib = read_calibration(*src.calibration).transform;
    }
    std::unique_ptr<PoseSource> source;
    if (src.replay) {
      source = std::make_unique<PacedSource>(
          std::make_unique<ReplaySource>(ReplaySource::from_file(*src.replay)), src.replay_period_s);
    } else {
      const auto colon = src.connect->rfind(':');
      if (colon == std::string::npos) {
        throw ConfigError("serve.pose_source.connect must be host:port");
      }
      const int port = std::stoi(src.connect->substr(colon + 1));
      source = std::make_unique<SocketSource>(
          tcp_connect(src.connect->substr(0, colon), static_cast<std::uint16_t>(port)));
    }
    bridge = std::make_unique<StreamBridge>(calib, BridgeDirection::RealToVirtual,
                                            session.pose_sink());
    bridge->start(std::move(source));
  }

  server.start();
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    if (o.duration && std::chrono::steady_clock::now() - t0 >= std::chrono::duration<double>(*o.duration)) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  server.stop();
  server.join();
  if (bridge) {
    bridge->stop();
  }
  const bool interrupted = g_interrupted.load();
  const fs::path dir = out_dir(g, cfg);
  const fs::path transcript = o.transcript.empty() ? dir / "transcript.jsonl" : fs::path(o.transcript);
  {
    std::ofstream out(transcript);
    if (!out) {
      throw std::runtime_error("cannot write " + transcript.string());
    }
    write_transcript(out, session);
  }
  write_json(dir / "final_snapshot.json", stable_snapshot(session));
  log(g, "transcript " + transcript.string() + " at tick " + std::to_string(session.world().tick));
  return interrupted ? kExitInterrupted : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynsim: crowd simulation, benchmarking, calibration and intervention service"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run config file (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Crowd-only run, ETH dataset export");
  simulate->add_option("--duration", sim.duration, "Simulated seconds");
  simulate->add_option("--frames", sim.frames, "Recorded frames (overrides --duration)");

  BenchOpts bench;
  auto* bench_cmd = app.add_subcommand("bench", "Navigation benchmark suite");
  bench_cmd->add_option("--humans", bench.humans, "Human counts per cell");
  bench_cmd->add_option("--episodes", bench.episodes, "Episodes per cell");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads");
  bench_cmd->add_option("--replay", bench.replay, "Re-run one manifest episode");
  bench_cmd->add_option("--cell", bench.cell, "Manifest cell index for --replay");
  bench_cmd->add_option("--episode", bench.episode, "Episode index for --replay");

  std::string pairs;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate the real-to-virtual transform");
  calibrate->add_option("pairs", pairs, "Correspondence file")->required();

  ExportOpts exp;
  auto* export_cmd = app.add_subcommand("export", "Dataset reports and smoothed camera paths");
  export_cmd->add_option("--dataset", exp.dataset, "ETH-style dataset to convert and score");
  export_cmd->add_option("--waypoints", exp.waypoints, "Camera waypoints, one 'x y' per line");
  export_cmd->add_flag("--camera", exp.camera, "Smooth the config's smoothing.waypoints");
  export_cmd->add_option("--obs", exp.obs, "Observed frames per prediction task");
  export_cmd->add_option("--pred", exp.pred, "Predicted frames per prediction task");

  ServeOpts serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the intervention service");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks one)");
  serve_cmd->add_option("--duration", serve.duration, "Stop after this many wall-clock seconds");
  serve_cmd->add_option("--transcript", serve.transcript,
                        "Transcript path (default <out>/transcript.jsonl)");
  serve_cmd->add_option("--replay", serve.replay, "Replay a transcript headless and print the final snapshot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  struct sigaction sa {};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(g, sim);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(g, bench);
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(g, pairs);
    }
    if (export_cmd->parsed()) {
      return cmd_export(g, exp);
    }
    if (serve_cmd->parsed()) {
      return cmd_serve(g, serve);
    }
  } catch (const Interrupted&) {
    std::cerr << "dynsim: interrupted\n";
    return kExitInterrupted;
  } catch (const ConfigError& e) {
    std::cerr << "dynsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SceneError& e) {
    std::cerr << "dynsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dynsim: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dynsim: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
