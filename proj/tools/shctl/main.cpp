// Copyright 2026 The sharedctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// shctl: headless runs, Monte-Carlo batches, verification and the real-time service.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sharedctl/batch.hpp"
#include "sharedctl/metrics.hpp"
#include "sharedctl/scenario.hpp"
#include "sharedctl/server.hpp"
#include "sharedctl/verification.hpp"

#ifndef SHAREDCTL_VERSION
#define SHAREDCTL_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace sharedctl;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;

// Usage and configuration problems; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Request {
  std::string preset;
  std::string scenario;
  std::string mode;
  int trials = 40;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string serve_addr = "127.0.0.1:8080";
  unsigned threads = 0;
  bool paused = false;
  double tick_period = 0.05;
  std::string command_line;
};

std::vector<ControlMode> modes_of(const std::string& mode, std::vector<ControlMode> fallback) {
  if (mode.empty()) return fallback;
  if (mode == "both") return {ControlMode::Baseline, ControlMode::SharedControl};
  try {
    return {control_mode_from_string(mode)};
  } catch (const std::invalid_argument&) {
    throw UsageError("unknown mode '" + mode + "' (expected baseline, shared_control, both)");
  }
}

ScenarioSpec base_spec(const Request& req, const std::string& preset_override = "") {
  try {
    ScenarioSpec spec;
    if (!req.scenario.empty()) {
      spec = load_scenario_file(req.scenario);
    } else {
      const std::string name = preset_override.empty() ? req.preset : preset_override;
      if (name.empty()) throw UsageError("either --preset or --scenario is required");
      spec = scenario_preset(preset_from_string(name));
    }
    if (req.seed) spec.seed = *req.seed;
    spec.validate();
    return spec;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream test(probe);
  if (ec || !test) throw UsageError("output directory '" + dir.string() + "' is not writable");
  test.close();
  fs::remove(probe, ec);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("failed to write '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest(const Request& req, const ScenarioSpec& spec, const std::string& log_digest) {
  return {{"tool", "shctl"},
          {"code_version", SHAREDCTL_VERSION},
          {"command", req.command_line},
          {"preset", to_string(spec.preset)},
          {"mode", to_string(spec.mode)},
          {"seed", spec.seed},
          {"driver_set", spec.driver_set},
          {"spec_hash", digest_hex(to_json(spec))},
          {"scenario_file", "scenario.json"},
          {"log_digest", log_digest}};
}

// log.csv, events.json, scenario.json and manifest.json for one run
void write_run(const fs::path& dir, const Request& req, const ScenarioSpec& spec, const RunLog& log,
               const std::vector<EventRecord>& events) {
  prepare_dir(dir);
  const std::string csv = log.csv();
  write_file(dir / "log.csv", csv);
  write_file(dir / "events.json", events_to_json(events) + "\n");
  write_file(dir / "scenario.json", to_json(spec) + "\n");
  write_file(dir / "manifest.json", manifest(req, spec, digest_hex(csv)).dump(2) + "\n");
}

std::string run_name(const ScenarioSpec& spec) {
  return to_string(spec.preset) + "_" + to_string(spec.mode) + "_d" + std::to_string(spec.driver_set) + "_s" +
         std::to_string(spec.seed);
}

int count(const std::vector<EventRecord>& events, EventKind kind) {
  int n = 0;
  for (const EventRecord& e : events) n += e.kind == kind;
  return n;
}

int cmd_run(const Request& req) {
  const ScenarioSpec base = base_spec(req);
  const fs::path out = req.out.empty() ? fs::path("out") : fs::path(req.out);
  for (ControlMode mode : modes_of(req.mode, {base.mode})) {
    ScenarioSpec spec = base;
    spec.mode = mode;
    Simulation sim(spec);
    sim.run();
    const auto events = detect_events(sim.log(), sim.event_context());
    const fs::path dir = out / run_name(spec);
    write_run(dir, req, spec, sim.log(), events);
    std::printf("%s: %zu ticks, %d crash, %d near miss, %d off-road, log digest %s -> %s\n", run_name(spec).c_str(),
                sim.log().rows.size(), count(events, EventKind::Crash), count(events, EventKind::NearMiss),
                count(events, EventKind::OffRoad), digest_hex(sim.log().csv()).c_str(), dir.string().c_str());
  }
  return kExitOk;
}

int cmd_batch(const Request& req) {
  if (req.trials < 1) throw UsageError("--trials must be at least 1");
  const ScenarioSpec base = base_spec(req);
  const fs::path out = prepare_dir(req.out.empty() ? fs::path("out") / ("batch_" + to_string(base.preset))
                                                   : fs::path(req.out));
  BatchOptions opts;
  opts.trials = req.trials;
  opts.seed_base = req.seed.value_or(1);
  opts.modes = modes_of(req.mode, {ControlMode::Baseline, ControlMode::SharedControl});
  opts.threads = req.threads;
  opts.keep_logs = true;
  const BatchResult result = run_batch(base, opts);

  std::ostringstream trials;
  trials << "mode,driver_set,seed,events,crashes,near_misses,off_roads,road_departures,lambda_max,spec_hash,"
            "log_digest\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const TrialResult& t = result.trials[i];
    const ScenarioSpec spec = trial_spec(base, t.mode, static_cast<int>(i % opts.trials), opts.seed_base);
    write_run(out / "runs" / run_name(spec), req, spec, t.log, t.events);
    char lam[32];
    std::snprintf(lam, sizeof lam, "%.3f", t.lambda_max);
    trials << to_string(t.mode) << ',' << t.driver_set << ',' << t.seed << ','
           << count(t.events, EventKind::Correction) + count(t.events, EventKind::Evasion) << ','
           << count(t.events, EventKind::Crash) << ',' << count(t.events, EventKind::NearMiss) << ','
           << count(t.events, EventKind::OffRoad) << ',' << count(t.events, EventKind::RoadDeparture) << ',' << lam
           << ',' << t.spec_digest << ',' << t.log_digest << '\n';
  }
  write_file(out / "trials.csv", trials.str());
  write_file(out / "report.json", result.report.to_json() + "\n");
  write_file(out / "report.txt", result.report.to_table());
  std::ofstream samples(out / "samples.csv");
  result.report.write_samples_csv(samples);
  json m = manifest(req, base, "");
  m.erase("log_digest");
  m.erase("scenario_file");
  m["mode"] = req.mode.empty() ? "both" : req.mode;
  m["trials"] = req.trials;
  m["seed_base"] = opts.seed_base;
  write_file(out / "manifest.json", m.dump(2) + "\n");
  write_file(out / "scenario.json", to_json(base) + "\n");
  std::cout << result.report.to_table() << "artifacts: " << out.string() << "\n";
  return kExitOk;
}

int cmd_verify(const Request& req) {
  std::vector<std::string> presets;
  if (!req.scenario.empty()) presets.push_back("");
  else if (!req.preset.empty()) presets.push_back(req.preset);
  else presets = preset_names();
  bool ok = true;
  for (const std::string& name : presets) {
    ScenarioSpec spec = base_spec(req, name);
    const auto modes = modes_of(req.mode, {ControlMode::SharedControl});
    if (modes.size() != 1) throw UsageError("verify runs a single mode");
    spec.mode = modes.front();
    const VerifyResult res = verify_scenario(spec);
    std::printf("verify %s (%s, seed %llu, driver set %d)\n", to_string(spec.preset).c_str(),
                to_string(spec.mode).c_str(), static_cast<unsigned long long>(spec.seed), spec.driver_set);
    std::cout << res.summary();
    if (!req.out.empty()) {
      const fs::path dir = fs::path(req.out) / ("verify_" + to_string(spec.preset));
      write_run(dir, req, spec, res.log, res.events);
      write_file(dir / "verify.json", res.to_json() + "\n");
    }
    ok = ok && res.passed();
  }
  std::printf("%s\n", ok ? "verification passed" : "verification FAILED");
  return ok ? kExitOk : kExitAssertion;
}

std::pair<std::string, unsigned short> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--serve-addr must be host:port");
  try {
    const int port = std::stoi(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    return {addr.substr(0, colon), static_cast<unsigned short>(port)};
  } catch (const std::logic_error&) {
    throw UsageError("--serve-addr has an invalid port: '" + addr + "'");
  }
}

int cmd_serve(const Request& req) {
  ScenarioSpec spec = base_spec(req);
  const auto modes = modes_of(req.mode, {spec.mode});
  if (modes.size() != 1) throw UsageError("serve runs a single mode");
  spec.mode = modes.front();
  ServerOptions opts;
  std::tie(opts.address, opts.port) = parse_addr(req.serve_addr);
  opts.start_paused = req.paused;
  opts.tick_period = req.tick_period;
  const fs::path out = prepare_dir(req.out.empty() ? fs::path("out") / ("serve_" + run_name(spec)) : fs::path(req.out));
  std::unique_ptr<SimServer> server;
  try {
    server = std::make_unique<SimServer>(spec, opts);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::printf("serving %s on ws://%s:%u/sim (scenario list at http://%s:%u/scenario)\n", run_name(spec).c_str(),
              opts.address.c_str(), server->port(), opts.address.c_str(), server->port());
  std::fflush(stdout);
  server->run();
  const SimSession& session = server->session();
  const auto events = detect_events(session.log(), session.simulation().event_context());
  write_run(out, req, spec, session.log(), events);
  write_file(out / "annotations.json", session.annotations_json() + "\n");
  std::printf("run finished at %.2f s, mean tick lateness %.3f ms, artifacts in %s\n",
              session.simulation().world().time, 1e3 * server->mean_lateness(), out.string().c_str());
  return kExitOk;
}

int cmd_report(const Request& req) {
  if (req.out.empty()) throw UsageError("report needs --out pointing at a directory of runs");
  const fs::path root(req.out);
  if (!fs::is_directory(root)) throw UsageError("'" + root.string() + "' is not a directory");
  std::vector<fs::path> logs;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "log.csv") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  if (logs.empty()) throw UsageError("no log.csv files under '" + root.string() + "'");

  std::vector<RunEvents> runs;
  std::string preset;
  for (const fs::path& log_path : logs) {
    const fs::path dir = log_path.parent_path();
    ScenarioSpec spec;
    try {
      spec = load_scenario(read_file(dir / "scenario.json"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(dir.string() + "/scenario.json: " + e.what());
    }
    if (preset.empty()) preset = to_string(spec.preset);
    if (preset != to_string(spec.preset)) throw UsageError("runs under '" + root.string() + "' mix presets");
    std::ifstream in(log_path);
    RunLog log;
    try {
      log = RunLog::read_csv(in);
    } catch (const std::invalid_argument& e) {
      throw UsageError(log_path.string() + ": " + e.what());
    }
    EventContext ctx{spec.preset, spec.lane_width, spec.ego_length, spec.ego_width, spec.visibility_range};
    runs.push_back({to_string(spec.mode), spec.driver_set, spec.seed, detect_events(log, ctx)});
  }
  const KpiReport report = aggregate(runs, preset);
  write_file(root / "report.json", report.to_json() + "\n");
  write_file(root / "report.txt", report.to_table());
  std::cout << report.to_table() << "re-aggregated " << logs.size() << " runs\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-control driving simulator: headless runs, batches, verification and live service"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SHAREDCTL_VERSION);
  Request req;
  for (int i = 0; i < argc; ++i) req.command_line += (i ? " " : "") + std::string(argv[i]);

  auto scenario_opts = [&req](CLI::App* sub) {
    sub->add_option("--preset", req.preset, "Scenario preset (corrective, evasive)");
    sub->add_option("--scenario", req.scenario, "Scenario document (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", req.seed, "Seed (batch: seed base)");
  };

  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its log and events");
  scenario_opts(run);
  run->add_option("--mode", req.mode, "baseline, shared_control or both");
  run->add_option("--out", req.out, "Output directory (default out/)");

  CLI::App* batch = app.add_subcommand("batch", "Monte-Carlo trials over the driver population in both modes");
  scenario_opts(batch);
  batch->add_option("--mode", req.mode, "baseline, shared_control or both (default both)");
  batch->add_option("--trials", req.trials, "Trials per condition (default 40)");
  batch->add_option("--out", req.out, "Output directory");
  batch->add_option("--threads", req.threads, "Worker threads (default: hardware concurrency)");

  CLI::App* verify = app.add_subcommand("verify", "Reproduce the verification scenarios and check them");
  scenario_opts(verify);
  verify->add_option("--mode", req.mode, "Control mode (default shared_control)");
  verify->add_option("--out", req.out, "Also write logs and check results here");

  CLI::App* serve = app.add_subcommand("serve", "Real-time run with websocket telemetry and pilot input");
  scenario_opts(serve);
  serve->add_option("--mode", req.mode, "Control mode");
  serve->add_option("--serve-addr", req.serve_addr, "host:port to listen on (default 127.0.0.1:8080)");
  serve->add_option("--out", req.out, "Output directory for the run artifacts");
  serve->add_flag("--paused", req.paused, "Wait for a start control message");
  serve->add_option("--tick-period", req.tick_period, "Wall-clock seconds per control tick (default 0.05)");

  CLI::App* report = app.add_subcommand("report", "Re-aggregate the run logs found under --out");
  report->add_option("--out", req.out, "Directory containing run logs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(req);
    if (*batch) return cmd_batch(req);
    if (*verify) return cmd_verify(req);
    if (*serve) return cmd_serve(req);
    if (*report) return cmd_report(req);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "shctl: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "shctl: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "shctl: error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
