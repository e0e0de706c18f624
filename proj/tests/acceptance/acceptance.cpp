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

// Acceptance suite: one PASS/FAIL line per criterion. Every verdict is computed here from
// logs, batch results or direct library calls; nothing is read back from the verify checks.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sharedctl/arbitration.hpp"
#include "sharedctl/batch.hpp"
#include "sharedctl/metrics.hpp"
#include "sharedctl/nmpc.hpp"
#include "sharedctl/scenario.hpp"
#include "sharedctl/steering.hpp"

using namespace sharedctl;
namespace pi = plant_index;

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kYawTol = 0.02;
constexpr double kJacobianTol = 1e-4;
constexpr double kEulerTol = 1e-4;
constexpr int kRandomSolves = 10000;
constexpr int kBatchTrials = 40;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget;  // s
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunLog run_log(const ScenarioSpec& spec) {
  Simulation sim(spec);
  sim.run();
  return sim.log();
}

ScenarioSpec verify_spec(Preset preset) {
  ScenarioSpec s = scenario_preset(preset);
  s.mode = ControlMode::SharedControl;
  return s;
}

std::size_t count_kind(const std::vector<EventRecord>& ev, EventKind kind) {
  return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](const EventRecord& e) { return e.kind == kind; }));
}

// Straight-road NMPC problem around a random perturbed state.
struct RandomProblem {
  VehicleState state;
  RoadFrame road;
  Reference ref;
  AuthorityCommand cmd;
};

RandomProblem random_problem(std::mt19937_64& rng, const NmpcConfig& c) {
  static const ReferencePath path = ReferencePath::straight(-100.0, 0.0, 0.0, 4000.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomProblem p;
  p.state.vx = 25.0 + 5.0 * u(rng);
  p.state.vy = 0.3 * u(rng);
  p.state.r = 0.25 * u(rng);
  p.state.theta = 0.4 * u(rng);
  p.state.omega = u(rng);
  p.state.y = 2.0 * u(rng);
  p.state.psi = 0.05 * u(rng);
  p.road = {p.state.y, p.state.psi, 0.0};
  p.ref = build_reference(path, p.state, c);
  p.cmd.lambda = 6.25 + 5.75 * u(rng);
  if (u(rng) > 0.0) {
    p.cmd.e_y_upper.assign(c.horizon, 1.5);
    const int from = static_cast<int>(15 + 15 * u(rng));
    for (int k = std::max(0, from); k < c.horizon; ++k) p.cmd.e_y_upper[k] = -1.25;
    p.cmd.e_y_lower = -1.5;
  }
  return p;
}

// ---------------------------------------------------------------------------------------------

Outcome constraint_satisfaction() {
  double worst_band = -1e9, worst_rate_ratio = 0.0, worst_yaw = 0.0;
  for (Preset preset : {Preset::Corrective, Preset::Evasive}) {
    const ScenarioSpec spec = verify_spec(preset);
    const RunLog log = run_log(spec);
    double prev = 0.0;
    for (const LogRow& r : log.rows) {
      worst_band = std::max(worst_band, std::abs(r.t_mpc) - r.lambda);
      worst_rate_ratio = std::max(worst_rate_ratio, std::abs(r.t_mpc - prev) / spec.nmpc.stage_dt /
                                                        (spec.nmpc.torque_rate_bound + kBoundTol));
      worst_yaw = std::max(worst_yaw, std::abs(r.ego.r));
      prev = r.t_mpc;
    }
  }
  const bool logs_ok = worst_band <= kBoundTol && worst_rate_ratio <= 1.0 && worst_yaw <= 0.4 + kYawTol;

  std::mt19937_64 rng(2024);
  int violations = 0;
  for (const NmpcConfig& c : {NmpcConfig::corrective(), NmpcConfig::evasive()}) {
    NmpcSolver solver(c);
    ControlOutput warm;
    bool have_warm = false;
    for (int i = 0; i < kRandomSolves / 2; ++i) {
      const RandomProblem p = random_problem(rng, c);
      const ControlOutput out = solver.solve(p.state, p.road, p.ref, p.cmd, have_warm ? &warm : nullptr);
      double last = have_warm ? std::clamp(warm.torque, -p.cmd.lambda, p.cmd.lambda) : 0.0;
      bool ok = out.torque == out.torques.front();
      for (double t : out.torques) {
        ok = ok && std::abs(t) <= p.cmd.lambda + kBoundTol &&
             std::abs(t - last) / c.stage_dt <= c.torque_rate_bound + kBoundTol;
        last = t;
      }
      if (!ok) ++violations;
      warm = out;
      have_warm = true;
    }
  }
  return {logs_ok && violations == 0,
          fmt("verify logs: max(|T|-lambda) %.2e N m, rate at %.3f of bound, max |r| %.3f rad/s; "
              "%d/%d random solves out of bounds",
              worst_band, worst_rate_ratio, worst_yaw, violations, kRandomSolves)};
}

Outcome evasive_avoidance() {
  const ScenarioSpec spec = verify_spec(Preset::Evasive);
  Simulation sim(spec);
  sim.run();
  const RunLog& log = sim.log();
  const std::vector<EventRecord> ev = detect_events(log, sim.event_context());
  const std::size_t crashes = count_kind(ev, EventKind::Crash);

  int lambda_mismatch = 0, bound_mismatch = 0;
  double first_close = -1.0, first_high = -1.0;
  bool saw_low = false;
  for (const LogRow& r : log.rows) {
    const bool close = r.min_dpred < kEvasiveClearance;
    if (close && first_close < 0.0) first_close = r.time;
    if (r.lambda == 12.0 && first_high < 0.0) first_high = r.time;
    if (r.lambda == 3.0 && first_high < 0.0) saw_low = true;
    if (r.lambda != (close ? 12.0 : 3.0)) ++lambda_mismatch;
    if (r.e_y_upper_min != (close ? -1.25 : 1.5)) ++bound_mismatch;
  }
  const double tick = spec.nmpc.stage_dt;
  const bool crossing_ok = first_close >= 0.0 && first_high >= 0.0 && saw_low &&
                           std::abs(first_high - first_close) <= tick + 1e-9;
  const double final_e_y = log.rows.back().e_y;
  const bool passed = crashes == 0 && crossing_ok && lambda_mismatch == 0 && bound_mismatch == 0 &&
                      std::abs(final_e_y) <= 0.3;
  return {passed, fmt("%zu crashes; min d(k) < 50 m from %.2f s, lambda 12 from %.2f s; %d authority and %d "
                      "bound ticks disagree with d(k); final e_y %.3f m",
                      crashes, first_close, first_high, lambda_mismatch, bound_mismatch, final_e_y)};
}

Outcome corrective_escalation() {
  const RunLog log = run_log(verify_spec(Preset::Corrective));
  const auto& rows = log.rows;
  // pre-window: lane keeping before the overtake starts
  std::size_t overtake = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].intent == "overtake") {
      overtake = i;
      break;
    }
  }
  if (overtake == 0 || overtake == rows.size()) return {false, "no overtake in the verify log"};
  double pre = 0.0;
  for (std::size_t i = 0; i < overtake; ++i) pre += rows[i].lambda;
  pre /= static_cast<double>(overtake);
  // window: threat perceived during the overtake until it has passed
  std::size_t open = rows.size(), clear = rows.size();
  for (std::size_t i = overtake; i < rows.size() && open == rows.size(); ++i) {
    if (rows[i].visible == 1 && rows[i].threat_id >= 0) open = i;
  }
  for (std::size_t i = open; i < rows.size() && clear == rows.size(); ++i) {
    if (rows[i].threat_id < 0) clear = i;
  }
  if (clear == rows.size()) return {false, "threat never perceived and cleared"};
  double peak = 0.0;
  for (std::size_t i = open; i <= clear; ++i) peak = std::max(peak, rows[i].lambda);
  double after = 0.0;
  for (const LogRow& r : rows) {
    if (r.time >= rows[clear].time + 3.0 - 1e-9) after = std::max(after, r.lambda);
  }
  const bool passed = peak - pre >= 3.0 && after < 4.0;
  return {passed, fmt("window %.2f-%.2f s: peak %.2f N m vs pre-window mean %.2f N m (rise %.2f, need 3); "
                      "max %.2f N m from 3 s after clearance",
                      rows[open].time, rows[clear].time, peak, pre, peak - pre, after)};
}

Outcome directional_safety() {
  BatchOptions opts;
  opts.trials = kBatchTrials;
  const BatchResult corrective = run_batch(scenario_preset(Preset::Corrective), opts);
  const BatchResult evasive = run_batch(scenario_preset(Preset::Evasive), opts);
  auto tally = [](const BatchResult& b, ControlMode mode, EventKind kind) {
    std::size_t n = 0;
    for (const TrialResult& t : b.trials) {
      if (t.mode == mode) n += count_kind(t.events, kind);
    }
    return n;
  };
  const std::size_t nm_base = tally(corrective, ControlMode::Baseline, EventKind::NearMiss);
  const std::size_t nm_sc = tally(corrective, ControlMode::SharedControl, EventKind::NearMiss);
  const std::size_t cr_base = tally(evasive, ControlMode::Baseline, EventKind::Crash);
  const std::size_t cr_sc = tally(evasive, ControlMode::SharedControl, EventKind::Crash);
  const bool passed = static_cast<double>(nm_sc) <= 0.7 * static_cast<double>(nm_base) && cr_sc < cr_base && cr_sc <= 2;
  return {passed, fmt("corrective near misses %zu -> %zu (limit %.1f); evasive crashes %zu -> %zu (limit 2), "
                      "%d trials per condition",
                      nm_base, nm_sc, 0.7 * static_cast<double>(nm_base), cr_base, cr_sc, kBatchTrials)};
}

Outcome numerics() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_jac = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const NmpcConfig c = trial % 2 ? NmpcConfig::evasive() : NmpcConfig::corrective();
    RandomProblem p = random_problem(rng, c);
    std::vector<double> inc(c.horizon);
    for (double& v : inc) v = 0.5 * u(rng);
    const double torque_prev = 0.5 * u(rng);
    const PlantVector z0 = pack(p.state, p.road);
    const Rollout ro = rollout(z0, torque_prev, inc, p.cmd.lambda, p.ref, c, true);
    for (int j = 0; j < c.horizon; ++j) {
      std::vector<double> ip = inc, im = inc;
      ip[j] += 1e-6;
      im[j] -= 1e-6;
      const Rollout rp = rollout(z0, torque_prev, ip, p.cmd.lambda, p.ref, c, false);
      const Rollout rm = rollout(z0, torque_prev, im, p.cmd.lambda, p.ref, c, false);
      for (int k = j + 1; k <= c.horizon; ++k) {
        const PlantVector fd = (rp.states[k] - rm.states[k]) / 2e-6;
        if (fd.norm() < 1e-8) continue;
        worst_jac = std::max(worst_jac, (ro.sensitivities[k].col(j) - fd).norm() / fd.norm());
      }
    }
  }

  double worst_euler = 0.0, worst_coarse = 0.0;
  const VehicleParams vp;
  const SteeringParams sp;
  for (int trial = 0; trial < 100; ++trial) {
    VehicleState s;
    s.x = 50.0 * u(rng);
    s.y = 3.0 * u(rng);
    s.psi = 0.3 * u(rng);
    s.vx = 20.0 + 10.0 * u(rng);
    s.vy = 0.5 * u(rng);
    s.r = 0.3 * u(rng);
    s.theta = 0.5 * u(rng);
    s.omega = u(rng);
    const RoadFrame road{s.y, s.psi, 0.003 * u(rng)};
    PlantInputs in;
    in.a_x = u(rng);
    in.driver_torque = 4.0 * u(rng);
    in.actuator_torque = 4.0 * u(rng);
    in.damping = variable_damping(6.0 + 6.0 * u(rng), sp.damping);
    const PlantVector z0 = pack(s, road);
    // one plant step as the simulator takes it
    const double h = Simulation::kPlantDt;
    const PlantVector fast = rk4(z0, road.rho, in, vp, sp, h);
    PlantVector z = z0;
    for (int i = 0; i < static_cast<int>(std::lround(h / 1e-5)); ++i) z += 1e-5 * plant_rates(z, road.rho, in, vp, sp);
    // a whole control tick in one step, reported only
    const PlantVector coarse = rk4(z0, road.rho, in, vp, sp, 0.05);
    PlantVector zc = z0;
    for (int i = 0; i < 5000; ++i) zc += 1e-5 * plant_rates(zc, road.rho, in, vp, sp);
    for (int k = 0; k < kPlantDim; ++k) {
      worst_euler = std::max(worst_euler, std::abs(fast[k] - z[k]) / std::max(1.0, std::abs(z[k])));
      worst_coarse = std::max(worst_coarse, std::abs(coarse[k] - zc[k]) / std::max(1.0, std::abs(zc[k])));
    }
  }

  RandomProblem p = random_problem(rng, NmpcConfig{});
  p.cmd.lambda = 0.0;
  NmpcSolver solver(NmpcConfig{});
  const ControlOutput zero = solver.solve(p.state, p.road, p.ref, p.cmd);
  bool zero_ok = zero.torque == 0.0;
  for (double t : zero.torques) zero_ok = zero_ok && t == 0.0;

  return {worst_jac < kJacobianTol && worst_euler < kEulerTol && zero_ok,
          fmt("Jacobian rel. error %.2e, RK4 vs Euler %.2e per field per 1 ms step (%.2e over one 50 ms step), "
              "zero-authority torque %s",
              worst_jac, worst_euler, worst_coarse, zero_ok ? "exactly 0" : "nonzero")};
}

Outcome fuzzy_conformance() {
  const FuzzySystem sys = FuzzySystem::corrective_default();
  // Right/Border keep Medium except Border/Away; Left and Border/Away escalate near, release far
  const int table[2][9] = {{1, 1, 1, 1, 1, 2, 2, 2, 2}, {1, 1, 1, 1, 1, 0, 0, 0, 0}};
  const double pos[3] = {0.0, 1.75, 3.5}, rate[3] = {-0.6, 0.0, 0.6}, dist[2] = {20.0, 140.0};
  int wrong = 0;
  for (int r = 0; r < 2; ++r) {
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        const FuzzyEvaluation ev = evaluate(sys, {pos[p], rate[q], dist[r], std::nullopt});
        const auto best = std::max_element(ev.rule_strengths.begin(), ev.rule_strengths.end());
        const FuzzyRule& rule = sys.rules[best - ev.rule_strengths.begin()];
        const bool ok = rule.position == static_cast<std::size_t>(p) && rule.intention == static_cast<std::size_t>(q) &&
                        rule.risk == static_cast<std::size_t>(r) &&
                        rule.output == static_cast<std::size_t>(table[r][p * 3 + q]);
        if (!ok) ++wrong;
      }
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ey(-4.0, 8.0), dy(-3.0, 3.0), d(0.0, 250.0);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 20000; ++i) {
    const double l = corrective_authority({ey(rng), dy(rng), d(rng), std::nullopt}, sys);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  const double corner = corrective_authority({6.0, 1.5, 0.0, std::nullopt}, sys);
  return {wrong == 0 && lo >= 0.0 && hi <= 8.0 && corner >= 6.5,
          fmt("%d/18 prototypes off-table; lambda range [%.3f, %.3f] N m; High corner %.3f N m", wrong, lo, hi,
              corner)};
}

Outcome damping_stability() {
  const double scaled = column_step_overshoot(12.0, DampingMode::AuthorityScaled);
  const double fixed = column_step_overshoot(12.0, DampingMode::Nominal);
  return {scaled < fixed, fmt("overshoot at lambda 12: %.2f%% with b_lambda, %.2f%% with fixed b", 100.0 * scaled,
                              100.0 * fixed)};
}

Outcome determinism() {
  int pairs = 0, differing = 0;
  for (Preset preset : {Preset::Corrective, Preset::Evasive}) {
    for (ControlMode mode : {ControlMode::Baseline, ControlMode::SharedControl}) {
      for (std::uint64_t seed : {1ull, 42ull, 1234567ull}) {
        ScenarioSpec spec = scenario_preset(preset);
        spec.mode = mode;
        spec.seed = seed;
        spec.driver_set = static_cast<int>(seed % driver_population().size());
        spec.driver = driver_population()[spec.driver_set];
        ++pairs;
        if (run_log(spec).csv() != run_log(spec).csv()) ++differing;
      }
    }
  }
  return {differing == 0, fmt("%d/%d run pairs differ", differing, pairs)};
}

double u_stat(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

double permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double centre = 0.5 * static_cast<double>(a.size() * b.size());
  const double obs = std::abs(u_stat(a, b) - centre);
  long hits = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << pooled.size()); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < pooled.size(); ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
    ++total;
    if (std::abs(u_stat(x, y) - centre) >= obs - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

Outcome statistics_oracle() {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> tied(0, 4);
  std::normal_distribution<double> smooth(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (std::size_t na = 1; na <= 6; ++na) {
    for (std::size_t nb = 1; nb <= 6; ++nb) {
      for (int rep = 0; rep < 6; ++rep) {
        std::vector<double> a(na), b(nb);
        for (double& v : a) v = rep % 2 ? tied(rng) : smooth(rng);
        for (double& v : b) v = rep % 2 ? tied(rng) + rep / 2 : smooth(rng) + 0.4 * rep;
        worst = std::max(worst, std::abs(rank_sum_test(a, b) - permutation_p(a, b)));
        ++cases;
      }
    }
  }
  bool identical_ok = true;
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> a(n);
    for (double& v : a) v = tied(rng);
    identical_ok = identical_ok && rank_sum_test(a, a) == 1.0;
  }
  return {worst <= 1e-12 && identical_ok,
          fmt("%d sample-size cases, max |p - permutation p| %.1e; identical samples %s", cases, worst,
              identical_ok ? "give p = 1" : "do not give p = 1")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the shared-control simulator"};
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--expect-fail", expect_fail,
                 "Criterion expected to fail; the run fails if it passes (repeatable)");
  app.add_option("--only", only, "Run only these criteria (repeatable)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "constraint satisfaction", 120.0, constraint_satisfaction},
      {2, "evasive avoidance", 30.0, evasive_avoidance},
      {3, "corrective escalation", 30.0, corrective_escalation},
      {4, "directional safety", 600.0, directional_safety},
      {5, "numerics", 60.0, numerics},
      {6, "fuzzy conformance", 5.0, fuzzy_conformance},
      {7, "damping stability", 10.0, damping_stability},
      {8, "determinism", 30.0, determinism},
      {9, "statistics oracle", 60.0, statistics_oracle},
  };
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  const std::set<int> selected(only.begin(), only.end());

  int unexpected = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget;
    const bool passed = o.passed && in_time;
    const bool expected_fail = expected.count(c.id) > 0;
    std::printf("%s %d %s: %s (%.1f s of %.0f s)%s\n", passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget,
                expected_fail ? (passed ? " [unexpected pass]" : " [expected failure]") : "");
    std::fflush(stdout);
    if (passed == expected_fail) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
