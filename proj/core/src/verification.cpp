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

#include "sharedctl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sharedctl/arbitration.hpp"

namespace sharedctl {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

std::optional<EscalationWindow> escalation_window(const RunLog& log) {
  const auto& rows = log.rows;
  std::size_t start = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].intent == "overtake") {
      start = i;
      break;
    }
  }
  if (start == 0 || start == rows.size()) return std::nullopt;
  std::size_t open = rows.size();
  for (std::size_t i = start; i < rows.size(); ++i) {
    if (rows[i].visible && rows[i].threat_id >= 0) {
      open = i;
      break;
    }
  }
  if (open == rows.size()) return std::nullopt;
  std::size_t clear = rows.size();
  for (std::size_t i = open; i < rows.size(); ++i) {
    if (rows[i].threat_id < 0) {
      clear = i;
      break;
    }
  }
  if (clear == rows.size()) return std::nullopt;

  EscalationWindow w;
  for (std::size_t i = 0; i < start; ++i) w.pre_mean += rows[i].lambda;
  w.pre_mean /= static_cast<double>(start);
  w.t_open = rows[open].time;
  w.t_clear = rows[clear].time;
  for (std::size_t i = open; i <= clear; ++i) w.peak = std::max(w.peak, rows[i].lambda);
  for (const LogRow& r : rows) {
    if (r.time >= w.t_clear + kRelaxTime - 1e-9) w.max_after_relax = std::max(w.max_after_relax, r.lambda);
  }
  return w;
}

bool VerifyResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::string VerifyResult::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const VerifyCheck& c : checks) list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return nlohmann::json{{"preset", to_string(preset)},
                        {"spec_digest", spec_digest},
                        {"passed", passed()},
                        {"checks", list}}
      .dump(2);
}

std::string VerifyResult::summary() const {
  std::string out;
  for (const VerifyCheck& c : checks) out += (c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
  return out;
}

VerifyResult verify_scenario(const ScenarioSpec& spec) {
  VerifyResult res;
  res.preset = spec.preset;
  res.spec_digest = digest_hex(to_json(spec));
  const bool emergency = spec.preset == Preset::Evasive && spec.mode == ControlMode::SharedControl;

  Simulation sim(spec);
  int threshold_mismatch = 0, bound_mismatch = 0;
  double first_trigger = -1.0;
  while (!sim.finished()) {
    sim.tick();
    if (!emergency || sim.clearances().empty()) continue;
    const std::vector<double>& d = sim.clearances();
    const AuthorityCommand& cmd = sim.world().authority;
    const double dmin = *std::min_element(d.begin(), d.end());
    const double expected = dmin < kEvasiveClearance ? kEvasiveHighAuthority : kEvasiveLowAuthority;
    if (cmd.lambda != expected) ++threshold_mismatch;
    if (dmin < kEvasiveClearance && first_trigger < 0.0) first_trigger = sim.log().rows.back().time;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double ub = d[k] >= kEvasiveClearance ? kEvasiveSafeUpper : kEvasiveShiftUpper;
      if (k >= cmd.e_y_upper.size() || cmd.e_y_upper[k] != ub) ++bound_mismatch;
    }
    if (!cmd.e_y_lower || *cmd.e_y_lower != kEvasiveLower) ++bound_mismatch;
  }
  res.log = sim.log();
  res.events = detect_events(res.log, sim.event_context());
  const auto& rows = res.log.rows;
  const NmpcConfig& cfg = spec.nmpc;

  double torque_excess = -1e300, rate_max = 0.0, yaw_max = 0.0, torque_max = 0.0, lambda_max = 0.0;
  double prev = 0.0;
  for (const LogRow& r : rows) {
    torque_excess = std::max(torque_excess, std::abs(r.t_mpc) - r.lambda);
    rate_max = std::max(rate_max, std::abs(r.t_mpc - prev) / cfg.stage_dt);
    yaw_max = std::max(yaw_max, std::abs(r.ego.r));
    torque_max = std::max(torque_max, std::abs(r.t_mpc));
    lambda_max = std::max(lambda_max, r.lambda);
    prev = r.t_mpc;
  }
  int crashes = 0, departures = 0;
  for (const EventRecord& e : res.events) {
    crashes += e.kind == EventKind::Crash;
    departures += e.kind == EventKind::RoadDeparture;
  }

  res.checks.push_back({"torque_within_authority", torque_excess <= kBoundTolerance,
                        fmt("max(|T_mpc| - lambda) = %.3g N m", torque_excess)});
  res.checks.push_back({"torque_rate", rate_max <= cfg.torque_rate_bound + kBoundTolerance,
                        fmt("max |dT_mpc|/T_s = %.2f N m/s (bound %.0f)", rate_max, cfg.torque_rate_bound)});
  res.checks.push_back({"yaw_rate", yaw_max <= cfg.yaw_rate_bound + kYawRateTolerance,
                        fmt("max |r| = %.3f rad/s (bound %.2f)", yaw_max, cfg.yaw_rate_bound)});
  res.checks.push_back({"no_crash", crashes == 0, fmt("%.0f crash events", crashes)});
  res.checks.push_back({"no_road_departure", departures == 0, fmt("%.0f departures", departures)});

  if (spec.preset == Preset::Evasive) {
    res.checks.push_back({"authority_escalated", lambda_max == kEvasiveHighAuthority,
                          fmt("max lambda = %.2f N m, first trigger at %.2f s", lambda_max, first_trigger)});
    res.checks.push_back({"authority_threshold", emergency && threshold_mismatch == 0,
                          fmt("%.0f ticks where lambda disagrees with min d(k)", threshold_mismatch)});
    res.checks.push_back({"stage_bounds", emergency && bound_mismatch == 0,
                          fmt("%.0f stage bounds disagree with d(k)", bound_mismatch)});
    res.checks.push_back({"torque_within_12", torque_max <= kEvasiveHighAuthority + kBoundTolerance,
                          fmt("max |T_mpc| = %.3f N m", torque_max)});
    const double final_ey = rows.empty() ? 0.0 : rows.back().e_y;
    res.checks.push_back({"recentered", std::abs(final_ey) <= kRecenterTolerance,
                          fmt("final e_y = %.3f m", final_ey)});
  } else {
    const auto w = escalation_window(res.log);
    if (!w) {
      res.checks.push_back({"authority_escalated", false, "no overtake with a visible, cleared threat in the log"});
    } else {
      res.checks.push_back({"authority_escalated", w->peak - w->pre_mean >= kEscalationMargin,
                            fmt("peak %.2f N m over pre-manoeuvre mean %.2f N m", w->peak, w->pre_mean)});
      res.checks.push_back({"authority_relaxed", w->max_after_relax < kRelaxedAuthority,
                            fmt("max lambda %.2f N m from %.2f s on", w->max_after_relax, w->t_clear + kRelaxTime)});
    }
  }
  return res;
}

}  // namespace sharedctl
