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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sharedctl/scenario.hpp"

namespace sharedctl {

inline constexpr double kBoundTolerance = 1e-9;
inline constexpr double kYawRateTolerance = 0.02;   // rad/s, soft-constraint allowance
inline constexpr double kEscalationMargin = 3.0;    // N m above the pre-manoeuvre mean
inline constexpr double kRelaxedAuthority = 4.0;    // N m
inline constexpr double kRelaxTime = 3.0;           // s after clearance
inline constexpr double kRecenterTolerance = 0.3;   // m

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Authority during the corrective encounter. The window opens when the threat becomes
/// visible to the automation and closes when it has passed the ego.
struct EscalationWindow {
  double pre_mean = 0.0;   ///< mean authority while lane keeping before the overtake
  double peak = 0.0;       ///< max authority inside the window
  double t_open = 0.0;
  double t_clear = 0.0;
  double max_after_relax = 0.0;  ///< max authority from t_clear + kRelaxTime on
};

/// Empty when the log holds no overtake followed by a visible, cleared threat.
std::optional<EscalationWindow> escalation_window(const RunLog& log);

struct VerifyResult {
  Preset preset = Preset::Corrective;
  std::string spec_digest;
  RunLog log;
  std::vector<EventRecord> events;
  std::vector<VerifyCheck> checks;

  bool passed() const;
  std::string to_json() const;
  /// One "PASS|FAIL name: detail" line per check.
  std::string summary() const;
};

/// Runs the scenario tick by tick and evaluates the constraint, authority and outcome checks
/// of its preset.
VerifyResult verify_scenario(const ScenarioSpec& spec);

}  // namespace sharedctl
