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

#include <cstdint>
#include <string>
#include <vector>

#include "sharedctl/metrics.hpp"
#include "sharedctl/scenario.hpp"

namespace sharedctl {

struct BatchOptions {
  int trials = 40;                 ///< per condition; trial i uses driver set i % 8 and seed base + i / 8
  std::uint64_t seed_base = 1;
  std::vector<ControlMode> modes{ControlMode::Baseline, ControlMode::SharedControl};
  unsigned threads = 0;            ///< 0 uses the hardware concurrency
  bool keep_logs = false;
};

struct TrialResult {
  ControlMode mode = ControlMode::Baseline;
  int driver_set = 0;
  std::uint64_t seed = 0;
  std::vector<EventRecord> events;
  std::string spec_digest;
  std::string log_digest;
  RunLog log;               ///< empty unless BatchOptions::keep_logs
  double lambda_max = 0.0;
  double torque_max = 0.0;  ///< max |T_mpc|
};

struct BatchResult {
  std::vector<TrialResult> trials;  ///< ordered by mode, then trial index
  KpiReport report;
};

/// Spec for trial `index` of a condition: population driver set and seed replace the base values.
ScenarioSpec trial_spec(const ScenarioSpec& base, ControlMode mode, int index, std::uint64_t seed_base);

/// Runs every trial as an independent simulation, in parallel; results do not depend on the
/// thread count.
BatchResult run_batch(const ScenarioSpec& base, const BatchOptions& options);

}  // namespace sharedctl
