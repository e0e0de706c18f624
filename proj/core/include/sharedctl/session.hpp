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

#include "sharedctl/protocol.hpp"
#include "sharedctl/scenario.hpp"

namespace sharedctl {

inline constexpr double kInputStaleness = 0.2;  // s of wall clock
inline constexpr double kKeyboardTorque = 3.0;  // N m
inline constexpr double kKeyboardRamp = 0.3;    // s from zero to full torque
inline constexpr double kGamepadTorque = 8.0;   // N m at full deflection

/// Bang-bang keyboard torque with a linear ramp toward steer * kKeyboardTorque.
class KeyboardRamp {
 public:
  double update(int steer, double dt);
  double value() const { return value_; }
  void reset() { value_ = 0.0; }

 private:
  double value_ = 0.0;
};

/// Linear gamepad mapping, axis clamped to [-1, 1].
double gamepad_torque(double axis);

struct Annotation {
  double time = 0.0;  ///< simulation time
  std::string text;
};

/// One real-time simulation with an optional human pilot. All timing is passed in by the
/// caller, so the session itself is deterministic: without pilot input it produces exactly
/// the headless log.
class SimSession {
 public:
  explicit SimSession(ScenarioSpec spec, bool running = true);

  /// Keeps only the latest input; `received_at` is the server clock in seconds.
  void submit(const PilotInput& input, double received_at);
  void control(ControlAction action);
  /// Client gone: pilot torque dropped, synthetic driver resumes.
  void detach();

  /// Advances one control tick when running. `now` is the server clock in seconds.
  std::optional<TelemetryFrame> step(double now);

  bool running() const { return running_ && !sim_.finished(); }
  bool finished() const { return sim_.finished(); }
  const Simulation& simulation() const { return sim_; }
  const RunLog& log() const { return sim_.log(); }
  const std::vector<Annotation>& annotations() const { return annotations_; }
  const std::vector<LiveEvent>& live_events() const { return events_; }
  std::string annotations_json() const;

 private:
  void annotate(std::string text);

  ScenarioSpec spec_;
  Simulation sim_;
  bool running_;
  std::optional<PilotInput> input_;
  double input_received_ = 0.0;
  bool overtake_requested_ = false;
  bool pilot_active_ = false;
  KeyboardRamp keyboard_;
  std::vector<Annotation> annotations_;
  std::vector<LiveEvent> events_;
  std::vector<bool> crashed_;
  bool near_miss_ = false;
  long seq_ = 0;
};

/// Body of GET /scenario: every preset's resolved spec plus the active one.
std::string scenario_listing(const ScenarioSpec& active);

}  // namespace sharedctl
