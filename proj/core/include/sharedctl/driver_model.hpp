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
#include <random>
#include <string>
#include <vector>

#include "sharedctl/steering.hpp"
#include "sharedctl/vehicle_model.hpp"

namespace sharedctl {

struct DriverParams {
  double preview_time = 0.9;   ///< s
  double kp_angle = 20.0;      ///< N m / rad of hand-wheel angle error
  double kd_angle = 1.5;       ///< N m s / rad
  double max_torque = 6.0;     ///< N m
  double delay_min = 0.5;      ///< reaction delay, s
  double delay_max = 1.5;
  /// 0 ignores the felt controller torque, 1 yields to it fully.
  double compliance = 0.6;

  void validate() const;
};

/// Shipped synthetic population, indexed 0..7.
const std::vector<DriverParams>& driver_population();

enum class IntentMode { KeepLane, Overtake, Abort, Evade };

std::string to_string(IntentMode mode);
IntentMode intent_mode_from_string(const std::string& name);

struct DriverIntent {
  IntentMode mode = IntentMode::KeepLane;
  double target = 0.0;       ///< lateral offset steered toward now, m from the right-lane center
  double goal = 0.0;         ///< offset the mode ends at; target ramps toward it
  double activation = 0.0;   ///< time the mode became active, s
  /// Deliberate manoeuvre with no perceived threat: felt torque is overpowered, not yielded to.
  bool committed = false;
};

/// Preview PD steering torque toward intent.target plus the felt self-aligning torque,
/// reduced by the opposing component of the felt controller torque and clamped to
/// +-max_torque. A committed driver cancels the felt torque instead.
double driver_torque(const VehicleState& state, const RoadFrame& road, const DriverIntent& intent,
                     double felt_torque, const DriverParams& params, const VehicleParams& vehicle = {},
                     const SteeringParams& steering = {});

/// What the synthetic driver knows about the designated threat this tick.
struct DriverPercept {
  bool threat_visible = false;
  bool threat_invading = false;
  bool threat_passed = false;
};

enum class DriverScript { Corrective, Evasive };

struct ScriptTiming {
  double overtake_time = 15.0;  ///< corrective: start of the overtake attempt
  double overtake_offset = 3.5; ///< corrective: left-lane target
  double evade_offset = -1.0;   ///< evasive: target while evading
  double manoeuvre_rate = 1.0;  ///< m/s, target ramp for deliberate lane changes
  double reaction_rate = 2.5;   ///< m/s, target ramp for abort and evade
};

/// Scripted intent machine with seeded reaction delays.
class ScriptedDriver {
 public:
  ScriptedDriver(DriverScript script, DriverParams params, ScriptTiming timing, std::uint64_t seed);

  /// Advances the intent for this tick.
  const DriverIntent& intent_step(const DriverPercept& percept, double now);
  const DriverIntent& intent() const { return intent_; }
  const DriverParams& params() const { return params_; }

  /// Corrective script: moves the overtake start to `now` if it lies later.
  void request_overtake(double now);

  /// Uniform draw in [delay_min, delay_max]; identical across platforms for a given seed.
  double sample_delay();

 private:
  void activate(IntentMode mode, double goal, double now);

  DriverScript script_;
  DriverParams params_;
  ScriptTiming timing_;
  std::mt19937_64 rng_;
  DriverIntent intent_;
  bool reacting_ = false;
  double reaction_time_ = 0.0;
  double last_step_ = 0.0;
};

}  // namespace sharedctl
