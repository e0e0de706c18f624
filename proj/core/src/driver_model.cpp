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

#include "sharedctl/driver_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sharedctl {

void DriverParams::validate() const {
  if (!(preview_time > 0.0)) throw std::invalid_argument("driver preview_time must be positive");
  if (!(max_torque >= 2.0 && max_torque <= 10.0)) throw std::invalid_argument("driver max_torque must lie in [2, 10]");
  if (!(delay_min >= 0.0 && delay_max >= delay_min)) {
    throw std::invalid_argument("driver delays must satisfy 0 <= delay_min <= delay_max");
  }
  if (!(compliance >= 0.0 && compliance <= 1.0)) throw std::invalid_argument("driver compliance must lie in [0, 1]");
  if (!(kp_angle >= 0.0 && kd_angle >= 0.0)) throw std::invalid_argument("driver gains must be non-negative");
}

const std::vector<DriverParams>& driver_population() {
  static const std::vector<DriverParams> sets = {
      // preview kp    kd   Tmax  dmin  dmax  compliance
      {0.6, 22.0, 1.6, 5.0, 0.5, 0.7, 0.30},
      {0.7, 20.0, 1.5, 6.0, 0.6, 0.9, 0.90},
      {0.8, 18.0, 1.4, 7.0, 0.7, 1.0, 0.50},
      {0.9, 20.0, 1.5, 8.0, 0.8, 1.1, 0.70},
      {1.0, 24.0, 1.7, 5.5, 0.9, 1.2, 0.40},
      {1.1, 19.0, 1.4, 6.5, 1.0, 1.3, 0.80},
      {1.2, 21.0, 1.6, 7.5, 1.1, 1.4, 0.60},
      {0.75, 23.0, 1.5, 6.0, 1.2, 1.5, 0.35},
  };
  return sets;
}

std::string to_string(IntentMode mode) {
  switch (mode) {
    case IntentMode::KeepLane: return "keep_lane";
    case IntentMode::Overtake: return "overtake";
    case IntentMode::Abort: return "abort";
    case IntentMode::Evade: return "evade";
  }
  return "keep_lane";
}

IntentMode intent_mode_from_string(const std::string& name) {
  if (name == "keep_lane") return IntentMode::KeepLane;
  if (name == "overtake") return IntentMode::Overtake;
  if (name == "abort") return IntentMode::Abort;
  if (name == "evade") return IntentMode::Evade;
  throw std::invalid_argument("unknown intent '" + name + "'");
}

double driver_torque(const VehicleState& state, const RoadFrame& road, const DriverIntent& intent,
                     double felt_torque, const DriverParams& params, const VehicleParams& vehicle,
                     const SteeringParams& steering) {
  const double vx = std::max(state.vx, 1.0);
  const double preview = vx * params.preview_time;
  // lateral error of the preview point relative to the target line
  const double e_prev = road.e_y + preview * std::sin(road.e_psi) - intent.target;
  const double wheelbase = vehicle.lf + vehicle.lr;
  const double delta_des = -2.0 * wheelbase * e_prev / (preview * preview);
  const double theta_des = steering.ratio * delta_des;
  // drivers hold the wheel against the aligning moment they feel
  const double aligning = self_aligning(tire_forces(state, state.theta / steering.ratio, vehicle).front, steering);
  const double pd = params.kp_angle * (theta_des - state.theta) - params.kd_angle * state.omega + aligning;

  if (intent.committed) return std::clamp(pd - felt_torque, -params.max_torque, params.max_torque);
  double opposing = 0.0;
  if (pd * felt_torque < 0.0) opposing = std::abs(felt_torque);
  double t = std::copysign(std::max(0.0, std::abs(pd) - params.compliance * opposing), pd);
  if (pd == 0.0) t = 0.0;
  return std::clamp(t, -params.max_torque, params.max_torque);
}

ScriptedDriver::ScriptedDriver(DriverScript script, DriverParams params, ScriptTiming timing, std::uint64_t seed)
    : script_(script), params_(params), timing_(timing), rng_(seed) {
  params_.validate();
}

double ScriptedDriver::sample_delay() {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return params_.delay_min + u * (params_.delay_max - params_.delay_min);
}

void ScriptedDriver::request_overtake(double now) {
  if (script_ == DriverScript::Corrective) timing_.overtake_time = std::min(timing_.overtake_time, now);
}

void ScriptedDriver::activate(IntentMode mode, double goal, double now) {
  intent_.mode = mode;
  intent_.goal = goal;
  intent_.activation = now;
  intent_.committed = mode == IntentMode::Overtake;
}

const DriverIntent& ScriptedDriver::intent_step(const DriverPercept& percept, double now) {
  const double dt = std::max(0.0, now - last_step_);
  last_step_ = now;
  if (script_ == DriverScript::Corrective) {
    switch (intent_.mode) {
      case IntentMode::KeepLane:
        if (!reacting_ && now >= timing_.overtake_time && !percept.threat_passed && !percept.threat_visible) {
          activate(IntentMode::Overtake, timing_.overtake_offset, now);
        }
        break;
      case IntentMode::Overtake:
        if (percept.threat_passed) {
          activate(IntentMode::KeepLane, 0.0, now);
          reacting_ = true;
        } else if (percept.threat_visible && !reacting_) {
          reacting_ = true;
          reaction_time_ = now + sample_delay();
          intent_.committed = false;
        }
        if (intent_.mode == IntentMode::Overtake && reacting_ && now >= reaction_time_) {
          activate(IntentMode::Abort, 0.0, now);
        }
        break;
      case IntentMode::Abort:
        if (percept.threat_passed) activate(IntentMode::KeepLane, 0.0, now);
        break;
      case IntentMode::Evade:
        break;
    }
  } else {
    switch (intent_.mode) {
      case IntentMode::KeepLane:
        if (percept.threat_passed) break;
        if (percept.threat_visible && percept.threat_invading && !reacting_) {
          reacting_ = true;
          reaction_time_ = now + sample_delay();
        }
        if (reacting_ && now >= reaction_time_) activate(IntentMode::Evade, timing_.evade_offset, now);
        break;
      case IntentMode::Evade:
        if (percept.threat_passed) activate(IntentMode::KeepLane, 0.0, now);
        break;
      case IntentMode::Overtake:
      case IntentMode::Abort:
        break;
    }
  }
  const bool urgent = intent_.mode == IntentMode::Abort || intent_.mode == IntentMode::Evade;
  const double step = (urgent ? timing_.reaction_rate : timing_.manoeuvre_rate) * dt;
  intent_.target += std::clamp(intent_.goal - intent_.target, -step, step);
  return intent_;
}

}  // namespace sharedctl
