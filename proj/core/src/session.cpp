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

#include "sharedctl/session.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace sharedctl {

double KeyboardRamp::update(int steer, double dt) {
  const double target = std::clamp(steer, -1, 1) * kKeyboardTorque;
  const double step = kKeyboardTorque / kKeyboardRamp * dt;
  value_ += std::clamp(target - value_, -step, step);
  return value_;
}

double gamepad_torque(double axis) { return kGamepadTorque * std::clamp(axis, -1.0, 1.0); }

SimSession::SimSession(ScenarioSpec spec, bool running)
    : spec_(spec), sim_(std::move(spec)), running_(running), crashed_(spec_.actors.size(), false) {}

void SimSession::annotate(std::string text) { annotations_.push_back({sim_.world().time, std::move(text)}); }

void SimSession::submit(const PilotInput& input, double received_at) {
  input_ = input;
  input_received_ = received_at;
  if (input.start_overtake) overtake_requested_ = true;
}

void SimSession::detach() {
  if (input_ || pilot_active_) annotate("client disconnected, synthetic driver resumed");
  input_.reset();
}

void SimSession::control(ControlAction action) {
  switch (action) {
    case ControlAction::Start:
      running_ = true;
      break;
    case ControlAction::Pause:
      running_ = false;
      break;
    case ControlAction::Reset:
      sim_ = Simulation(spec_);
      input_.reset();
      pilot_active_ = false;
      overtake_requested_ = false;
      keyboard_.reset();
      events_.clear();
      crashed_.assign(spec_.actors.size(), false);
      near_miss_ = false;
      annotate("reset");
      break;
  }
}

std::optional<TelemetryFrame> SimSession::step(double now) {
  if (!running()) return std::nullopt;
  const double dt = spec_.nmpc.stage_dt;

  const bool fresh = input_ && now - input_received_ <= kInputStaleness;
  if (fresh) {
    if (!pilot_active_) annotate("pilot attached");
    double torque = 0.0;
    switch (input_->device) {
      case InputDevice::Torque: torque = input_->value; break;
      case InputDevice::Keyboard: torque = keyboard_.update(static_cast<int>(input_->value), dt); break;
      case InputDevice::Gamepad: torque = gamepad_torque(input_->value); break;
    }
    if (input_->device != InputDevice::Keyboard) keyboard_.reset();
    sim_.set_pilot_torque(torque);
    pilot_active_ = true;
  } else {
    if (pilot_active_) annotate("pilot input stale, synthetic driver resumed");
    if (input_ && !fresh) input_.reset();
    sim_.set_pilot_torque(std::nullopt);
    keyboard_.reset();
    pilot_active_ = false;
  }
  if (overtake_requested_) {
    sim_.request_overtake();
    annotate("overtake requested");
    overtake_requested_ = false;
  }

  sim_.tick();
  const LogRow& row = sim_.log().rows.back();
  const WorldState& w = sim_.world();

  if (row.contact >= 0 && !crashed_[row.contact]) {
    crashed_[row.contact] = true;
    events_.push_back({"crash", row.time});
  }
  const bool any_crash = std::find(crashed_.begin(), crashed_.end(), true) != crashed_.end();
  const bool close = spec_.preset == Preset::Corrective ? row.ttc && *row.ttc < kNearMissTtc
                                                        : row.dtc_min < kNearMissDtc;
  if (close && !any_crash && !near_miss_) {
    near_miss_ = true;
    events_.push_back({"near_miss", row.time});
  }

  TelemetryFrame f;
  f.seq = seq_++;
  f.time = w.time;
  f.x = w.ego.x;
  f.y = w.ego.y;
  f.psi = w.ego.psi;
  f.vx = w.ego.vx;
  f.vy = w.ego.vy;
  f.r = w.ego.r;
  f.theta = w.ego.theta;
  f.t_mpc = row.t_mpc;
  f.t_driver = row.t_driver;
  f.lambda = row.lambda;
  f.e_y = w.road.e_y;
  if (std::isfinite(row.dtc)) f.dtc = row.dtc;
  f.ttc = row.ttc;
  f.mode = row.mode;
  f.intent = row.intent;
  f.pilot = pilot_active_;
  f.finished = sim_.finished();
  for (const ActorState& a : w.actors) {
    f.actors.push_back({a.id, to_string(a.kind), a.x, a.y, a.heading, a.length, a.width, a.threat});
  }
  f.events = events_;
  return f;
}

std::string SimSession::annotations_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const Annotation& a : annotations_) list.push_back({{"time", a.time}, {"text", a.text}});
  return list.dump(2);
}

std::string scenario_listing(const ScenarioSpec& active) {
  nlohmann::json presets = nlohmann::json::array();
  for (const std::string& name : preset_names()) {
    presets.push_back({{"name", name}, {"scenario", nlohmann::json::parse(to_json(scenario_preset(preset_from_string(name))))}});
  }
  return nlohmann::json{{"presets", presets}, {"active", nlohmann::json::parse(to_json(active))}}.dump(2);
}

}  // namespace sharedctl
