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
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sharedctl {

/// Version carried in every message as "v".
inline constexpr int kProtocolVersion = 1;

struct ActorFrame {
  int id = 0;
  std::string kind;
  double x = 0.0, y = 0.0, psi = 0.0, length = 0.0, width = 0.0;
  bool threat = false;

  bool operator==(const ActorFrame&) const = default;
};

struct LiveEvent {
  std::string kind;  ///< crash | near_miss
  double time = 0.0;

  bool operator==(const LiveEvent&) const = default;
};

/// Snapshot broadcast once per control tick.
struct TelemetryFrame {
  long seq = 0;
  double time = 0.0;
  double x = 0.0, y = 0.0, psi = 0.0, vx = 0.0, vy = 0.0, r = 0.0;
  double theta = 0.0;        ///< steering-wheel angle, rad
  double t_mpc = 0.0;
  double t_driver = 0.0;
  double lambda = 0.0;
  double e_y = 0.0;
  std::optional<double> dtc;  ///< absent without a threat
  std::optional<double> ttc;
  std::string mode;
  std::string intent;
  bool pilot = false;         ///< human torque applied this tick
  bool finished = false;
  std::vector<ActorFrame> actors;
  std::vector<LiveEvent> events;  ///< detected so far

  bool operator==(const TelemetryFrame&) const = default;
};

enum class InputDevice { Torque, Keyboard, Gamepad };

/// Steering command from a client. Keyboard: steer in {-1, 0, 1}, positive steers left.
/// Gamepad: axis in [-1, 1], positive left. Torque: direct N m.
struct PilotInput {
  InputDevice device = InputDevice::Torque;
  double value = 0.0;
  bool start_overtake = false;
  double client_time = 0.0;  ///< ms, client clock

  bool operator==(const PilotInput&) const = default;
};

enum class ControlAction { Start, Pause, Reset };

struct ControlMessage {
  ControlAction action = ControlAction::Start;

  bool operator==(const ControlMessage&) const = default;
};

struct ErrorFrame {
  std::string message;

  bool operator==(const ErrorFrame&) const = default;
};

class ProtocolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(InputDevice device);
std::string to_string(ControlAction action);

std::string encode(const TelemetryFrame& frame);
std::string encode(const PilotInput& input);
std::string encode(const ControlMessage& message);
std::string encode(const ErrorFrame& error);

TelemetryFrame decode_telemetry(const std::string& text);
ErrorFrame decode_error(const std::string& text);

using ClientMessage = std::variant<PilotInput, ControlMessage>;

/// Parses a client-to-server message. Throws ProtocolError naming the offending field.
ClientMessage decode_client_message(const std::string& text);

}  // namespace sharedctl
