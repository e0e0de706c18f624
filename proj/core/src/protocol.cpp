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

#include "sharedctl/protocol.hpp"

#include <cmath>

#include <json.hpp>

namespace sharedctl {

using ojson = nlohmann::ordered_json;

std::string to_string(InputDevice device) {
  switch (device) {
    case InputDevice::Torque: return "torque";
    case InputDevice::Keyboard: return "keyboard";
    case InputDevice::Gamepad: return "gamepad";
  }
  return "torque";
}

std::string to_string(ControlAction action) {
  switch (action) {
    case ControlAction::Start: return "start";
    case ControlAction::Pause: return "pause";
    case ControlAction::Reset: return "reset";
  }
  return "start";
}

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson parse(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error&) {
    throw ProtocolError("message is not valid JSON");
  }
}

void expect_header(const ojson& j, const char* type) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("type: missing or not a string");
  if (j["type"] != type) throw ProtocolError(std::string("type: expected '") + type + "'");
  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kProtocolVersion) {
    throw ProtocolError("v: expected protocol version " + std::to_string(kProtocolVersion));
  }
}

double number(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ProtocolError(std::string(key) + ": expected number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw ProtocolError(std::string(key) + ": not finite");
  return v;
}

std::optional<double> opt_number(const ojson& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return number(j, key);
}

std::string text(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw ProtocolError(std::string(key) + ": expected string");
  return j[key].get<std::string>();
}

bool flag(const ojson& j, const char* key) {
  if (!j.contains(key)) return false;
  if (!j[key].is_boolean()) throw ProtocolError(std::string(key) + ": expected boolean");
  return j[key].get<bool>();
}

}  // namespace

std::string encode(const TelemetryFrame& f) {
  ojson actors = ojson::array();
  for (const ActorFrame& a : f.actors) {
    actors.push_back({{"id", a.id},
                      {"kind", a.kind},
                      {"x", a.x},
                      {"y", a.y},
                      {"psi", a.psi},
                      {"length", a.length},
                      {"width", a.width},
                      {"threat", a.threat}});
  }
  ojson events = ojson::array();
  for (const LiveEvent& e : f.events) events.push_back({{"kind", e.kind}, {"time", e.time}});
  ojson j = {{"type", "telemetry"},
             {"v", kProtocolVersion},
             {"seq", f.seq},
             {"time", f.time},
             {"ego", {{"x", f.x}, {"y", f.y}, {"psi", f.psi}, {"vx", f.vx}, {"vy", f.vy}, {"r", f.r}}},
             {"theta", f.theta},
             {"t_mpc", f.t_mpc},
             {"t_driver", f.t_driver},
             {"lambda", f.lambda},
             {"e_y", f.e_y},
             {"dtc", opt(f.dtc)},
             {"ttc", opt(f.ttc)},
             {"mode", f.mode},
             {"intent", f.intent},
             {"pilot", f.pilot},
             {"finished", f.finished},
             {"actors", actors},
             {"events", events}};
  return j.dump();
}

TelemetryFrame decode_telemetry(const std::string& s) {
  const ojson j = parse(s);
  expect_header(j, "telemetry");
  TelemetryFrame f;
  try {
    f.seq = j.at("seq").get<long>();
    f.time = number(j, "time");
    const ojson& ego = j.at("ego");
    f.x = number(ego, "x");
    f.y = number(ego, "y");
    f.psi = number(ego, "psi");
    f.vx = number(ego, "vx");
    f.vy = number(ego, "vy");
    f.r = number(ego, "r");
    f.theta = number(j, "theta");
    f.t_mpc = number(j, "t_mpc");
    f.t_driver = number(j, "t_driver");
    f.lambda = number(j, "lambda");
    f.e_y = number(j, "e_y");
    f.dtc = opt_number(j, "dtc");
    f.ttc = opt_number(j, "ttc");
    f.mode = text(j, "mode");
    f.intent = text(j, "intent");
    f.pilot = flag(j, "pilot");
    f.finished = flag(j, "finished");
    for (const ojson& a : j.at("actors")) {
      f.actors.push_back({a.at("id").get<int>(), text(a, "kind"), number(a, "x"), number(a, "y"), number(a, "psi"),
                          number(a, "length"), number(a, "width"), flag(a, "threat")});
    }
    for (const ojson& e : j.at("events")) f.events.push_back({text(e, "kind"), number(e, "time")});
  } catch (const ojson::exception& e) {
    throw ProtocolError(std::string("telemetry: ") + e.what());
  }
  return f;
}

std::string encode(const PilotInput& in) {
  ojson j = {{"type", "pilot_input"}, {"v", kProtocolVersion}, {"device", to_string(in.device)}};
  switch (in.device) {
    case InputDevice::Torque: j["torque"] = in.value; break;
    case InputDevice::Keyboard: j["steer"] = static_cast<int>(in.value); break;
    case InputDevice::Gamepad: j["axis"] = in.value; break;
  }
  j["start_overtake"] = in.start_overtake;
  j["client_time"] = in.client_time;
  return j.dump();
}

std::string encode(const ControlMessage& m) {
  return ojson{{"type", "control"}, {"v", kProtocolVersion}, {"action", to_string(m.action)}}.dump();
}

std::string encode(const ErrorFrame& e) {
  return ojson{{"type", "error"}, {"v", kProtocolVersion}, {"message", e.message}}.dump();
}

ErrorFrame decode_error(const std::string& s) {
  const ojson j = parse(s);
  expect_header(j, "error");
  return {text(j, "message")};
}

ClientMessage decode_client_message(const std::string& s) {
  const ojson j = parse(s);
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const std::string type = j.contains("type") && j["type"].is_string() ? j["type"].get<std::string>() : "";
  if (type == "control") {
    expect_header(j, "control");
    const std::string action = text(j, "action");
    for (ControlAction a : {ControlAction::Start, ControlAction::Pause, ControlAction::Reset}) {
      if (to_string(a) == action) return ControlMessage{a};
    }
    throw ProtocolError("action: expected start, pause or reset");
  }
  if (type != "pilot_input") throw ProtocolError("type: expected 'pilot_input' or 'control'");
  expect_header(j, "pilot_input");

  PilotInput in;
  const std::string device = j.contains("device") ? text(j, "device") : "torque";
  if (device == "torque") {
    in.device = InputDevice::Torque;
    in.value = number(j, "torque");
  } else if (device == "keyboard") {
    in.device = InputDevice::Keyboard;
    if (!j.contains("steer") || !j["steer"].is_number_integer()) throw ProtocolError("steer: expected -1, 0 or 1");
    const int steer = j["steer"].get<int>();
    if (steer < -1 || steer > 1) throw ProtocolError("steer: expected -1, 0 or 1");
    in.value = steer;
  } else if (device == "gamepad") {
    in.device = InputDevice::Gamepad;
    in.value = number(j, "axis");
    if (in.value < -1.0 || in.value > 1.0) throw ProtocolError("axis: expected a value in [-1, 1]");
  } else {
    throw ProtocolError("device: expected torque, keyboard or gamepad");
  }
  in.start_overtake = flag(j, "start_overtake");
  if (j.contains("client_time")) in.client_time = number(j, "client_time");
  return in;
}

}  // namespace sharedctl
