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

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sharedctl/nmpc.hpp"
#include "sharedctl/vehicle_model.hpp"

namespace sharedctl {

struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double heading = 0.0;
  double length = 4.5;
  double width = 1.8;

  std::array<std::array<double, 2>, 4> corners() const;
};

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);
/// Minimum distance between two footprints, zero when they overlap.
double box_distance(const OrientedBox& a, const OrientedBox& b);
/// Extent of a footprint projected on the world y axis (the road normal of a road along +X).
std::pair<double, double> lateral_extent(const OrientedBox& box);

enum class ActorKind { Truck, Car, Motorcycle };

std::string to_string(ActorKind kind);
ActorKind actor_kind_from_string(const std::string& name);
/// Default footprint (length, width) per actor kind.
std::pair<double, double> default_footprint(ActorKind kind);

struct ActorState {
  int id = 0;
  ActorKind kind = ActorKind::Car;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;        ///< along heading, m/s
  double lateral_speed = 0.0;///< world y rate, m/s
  double length = 4.5;
  double width = 1.8;
  bool threat = false;       ///< designated threat for arbitration and metrics
  bool invading = false;     ///< scripted lateral manoeuvre in progress or completed
  bool departed = false;

  OrientedBox footprint() const { return {x, y, heading, length, width}; }
  double vx_world() const;
  double vy_world() const;
};

enum class DriveMode { Assistance, Intervention, Manual };

std::string to_string(DriveMode mode);

struct WorldState {
  double time = 0.0;
  VehicleState ego;
  RoadFrame road;
  double ego_length = 4.5;
  double ego_width = 1.8;
  std::vector<ActorState> actors;
  AuthorityCommand authority;
  ControlOutput control;
  bool has_control = false;
  double driver_torque = 0.0;
  double actuator_torque = 0.0;
  double aligning_torque = 0.0;
  DriveMode mode = DriveMode::Assistance;
  double lane_width = 3.5;

  OrientedBox ego_footprint() const { return {ego.x, ego.y, ego.psi, ego_length, ego_width}; }
  const ActorState* threat() const;
};

}  // namespace sharedctl
