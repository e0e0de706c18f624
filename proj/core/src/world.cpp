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

#include "sharedctl/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sharedctl {

std::array<std::array<double, 2>, 4> OrientedBox::corners() const {
  const double c = std::cos(heading), s = std::sin(heading);
  const double hl = 0.5 * length, hw = 0.5 * width;
  std::array<std::array<double, 2>, 4> out{};
  const double lx[4] = {hl, hl, -hl, -hl};
  const double ly[4] = {hw, -hw, -hw, hw};
  for (int i = 0; i < 4; ++i) out[i] = {cx + c * lx[i] - s * ly[i], cy + s * lx[i] + c * ly[i]};
  return out;
}

namespace {

bool separated_on_axes(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const OrientedBox* box : {&a, &b}) {
    const double c = std::cos(box->heading), s = std::sin(box->heading);
    const double axes[2][2] = {{c, s}, {-s, c}};
    for (const auto& ax : axes) {
      double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
      for (int i = 0; i < 4; ++i) {
        const double pa = ca[i][0] * ax[0] + ca[i][1] * ax[1];
        const double pb = cb[i][0] * ax[0] + cb[i][1] * ax[1];
        amin = std::min(amin, pa);
        amax = std::max(amax, pa);
        bmin = std::min(bmin, pb);
        bmax = std::max(bmax, pb);
      }
      if (amax < bmin || bmax < amin) return true;
    }
  }
  return false;
}

double point_segment_distance(const std::array<double, 2>& p, const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) { return !separated_on_axes(a, b); }

double box_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_overlap(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = 1e300;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

std::pair<double, double> lateral_extent(const OrientedBox& box) {
  double lo = 1e300, hi = -1e300;
  for (const auto& c : box.corners()) {
    lo = std::min(lo, c[1]);
    hi = std::max(hi, c[1]);
  }
  return {lo, hi};
}

std::string to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::Truck: return "truck";
    case ActorKind::Car: return "car";
    case ActorKind::Motorcycle: return "motorcycle";
  }
  return "car";
}

ActorKind actor_kind_from_string(const std::string& name) {
  if (name == "truck") return ActorKind::Truck;
  if (name == "car") return ActorKind::Car;
  if (name == "motorcycle") return ActorKind::Motorcycle;
  throw std::invalid_argument("unknown actor type '" + name + "' (expected truck, car, motorcycle)");
}

std::pair<double, double> default_footprint(ActorKind kind) {
  switch (kind) {
    case ActorKind::Truck: return {12.0, 2.5};
    case ActorKind::Car: return {4.5, 1.8};
    case ActorKind::Motorcycle: return {2.2, 0.8};
  }
  return {4.5, 1.8};
}

double ActorState::vx_world() const { return speed * std::cos(heading); }
double ActorState::vy_world() const { return speed * std::sin(heading) + lateral_speed; }

std::string to_string(DriveMode mode) {
  switch (mode) {
    case DriveMode::Assistance: return "assistance";
    case DriveMode::Intervention: return "intervention";
    case DriveMode::Manual: return "manual";
  }
  return "assistance";
}

const ActorState* WorldState::threat() const {
  for (const ActorState& a : actors) {
    if (a.threat && !a.departed) return &a;
  }
  return nullptr;
}

}  // namespace sharedctl
