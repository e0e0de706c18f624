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

#include <vector>

#include "sharedctl/vehicle_model.hpp"

namespace sharedctl {

struct PathPoint {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;    ///< unwrapped tangent heading, rad
  double curvature = 0.0;  ///< 1/m
  double s = 0.0;          ///< arc length, m
};

struct PathProjection {
  RoadFrame frame;
  double s = 0.0;            ///< arc length of the foot point
  bool clamped = false;      ///< ego projects beyond either path end
};

/// Arc-length parameterized reference polyline with stored curvature.
class ReferencePath {
 public:
  /// Points must be at least two, distinct, and carry consistent arc length.
  explicit ReferencePath(std::vector<PathPoint> points);

  static ReferencePath straight(double x0, double y0, double heading, double length, double spacing = 10.0);
  static ReferencePath arc(double cx, double cy, double radius, double start_angle, double sweep,
                           double spacing = 1.0);

  PathProjection project(double x, double y, double psi) const;
  /// Interpolated pose at arc length s; flagged when s falls outside the path.
  PathPoint sample(double s, bool* exhausted = nullptr) const;

  double length() const { return points_.back().s; }
  const std::vector<PathPoint>& points() const { return points_; }

 private:
  std::vector<PathPoint> points_;
};

/// Free-function form of ReferencePath::project.
PathProjection project_to_path(const VehicleState& state, const ReferencePath& path);

double wrap_angle(double angle);

}  // namespace sharedctl
