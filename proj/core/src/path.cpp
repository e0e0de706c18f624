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

#include "sharedctl/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sharedctl {

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

ReferencePath::ReferencePath(std::vector<PathPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("reference path needs at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].s > points_[i - 1].s)) throw std::invalid_argument("path arc length must increase");
  }
}

ReferencePath ReferencePath::straight(double x0, double y0, double heading, double length, double spacing) {
  const int n = std::max(2, static_cast<int>(std::ceil(length / spacing)) + 1);
  std::vector<PathPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double s = length * i / (n - 1);
    pts.push_back({x0 + s * std::cos(heading), y0 + s * std::sin(heading), heading, 0.0, s});
  }
  return ReferencePath(std::move(pts));
}

ReferencePath ReferencePath::arc(double cx, double cy, double radius, double start_angle, double sweep,
                                 double spacing) {
  const double length = std::abs(sweep) * radius;
  const int n = std::max(2, static_cast<int>(std::ceil(length / spacing)) + 1);
  const double dir = sweep >= 0.0 ? 1.0 : -1.0;
  std::vector<PathPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = start_angle + sweep * i / (n - 1);
    pts.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a), a + dir * M_PI / 2.0, dir / radius,
                   length * i / (n - 1)});
  }
  return ReferencePath(std::move(pts));
}

PathProjection ReferencePath::project(double x, double y, double psi) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_seg = 0;
  double best_t = 0.0;
  double best_t_raw = 0.0;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const PathPoint& a = points_[i];
    const PathPoint& b = points_[i + 1];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    const double t_raw = ((x - a.x) * dx + (y - a.y) * dy) / len2;
    const double t = std::clamp(t_raw, 0.0, 1.0);
    const double px = a.x + t * dx - x, py = a.y + t * dy - y;
    const double d2 = px * px + py * py;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_seg = i;
      best_t = t;
      best_t_raw = t_raw;
    }
  }
  const PathPoint& a = points_[best_seg];
  const PathPoint& b = points_[best_seg + 1];
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  const double tx = dx / len, ty = dy / len;

  PathProjection out;
  out.clamped = (best_seg == 0 && best_t_raw < 0.0) || (best_seg + 2 == points_.size() && best_t_raw > 1.0);
  // signed offset measured from the (extended) segment line, left positive
  out.frame.e_y = tx * (y - a.y) - ty * (x - a.x);
  const double heading = a.heading + best_t * (b.heading - a.heading);
  out.frame.e_psi = wrap_angle(psi - heading);
  out.frame.rho = a.curvature + best_t * (b.curvature - a.curvature);
  out.s = a.s + best_t * (b.s - a.s);
  return out;
}

PathPoint ReferencePath::sample(double s, bool* exhausted) const {
  bool out = false;
  if (s < points_.front().s) {
    s = points_.front().s;
    out = true;
  } else if (s > points_.back().s) {
    s = points_.back().s;
    out = true;
  }
  if (exhausted) *exhausted = out;
  const auto it = std::upper_bound(points_.begin(), points_.end(), s,
                                   [](double v, const PathPoint& p) { return v < p.s; });
  const std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - points_.begin()), 1,
                                                 points_.size() - 1);
  const PathPoint& a = points_[hi - 1];
  const PathPoint& b = points_[hi];
  const double t = (s - a.s) / (b.s - a.s);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.heading + t * (b.heading - a.heading),
          a.curvature + t * (b.curvature - a.curvature), s};
}

PathProjection project_to_path(const VehicleState& state, const ReferencePath& path) {
  return path.project(state.x, state.y, state.psi);
}

}  // namespace sharedctl
