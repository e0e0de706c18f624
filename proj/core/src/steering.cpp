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

#include "sharedctl/steering.hpp"

#include <algorithm>
#include <cmath>

namespace sharedctl {

void SteeringParams::validate() const {
  if (!(inertia > 0.0) || !(damping > 0.0) || !(ratio > 0.0) || !(pneumatic_trail >= 0.0)) {
    throw std::invalid_argument("steering parameters must be positive");
  }
  if (!(motor_torque_max >= 10.0)) {
    throw std::invalid_argument("steering motor must provide at least 10 N m");
  }
}

double variable_damping(double authority, double nominal_damping) {
  if (!(authority >= 0.0)) throw std::invalid_argument("authority must be non-negative");
  return nominal_damping * std::sqrt((authority + 1.0) / 2.0);
}

double self_aligning(double front_lateral_force, const SteeringParams& params) {
  return params.pneumatic_trail / params.ratio * front_lateral_force;
}

ExecutionResult execution_step(const PidState& pid, double torque_ref, double torque_meas, double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) throw std::invalid_argument("execution loop dt must lie in (0, 0.01]");

  PidState next = pid;
  const PidGains& g = pid.gains;
  const double error = torque_ref - torque_meas;
  const double derivative = pid.primed ? (error - pid.previous_error) / dt : 0.0;

  const double unclamped_without_i = g.kp * error + g.kd * derivative;
  double candidate_integral = pid.integral + error * dt;
  const double unclamped = unclamped_without_i + g.ki * candidate_integral;

  // conditional integration: freeze the integrator while saturated and pushing further
  const bool saturating = std::abs(unclamped) > g.output_limit && error * unclamped > 0.0;
  if (saturating) candidate_integral = pid.integral;
  if (g.ki > 0.0) {
    const double bound = g.output_limit / g.ki;
    candidate_integral = std::clamp(candidate_integral, -bound, bound);
  } else {
    candidate_integral = 0.0;
  }

  next.integral = candidate_integral;
  next.previous_error = error;
  next.primed = true;

  const double output =
      std::clamp(unclamped_without_i + g.ki * candidate_integral, -g.output_limit, g.output_limit);
  return {output, next};
}

double ActuatorLag::step(double command, double dt) {
  const double alpha = 1.0 - std::exp(-dt / tau_);
  output_ += alpha * (command - output_);
  return output_;
}

double column_step_overshoot(double authority, DampingMode mode, const SteeringParams& params,
                             double theta_ref, double duration) {
  const double b = mode == DampingMode::AuthorityScaled ? variable_damping(authority, params.damping)
                                                        : params.damping;
  constexpr double dt = 1e-4;
  double theta = 0.0;
  double omega = 0.0;
  double peak = 0.0;
  auto accel = [&](double th, double om) {
    const double torque = std::clamp(authority * (theta_ref - th), -authority, authority);
    return (torque - b * om) / params.inertia;
  };
  const int steps = static_cast<int>(duration / dt);
  for (int i = 0; i < steps; ++i) {
    // RK4 on (theta, omega)
    const double k1t = omega, k1w = accel(theta, omega);
    const double k2t = omega + 0.5 * dt * k1w, k2w = accel(theta + 0.5 * dt * k1t, omega + 0.5 * dt * k1w);
    const double k3t = omega + 0.5 * dt * k2w, k3w = accel(theta + 0.5 * dt * k2t, omega + 0.5 * dt * k2w);
    const double k4t = omega + dt * k3w, k4w = accel(theta + dt * k3t, omega + dt * k3w);
    theta += dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    omega += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    peak = std::max(peak, theta);
  }
  return std::max(0.0, (peak - theta_ref) / theta_ref);
}

}  // namespace sharedctl
