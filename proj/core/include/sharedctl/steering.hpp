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

#include <stdexcept>

namespace sharedctl {

/// Steering column and actuator parameters. Defaults are the nominal
/// passenger-car column the controller was tuned for.
struct SteeringParams {
  double inertia = 0.1;           ///< J, kg m^2
  double damping = 0.65;          ///< nominal b, N m s/rad
  double ratio = 8.77;            ///< hand-wheel to road-wheel reduction
  double pneumatic_trail = 0.03;  ///< m
  double motor_torque_max = 15.0; ///< N m, must exceed 10

  void validate() const;
};

/// Authority-dependent column damping b * sqrt((lambda + 1) / 2).
/// Throws std::invalid_argument for negative authority.
double variable_damping(double authority, double nominal_damping);

/// Self-aligning torque reflected to the hand wheel, (trail / ratio) * F_yf.
double self_aligning(double front_lateral_force, const SteeringParams& params);

struct PidGains {
  double kp = 5.0;
  double ki = 500.0;
  double kd = 0.0;
  double output_limit = 15.0;
};

struct PidState {
  PidGains gains;
  double integral = 0.0;  ///< integral of error, |integral| <= limit / ki
  double previous_error = 0.0;
  bool primed = false;
};

struct ExecutionResult {
  double motor_torque;
  PidState state;
};

/// One tick of the execution-level torque loop. dt must lie in (0, 0.01].
ExecutionResult execution_step(const PidState& pid, double torque_ref, double torque_meas, double dt);

/// First-order motor lag between PID command and torque applied to the column.
class ActuatorLag {
 public:
  explicit ActuatorLag(double time_constant = 0.01) : tau_(time_constant) {
    if (!(tau_ > 0.0)) throw std::invalid_argument("actuator time constant must be positive");
  }

  double step(double command, double dt);
  double output() const { return output_; }
  void reset(double value = 0.0) { output_ = value; }

 private:
  double tau_;
  double output_ = 0.0;
};

enum class DampingMode { Nominal, AuthorityScaled };

/// Column-angle step response under an authority-scaled stiffness law
/// T = clamp(lambda * (theta_ref - theta), +-lambda), vehicle at rest.
/// Returns the fractional overshoot of theta over theta_ref.
double column_step_overshoot(double authority, DampingMode mode, const SteeringParams& params = {},
                             double theta_ref = 0.1, double duration = 3.0);

}  // namespace sharedctl
