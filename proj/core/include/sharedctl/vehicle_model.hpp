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

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <utility>

#include "sharedctl/steering.hpp"

namespace sharedctl {

struct VehicleParams {
  double mass = 1650.0;           // kg
  double yaw_inertia = 3234.0;    // kg m^2
  double lf = 1.40;               // CoG to front axle, m
  double lr = 1.65;               // CoG to rear axle, m
  double cornering_front = 94e3;  // N/rad
  double cornering_rear = 118e3;  // N/rad

  void validate() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;    ///< heading, rad
  double vx = 0.0;     ///< longitudinal speed, m/s
  double vy = 0.0;     ///< lateral speed, m/s
  double r = 0.0;      ///< yaw rate, rad/s
  double theta = 0.0;  ///< steering-wheel angle, rad
  double omega = 0.0;  ///< steering-wheel rate, rad/s

  bool finite() const;
};

struct RoadFrame {
  double e_y = 0.0;    ///< lateral error, left positive
  double e_psi = 0.0;  ///< heading error, wrapped to (-pi, pi]
  double rho = 0.0;    ///< path curvature, 1/m
};

struct PlantInputs {
  double a_x = 0.0;              ///< clamped to +-8 m/s^2
  double driver_torque = 0.0;
  double actuator_torque = 0.0;
  /// Self-aligning torque. When empty it is evaluated from the front tire force
  /// at every integrator stage.
  std::optional<double> aligning_torque;
  double damping = 0.65;         ///< active column damping b_lambda
};

struct TireForces {
  double front = 0.0;
  double rear = 0.0;
};

/// Below this speed the lateral tire model is singular and lateral dynamics are frozen.
inline constexpr double kLowSpeedGuard = 0.5;
inline constexpr double kMaxLongitudinalAccel = 8.0;

class LowSpeedGuardError : public std::domain_error {
 public:
  LowSpeedGuardError() : std::domain_error("longitudinal speed below the lateral tire-model guard") {}
};

/// Linear single-track tire forces, restoring convention.
TireForces tire_forces(const VehicleState& state, double delta, const VehicleParams& params);

/// Full plant state: X Y Psi vx vy r e_y e_psi theta omega.
inline constexpr int kPlantDim = 10;
using PlantVector = Eigen::Matrix<double, kPlantDim, 1>;
using PlantMatrix = Eigen::Matrix<double, kPlantDim, kPlantDim>;

namespace plant_index {
inline constexpr int X = 0, Y = 1, Psi = 2, Vx = 3, Vy = 4, R = 5, Ey = 6, Epsi = 7, Theta = 8, Omega = 9;
}

PlantVector pack(const VehicleState& state, const RoadFrame& road);
std::pair<VehicleState, RoadFrame> unpack(const PlantVector& z, double rho);

/// Continuous-time state rates. Throws std::invalid_argument on non-finite input.
PlantVector derivatives(const VehicleState& state, const RoadFrame& road, const PlantInputs& inputs,
                        const VehicleParams& params, const SteeringParams& steer);

/// Rates on the packed vector (no finiteness check, used by integrators).
PlantVector plant_rates(const PlantVector& z, double rho, const PlantInputs& inputs,
                        const VehicleParams& params, const SteeringParams& steer);

/// Analytic Jacobians of plant_rates with respect to the state and to the actuator torque.
struct PlantJacobian {
  PlantMatrix A;
  PlantVector B;
};
PlantJacobian plant_rates_jacobian(const PlantVector& z, double rho, const PlantInputs& inputs,
                                   const VehicleParams& params, const SteeringParams& steer);

/// Classical RK4 step with zero-order-hold inputs. dt must lie in (0, 0.05].
std::pair<VehicleState, RoadFrame> step(const VehicleState& state, const RoadFrame& road,
                                        const PlantInputs& inputs, const VehicleParams& params,
                                        const SteeringParams& steer, double dt);

PlantVector rk4(const PlantVector& z, double rho, const PlantInputs& inputs, const VehicleParams& params,
                const SteeringParams& steer, double dt);

/// Derived lateral acceleration a_y = dvy/dt + vx * r.
double lateral_acceleration(const VehicleState& state, const RoadFrame& road, const PlantInputs& inputs,
                            const VehicleParams& params, const SteeringParams& steer);

}  // namespace sharedctl
