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

#include "sharedctl/vehicle_model.hpp"

#include <algorithm>
#include <cmath>

namespace sharedctl {

namespace pi = plant_index;

void VehicleParams::validate() const {
  if (!(mass > 0.0) || !(yaw_inertia > 0.0) || !(lf > 0.0) || !(lr > 0.0) || !(cornering_front > 0.0) ||
      !(cornering_rear > 0.0)) {
    throw std::invalid_argument("vehicle parameters must be strictly positive");
  }
}

bool VehicleState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(psi) && std::isfinite(vx) && std::isfinite(vy) &&
         std::isfinite(r) && std::isfinite(theta) && std::isfinite(omega);
}

TireForces tire_forces(const VehicleState& state, double delta, const VehicleParams& params) {
  if (!(state.vx > kLowSpeedGuard)) throw LowSpeedGuardError();
  const double front = params.cornering_front * (delta - (state.vy + params.lf * state.r) / state.vx);
  const double rear = -params.cornering_rear * (state.vy - params.lr * state.r) / state.vx;
  return {front, rear};
}

PlantVector pack(const VehicleState& s, const RoadFrame& road) {
  PlantVector z;
  z << s.x, s.y, s.psi, s.vx, s.vy, s.r, road.e_y, road.e_psi, s.theta, s.omega;
  return z;
}

std::pair<VehicleState, RoadFrame> unpack(const PlantVector& z, double rho) {
  VehicleState s{z[pi::X], z[pi::Y], z[pi::Psi], z[pi::Vx], z[pi::Vy], z[pi::R], z[pi::Theta], z[pi::Omega]};
  return {s, RoadFrame{z[pi::Ey], z[pi::Epsi], rho}};
}

PlantVector plant_rates(const PlantVector& z, double rho, const PlantInputs& in, const VehicleParams& p,
                        const SteeringParams& steer) {
  const double psi = z[pi::Psi], vx = z[pi::Vx], vy = z[pi::Vy], r = z[pi::R];
  const double epsi = z[pi::Epsi], theta = z[pi::Theta], omega = z[pi::Omega];
  const double ax = std::clamp(in.a_x, -kMaxLongitudinalAccel, kMaxLongitudinalAccel);
  const double delta = theta / steer.ratio;

  PlantVector dz;
  dz[pi::X] = vx * std::cos(psi) - vy * std::sin(psi);
  dz[pi::Y] = vx * std::sin(psi) + vy * std::cos(psi);
  dz[pi::Psi] = r;
  dz[pi::Ey] = vx * std::sin(epsi) + vy * std::cos(epsi);
  dz[pi::Epsi] = r - rho * vx;
  dz[pi::Theta] = omega;

  double front = 0.0;
  if (vx > kLowSpeedGuard) {
    front = p.cornering_front * (delta - (vy + p.lf * r) / vx);
    const double rear = -p.cornering_rear * (vy - p.lr * r) / vx;
    const double sd = std::sin(delta), cd = std::cos(delta);
    dz[pi::Vx] = ax - front * sd / p.mass + vy * r;
    dz[pi::Vy] = (rear + front * cd) / p.mass - vx * r;
    dz[pi::R] = (p.lf * front * cd - p.lr * rear) / p.yaw_inertia;
  } else {
    dz[pi::Vx] = ax;
    dz[pi::Vy] = 0.0;
    dz[pi::R] = 0.0;
  }
  const double t_sat = in.aligning_torque ? *in.aligning_torque : self_aligning(front, steer);
  dz[pi::Omega] = (in.driver_torque + in.actuator_torque - t_sat - in.damping * omega) / steer.inertia;
  return dz;
}

PlantJacobian plant_rates_jacobian(const PlantVector& z, double rho, const PlantInputs& in, const VehicleParams& p,
                                   const SteeringParams& steer) {
  const double psi = z[pi::Psi], vx = z[pi::Vx], vy = z[pi::Vy], r = z[pi::R];
  const double epsi = z[pi::Epsi], theta = z[pi::Theta];
  const double delta = theta / steer.ratio;
  const double cpsi = std::cos(psi), spsi = std::sin(psi);

  PlantJacobian jac;
  PlantMatrix& A = jac.A;
  A.setZero();
  jac.B.setZero();

  A(pi::X, pi::Psi) = -vx * spsi - vy * cpsi;
  A(pi::X, pi::Vx) = cpsi;
  A(pi::X, pi::Vy) = -spsi;
  A(pi::Y, pi::Psi) = vx * cpsi - vy * spsi;
  A(pi::Y, pi::Vx) = spsi;
  A(pi::Y, pi::Vy) = cpsi;
  A(pi::Psi, pi::R) = 1.0;
  A(pi::Ey, pi::Vx) = std::sin(epsi);
  A(pi::Ey, pi::Vy) = std::cos(epsi);
  A(pi::Ey, pi::Epsi) = vx * std::cos(epsi) - vy * std::sin(epsi);
  A(pi::Epsi, pi::R) = 1.0;
  A(pi::Epsi, pi::Vx) = -rho;
  A(pi::Theta, pi::Omega) = 1.0;

  Eigen::Matrix<double, 1, kPlantDim> d_front = Eigen::Matrix<double, 1, kPlantDim>::Zero();
  if (vx > kLowSpeedGuard) {
    const double front = p.cornering_front * (delta - (vy + p.lf * r) / vx);
    const double rear = -p.cornering_rear * (vy - p.lr * r) / vx;
    Eigen::Matrix<double, 1, kPlantDim> d_rear = Eigen::Matrix<double, 1, kPlantDim>::Zero();
    d_front[pi::Vx] = p.cornering_front * (vy + p.lf * r) / (vx * vx);
    d_front[pi::Vy] = -p.cornering_front / vx;
    d_front[pi::R] = -p.cornering_front * p.lf / vx;
    d_front[pi::Theta] = p.cornering_front / steer.ratio;
    d_rear[pi::Vx] = p.cornering_rear * (vy - p.lr * r) / (vx * vx);
    d_rear[pi::Vy] = -p.cornering_rear / vx;
    d_rear[pi::R] = p.cornering_rear * p.lr / vx;

    const double sd = std::sin(delta), cd = std::cos(delta);
    Eigen::Matrix<double, 1, kPlantDim> d_delta = Eigen::Matrix<double, 1, kPlantDim>::Zero();
    d_delta[pi::Theta] = 1.0 / steer.ratio;

    // d(front * sin delta), d(front * cos delta)
    const Eigen::Matrix<double, 1, kPlantDim> d_fs = d_front * sd + front * cd * d_delta;
    const Eigen::Matrix<double, 1, kPlantDim> d_fc = d_front * cd - front * sd * d_delta;

    A.row(pi::Vx) = -d_fs / p.mass;
    A(pi::Vx, pi::Vy) += r;
    A(pi::Vx, pi::R) += vy;
    A.row(pi::Vy) = (d_rear + d_fc) / p.mass;
    A(pi::Vy, pi::Vx) -= r;
    A(pi::Vy, pi::R) -= vx;
    A.row(pi::R) = (p.lf * d_fc - p.lr * d_rear) / p.yaw_inertia;
  }
  if (!in.aligning_torque) {
    A.row(pi::Omega) = -(steer.pneumatic_trail / steer.ratio) * d_front / steer.inertia;
  }
  A(pi::Omega, pi::Omega) -= in.damping / steer.inertia;
  jac.B[pi::Omega] = 1.0 / steer.inertia;
  return jac;
}

PlantVector derivatives(const VehicleState& state, const RoadFrame& road, const PlantInputs& inputs,
                        const VehicleParams& params, const SteeringParams& steer) {
  if (!state.finite() || !std::isfinite(road.e_y) || !std::isfinite(road.e_psi) || !std::isfinite(road.rho) ||
      !std::isfinite(inputs.a_x) || !std::isfinite(inputs.driver_torque) || !std::isfinite(inputs.actuator_torque) ||
      !std::isfinite(inputs.damping) || (inputs.aligning_torque && !std::isfinite(*inputs.aligning_torque))) {
    throw std::invalid_argument("derivatives: non-finite state or input");
  }
  return plant_rates(pack(state, road), road.rho, inputs, params, steer);
}

PlantVector rk4(const PlantVector& z, double rho, const PlantInputs& in, const VehicleParams& p,
                const SteeringParams& steer, double dt) {
  const PlantVector k1 = plant_rates(z, rho, in, p, steer);
  const PlantVector k2 = plant_rates(z + 0.5 * dt * k1, rho, in, p, steer);
  const PlantVector k3 = plant_rates(z + 0.5 * dt * k2, rho, in, p, steer);
  const PlantVector k4 = plant_rates(z + dt * k3, rho, in, p, steer);
  return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::pair<VehicleState, RoadFrame> step(const VehicleState& state, const RoadFrame& road, const PlantInputs& inputs,
                                        const VehicleParams& params, const SteeringParams& steer, double dt) {
  if (!(dt > 0.0 && dt <= 0.05)) throw std::invalid_argument("step: dt must lie in (0, 0.05]");
  // validates finiteness
  (void)derivatives(state, road, inputs, params, steer);
  PlantVector z = rk4(pack(state, road), road.rho, inputs, params, steer, dt);
  auto [next, frame] = unpack(z, road.rho);
  frame.e_psi = std::remainder(frame.e_psi, 2.0 * M_PI);
  if (frame.e_psi <= -M_PI) frame.e_psi += 2.0 * M_PI;
  return {next, frame};
}

double lateral_acceleration(const VehicleState& state, const RoadFrame& road, const PlantInputs& inputs,
                            const VehicleParams& params, const SteeringParams& steer) {
  const PlantVector dz = plant_rates(pack(state, road), road.rho, inputs, params, steer);
  return dz[pi::Vy] + state.vx * state.r;
}

}  // namespace sharedctl
