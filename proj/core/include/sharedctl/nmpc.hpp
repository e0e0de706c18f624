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

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "sharedctl/path.hpp"
#include "sharedctl/qp.hpp"
#include "sharedctl/steering.hpp"
#include "sharedctl/vehicle_model.hpp"

namespace sharedctl {

struct NmpcConfig {
  std::string name = "corrective";
  int horizon = 30;
  double stage_dt = 0.05;

  // stage weights on (X, Y, Psi, yaw rate)
  double w_x = 50.0;
  double w_y = 50.0;
  double w_psi = 50.0;
  double w_yaw_rate = 350.0;
  double w_torque = 0.15;
  double w_torque_rate = 0.25;

  double yaw_rate_bound = 0.4;    // rad/s, soft
  double torque_rate_bound = 100; // N m/s, hard
  double e_y_lower = -1.5;        // m, soft
  double e_y_upper = 5.0;         // m, soft (default when no per-stage bounds)

  double slack_weight = 1e4;      // L1 penalty per unit violation
  double slack_quadratic = 1e2;   // keeps the slack block of the QP Hessian definite
  double regularization = 1e-8;

  int max_sqp_iters = 10;
  double kkt_tol = 1e-4;          // N m, torque-space step norm

  VehicleParams vehicle;
  SteeringParams steering;

  static NmpcConfig corrective();
  static NmpcConfig evasive();
  static NmpcConfig preset(const std::string& name);

  void validate() const;
};

struct AuthorityCommand {
  double lambda = 3.0;
  /// Upper lateral-error bound per prediction stage; empty means the preset's static bound.
  std::vector<double> e_y_upper;
  /// Lower bound; empty means the preset's static bound.
  std::optional<double> e_y_lower;
};

struct ReferenceSample {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double r = 0.0;
  double curvature = 0.0;
};

struct Reference {
  std::vector<ReferenceSample> stages;  ///< stages 1..N
  bool exhausted = false;
};

/// Samples the lane-center path ahead at arc-length increments vx * T_s.
Reference build_reference(const ReferencePath& path, const VehicleState& state, const NmpcConfig& config);

enum class SolverStatus { Converged, MaxIterations, LineSearchStalled, QpFailure, ZeroAuthority };

std::string to_string(SolverStatus status);

struct PredictedStage {
  double x, y, psi, r, e_y, e_psi, theta, omega, torque;
};

struct ControlOutput {
  double torque = 0.0;                   ///< first applied torque T_mpc
  std::vector<double> torques;           ///< applied torque per stage (N)
  std::vector<double> torque_increments; ///< decision variables (N)
  std::vector<PredictedStage> predicted; ///< states at stages 1..N
  double lambda = 0.0;
  SolverStatus status = SolverStatus::Converged;
  int sqp_iterations = 0;
  double kkt_residual = 0.0;
  double slack_max = 0.0;
  double cost = 0.0;
};

/// Constant-velocity obstacle. Stage k is evaluated at time k * T_s + time_shift.
struct ObstacleTrack {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double time_shift = 0.0;
};

/// Per-stage Euclidean distance between predicted ego CoG and obstacle CoG.
std::vector<double> predicted_clearances(const ControlOutput& output, const ObstacleTrack& obstacle,
                                         double stage_dt);

/// Straight constant-velocity ego prediction, used before a first solve exists.
ControlOutput constant_velocity_prediction(const VehicleState& state, int horizon, double stage_dt);

/// Rollout of the prediction model for a given increment sequence, exposing
/// the condensed sensitivities so they can be checked against finite differences.
struct Rollout {
  std::vector<PlantVector> states;  ///< z_0..z_N
  std::vector<double> torques;      ///< T_0..T_{N-1}
  std::vector<Eigen::MatrixXd> sensitivities;  ///< dz_k / d(increments), k = 0..N
};

Rollout rollout(const PlantVector& z0, double torque_prev, const std::vector<double>& increments, double lambda,
                const Reference& reference, const NmpcConfig& config, bool with_sensitivities);

/// Shared-control path-tracking NMPC. One instance per simulation, not reentrant.
class NmpcSolver {
 public:
  explicit NmpcSolver(NmpcConfig config);

  ControlOutput solve(const VehicleState& state, const RoadFrame& road, const Reference& reference,
                      const AuthorityCommand& authority, const ControlOutput* warm = nullptr);

  const NmpcConfig& config() const { return config_; }

 private:
  double merit(const Rollout& ro, const std::vector<double>& increments, const Reference& reference,
               const std::vector<double>& ub, double lb, double* slack_max) const;

  NmpcConfig config_;
  DualActiveSetQp qp_;
};

}  // namespace sharedctl
