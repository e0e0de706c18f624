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

#include "sharedctl/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sharedctl {

namespace pi = plant_index;

NmpcConfig NmpcConfig::corrective() { return NmpcConfig{}; }

NmpcConfig NmpcConfig::evasive() {
  NmpcConfig c;
  c.name = "evasive";
  c.w_x = 40.0;
  c.w_y = 40.0;
  c.w_psi = 40.0;
  c.w_yaw_rate = 300.0;
  c.w_torque = 0.2;
  c.w_torque_rate = 0.2;
  c.torque_rate_bound = 400.0;
  c.e_y_upper = 1.5;
  return c;
}

NmpcConfig NmpcConfig::preset(const std::string& name) {
  if (name == "corrective") return corrective();
  if (name == "evasive") return evasive();
  throw std::invalid_argument("unknown NMPC preset '" + name + "' (expected corrective, evasive)");
}

void NmpcConfig::validate() const {
  if (horizon < 2) throw std::invalid_argument("NMPC horizon must be at least 2");
  if (!(stage_dt > 0.0)) throw std::invalid_argument("NMPC stage duration must be positive");
  for (double w : {w_x, w_y, w_psi, w_yaw_rate, w_torque, w_torque_rate, slack_weight, slack_quadratic}) {
    if (!(w >= 0.0)) throw std::invalid_argument("NMPC weights must be non-negative");
  }
  if (!(torque_rate_bound > 0.0) || !(yaw_rate_bound > 0.0)) {
    throw std::invalid_argument("NMPC bounds must be positive");
  }
  vehicle.validate();
  steering.validate();
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::LineSearchStalled: return "line_search_stalled";
    case SolverStatus::QpFailure: return "qp_failure";
    case SolverStatus::ZeroAuthority: return "zero_authority";
  }
  return "unknown";
}

Reference build_reference(const ReferencePath& path, const VehicleState& state, const NmpcConfig& config) {
  if (!(state.vx > kLowSpeedGuard)) throw LowSpeedGuardError();
  const PathProjection proj = project_to_path(state, path);
  Reference ref;
  ref.stages.reserve(config.horizon);
  for (int k = 1; k <= config.horizon; ++k) {
    bool exhausted = false;
    const PathPoint p = path.sample(proj.s + state.vx * config.stage_dt * k, &exhausted);
    ref.exhausted = ref.exhausted || exhausted;
    ref.stages.push_back({p.x, p.y, p.heading, p.curvature * state.vx, p.curvature});
  }
  return ref;
}

namespace {

struct StageSensitivity {
  PlantMatrix phi_x;
  PlantVector phi_u;
};

PlantVector rk4_stage(const PlantVector& z, double rho, const PlantInputs& in, const NmpcConfig& c, double h,
                      StageSensitivity* sens) {
  const VehicleParams& p = c.vehicle;
  const SteeringParams& s = c.steering;
  const PlantVector k1 = plant_rates(z, rho, in, p, s);
  const PlantVector z2 = z + 0.5 * h * k1;
  const PlantVector k2 = plant_rates(z2, rho, in, p, s);
  const PlantVector z3 = z + 0.5 * h * k2;
  const PlantVector k3 = plant_rates(z3, rho, in, p, s);
  const PlantVector z4 = z + h * k3;
  const PlantVector k4 = plant_rates(z4, rho, in, p, s);
  if (sens) {
    const PlantMatrix I = PlantMatrix::Identity();
    const PlantJacobian j1 = plant_rates_jacobian(z, rho, in, p, s);
    const PlantJacobian j2 = plant_rates_jacobian(z2, rho, in, p, s);
    const PlantJacobian j3 = plant_rates_jacobian(z3, rho, in, p, s);
    const PlantJacobian j4 = plant_rates_jacobian(z4, rho, in, p, s);
    const PlantMatrix k1x = j1.A;
    const PlantVector k1u = j1.B;
    const PlantMatrix k2x = j2.A * (I + 0.5 * h * k1x);
    const PlantVector k2u = j2.A * (0.5 * h * k1u) + j2.B;
    const PlantMatrix k3x = j3.A * (I + 0.5 * h * k2x);
    const PlantVector k3u = j3.A * (0.5 * h * k2u) + j3.B;
    const PlantMatrix k4x = j4.A * (I + h * k3x);
    const PlantVector k4u = j4.A * (h * k3u) + j4.B;
    sens->phi_x = I + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    sens->phi_u = h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  }
  return z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

constexpr double kScreenMarginEy = 0.5;
constexpr double kScreenMarginYaw = 0.1;

// Residual layout per stage k = 1..N: X, Y, Psi, r, T_{k-1}, increment_{k-1}
constexpr int kResPerStage = 6;

void residuals(const Rollout& ro, const std::vector<double>& inc, const Reference& ref, const NmpcConfig& c,
               Eigen::VectorXd& res, Eigen::MatrixXd* jac, double lambda) {
  const int N = c.horizon;
  res.resize(kResPerStage * N);
  if (jac) jac->setZero(kResPerStage * N, N);
  const double sx = std::sqrt(c.w_x), sy = std::sqrt(c.w_y), spsi = std::sqrt(c.w_psi);
  const double sr = std::sqrt(c.w_yaw_rate), su = std::sqrt(c.w_torque), sdu = std::sqrt(c.w_torque_rate);
  for (int k = 1; k <= N; ++k) {
    const PlantVector& z = ro.states[k];
    const ReferenceSample& rs = ref.stages[k - 1];
    const int row = kResPerStage * (k - 1);
    res[row + 0] = sx * (z[pi::X] - rs.x);
    res[row + 1] = sy * (z[pi::Y] - rs.y);
    res[row + 2] = spsi * wrap_angle(z[pi::Psi] - rs.psi);
    res[row + 3] = sr * (z[pi::R] - rs.r);
    res[row + 4] = su * ro.torques[k - 1];
    res[row + 5] = sdu * inc[k - 1];
    if (jac) {
      const Eigen::MatrixXd& S = ro.sensitivities[k];
      jac->row(row + 0) = sx * S.row(pi::X);
      jac->row(row + 1) = sy * S.row(pi::Y);
      jac->row(row + 2) = spsi * S.row(pi::Psi);
      jac->row(row + 3) = sr * S.row(pi::R);
      for (int j = 0; j < k; ++j) (*jac)(row + 4, j) = su * lambda * c.stage_dt;
      (*jac)(row + 5, k - 1) = sdu;
    }
  }
}

// Projects increments onto the rate box and the cumulative torque band.
void project_feasible(std::vector<double>& inc, double torque_prev, double lambda, const NmpcConfig& c) {
  const double box = c.torque_rate_bound / lambda;
  double T = torque_prev;
  for (double& v : inc) {
    v = std::clamp(v, -box, box);
    double next = T + lambda * c.stage_dt * v;
    if (next > lambda || next < -lambda) {
      next = std::clamp(next, -lambda, lambda);
      v = (next - T) / (lambda * c.stage_dt);
    }
    T = next;
  }
}

}  // namespace

Rollout rollout(const PlantVector& z0, double torque_prev, const std::vector<double>& increments, double lambda,
                const Reference& reference, const NmpcConfig& c, bool with_sensitivities) {
  const int N = c.horizon;
  if (static_cast<int>(increments.size()) != N || static_cast<int>(reference.stages.size()) != N) {
    throw std::invalid_argument("rollout: increments and reference must match the horizon");
  }
  Rollout ro;
  ro.states.reserve(N + 1);
  ro.torques.reserve(N);
  ro.states.push_back(z0);
  if (with_sensitivities) {
    ro.sensitivities.reserve(N + 1);
    ro.sensitivities.push_back(Eigen::MatrixXd::Zero(kPlantDim, N));
  }

  PlantInputs in;
  in.damping = variable_damping(lambda, c.steering.damping);
  const double gain = lambda * c.stage_dt;
  double T = torque_prev;
  StageSensitivity sens;
  for (int k = 0; k < N; ++k) {
    T += gain * increments[k];
    ro.torques.push_back(T);
    in.actuator_torque = T;
    ro.states.push_back(rk4_stage(ro.states[k], reference.stages[k].curvature, in, c, c.stage_dt,
                                  with_sensitivities ? &sens : nullptr));
    if (with_sensitivities) {
      Eigen::MatrixXd S = sens.phi_x * ro.sensitivities[k];
      for (int j = 0; j <= k; ++j) S.col(j) += sens.phi_u * gain;
      ro.sensitivities.push_back(std::move(S));
    }
  }
  return ro;
}

NmpcSolver::NmpcSolver(NmpcConfig config) : config_(std::move(config)) { config_.validate(); }

double NmpcSolver::merit(const Rollout& ro, const std::vector<double>& inc, const Reference& ref,
                         const std::vector<double>& ub, double lb, double* slack_max) const {
  Eigen::VectorXd res;
  residuals(ro, inc, ref, config_, res, nullptr, 0.0);
  double m = res.squaredNorm();
  double worst = 0.0;
  for (int k = 1; k <= config_.horizon; ++k) {
    const double ey = ro.states[k][pi::Ey];
    const double r = ro.states[k][pi::R];
    const double v_e = std::max({0.0, ey - ub[k - 1], lb - ey});
    const double v_r = std::max(0.0, std::abs(r) - config_.yaw_rate_bound);
    m += config_.slack_weight * (v_e + v_r) + config_.slack_quadratic * (v_e * v_e + v_r * v_r);
    worst = std::max({worst, v_e, v_r});
  }
  if (slack_max) *slack_max = worst;
  return m;
}

ControlOutput NmpcSolver::solve(const VehicleState& state, const RoadFrame& road, const Reference& reference,
                                const AuthorityCommand& authority, const ControlOutput* warm) {
  const NmpcConfig& c = config_;
  const int N = c.horizon;
  const double lambda = authority.lambda;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("authority must be finite and >= 0");
  if (!state.finite() || !std::isfinite(road.e_y) || !std::isfinite(road.e_psi)) {
    throw std::invalid_argument("NMPC solve: non-finite state");
  }
  if (static_cast<int>(reference.stages.size()) != N) throw std::invalid_argument("reference length != horizon");

  std::vector<double> ub(N, c.e_y_upper);
  if (!authority.e_y_upper.empty()) {
    if (static_cast<int>(authority.e_y_upper.size()) != N) {
      throw std::invalid_argument("per-stage lateral bounds must match the horizon");
    }
    ub = authority.e_y_upper;
  }
  const double lb = authority.e_y_lower.value_or(c.e_y_lower);

  const PlantVector z0 = pack(state, road);
  ControlOutput out;
  out.lambda = lambda;

  std::vector<double> inc(N, 0.0);
  double torque_prev = 0.0;
  if (lambda > 0.0) {
    torque_prev = warm ? std::clamp(warm->torque, -lambda, lambda) : 0.0;
    if (warm && static_cast<int>(warm->torques.size()) == N) {
      // shift the previous torque plan by one stage and re-express it as increments
      double T = torque_prev;
      for (int k = 0; k < N; ++k) {
        const double target = warm->torques[std::min(k + 1, N - 1)];
        inc[k] = (target - T) / (lambda * c.stage_dt);
        T = target;
      }
    }
    project_feasible(inc, torque_prev, lambda, c);
  }

  auto finish = [&](const Rollout& ro) {
    out.torque_increments = inc;
    out.torques = ro.torques;
    out.torque = ro.torques.front();
    out.predicted.clear();
    out.predicted.reserve(N);
    for (int k = 1; k <= N; ++k) {
      const PlantVector& z = ro.states[k];
      out.predicted.push_back({z[pi::X], z[pi::Y], z[pi::Psi], z[pi::R], z[pi::Ey], z[pi::Epsi], z[pi::Theta],
                               z[pi::Omega], ro.torques[k - 1]});
    }
    out.cost = merit(ro, inc, reference, ub, lb, &out.slack_max);
  };

  if (lambda == 0.0) {
    Rollout ro = rollout(z0, 0.0, inc, 0.0, reference, c, false);
    finish(ro);
    out.torque = 0.0;
    out.status = SolverStatus::ZeroAuthority;
    return out;
  }

  const double gain = lambda * c.stage_dt;
  const double box = c.torque_rate_bound / lambda;
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  out.status = SolverStatus::MaxIterations;
  int it = 0;
  for (; it < c.max_sqp_iters; ++it) {
    const Rollout ro = rollout(z0, torque_prev, inc, lambda, reference, c, true);
    residuals(ro, inc, reference, c, res, &jac, lambda);
    const Eigen::MatrixXd hess = 2.0 * jac.transpose() * jac;
    const Eigen::VectorXd grad = 2.0 * jac.transpose() * res;

    // Soft constraints are screened: only stages near their bound carry a slack.
    // Excluded stages that the reduced solution would violate are added and the
    // QP re-solved, so the result equals the unscreened QP optimum.
    std::vector<int> soft_ey, soft_r;
    std::vector<char> has_ey(N + 1, 0), has_r(N + 1, 0);
    for (int k = 1; k <= N; ++k) {
      const double ey = ro.states[k][pi::Ey];
      const double r = ro.states[k][pi::R];
      if (ey > ub[k - 1] - kScreenMarginEy || ey < lb + kScreenMarginEy) {
        soft_ey.push_back(k);
        has_ey[k] = 1;
      }
      if (std::abs(r) > c.yaw_rate_bound - kScreenMarginYaw) {
        soft_r.push_back(k);
        has_r[k] = 1;
      }
    }

    QpResult sol;
    bool qp_ok = true;
    for (int round = 0; round <= 2 * N; ++round) {
      const int ne = static_cast<int>(soft_ey.size());
      const int nr = static_cast<int>(soft_r.size());
      const int nv = N + ne + nr;
      const int nc = 4 * N + 3 * (ne + nr);
      QpProblem qp;
      qp.H = Eigen::MatrixXd::Zero(nv, nv);
      qp.g = Eigen::VectorXd::Zero(nv);
      qp.C = Eigen::MatrixXd::Zero(nc, nv);
      qp.d = Eigen::VectorXd::Zero(nc);
      qp.H.topLeftCorner(N, N) = hess;
      qp.g.head(N) = grad;
      for (int i = 0; i < N; ++i) qp.H(i, i) += c.regularization;
      for (int i = N; i < nv; ++i) {
        qp.H(i, i) = 2.0 * c.slack_quadratic + c.regularization;
        qp.g[i] = c.slack_weight;
      }

      int row = 0;
      for (int k = 0; k < N; ++k) {
        // rate box on the increment
        qp.C(row, k) = 1.0;
        qp.d[row++] = -box - inc[k];
        qp.C(row, k) = -1.0;
        qp.d[row++] = -box + inc[k];
        // torque band on the applied torque of stage k
        for (int j = 0; j <= k; ++j) {
          qp.C(row, j) = gain;
          qp.C(row + 1, j) = -gain;
        }
        qp.d[row++] = -lambda - ro.torques[k];
        qp.d[row++] = -lambda + ro.torques[k];
      }
      for (int i = 0; i < ne; ++i) {
        const int k = soft_ey[i];
        const int sv = N + i;
        const double ey = ro.states[k][pi::Ey];
        // e_y <= ub + s and e_y >= lb - s
        qp.C.row(row).head(N) = -ro.sensitivities[k].row(pi::Ey);
        qp.C(row, sv) = 1.0;
        qp.d[row++] = ey - ub[k - 1];
        qp.C.row(row).head(N) = ro.sensitivities[k].row(pi::Ey);
        qp.C(row, sv) = 1.0;
        qp.d[row++] = lb - ey;
        qp.C(row, sv) = 1.0;
        qp.d[row++] = 0.0;
      }
      for (int i = 0; i < nr; ++i) {
        const int k = soft_r[i];
        const int sv = N + ne + i;
        const double r = ro.states[k][pi::R];
        // |r| <= bound + s
        qp.C.row(row).head(N) = -ro.sensitivities[k].row(pi::R);
        qp.C(row, sv) = 1.0;
        qp.d[row++] = r - c.yaw_rate_bound;
        qp.C.row(row).head(N) = ro.sensitivities[k].row(pi::R);
        qp.C(row, sv) = 1.0;
        qp.d[row++] = -c.yaw_rate_bound - r;
        qp.C(row, sv) = 1.0;
        qp.d[row++] = 0.0;
      }

      sol = qp_.solve(qp, 1e-9);
      if (sol.status != QpStatus::Optimal) {
        qp_ok = false;
        break;
      }
      const Eigen::VectorXd dx = sol.x.head(N);
      bool grew = false;
      for (int k = 1; k <= N; ++k) {
        if (!has_ey[k]) {
          const double ey = ro.states[k][pi::Ey] + ro.sensitivities[k].row(pi::Ey).dot(dx);
          if (ey > ub[k - 1] || ey < lb) {
            soft_ey.push_back(k);
            has_ey[k] = 1;
            grew = true;
          }
        }
        if (!has_r[k]) {
          const double r = ro.states[k][pi::R] + ro.sensitivities[k].row(pi::R).dot(dx);
          if (std::abs(r) > c.yaw_rate_bound) {
            soft_r.push_back(k);
            has_r[k] = 1;
            grew = true;
          }
        }
      }
      if (!grew) break;
    }
    if (!qp_ok) {
      out.status = SolverStatus::QpFailure;
      break;
    }
    const Eigen::VectorXd step = sol.x.head(N);

    double slack_unused = 0.0;
    const double m0 = merit(ro, inc, reference, ub, lb, &slack_unused);
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(N);
    for (int ls = 0; ls < 12; ++ls) {
      for (int k = 0; k < N; ++k) trial[k] = inc[k] + alpha * step[k];
      project_feasible(trial, torque_prev, lambda, c);
      const Rollout rt = rollout(z0, torque_prev, trial, lambda, reference, c, false);
      if (merit(rt, trial, reference, ub, lb, &slack_unused) <= m0 + 1e-12 * (1.0 + std::abs(m0))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.kkt_residual = step.cwiseAbs().maxCoeff() * gain;
    if (!accepted) {
      out.status = out.kkt_residual < c.kkt_tol ? SolverStatus::Converged : SolverStatus::LineSearchStalled;
      ++it;
      break;
    }
    inc = trial;
    if (out.kkt_residual < c.kkt_tol) {
      out.status = SolverStatus::Converged;
      ++it;
      break;
    }
  }
  out.sqp_iterations = it;
  const Rollout final_ro = rollout(z0, torque_prev, inc, lambda, reference, c, false);
  finish(final_ro);
  return out;
}

std::vector<double> predicted_clearances(const ControlOutput& output, const ObstacleTrack& ob, double stage_dt) {
  std::vector<double> d;
  d.reserve(output.predicted.size());
  for (std::size_t k = 0; k < output.predicted.size(); ++k) {
    const double t = static_cast<double>(k + 1) * stage_dt + ob.time_shift;
    const double ox = ob.x + ob.vx * t;
    const double oy = ob.y + ob.vy * t;
    d.push_back(std::hypot(output.predicted[k].x - ox, output.predicted[k].y - oy));
  }
  return d;
}

ControlOutput constant_velocity_prediction(const VehicleState& s, int horizon, double stage_dt) {
  ControlOutput out;
  const double vxw = s.vx * std::cos(s.psi) - s.vy * std::sin(s.psi);
  const double vyw = s.vx * std::sin(s.psi) + s.vy * std::cos(s.psi);
  for (int k = 1; k <= horizon; ++k) {
    const double t = k * stage_dt;
    out.predicted.push_back({s.x + vxw * t, s.y + vyw * t, s.psi, 0.0, 0.0, 0.0, s.theta, 0.0, 0.0});
  }
  return out;
}

}  // namespace sharedctl
