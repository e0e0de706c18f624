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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sharedctl/scenario.hpp"

namespace sharedctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// filtered authority above the Medium plateau counts as an intervention
constexpr double kInterventionAuthority = 4.0;
constexpr double kAccCruiseGain = 0.5;
constexpr double kAccGapGain = 0.3;
constexpr double kAccSpeedGain = 0.8;
constexpr double kAccStandstill = 2.0;
constexpr double kAccLimit = 3.0;

DriverScript script_for(Preset p) { return p == Preset::Corrective ? DriverScript::Corrective : DriverScript::Evasive; }

bool oncoming(const ActorState& a) { return std::cos(a.heading) < 0.0; }

}  // namespace

Simulation::Simulation(ScenarioSpec spec)
    : spec_((spec.validate(), std::move(spec))),
      path_(ReferencePath::straight(spec_.ego_x - 200.0, 0.0, 0.0, spec_.road_length + 400.0, 10.0)),
      solver_(spec_.nmpc),
      filter_(spec_.authority_filter_tau, spec_.baseline_authority),
      driver_(script_for(spec_.preset), spec_.driver, spec_.timing, spec_.seed),
      actor_specs_(spec_.actors) {
  substeps_ = static_cast<int>(std::lround(spec_.nmpc.stage_dt / kPlantDt));
  world_.ego.x = spec_.ego_x;
  world_.ego.y = spec_.ego_y;
  world_.ego.vx = spec_.ego_speed;
  world_.ego_length = spec_.ego_length;
  world_.ego_width = spec_.ego_width;
  world_.lane_width = spec_.lane_width;
  world_.road = project_to_path(world_.ego, path_).frame;
  for (std::size_t i = 0; i < actor_specs_.size(); ++i) {
    const ActorSpec& a = actor_specs_[i];
    ActorState s;
    s.id = static_cast<int>(i);
    s.kind = a.kind;
    s.x = a.x;
    s.y = a.y;
    s.heading = a.heading;
    s.speed = a.speed;
    s.length = a.length;
    s.width = a.width;
    world_.actors.push_back(s);
  }
  seen_.assign(world_.actors.size(), false);
  world_.authority.lambda = spec_.preset == Preset::Evasive && spec_.mode == ControlMode::Baseline
                                ? 0.0
                                : spec_.baseline_authority;
  world_.mode = spec_.preset == Preset::Evasive && spec_.mode == ControlMode::Baseline ? DriveMode::Manual
                                                                                       : DriveMode::Assistance;
}

EventContext Simulation::event_context() const {
  return {spec_.preset, spec_.lane_width, spec_.ego_length, spec_.ego_width, spec_.visibility_range};
}

void Simulation::set_pilot_torque(std::optional<double> torque) {
  if (torque) torque = std::clamp(*torque, -kPilotTorqueLimit, kPilotTorqueLimit);
  pilot_torque_ = torque;
}

bool Simulation::threat_passed(const ActorState& a) const {
  const double ego_rear = world_.ego.x - 0.5 * world_.ego_length;
  return a.x + 0.5 * a.length < ego_rear;
}

void Simulation::designate_threat() {
  ActorState* best = nullptr;
  double best_dx = kInf;
  for (ActorState& a : world_.actors) {
    a.threat = false;
    if (a.departed || threat_passed(a)) continue;
    const bool candidate = spec_.preset == Preset::Corrective
                               ? oncoming(a) && a.y > 0.5 * spec_.lane_width
                               : a.kind == ActorKind::Motorcycle;
    if (!candidate) continue;
    const double dx = std::abs(a.x - world_.ego.x);
    if (dx < best_dx) {
      best_dx = dx;
      best = &a;
    }
  }
  if (best) best->threat = true;
}

bool Simulation::threat_visible(const ActorState& a) const {
  if (seen_[a.id]) return true;
  if (box_distance(world_.ego_footprint(), a.footprint()) > spec_.visibility_range) return false;
  if (!actor_specs_[a.id].occluded) return true;
  const double gap = std::abs(a.x - world_.ego.x) - 0.5 * (a.length + world_.ego_length);
  return world_.road.e_y > spec_.occlusion_offset || gap < spec_.occlusion_gap;
}

double Simulation::acc_acceleration() const {
  const VehicleState& e = world_.ego;
  const auto [elo, ehi] = lateral_extent(world_.ego_footprint());
  double a_cmd = kAccCruiseGain * (spec_.set_speed - e.vx);
  for (const ActorState& a : world_.actors) {
    if (a.departed || oncoming(a)) continue;
    const double dx = a.x - e.x;
    if (dx <= 0.0) continue;
    const auto [alo, ahi] = lateral_extent(a.footprint());
    if (ahi < elo || alo > ehi) continue;
    const double gap = dx - 0.5 * (a.length + world_.ego_length);
    const double desired = kAccStandstill + spec_.time_gap * e.vx;
    a_cmd = std::min(a_cmd, kAccGapGain * (gap - desired) + kAccSpeedGain * (a.vx_world() - e.vx));
  }
  return std::clamp(a_cmd, -kAccLimit, kAccLimit);
}

void Simulation::advance_actors(double dt) {
  for (std::size_t i = 0; i < world_.actors.size(); ++i) {
    ActorState& a = world_.actors[i];
    if (a.departed) continue;
    const ActorSpec& s = actor_specs_[i];
    if (s.invasion) {
      if (!a.invading) {
        const double dx = a.x - world_.ego.x;
        const double gap = std::abs(dx) - 0.5 * (a.length + world_.ego_length);
        if (dx > 0.0 && gap <= s.invasion->trigger_gap) a.invading = true;
      }
      if (a.invading) {
        const double dy = s.invasion->target_y - a.y;
        const double move = std::min(std::abs(dy), s.invasion->lateral_speed * dt);
        a.lateral_speed = std::abs(dy) > 1e-12 ? std::copysign(s.invasion->lateral_speed, dy) : 0.0;
        a.y += std::copysign(move, dy);
        if (std::abs(s.invasion->target_y - a.y) <= 1e-12) a.lateral_speed = 0.0;
      }
    }
    a.x += a.speed * std::cos(a.heading) * dt;
    a.y += a.speed * std::sin(a.heading) * dt;
    if (a.x < spec_.ego_x - 500.0 || a.x > spec_.ego_x + spec_.road_length + 500.0) a.departed = true;
  }
}

void Simulation::tick() {
  if (finished_) return;
  const NmpcConfig& cfg = spec_.nmpc;
  const double ts = cfg.stage_dt;
  VehicleState& ego = world_.ego;

  // 1. sense
  world_.road = project_to_path(ego, path_).frame;
  designate_threat();
  const RiskInputs truth = threat_assessment(world_);
  const ActorState* threat = world_.threat();
  const bool visible = threat && threat_visible(*threat);
  if (visible) seen_[threat->id] = true;
  RiskInputs perceived = truth;
  if (!visible) {
    perceived.dtc = kInf;
    perceived.ttc.reset();
  }
  bool cleared = false;
  if (!threat) {
    for (const ActorState& a : world_.actors) {
      const bool candidate = spec_.preset == Preset::Corrective ? oncoming(a) && a.y > 0.5 * spec_.lane_width
                                                                : a.kind == ActorKind::Motorcycle;
      cleared = cleared || (candidate && seen_[a.id]);
    }
  }

  LogRow row;
  row.time = world_.time;
  row.ego = ego;
  row.e_y = world_.road.e_y;
  row.e_psi = world_.road.e_psi;
  row.dtc = truth.dtc;
  row.ttc = truth.ttc;
  row.threat_id = threat ? threat->id : -1;
  for (const ActorState& a : world_.actors) row.actors.push_back({a.x, a.y, a.heading, a.length, a.width});
  const double t_act0 = lag_.output();

  if (outside_road(world_.ego_footprint(), spec_.lane_width)) {
    row.solver_status = "terminated";
    row.mode = to_string(world_.mode);
    row.intent = to_string(driver_.intent().mode);
    row.lambda = world_.authority.lambda;
    row.min_dpred = kInf;
    row.dtc_min = truth.dtc;
    row.t_act = t_act0;
    row.visible = visible ? 1 : 0;
    row.e_y_upper_min = spec_.nmpc.e_y_upper;
    log_.rows.push_back(std::move(row));
    finished_ = true;
    return;
  }

  // 2. arbitration
  AuthorityCommand cmd;
  double min_dpred = kInf;
  if (spec_.preset == Preset::Corrective) {
    if (spec_.mode == ControlMode::SharedControl) {
      cmd.lambda = filter_.update(corrective_authority(perceived, spec_.fuzzy), ts);
      const double lam = cmd.lambda;
      switch (world_.mode) {
        case DriveMode::Assistance:
          if (lam > kInterventionAuthority) world_.mode = DriveMode::Intervention;
          else if (lam < spec_.manual_threshold) world_.mode = DriveMode::Manual;
          break;
        case DriveMode::Intervention:
          if (lam <= kInterventionAuthority) {
            world_.mode = lam < spec_.manual_threshold ? DriveMode::Manual : DriveMode::Assistance;
          }
          break;
        case DriveMode::Manual:
          if (lam > kInterventionAuthority) {
            world_.mode = DriveMode::Intervention;
            recenter_clock_ = 0.0;
          } else if (std::abs(world_.road.e_y) < spec_.recenter_band) {
            recenter_clock_ += ts;
            if (recenter_clock_ >= spec_.recenter_time - 1e-9 && lam >= spec_.manual_threshold) {
              world_.mode = DriveMode::Assistance;
              recenter_clock_ = 0.0;
            }
          } else {
            recenter_clock_ = 0.0;
          }
          break;
      }
    } else {
      const bool in_lane = world_.road.e_y <= 0.5 * spec_.lane_width;
      cmd.lambda = in_lane || !spec_.baseline_right_lane_only ? spec_.baseline_authority : 0.0;
      world_.mode = cmd.lambda > 0.0 ? DriveMode::Assistance : DriveMode::Manual;
    }
  } else {
    if (spec_.mode == ControlMode::SharedControl) {
      std::vector<double> d(cfg.horizon, kInf);
      if (visible && threat->invading) {
        ObstacleTrack track{threat->x, threat->y, threat->vx_world(), threat->vy_world(), 0.0};
        if (world_.has_control && static_cast<int>(world_.control.predicted.size()) == cfg.horizon) {
          track.time_shift = -ts;
          d = predicted_clearances(world_.control, track, ts);
        } else {
          d = predicted_clearances(constant_velocity_prediction(ego, cfg.horizon, ts), track, ts);
        }
      }
      cmd = evasive_authority(d);
      clearances_ = d;
      min_dpred = *std::min_element(d.begin(), d.end());
      world_.mode = cmd.lambda == kEvasiveHighAuthority ? DriveMode::Intervention : DriveMode::Assistance;
    } else {
      cmd.lambda = 0.0;
      world_.mode = DriveMode::Manual;
    }
  }
  world_.authority = cmd;

  // 3. operational controller
  const Reference ref = build_reference(path_, ego, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ControlOutput out = solver_.solve(ego, world_.road, ref, cmd, world_.has_control ? &world_.control : nullptr);
  last_solve_ms_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (out.status == SolverStatus::QpFailure) {
    // hold the previous torque inside the current band
    const double held = world_.has_control ? world_.control.torque : 0.0;
    out.torque = std::clamp(held, -cmd.lambda, cmd.lambda);
  }
  world_.control = out;
  world_.has_control = true;

  // 4. driver
  DriverPercept percept;
  percept.threat_visible = visible;
  percept.threat_invading = threat && threat->invading;
  percept.threat_passed = cleared;
  const DriverIntent& intent = driver_.intent_step(percept, world_.time);
  double t_driver = driver_torque(ego, world_.road, intent, t_act0, spec_.driver, cfg.vehicle, cfg.steering);
  if (pilot_torque_) t_driver = *pilot_torque_;
  world_.driver_torque = t_driver;

  const double a_x = acc_acceleration();
  const double damping = variable_damping(cmd.lambda, cfg.steering.damping);
  PlantInputs in0{a_x, t_driver, t_act0, std::nullopt, damping};
  row.t_sat = self_aligning(tire_forces(ego, ego.theta / cfg.steering.ratio, cfg.vehicle).front, cfg.steering);
  row.a_y = lateral_acceleration(ego, world_.road, in0, cfg.vehicle, cfg.steering);

  // 5-6. execution loop and plant at the fine step
  double dtc_min = truth.dtc;
  int contact = -1;
  RoadFrame road = world_.road;
  for (int i = 0; i < substeps_; ++i) {
    const ExecutionResult ex = execution_step(pid_, out.torque, lag_.output(), kPlantDt);
    pid_ = ex.state;
    const double t_act = lag_.step(ex.motor_torque, kPlantDt);
    const PlantInputs in{a_x, t_driver, t_act, std::nullopt, damping};
    std::tie(ego, road) = step(ego, road, in, cfg.vehicle, cfg.steering, kPlantDt);
    advance_actors(kPlantDt);
    const OrientedBox eb = world_.ego_footprint();
    for (const ActorState& a : world_.actors) {
      if (a.departed) continue;
      if (contact < 0 && boxes_overlap(eb, a.footprint())) contact = a.id;
      if (a.threat) dtc_min = std::min(dtc_min, box_distance(eb, a.footprint()));
    }
  }
  world_.actuator_torque = lag_.output();
  world_.aligning_torque = row.t_sat;
  ++ticks_;
  world_.time = ticks_ * ts;

  // 7. log
  row.t_mpc = out.torque;
  row.t_driver = t_driver;
  row.lambda = cmd.lambda;
  row.solver_status = to_string(out.status);
  row.slack_max = out.slack_max;
  row.mode = to_string(world_.mode);
  row.t_act = t_act0;
  row.intent = to_string(intent.mode);
  row.min_dpred = min_dpred;
  row.dtc_min = dtc_min;
  row.contact = contact;
  row.sqp_iterations = out.sqp_iterations;
  row.visible = visible ? 1 : 0;
  row.e_y_upper_min = cmd.e_y_upper.empty() ? cfg.e_y_upper
                                            : *std::min_element(cmd.e_y_upper.begin(), cmd.e_y_upper.end());
  log_.rows.push_back(std::move(row));

  if (world_.time >= spec_.duration - 1e-9) finished_ = true;
}

void Simulation::run() {
  while (!finished_) tick();
}

}  // namespace sharedctl
