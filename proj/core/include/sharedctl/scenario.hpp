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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sharedctl/arbitration.hpp"
#include "sharedctl/driver_model.hpp"
#include "sharedctl/nmpc.hpp"
#include "sharedctl/path.hpp"
#include "sharedctl/steering.hpp"
#include "sharedctl/world.hpp"

namespace sharedctl {

enum class Preset { Corrective, Evasive };
enum class ControlMode { Baseline, SharedControl };

std::string to_string(Preset preset);
std::string to_string(ControlMode mode);
Preset preset_from_string(const std::string& name);
ControlMode control_mode_from_string(const std::string& name);
const std::vector<std::string>& preset_names();

/// Lateral drift of an oncoming actor into the ego lane.
struct InvasionScript {
  double trigger_gap = 120.0;   ///< longitudinal bumper gap that starts the drift, m
  double target_y = 0.95;       ///< final lateral position, m
  double lateral_speed = 1.5;   ///< m/s
};

struct ActorSpec {
  ActorKind kind = ActorKind::Car;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double length = 4.5;
  double width = 1.8;
  /// Hidden behind the lead vehicle until the ego pulls out or closes in.
  bool occluded = false;
  std::optional<InvasionScript> invasion;
};

struct ScenarioSpec {
  Preset preset = Preset::Corrective;
  ControlMode mode = ControlMode::SharedControl;
  std::uint64_t seed = 1;
  double duration = 30.0;

  double lane_width = 3.5;
  double road_length = 3000.0;

  double ego_x = 0.0;
  double ego_y = 0.0;
  double ego_speed = 25.0;
  double set_speed = 25.0;
  double ego_length = 4.5;
  double ego_width = 1.8;
  double time_gap = 1.5;      ///< ACC following time gap, s

  std::vector<ActorSpec> actors;

  int driver_set = 0;
  DriverParams driver;
  ScriptTiming timing;

  double visibility_range = 150.0;
  double occlusion_offset = 1.0;  ///< ego e_y that clears the occlusion, m
  double occlusion_gap = 120.0;   ///< gap below which an occluded actor is visible, m

  double baseline_authority = 3.0; ///< static authority of the baseline controller
  /// Corrective baseline: lane keeping acts only while the ego center is in the right lane.
  bool baseline_right_lane_only = true;
  double manual_threshold = 1.0;   ///< authority below which the controller counts as released
  double recenter_band = 0.3;
  double recenter_time = 1.0;
  double authority_filter_tau = 0.2;

  NmpcConfig nmpc;
  FuzzySystem fuzzy = FuzzySystem::corrective_default();

  void validate() const;
};

/// Defaults for a named preset.
ScenarioSpec scenario_preset(Preset preset);

/// Parses a scenario document: preset defaults first, then explicit fields.
/// Errors name the offending field path.
ScenarioSpec load_scenario(const std::string& text);
ScenarioSpec load_scenario_file(const std::string& path);

/// Fully resolved spec as a canonical JSON document.
std::string to_json(const ScenarioSpec& spec);

/// Stable 64-bit FNV-1a digest, printed as 16 hex digits.
std::string digest_hex(const std::string& bytes);

struct ActorPose {
  double x = 0.0, y = 0.0, psi = 0.0, length = 0.0, width = 0.0;
};

/// One row per control tick: the state at `time` and the commands held until the next tick.
struct LogRow {
  double time = 0.0;
  VehicleState ego;
  double e_y = 0.0;
  double e_psi = 0.0;
  double t_mpc = 0.0;
  double t_driver = 0.0;
  double t_sat = 0.0;
  double lambda = 0.0;
  double dtc = 0.0;
  std::optional<double> ttc;
  std::string solver_status;
  double slack_max = 0.0;
  std::string mode;
  double a_y = 0.0;
  double t_act = 0.0;
  std::string intent;
  double min_dpred = 0.0;
  double dtc_min = 0.0;   ///< minimum DTC over the tick's plant substeps
  int contact = -1;       ///< actor overlapped during the tick's substeps, -1 for none
  int threat_id = -1;
  int sqp_iterations = 0;
  int visible = 0;        ///< threat perceived by the automation
  double e_y_upper_min = 0.0; ///< tightest stage upper bound of the active command
  std::vector<ActorPose> actors;
};

struct RunLog {
  std::vector<LogRow> rows;

  void write_csv(std::ostream& out) const;
  std::string csv() const;
  static RunLog read_csv(std::istream& in);
};

enum class EventKind { Correction, Evasion, Crash, NearMiss, RoadDeparture, OffRoad };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& name);

struct EventRecord {
  EventKind kind = EventKind::Correction;
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<double> min_ttc;
  std::optional<double> min_dtc;
  std::optional<double> max_deviation;
  int actor = -1;
};

inline constexpr double kNearMissTtc = 0.2;     // s
inline constexpr double kNearMissDtc = 0.2;     // m
inline constexpr double kOffRoadDeviation = 1.0; // m
inline constexpr double kEventTail = 3.0;       // s kept after the threat passes

struct EventContext {
  Preset preset = Preset::Corrective;
  double lane_width = 3.5;
  double ego_length = 4.5;
  double ego_width = 1.8;
  double visibility_range = 150.0;
};

std::vector<EventRecord> detect_events(const RunLog& log, const EventContext& context);
std::string events_to_json(const std::vector<EventRecord>& events);
std::vector<EventRecord> events_from_json(const std::string& text);

/// True when the ego footprint lies entirely outside the two-lane carriageway.
bool outside_road(const OrientedBox& ego, double lane_width);

/// Deterministic closed-loop simulation of one scenario.
class Simulation {
 public:
  explicit Simulation(ScenarioSpec spec);

  /// One control tick: sense, arbitrate, solve, driver, then 1 ms execution and plant substeps.
  void tick();
  void run();
  bool finished() const { return finished_; }

  /// Human torque replacing the synthetic driver's output; empty restores the synthetic driver.
  void set_pilot_torque(std::optional<double> torque);
  /// Asks the synthetic driver to start the corrective overtake now.
  void request_overtake() { driver_.request_overtake(world_.time); }

  const WorldState& world() const { return world_; }
  const RunLog& log() const { return log_; }
  const ScenarioSpec& spec() const { return spec_; }
  const DriverIntent& intent() const { return driver_.intent(); }
  /// Predicted clearances d(k) behind the last evasive command; empty otherwise.
  const std::vector<double>& clearances() const { return clearances_; }
  /// Wall-clock time of the last NMPC solve, ms.
  double last_solve_ms() const { return last_solve_ms_; }
  EventContext event_context() const;

  static constexpr double kPlantDt = 0.001;
  static constexpr double kPilotTorqueLimit = 10.0;

 private:
  void designate_threat();
  bool threat_visible(const ActorState& threat) const;
  bool threat_passed(const ActorState& threat) const;
  double acc_acceleration() const;
  void advance_actors(double dt);

  ScenarioSpec spec_;
  ReferencePath path_;
  NmpcSolver solver_;
  AuthorityFilter filter_;
  ScriptedDriver driver_;
  PidState pid_;
  ActuatorLag lag_;
  WorldState world_;
  RunLog log_;
  std::vector<ActorSpec> actor_specs_;
  std::optional<double> pilot_torque_;
  std::vector<bool> seen_;
  std::vector<double> clearances_;
  long ticks_ = 0;
  double recenter_clock_ = 0.0;
  double last_solve_ms_ = 0.0;
  bool finished_ = false;
  int substeps_ = 50;
};

}  // namespace sharedctl
