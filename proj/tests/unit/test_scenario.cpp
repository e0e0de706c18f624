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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sharedctl/scenario.hpp"

using namespace sharedctl;

namespace {

std::string load_error(const std::string& doc) {
  try {
    load_scenario(doc);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

RunLog run(const ScenarioSpec& spec) {
  Simulation sim(spec);
  sim.run();
  return sim.log();
}

}  // namespace

TEST_CASE("empty document resolves to the corrective preset") {
  const ScenarioSpec s = load_scenario("{}");
  CHECK(s.preset == Preset::Corrective);
  CHECK(s.ego_speed == doctest::Approx(25.0));
  const auto truck = std::find_if(s.actors.begin(), s.actors.end(),
                                  [](const ActorSpec& a) { return a.kind == ActorKind::Truck; });
  REQUIRE(truck != s.actors.end());
  CHECK(truck->speed == doctest::Approx(19.44).epsilon(1e-3));
  CHECK(truck->y == 0.0);
}

TEST_CASE("evasive preset speeds") {
  const ScenarioSpec s = load_scenario(R"({"preset": "evasive"})");
  CHECK(s.ego_speed == doctest::Approx(29.17).epsilon(1e-3));
  const auto moto = std::find_if(s.actors.begin(), s.actors.end(),
                                 [](const ActorSpec& a) { return a.kind == ActorKind::Motorcycle; });
  REQUIRE(moto != s.actors.end());
  REQUIRE(moto->invasion);
  CHECK(moto->speed == doctest::Approx(80.0 / 3.6));
}

TEST_CASE("explicit fields override preset defaults") {
  const ScenarioSpec s = load_scenario(
      R"({"preset": "corrective", "mode": "baseline", "seed": 42, "ego": {"speed": 22.0},
          "driver": {"set": 3, "compliance": 0.2}, "nmpc": {"horizon": 20}})");
  CHECK(s.mode == ControlMode::Baseline);
  CHECK(s.seed == 42u);
  CHECK(s.ego_speed == 22.0);
  CHECK(s.set_speed == 22.0);
  CHECK(s.driver_set == 3);
  CHECK(s.driver.max_torque == driver_population()[3].max_torque);
  CHECK(s.driver.compliance == 0.2);
  CHECK(s.nmpc.horizon == 20);
}

TEST_CASE("load errors name the offending field") {
  CHECK(load_error(R"({"preset": "rally"})").find("preset") == 0);
  CHECK(load_error(R"({"ego": {"sped": 3}})").find("ego.sped") != std::string::npos);
  CHECK(load_error(R"({"ego": {"speed": "fast"}})").find("ego.speed") != std::string::npos);
  CHECK(load_error(R"({"actors": [{"x": 3}]})").find("actors[0].type") != std::string::npos);
  CHECK(load_error(R"({"actors": [{"type": "bus"}]})").find("actors[0].type") != std::string::npos);
  CHECK(load_error(R"({"driver": {"set": 8}})").find("driver.set") != std::string::npos);
  CHECK(load_error(R"({"seed": -1})").find("seed") != std::string::npos);
  CHECK(load_error(R"({"duration": 0})").find("duration") != std::string::npos);
  CHECK(load_error("{").find("malformed") != std::string::npos);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/scenario.json"), std::exception);
}

TEST_CASE("resolved spec reloads to the same document") {
  for (Preset p : {Preset::Corrective, Preset::Evasive}) {
    const std::string doc = to_json(scenario_preset(p));
    CHECK(to_json(load_scenario(doc)) == doc);
  }
}

TEST_CASE("FNV-1a digest") {
  CHECK(digest_hex("") == "cbf29ce484222325");
  CHECK(digest_hex("a") == "af63dc4c8601ec8c");
  CHECK(digest_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("identical runs produce identical logs") {
  ScenarioSpec spec = scenario_preset(Preset::Corrective);
  spec.seed = 42;
  spec.duration = 20.0;
  const RunLog a = run(spec);
  const RunLog b = run(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) REQUIRE(a.rows[i].t_mpc == b.rows[i].t_mpc);
  CHECK(a.csv() == b.csv());
}

TEST_CASE("log CSV survives a round trip") {
  ScenarioSpec spec = scenario_preset(Preset::Evasive);
  spec.duration = 6.0;
  const RunLog log = run(spec);
  std::istringstream in(log.csv());
  const RunLog back = RunLog::read_csv(in);
  REQUIRE(back.rows.size() == log.rows.size());
  CHECK(back.csv() == log.csv());
  std::istringstream bad("time,x\n0,1\n");
  CHECK_THROWS(RunLog::read_csv(bad));
}

TEST_CASE("one log row per control tick") {
  ScenarioSpec spec = scenario_preset(Preset::Corrective);
  spec.duration = 2.0;
  const RunLog log = run(spec);
  REQUIRE(log.rows.size() == 40u);
  for (std::size_t i = 0; i < log.rows.size(); ++i) CHECK(log.rows[i].time == doctest::Approx(0.05 * i));
}

TEST_CASE("corrective run escalates while the overtake meets oncoming traffic") {
  const RunLog log = run(scenario_preset(Preset::Corrective));
  double ttc_first = -1.0, ttc_last = -1.0;
  int defined = 0;
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const LogRow& r : log.rows) {
    if (r.time < 15.0 || r.time > 20.0 || !r.ttc) continue;
    if (ttc_first < 0.0) ttc_first = *r.ttc;
    ttc_last = *r.ttc;
    ++defined;
    monotone = monotone && *r.ttc <= prev + 1e-9;
    prev = *r.ttc;
  }
  REQUIRE(defined > 3);
  CHECK(monotone);
  CHECK(ttc_last < ttc_first);
  double lambda_max = 0.0;
  for (const LogRow& r : log.rows) lambda_max = std::max(lambda_max, r.lambda);
  CHECK(lambda_max > 3.0);
}

TEST_CASE("evasive run steers right at full authority and recenters") {
  Simulation sim(scenario_preset(Preset::Evasive));
  sim.run();
  const auto& rows = sim.log().rows;
  double lambda_max = 0.0, e_y_min = 0.0;
  for (const LogRow& r : rows) {
    lambda_max = std::max(lambda_max, r.lambda);
    e_y_min = std::min(e_y_min, r.e_y);
    CHECK(r.contact < 0);
  }
  CHECK(lambda_max == 12.0);
  CHECK(e_y_min < -0.5);
  CHECK(std::abs(rows.back().e_y) <= 0.3);
}

TEST_CASE("evasive baseline leaves the driver alone") {
  ScenarioSpec spec = scenario_preset(Preset::Evasive);
  spec.mode = ControlMode::Baseline;
  spec.duration = 8.0;
  for (const LogRow& r : run(spec).rows) CHECK(r.lambda == 0.0);
}

TEST_CASE("corrective baseline holds the static authority in the right lane") {
  ScenarioSpec spec = scenario_preset(Preset::Corrective);
  spec.mode = ControlMode::Baseline;
  spec.duration = 25.0;
  for (const LogRow& r : run(spec).rows) {
    if (r.e_y <= 0.5 * spec.lane_width - 0.05) CHECK(r.lambda == 3.0);
    if (r.e_y > 0.5 * spec.lane_width + 0.05) CHECK(r.lambda == 0.0);
  }
}

TEST_CASE("pilot torque replaces the synthetic driver") {
  ScenarioSpec spec = scenario_preset(Preset::Corrective);
  spec.duration = 1.0;
  Simulation sim(spec);
  sim.set_pilot_torque(2.0);
  sim.tick();
  CHECK(sim.log().rows.back().t_driver == 2.0);
  sim.set_pilot_torque(50.0);
  sim.tick();
  CHECK(sim.log().rows.back().t_driver == Simulation::kPilotTorqueLimit);
  sim.set_pilot_torque(std::nullopt);
  sim.tick();
  CHECK(sim.log().rows.back().t_driver != Simulation::kPilotTorqueLimit);
}

TEST_CASE("name conversions") {
  for (const std::string& n : preset_names()) CHECK(to_string(preset_from_string(n)) == n);
  CHECK(control_mode_from_string("shared_control") == ControlMode::SharedControl);
  CHECK_THROWS_AS(control_mode_from_string("auto"), std::invalid_argument);
  CHECK_THROWS_AS(preset_from_string("rally"), std::invalid_argument);
}

TEST_CASE("shipped data files load") {
  const std::string dir = SHAREDCTL_DATA_DIR;
  const ScenarioSpec corrective = load_scenario_file(dir + "/scenarios/corrective.json");
  CHECK(to_json(corrective) == to_json(scenario_preset(Preset::Corrective)));
  const ScenarioSpec evasive = load_scenario_file(dir + "/scenarios/evasive.json");
  CHECK(to_json(evasive) == to_json(scenario_preset(Preset::Evasive)));
  const ScenarioSpec late = load_scenario_file(dir + "/scenarios/corrective_late_abort.json");
  CHECK(late.seed == 7u);
  CHECK(late.ego_speed == 26.0);

  std::ifstream in(dir + "/fuzzy_corrective.json");
  REQUIRE(in);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(FuzzySystem::from_json(text).to_json() == FuzzySystem::corrective_default().to_json());
}
