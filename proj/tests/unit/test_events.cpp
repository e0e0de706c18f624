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

#include "sharedctl/scenario.hpp"

using namespace sharedctl;

namespace {

// Ego at 25 m/s on y = 0, oncoming motorcycle at 20 m/s on lateral position `moto_y`.
RunLog passing_log(double moto_y, const std::vector<double>& e_y_profile = {}) {
  RunLog log;
  for (int i = 0; i <= 200; ++i) {
    LogRow r;
    r.time = 0.05 * i;
    r.ego.x = 25.0 * r.time;
    r.ego.vx = 25.0;
    r.e_y = i < static_cast<int>(e_y_profile.size()) ? e_y_profile[i] : 0.0;
    r.ego.y = r.e_y;
    r.intent = "keep_lane";
    r.threat_id = 0;
    r.actors.push_back({200.0 - 20.0 * r.time, moto_y, M_PI, 2.2, 0.8});
    const OrientedBox ego{r.ego.x, r.ego.y, 0.0, 4.5, 1.8};
    const ActorPose& a = r.actors.back();
    r.dtc = box_distance(ego, {a.x, a.y, a.psi, a.length, a.width});
    r.dtc_min = r.dtc;
    r.contact = boxes_overlap(ego, {a.x, a.y, a.psi, a.length, a.width}) ? 0 : -1;
    log.rows.push_back(r);
  }
  return log;
}

EventContext evasive_context() {
  EventContext c;
  c.preset = Preset::Evasive;
  return c;
}

std::size_t count(const std::vector<EventRecord>& ev, EventKind kind) {
  return static_cast<std::size_t>(
      std::count_if(ev.begin(), ev.end(), [&](const EventRecord& e) { return e.kind == kind; }));
}

}  // namespace

TEST_CASE("footprint geometry") {
  const OrientedBox a{0.0, 0.0, 0.0, 4.0, 2.0};
  CHECK(boxes_overlap(a, {3.9, 0.0, 0.0, 4.0, 2.0}));
  CHECK_FALSE(boxes_overlap(a, {4.1, 0.0, 0.0, 4.0, 2.0}));
  CHECK(box_distance(a, {5.0, 0.0, 0.0, 4.0, 2.0}) == doctest::Approx(1.0));
  CHECK(box_distance(a, {0.0, 3.5, 0.0, 4.0, 2.0}) == doctest::Approx(1.5));
  CHECK(box_distance(a, {1.0, 0.5, 0.3, 4.0, 2.0}) == 0.0);
  // corner to corner
  CHECK(box_distance(a, {7.0, 6.0, 0.0, 4.0, 2.0}) == doctest::Approx(std::hypot(3.0, 4.0)));
  const auto [lo, hi] = lateral_extent({0.0, 1.0, M_PI / 2, 4.0, 2.0});
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(3.0));
}

TEST_CASE("rotated boxes use the separating axis") {
  const OrientedBox a{0.0, 0.0, M_PI / 4, 4.0, 2.0};
  const OrientedBox b{0.0, 0.0, -M_PI / 4, 4.0, 2.0};
  CHECK(boxes_overlap(a, b));
  const OrientedBox far{10.0, 0.0, M_PI / 4, 4.0, 2.0};
  CHECK_FALSE(boxes_overlap(a, far));
  CHECK(box_distance(a, far) > 0.0);
}

TEST_CASE("close pass without contact is one near miss") {
  // ego half width 0.9, motorcycle half width 0.4, 0.15 m apart
  const std::vector<EventRecord> ev = detect_events(passing_log(0.9 + 0.15 + 0.4), evasive_context());
  CHECK(count(ev, EventKind::Evasion) == 1u);
  CHECK(count(ev, EventKind::NearMiss) == 1u);
  CHECK(count(ev, EventKind::Crash) == 0u);
  const auto nm = std::find_if(ev.begin(), ev.end(), [](const EventRecord& e) { return e.kind == EventKind::NearMiss; });
  REQUIRE(nm->min_dtc);
  CHECK(*nm->min_dtc == doctest::Approx(0.15));
}

TEST_CASE("comfortable pass is not a near miss") {
  const std::vector<EventRecord> ev = detect_events(passing_log(3.5), evasive_context());
  CHECK(count(ev, EventKind::Evasion) == 1u);
  CHECK(count(ev, EventKind::NearMiss) == 0u);
}

TEST_CASE("contact is a crash and never a near miss") {
  const std::vector<EventRecord> ev = detect_events(passing_log(1.0), evasive_context());
  CHECK(count(ev, EventKind::Crash) == 1u);
  CHECK(count(ev, EventKind::NearMiss) == 0u);
  const auto crash = std::find_if(ev.begin(), ev.end(), [](const EventRecord& e) { return e.kind == EventKind::Crash; });
  CHECK(crash->actor == 0);
}

TEST_CASE("deviation after re-centering beyond 1 m is off-road") {
  std::vector<double> profile(201, 0.0);
  auto bump = [&](int from, int to, double peak) {
    for (int i = from; i <= to; ++i) profile[i] = peak * std::sin(M_PI * (i - from) / (to - from));
  };
  bump(60, 80, -1.5);
  bump(80, 100, 1.2);
  std::vector<EventRecord> ev = detect_events(passing_log(3.5, profile), evasive_context());
  CHECK(count(ev, EventKind::OffRoad) == 1u);
  const auto evasion =
      std::find_if(ev.begin(), ev.end(), [](const EventRecord& e) { return e.kind == EventKind::Evasion; });
  REQUIRE(evasion->max_deviation);
  CHECK(*evasion->max_deviation == doctest::Approx(1.2).epsilon(1e-3));

  bump(80, 100, 0.8);
  ev = detect_events(passing_log(3.5, profile), evasive_context());
  CHECK(count(ev, EventKind::OffRoad) == 0u);
}

TEST_CASE("corrective near miss uses TTC") {
  RunLog log = passing_log(3.5);
  for (LogRow& r : log.rows) {
    r.intent = r.time >= 1.0 ? "overtake" : "keep_lane";
    if (r.time >= 3.0 && r.time <= 4.0) r.ttc = 4.15 - r.time;
  }
  EventContext ctx;
  std::vector<EventRecord> ev = detect_events(log, ctx);
  CHECK(count(ev, EventKind::Correction) == 1u);
  CHECK(count(ev, EventKind::NearMiss) == 1u);
  for (LogRow& r : log.rows) {
    if (r.ttc) r.ttc = *r.ttc + 0.1;
  }
  ev = detect_events(log, ctx);
  CHECK(count(ev, EventKind::NearMiss) == 0u);
}

TEST_CASE("leaving the carriageway is a road departure") {
  std::vector<double> profile(201, 0.0);
  for (int i = 100; i <= 200; ++i) profile[i] = -4.0;
  const std::vector<EventRecord> ev = detect_events(passing_log(3.5, profile), evasive_context());
  CHECK(count(ev, EventKind::RoadDeparture) == 1u);
  CHECK(outside_road({0.0, -3.0, 0.0, 4.5, 1.8}, 3.5));
  CHECK_FALSE(outside_road({0.0, -2.0, 0.0, 4.5, 1.8}, 3.5));
}

TEST_CASE("no manoeuvre without a threat") {
  RunLog log = passing_log(3.5);
  for (LogRow& r : log.rows) r.threat_id = -1;
  CHECK(detect_events(log, evasive_context()).empty());
  CHECK(detect_events(RunLog{}, evasive_context()).empty());
}

TEST_CASE("events JSON round trip") {
  const std::vector<EventRecord> ev = detect_events(passing_log(1.45), evasive_context());
  const std::vector<EventRecord> back = events_from_json(events_to_json(ev));
  REQUIRE(back.size() == ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    CHECK(back[i].kind == ev[i].kind);
    CHECK(back[i].t_start == ev[i].t_start);
    CHECK(back[i].min_dtc == ev[i].min_dtc);
    CHECK(back[i].min_ttc == ev[i].min_ttc);
  }
  CHECK_THROWS_AS(events_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(events_from_json(R"([{"kind": "explosion", "t_start": 0, "t_end": 1}])"), std::invalid_argument);
}
