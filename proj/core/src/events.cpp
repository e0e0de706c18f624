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
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "sharedctl/scenario.hpp"

namespace sharedctl {

using nlohmann::json;

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Correction: return "correction";
    case EventKind::Evasion: return "evasion";
    case EventKind::Crash: return "crash";
    case EventKind::NearMiss: return "near_miss";
    case EventKind::RoadDeparture: return "road_departure";
    case EventKind::OffRoad: return "off_road";
  }
  return "correction";
}

EventKind event_kind_from_string(const std::string& name) {
  for (EventKind k : {EventKind::Correction, EventKind::Evasion, EventKind::Crash, EventKind::NearMiss,
                      EventKind::RoadDeparture, EventKind::OffRoad}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown event kind '" + name + "'");
}

bool outside_road(const OrientedBox& ego, double lane_width) {
  const auto [lo, hi] = lateral_extent(ego);
  return hi < -0.5 * lane_width || lo > 1.5 * lane_width;
}

namespace {

OrientedBox ego_box(const LogRow& r, const EventContext& ctx) {
  return {r.ego.x, r.ego.y, r.ego.psi, ctx.ego_length, ctx.ego_width};
}

OrientedBox actor_box(const ActorPose& a) { return {a.x, a.y, a.psi, a.length, a.width}; }

// Threat fully behind the ego along the road axis.
bool passed(const LogRow& r, int actor, const EventContext& ctx) {
  if (actor < 0 || actor >= static_cast<int>(r.actors.size())) return false;
  const ActorPose& a = r.actors[actor];
  return a.x + 0.5 * a.length < r.ego.x - 0.5 * ctx.ego_length;
}

}  // namespace

std::vector<EventRecord> detect_events(const RunLog& log, const EventContext& ctx) {
  std::vector<EventRecord> events;
  const auto& rows = log.rows;
  if (rows.empty()) return events;
  const double tick = rows.size() > 1 ? rows[1].time - rows[0].time : 0.05;

  // crashes: contiguous overlap episodes per actor
  const std::size_t n_actors = rows.front().actors.size();
  std::vector<EventRecord> crashes;
  for (std::size_t a = 0; a < n_actors; ++a) {
    bool open = false;
    for (const LogRow& r : rows) {
      const bool hit = r.contact == static_cast<int>(a) || boxes_overlap(ego_box(r, ctx), actor_box(r.actors[a]));
      if (hit && !open) {
        crashes.push_back({EventKind::Crash, r.time, r.time + tick, std::nullopt, 0.0, std::nullopt,
                           static_cast<int>(a)});
        open = true;
      } else if (hit) {
        crashes.back().t_end = r.time + tick;
      } else {
        open = false;
      }
    }
  }
  events.insert(events.end(), crashes.begin(), crashes.end());

  for (const LogRow& r : rows) {
    if (outside_road(ego_box(r, ctx), ctx.lane_width)) {
      events.push_back({EventKind::RoadDeparture, r.time, r.time, std::nullopt, std::nullopt, std::abs(r.e_y), -1});
      break;
    }
  }

  // maneuver event
  std::size_t start = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LogRow& r = rows[i];
    const bool begins = ctx.preset == Preset::Corrective ? r.intent == "overtake"
                                                         : r.threat_id >= 0 && r.dtc <= ctx.visibility_range;
    if (begins) {
      start = i;
      break;
    }
  }
  if (start < rows.size()) {
    int threat = -1;
    for (std::size_t i = start; i < rows.size() && threat < 0; ++i) threat = rows[i].threat_id;
    double end_time = rows.back().time;
    for (std::size_t i = start; i < rows.size(); ++i) {
      if (threat >= 0 && passed(rows[i], threat, ctx)) {
        end_time = std::min(rows.back().time, rows[i].time + kEventTail);
        break;
      }
    }
    std::size_t end = start;
    while (end + 1 < rows.size() && rows[end + 1].time <= end_time + 1e-9) ++end;

    EventRecord ev;
    ev.kind = ctx.preset == Preset::Corrective ? EventKind::Correction : EventKind::Evasion;
    ev.t_start = rows[start].time;
    ev.t_end = rows[end].time;
    ev.actor = threat;
    double min_dtc = std::numeric_limits<double>::infinity();
    std::size_t peak = start;
    for (std::size_t i = start; i <= end; ++i) {
      const LogRow& r = rows[i];
      if (r.ttc && (!ev.min_ttc || *r.ttc < *ev.min_ttc)) ev.min_ttc = *r.ttc;
      min_dtc = std::min(min_dtc, std::min(r.dtc, r.dtc_min));
      if (std::abs(r.e_y) > std::abs(rows[peak].e_y)) peak = i;
    }
    if (std::isfinite(min_dtc)) ev.min_dtc = min_dtc;

    // return phase: from the first re-centering after the peak excursion
    std::size_t ret = end + 1;
    for (std::size_t i = peak + 1; i <= end; ++i) {
      if (std::abs(rows[i].e_y) <= 0.3) {
        ret = i;
        break;
      }
    }
    double ret_start = 0.0;
    if (ret <= end) {
      double dev = 0.0;
      for (std::size_t i = ret; i <= end; ++i) dev = std::max(dev, std::abs(rows[i].e_y));
      ev.max_deviation = dev;
      ret_start = rows[ret].time;
    }
    events.push_back(ev);

    bool crashed = false;
    for (const EventRecord& c : crashes) crashed = crashed || (c.t_start <= ev.t_end && c.t_end >= ev.t_start);
    if (!crashed) {
      const bool near = ctx.preset == Preset::Corrective ? ev.min_ttc && *ev.min_ttc < kNearMissTtc
                                                         : ev.min_dtc && *ev.min_dtc < kNearMissDtc;
      if (near) {
        EventRecord nm = ev;
        nm.kind = EventKind::NearMiss;
        events.push_back(nm);
      }
    }
    if (ev.max_deviation && *ev.max_deviation > kOffRoadDeviation) {
      EventRecord off = ev;
      off.kind = EventKind::OffRoad;
      off.t_start = ret_start;
      events.push_back(off);
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.t_start < b.t_start; });
  return events;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string events_to_json(const std::vector<EventRecord>& events) {
  json arr = json::array();
  for (const EventRecord& e : events) {
    arr.push_back({{"kind", to_string(e.kind)},
                   {"t_start", e.t_start},
                   {"t_end", e.t_end},
                   {"min_ttc", opt(e.min_ttc)},
                   {"min_dtc", opt(e.min_dtc)},
                   {"max_deviation", opt(e.max_deviation)},
                   {"actor", e.actor}});
  }
  return arr.dump(2);
}

std::vector<EventRecord> events_from_json(const std::string& text) {
  std::vector<EventRecord> out;
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("events: malformed document: ") + e.what());
  }
  if (!arr.is_array()) throw std::invalid_argument("events: expected array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    try {
      EventRecord e;
      e.kind = event_kind_from_string(j.at("kind").get<std::string>());
      e.t_start = j.at("t_start").get<double>();
      e.t_end = j.at("t_end").get<double>();
      e.min_ttc = opt_from(j, "min_ttc");
      e.min_dtc = opt_from(j, "min_dtc");
      e.max_deviation = opt_from(j, "max_deviation");
      e.actor = j.value("actor", -1);
      out.push_back(e);
    } catch (const std::exception& ex) {
      throw std::invalid_argument("events[" + std::to_string(i) + "]: " + ex.what());
    }
  }
  return out;
}

}  // namespace sharedctl
