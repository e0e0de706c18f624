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

#include "sharedctl/arbitration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace sharedctl {

using nlohmann::json;

double MembershipFunction::grade(double x) const {
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}

std::size_t LinguisticVariable::term_index(const std::string& term) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].name == term) return i;
  }
  throw std::invalid_argument("variable '" + name + "' has no term '" + term + "'");
}

double LinguisticVariable::clamp(double x) const {
  if (std::isnan(x)) return min;
  return std::clamp(x, min, max);
}

namespace {

LinguisticVariable make_var(std::string name, double lo, double hi, std::vector<MembershipFunction> terms) {
  return {std::move(name), lo, hi, std::move(terms)};
}

}  // namespace

FuzzySystem FuzzySystem::corrective_default() {
  FuzzySystem sys;
  // lateral position relative to the right-lane center; lane width 3.5 m
  sys.position = make_var("position", -2.0, 6.0,
                          {{"Right", -2.0, -2.0, 0.0, 1.75},
                           {"Border", 0.0, 1.75, 1.75, 3.5},
                           {"Left", 1.75, 3.5, 6.0, 6.0}});
  sys.intention = make_var("intention", -1.5, 1.5,
                           {{"Return", -1.5, -1.5, -0.6, 0.0},
                            {"Stay", -0.6, 0.0, 0.0, 0.6},
                            {"Away", 0.0, 0.6, 1.5, 1.5}});
  sys.risk = make_var("risk", 0.0, 200.0, {{"Near", 0.0, 0.0, 40.0, 80.0}, {"Far", 40.0, 80.0, 200.0, 200.0}});
  sys.authority = make_var("authority", 0.0, 8.0,
                           {{"Low", 0.0, 0.0, 0.5, 1.5},
                            {"Medium", 0.5, 3.0, 3.0, 5.5},
                            {"High", 5.5, 8.0, 8.0, 8.0}});

  constexpr std::size_t Right = 0, Border = 1, Left = 2;
  constexpr std::size_t Return = 0, Stay = 1, Away = 2;
  constexpr std::size_t Near = 0, Far = 1;
  constexpr std::size_t Low = 0, Medium = 1, High = 2;
  for (std::size_t risk : {Near, Far}) {
    const std::size_t escalate = risk == Near ? High : Low;
    for (std::size_t pos : {Right, Border, Left}) {
      for (std::size_t intent : {Return, Stay, Away}) {
        std::size_t out = Medium;
        if (pos == Left || (pos == Border && intent == Away)) out = escalate;
        sys.rules.push_back({pos, intent, risk, out});
      }
    }
  }
  return sys;
}

void FuzzySystem::validate() const {
  for (const LinguisticVariable* v : {&position, &intention, &risk, &authority}) {
    if (!(v->max > v->min)) throw std::invalid_argument("variable '" + v->name + "' has an empty universe");
    if (v->terms.empty()) throw std::invalid_argument("variable '" + v->name + "' has no terms");
    for (const MembershipFunction& t : v->terms) {
      if (!(t.a <= t.b && t.b <= t.c && t.c <= t.d)) {
        throw std::invalid_argument("term '" + v->name + "." + t.name + "' breakpoints must be ordered");
      }
    }
  }
  if (resolution < 3) throw std::invalid_argument("defuzzification resolution must be at least 3");
  for (const FuzzyRule& r : rules) {
    if (r.position >= position.terms.size() || r.intention >= intention.terms.size() ||
        r.risk >= risk.terms.size() || r.output >= authority.terms.size()) {
      throw std::invalid_argument("rule references an unknown term");
    }
  }
}

namespace {

LinguisticVariable parse_var(const json& j, const std::string& path) {
  LinguisticVariable v;
  if (!j.is_object()) throw std::invalid_argument(path + ": expected object");
  try {
    v.name = j.at("name").get<std::string>();
    v.min = j.at("min").get<double>();
    v.max = j.at("max").get<double>();
    const json& terms = j.at("terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const json& t = terms.at(i);
      const auto pts = t.at("points").get<std::vector<double>>();
      if (pts.size() != 4) {
        throw std::invalid_argument(path + ".terms[" + std::to_string(i) + "].points: expected 4 breakpoints");
      }
      v.terms.push_back({t.at("name").get<std::string>(), pts[0], pts[1], pts[2], pts[3]});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return v;
}

json dump_var(const LinguisticVariable& v) {
  json terms = json::array();
  for (const auto& t : v.terms) terms.push_back({{"name", t.name}, {"points", {t.a, t.b, t.c, t.d}}});
  return {{"name", v.name}, {"min", v.min}, {"max", v.max}, {"terms", terms}};
}

}  // namespace

FuzzySystem FuzzySystem::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("fuzzy system: malformed document: ") + e.what());
  }
  FuzzySystem sys;
  if (!j.contains("inputs") || !j["inputs"].is_array() || j["inputs"].size() != 3) {
    throw std::invalid_argument("inputs: expected an array of three variables");
  }
  sys.position = parse_var(j["inputs"][0], "inputs[0]");
  sys.intention = parse_var(j["inputs"][1], "inputs[1]");
  sys.risk = parse_var(j["inputs"][2], "inputs[2]");
  if (!j.contains("output")) throw std::invalid_argument("output: missing");
  sys.authority = parse_var(j["output"], "output");
  if (j.contains("defuzzifier") && j["defuzzifier"] != "centroid") {
    throw std::invalid_argument("defuzzifier: only 'centroid' is supported");
  }
  if (j.contains("resolution")) sys.resolution = j["resolution"].get<int>();
  if (!j.contains("rules") || !j["rules"].is_array()) throw std::invalid_argument("rules: expected array");
  for (std::size_t i = 0; i < j["rules"].size(); ++i) {
    const json& r = j["rules"][i];
    const std::string path = "rules[" + std::to_string(i) + "]";
    if (!r.is_array() || r.size() != 4) throw std::invalid_argument(path + ": expected [position, intention, risk, output]");
    try {
      sys.rules.push_back({sys.position.term_index(r[0].get<std::string>()),
                           sys.intention.term_index(r[1].get<std::string>()),
                           sys.risk.term_index(r[2].get<std::string>()),
                           sys.authority.term_index(r[3].get<std::string>())});
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }
  sys.validate();
  return sys;
}

std::string FuzzySystem::to_json() const {
  json rule_list = json::array();
  for (const FuzzyRule& r : rules) {
    rule_list.push_back({position.terms[r.position].name, intention.terms[r.intention].name,
                         risk.terms[r.risk].name, authority.terms[r.output].name});
  }
  json j = {{"inputs", {dump_var(position), dump_var(intention), dump_var(risk)}},
            {"output", dump_var(authority)},
            {"rules", rule_list},
            {"defuzzifier", "centroid"},
            {"resolution", resolution}};
  return j.dump(2);
}

FuzzyEvaluation evaluate(const FuzzySystem& sys, const RiskInputs& in) {
  const double p = sys.position.clamp(in.e_y);
  const double v = sys.intention.clamp(in.e_y_dot);
  const double d = sys.risk.clamp(in.dtc);

  FuzzyEvaluation ev;
  ev.rule_strengths.reserve(sys.rules.size());
  std::vector<double> clip(sys.authority.terms.size(), 0.0);
  for (const FuzzyRule& r : sys.rules) {
    const double w = std::min({sys.position.terms[r.position].grade(p), sys.intention.terms[r.intention].grade(v),
                               sys.risk.terms[r.risk].grade(d)});
    ev.rule_strengths.push_back(w);
    clip[r.output] = std::max(clip[r.output], w);
  }

  const int n = sys.resolution;
  const double lo = sys.authority.min, hi = sys.authority.max;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = lo + (hi - lo) * i / (n - 1);
    double mu = 0.0;
    for (std::size_t t = 0; t < clip.size(); ++t) {
      if (clip[t] > 0.0) mu = std::max(mu, std::min(clip[t], sys.authority.terms[t].grade(y)));
    }
    num += y * mu;
    den += mu;
  }
  ev.lambda = den > 0.0 ? std::clamp(num / den, lo, hi) : lo;
  return ev;
}

double corrective_authority(const RiskInputs& inputs, const FuzzySystem& sys) { return evaluate(sys, inputs).lambda; }

AuthorityCommand evasive_authority(const std::vector<double>& clearance) {
  if (clearance.empty()) throw std::invalid_argument("evasive_authority: empty clearance vector");
  AuthorityCommand cmd;
  cmd.e_y_upper.reserve(clearance.size());
  double min_d = clearance.front();
  for (double d : clearance) {
    cmd.e_y_upper.push_back(d >= kEvasiveClearance ? kEvasiveSafeUpper : kEvasiveShiftUpper);
    min_d = std::min(min_d, d);
  }
  cmd.lambda = min_d >= kEvasiveClearance ? kEvasiveLowAuthority : kEvasiveHighAuthority;
  cmd.e_y_lower = kEvasiveLower;
  return cmd;
}

std::optional<double> conflict_ttc(const OrientedBox& ego, double ego_vx_world, const ActorState& threat,
                                   double lane_width) {
  const auto [elo, ehi] = lateral_extent(ego);
  const double clo = threat.y - 0.5 * lane_width;
  const double chi = threat.y + 0.5 * lane_width;
  if (ehi < clo || elo > chi) return std::nullopt;

  const double dx = threat.x - ego.cx;
  const double dir = dx >= 0.0 ? 1.0 : -1.0;
  const double gap = std::max(0.0, std::abs(dx) - 0.5 * (ego.length + threat.length));
  // closing speed along the road axis, positive when approaching
  const double closing = dir * (ego_vx_world - threat.vx_world());
  if (!(closing > 0.0)) return std::nullopt;
  return gap / closing;
}

RiskInputs threat_assessment(const WorldState& world) {
  RiskInputs out;
  out.e_y = world.road.e_y;
  out.e_y_dot = world.ego.vx * std::sin(world.road.e_psi) + world.ego.vy * std::cos(world.road.e_psi);
  const ActorState* threat = world.threat();
  if (!threat) return out;
  const OrientedBox ego = world.ego_footprint();
  out.dtc = box_distance(ego, threat->footprint());
  const double ego_vx = world.ego.vx * std::cos(world.ego.psi) - world.ego.vy * std::sin(world.ego.psi);
  out.ttc = conflict_ttc(ego, ego_vx, *threat, world.lane_width);
  return out;
}

double AuthorityFilter::update(double target, double dt) {
  value_ += (1.0 - std::exp(-dt / tau_)) * (target - value_);
  return value_;
}

}  // namespace sharedctl
