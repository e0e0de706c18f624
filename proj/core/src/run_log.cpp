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

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sharedctl/scenario.hpp"

namespace sharedctl {

namespace {

const char* const kFixedColumns[] = {"time",   "x",     "y",     "psi",      "vx",  "vy",        "r",
                                     "theta",  "omega", "e_y",   "e_psi",    "T_mpc", "T_driver", "T_sat",
                                     "lambda", "dtc",   "ttc",   "solver_status", "slack_max", "mode"};
const char* const kExtraColumns[] = {"a_y",     "T_act",  "intent",    "min_dpred",
                                     "dtc_min", "contact", "threat_id", "sqp_iterations",
                                     "visible", "e_y_upper_min"};
const char* const kActorFields[] = {"x", "y", "psi", "len", "wid"};

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, const std::string& column, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument("log line " + std::to_string(line) + ", column '" + column + "': not a number");
  }
  return v;
}

}  // namespace

void RunLog::write_csv(std::ostream& out) const {
  const std::size_t actors = rows.empty() ? 0 : rows.front().actors.size();
  bool first = true;
  for (const char* c : kFixedColumns) {
    out << (first ? "" : ",") << c;
    first = false;
  }
  for (const char* c : kExtraColumns) out << ',' << c;
  for (std::size_t i = 0; i < actors; ++i) {
    for (const char* f : kActorFields) out << ",a" << i << '_' << f;
  }
  out << '\n';

  for (const LogRow& r : rows) {
    const double fixed[] = {r.time, r.ego.x, r.ego.y, r.ego.psi, r.ego.vx, r.ego.vy, r.ego.r, r.ego.theta,
                            r.ego.omega, r.e_y, r.e_psi, r.t_mpc, r.t_driver, r.t_sat, r.lambda, r.dtc};
    for (std::size_t i = 0; i < std::size(fixed); ++i) {
      if (i) out << ',';
      put(out, fixed[i]);
    }
    out << ',';
    if (r.ttc) put(out, *r.ttc);
    out << ',' << r.solver_status << ',';
    put(out, r.slack_max);
    out << ',' << r.mode << ',';
    put(out, r.a_y);
    out << ',';
    put(out, r.t_act);
    out << ',' << r.intent << ',';
    put(out, r.min_dpred);
    out << ',';
    put(out, r.dtc_min);
    out << ',' << r.contact << ',' << r.threat_id << ',' << r.sqp_iterations << ',' << r.visible << ',';
    put(out, r.e_y_upper_min);
    for (const ActorPose& a : r.actors) {
      for (double v : {a.x, a.y, a.psi, a.length, a.width}) {
        out << ',';
        put(out, v);
      }
    }
    out << '\n';
  }
}

std::string RunLog::csv() const {
  std::ostringstream ss;
  write_csv(ss);
  return ss.str();
}

RunLog RunLog::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("log: empty document");
  const std::vector<std::string> header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* c : kFixedColumns) {
    if (!col.count(c)) throw std::invalid_argument(std::string("log: missing column '") + c + "'");
  }
  std::size_t actors = 0;
  while (col.count("a" + std::to_string(actors) + "_x")) ++actors;

  RunLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("log line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    auto num = [&](const std::string& name, double fallback = 0.0) {
      auto it = col.find(name);
      return it == col.end() ? fallback : parse_double(cells[it->second], name, lineno);
    };
    auto text = [&](const std::string& name) {
      auto it = col.find(name);
      return it == col.end() ? std::string() : cells[it->second];
    };
    LogRow r;
    r.time = num("time");
    r.ego = {num("x"), num("y"), num("psi"), num("vx"), num("vy"), num("r"), num("theta"), num("omega")};
    r.e_y = num("e_y");
    r.e_psi = num("e_psi");
    r.t_mpc = num("T_mpc");
    r.t_driver = num("T_driver");
    r.t_sat = num("T_sat");
    r.lambda = num("lambda");
    r.dtc = num("dtc");
    if (!text("ttc").empty()) r.ttc = num("ttc");
    r.solver_status = text("solver_status");
    r.slack_max = num("slack_max");
    r.mode = text("mode");
    r.a_y = num("a_y");
    r.t_act = num("T_act");
    r.intent = text("intent");
    r.min_dpred = num("min_dpred", std::numeric_limits<double>::infinity());
    r.dtc_min = num("dtc_min", r.dtc);
    r.contact = static_cast<int>(num("contact", -1));
    r.threat_id = static_cast<int>(num("threat_id", -1));
    r.sqp_iterations = static_cast<int>(num("sqp_iterations"));
    r.visible = static_cast<int>(num("visible"));
    r.e_y_upper_min = num("e_y_upper_min");
    for (std::size_t i = 0; i < actors; ++i) {
      const std::string p = "a" + std::to_string(i) + "_";
      r.actors.push_back({num(p + "x"), num(p + "y"), num(p + "psi"), num(p + "len"), num(p + "wid")});
    }
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace sharedctl
