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

#include "sharedctl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace sharedctl {

using nlohmann::json;

const ConditionKpis* KpiReport::find(const std::string& condition) const {
  for (const ConditionKpis& c : conditions) {
    if (c.condition == condition) return &c;
  }
  return nullptr;
}

KpiReport aggregate(std::vector<RunEvents> runs, const std::string& preset) {
  std::sort(runs.begin(), runs.end(), [](const RunEvents& a, const RunEvents& b) {
    return std::tie(a.condition, a.driver_set, a.seed) < std::tie(b.condition, b.driver_set, b.seed);
  });
  KpiReport report;
  report.preset = preset;
  for (const RunEvents& run : runs) {
    if (report.conditions.empty() || report.conditions.back().condition != run.condition) {
      report.conditions.push_back({});
      report.conditions.back().condition = run.condition;
    }
    ConditionKpis& c = report.conditions.back();
    ++c.runs;
    for (const EventRecord& e : run.events) {
      switch (e.kind) {
        case EventKind::Correction:
        case EventKind::Evasion:
          ++c.events;
          if (e.min_ttc && std::isfinite(*e.min_ttc)) c.min_ttc.push_back(*e.min_ttc);
          if (e.min_dtc && std::isfinite(*e.min_dtc)) c.min_dtc.push_back(*e.min_dtc);
          if (e.max_deviation && std::isfinite(*e.max_deviation)) c.return_deviation.push_back(*e.max_deviation);
          break;
        case EventKind::Crash: ++c.crashes; break;
        case EventKind::NearMiss: ++c.near_misses; break;
        case EventKind::RoadDeparture: ++c.road_departures; break;
        case EventKind::OffRoad: ++c.off_roads; break;
      }
    }
  }
  return report;
}

std::string KpiReport::to_json() const {
  json list = json::array();
  for (const ConditionKpis& c : conditions) {
    list.push_back({{"condition", c.condition},
                    {"runs", c.runs},
                    {"events", c.events},
                    {"crashes", c.crashes},
                    {"near_misses", c.near_misses},
                    {"road_departures", c.road_departures},
                    {"off_roads", c.off_roads},
                    {"min_ttc", c.min_ttc},
                    {"min_dtc", c.min_dtc},
                    {"return_deviation", c.return_deviation}});
  }
  return json{{"preset", preset}, {"conditions", list}}.dump(2);
}

KpiReport KpiReport::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("report: malformed document: ") + e.what());
  }
  KpiReport report;
  try {
    report.preset = j.value("preset", std::string());
    const json& list = j.at("conditions");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& c = list.at(i);
      ConditionKpis k;
      k.condition = c.at("condition").get<std::string>();
      k.runs = c.at("runs").get<int>();
      k.events = c.at("events").get<int>();
      k.crashes = c.at("crashes").get<int>();
      k.near_misses = c.at("near_misses").get<int>();
      k.road_departures = c.at("road_departures").get<int>();
      k.off_roads = c.at("off_roads").get<int>();
      k.min_ttc = c.at("min_ttc").get<std::vector<double>>();
      k.min_dtc = c.at("min_dtc").get<std::vector<double>>();
      k.return_deviation = c.at("return_deviation").get<std::vector<double>>();
      report.conditions.push_back(std::move(k));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("report: ") + e.what());
  }
  return report;
}

namespace {

std::string median_cell(const std::vector<double>& v) {
  if (v.empty()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", distribution_summary(v).median);
  return buf;
}

std::string p_cell(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", rank_sum_test(a, b));
  return buf;
}

}  // namespace

std::string KpiReport::to_table() const {
  std::string out;
  char line[256];
  if (!preset.empty()) out += "preset: " + preset + "\n";
  std::snprintf(line, sizeof line, "%-16s %5s %6s %7s %10s %9s %8s %11s %11s %11s\n", "condition", "runs", "events",
                "crashes", "near_miss", "road_dep", "off_road", "med_ttc_s", "med_dtc_m", "med_dev_m");
  out += line;
  for (const ConditionKpis& c : conditions) {
    std::snprintf(line, sizeof line, "%-16s %5d %6d %7d %10d %9d %8d %11s %11s %11s\n", c.condition.c_str(), c.runs,
                  c.events, c.crashes, c.near_misses, c.road_departures, c.off_roads, median_cell(c.min_ttc).c_str(),
                  median_cell(c.min_dtc).c_str(), median_cell(c.return_deviation).c_str());
    out += line;
  }
  if (conditions.size() == 2) {
    const ConditionKpis& a = conditions[0];
    const ConditionKpis& b = conditions[1];
    std::snprintf(line, sizeof line, "rank-sum p (%s vs %s): ttc %s, dtc %s, deviation %s\n", a.condition.c_str(),
                  b.condition.c_str(), p_cell(a.min_ttc, b.min_ttc).c_str(), p_cell(a.min_dtc, b.min_dtc).c_str(),
                  p_cell(a.return_deviation, b.return_deviation).c_str());
    out += line;
  }
  return out;
}

void KpiReport::write_samples_csv(std::ostream& out) const {
  out << "condition,metric,value\n";
  char buf[64];
  for (const ConditionKpis& c : conditions) {
    for (const auto& [name, values] : {std::pair{"min_ttc", &c.min_ttc}, std::pair{"min_dtc", &c.min_dtc},
                                       std::pair{"return_deviation", &c.return_deviation}}) {
      for (double v : *values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << c.condition << ',' << name << ',' << buf << '\n';
      }
    }
  }
}

std::vector<double> mid_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

void require_samples(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("rank_sum_test: both samples must be non-empty");
  for (const auto* v : {&a, &b}) {
    for (double x : *v) {
      if (std::isnan(x)) throw std::invalid_argument("rank_sum_test: NaN sample");
    }
  }
}

std::vector<double> pooled(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

}  // namespace

double rank_sum_exact(const std::vector<double>& a, const std::vector<double>& b) {
  require_samples(a, b);
  const std::size_t n1 = a.size(), n = a.size() + b.size();
  // doubled mid-ranks are integers
  std::vector<long> r2;
  for (double r : mid_ranks(pooled(a, b))) r2.push_back(std::lround(2.0 * r));
  const long observed = std::accumulate(r2.begin(), r2.begin() + static_cast<long>(n1), 0L);
  const long expected2 = static_cast<long>(n1 * (n + 1));  // 2 E[W]
  const long dev_obs = std::labs(observed - expected2);

  std::vector<char> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(n1), 1);
  long total = 0, extreme = 0;
  do {
    long w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) w += r2[i];
    }
    ++total;
    if (std::labs(w - expected2) >= dev_obs) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double rank_sum_normal(const std::vector<double>& a, const std::vector<double>& b) {
  require_samples(a, b);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  const std::vector<double> all = pooled(a, b);
  const std::vector<double> ranks = mid_ranks(all);
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0.0);
  const double u = r1 - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;

  std::vector<double> sorted(all);
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - (n > 1.0 ? tie_sum / (n * (n - 1.0)) : 0.0));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double rank_sum_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() <= kExactRankSumLimit && b.size() <= kExactRankSumLimit && !a.empty() && !b.empty()) {
    return rank_sum_exact(a, b);
  }
  return rank_sum_normal(a, b);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionSummary distribution_summary(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("distribution_summary: empty sample");
  std::sort(samples.begin(), samples.end());
  DistributionSummary s;
  s.count = samples.size();
  s.min = samples.front();
  s.max = samples.back();
  s.q1 = quantile_sorted(samples, 0.25);
  s.median = quantile_sorted(samples, 0.5);
  s.q3 = quantile_sorted(samples, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.max;
  s.whisker_high = s.min;
  for (double x : samples) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
    } else {
      s.whisker_low = std::min(s.whisker_low, x);
      s.whisker_high = std::max(s.whisker_high, x);
    }
  }
  return s;
}

}  // namespace sharedctl
