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
#include <string>
#include <vector>

#include "sharedctl/scenario.hpp"

namespace sharedctl {

/// Events detected in one simulation run, tagged with the condition it belongs to.
struct RunEvents {
  std::string condition;  ///< e.g. "baseline" or "shared_control"
  int driver_set = 0;
  std::uint64_t seed = 0;
  std::vector<EventRecord> events;
};

struct ConditionKpis {
  std::string condition;
  int runs = 0;
  int events = 0;          ///< correction or evasion encounters
  int crashes = 0;
  int near_misses = 0;
  int road_departures = 0;
  int off_roads = 0;
  std::vector<double> min_ttc;          ///< s, one per encounter with a defined TTC
  std::vector<double> min_dtc;          ///< m
  std::vector<double> return_deviation; ///< m, max |e_y| after re-centering

  bool operator==(const ConditionKpis&) const = default;
};

struct KpiReport {
  std::string preset;
  std::vector<ConditionKpis> conditions;  ///< sorted by condition label

  const ConditionKpis* find(const std::string& condition) const;

  std::string to_json() const;
  static KpiReport from_json(const std::string& text);
  /// Fixed-width table with per-condition counts, sample medians and rank-sum p-values.
  std::string to_table() const;
  /// Long-format raw samples: condition,metric,value.
  void write_samples_csv(std::ostream& out) const;

  bool operator==(const KpiReport&) const = default;
};

/// Counts by kind and per-encounter samples. Runs are ordered by (condition, driver set, seed)
/// before extraction, so the result does not depend on input order.
KpiReport aggregate(std::vector<RunEvents> runs, const std::string& preset = "");

/// Two-sided Mann-Whitney rank-sum test. Exact enumeration over all group assignments of the
/// mid-ranked pooled sample when both sides have at most kExactRankSumLimit values; normal
/// approximation with tie and continuity correction otherwise. Throws on an empty sample.
double rank_sum_test(const std::vector<double>& a, const std::vector<double>& b);

inline constexpr std::size_t kExactRankSumLimit = 8;

double rank_sum_exact(const std::vector<double>& a, const std::vector<double>& b);
double rank_sum_normal(const std::vector<double>& a, const std::vector<double>& b);

/// Mid-ranks (1-based) of the values, ties sharing their average rank.
std::vector<double> mid_ranks(const std::vector<double>& values);

/// Tukey box-plot statistics with type-7 (linear, inclusive) quartiles.
struct DistributionSummary {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;   ///< smallest sample >= q1 - 1.5 IQR
  double whisker_high = 0.0;  ///< largest sample <= q3 + 1.5 IQR
  std::vector<double> outliers;
};

DistributionSummary distribution_summary(std::vector<double> samples);

/// Type-7 sample quantile of sorted data, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace sharedctl
