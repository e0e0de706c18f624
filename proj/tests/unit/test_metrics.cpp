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
#include <random>
#include <sstream>

#include "sharedctl/metrics.hpp"

using namespace sharedctl;

namespace {

// Mann-Whitney U by pairwise comparison, ties counted as one half.
double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

// Two-sided permutation p-value over every split of the pooled sample.
double brute_force_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), na = a.size();
  const double centre = 0.5 * static_cast<double>(a.size() * b.size());
  const double observed = std::abs(u_statistic(a, b) - centre);
  long extreme = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
    ++total;
    if (std::abs(u_statistic(x, y) - centre) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

EventRecord event(EventKind kind, std::optional<double> ttc, std::optional<double> dtc,
                  std::optional<double> dev = std::nullopt) {
  EventRecord e;
  e.kind = kind;
  e.min_ttc = ttc;
  e.min_dtc = dtc;
  e.max_deviation = dev;
  return e;
}

std::vector<RunEvents> sample_runs() {
  std::vector<RunEvents> runs;
  runs.push_back({"shared_control", 1, 1, {event(EventKind::Correction, 0.9, 2.0, 0.2)}});
  runs.push_back({"baseline", 0, 1,
                  {event(EventKind::Correction, 0.1, 1.0, 0.4), event(EventKind::NearMiss, 0.1, 1.0)}});
  runs.push_back({"baseline", 1, 1, {event(EventKind::Correction, 0.3, 1.2, 1.3), event(EventKind::OffRoad, 0.3, 1.2, 1.3)}});
  runs.push_back({"shared_control", 0, 1, {event(EventKind::Correction, 0.6, 1.8, 0.1)}});
  runs.push_back({"baseline", 2, 1, {event(EventKind::Crash, std::nullopt, 0.0), event(EventKind::Correction, 0.0, 0.0)}});
  return runs;
}

}  // namespace

TEST_CASE("separated triples give p = 0.1") {
  CHECK(rank_sum_test({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.1));
  CHECK(rank_sum_exact({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.1));
}

TEST_CASE("identical samples give p = 1") {
  CHECK(rank_sum_test({2, 2, 2}, {2, 2, 2}) == 1.0);
  CHECK(rank_sum_test({1, 2, 3, 4}, {1, 2, 3, 4}) == 1.0);
  std::vector<double> big(20, 3.0);
  CHECK(rank_sum_test(big, big) == 1.0);
}

TEST_CASE("exact path matches brute-force permutation up to 6 x 6") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> tied(0, 5);
  std::normal_distribution<double> smooth(0.0, 1.0);
  for (std::size_t na = 1; na <= 6; ++na) {
    for (std::size_t nb = 1; nb <= 6; ++nb) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> a(na), b(nb);
        for (double& v : a) v = rep % 2 ? tied(rng) : smooth(rng);
        for (double& v : b) v = rep % 2 ? tied(rng) + 1 : smooth(rng) + 0.5;
        INFO(na << " x " << nb << " rep " << rep);
        CHECK(rank_sum_test(a, b) == doctest::Approx(brute_force_p(a, b)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("rank-sum test is symmetric and bounded") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(1 + rep % 12), b(1 + (rep * 7) % 11);
    for (double& v : a) v = n(rng);
    for (double& v : b) v = n(rng) + 0.3;
    const double p = rank_sum_test(a, b);
    CHECK(p == doctest::Approx(rank_sum_test(b, a)).epsilon(1e-12));
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("normal approximation tracks the exact test at 8 x 8") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(8), b(8);
    for (double& v : a) v = n(rng);
    for (double& v : b) v = n(rng) + 0.2 * rep / 5.0;
    CHECK(std::abs(rank_sum_normal(a, b) - rank_sum_exact(a, b)) < 0.02);
  }
}

TEST_CASE("large samples take the approximation") {
  std::vector<double> a(9), b(9);
  for (int i = 0; i < 9; ++i) {
    a[i] = i;
    b[i] = i + 3.5;
  }
  CHECK(rank_sum_test(a, b) == rank_sum_normal(a, b));
  CHECK_THROWS_AS(rank_sum_test({}, {1.0}), std::invalid_argument);
}

TEST_CASE("mid-ranks share ties") {
  const std::vector<double> r = mid_ranks({10, 20, 20, 5, 20});
  CHECK(r == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("type-7 quantiles against sort-and-index") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(1 + rep % 17);
    for (double& x : v) x = n(rng);
    std::sort(v.begin(), v.end());
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      // position p (n - 1) between two order statistics
      const double pos = p * static_cast<double>(v.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, v.size() - 1);
      const double expected = v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
      CHECK(quantile_sorted(v, p) == doctest::Approx(expected));
    }
  }
  CHECK(quantile_sorted({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("Tukey box-plot summary") {
  const DistributionSummary s = distribution_summary({1, 2, 3, 4, 5, 6, 7, 8, 9, 100});
  CHECK(s.count == 10u);
  CHECK(s.median == doctest::Approx(5.5));
  CHECK(s.q1 == doctest::Approx(3.25));
  CHECK(s.q3 == doctest::Approx(7.75));
  CHECK(s.whisker_low == 1.0);
  CHECK(s.whisker_high == 9.0);
  CHECK(s.outliers == std::vector<double>{100.0});
  CHECK(s.max == 100.0);
}

TEST_CASE("aggregation counts per condition") {
  const KpiReport r = aggregate(sample_runs(), "corrective");
  REQUIRE(r.conditions.size() == 2u);
  const ConditionKpis* base = r.find("baseline");
  const ConditionKpis* sc = r.find("shared_control");
  REQUIRE(base);
  REQUIRE(sc);
  CHECK(base->runs == 3);
  CHECK(base->events == 3);
  CHECK(base->crashes == 1);
  CHECK(base->near_misses == 1);
  CHECK(base->off_roads == 1);
  CHECK(sc->runs == 2);
  CHECK(sc->near_misses == 0);
  CHECK(sc->min_ttc == std::vector<double>{0.6, 0.9});
  CHECK(r.find("manual") == nullptr);
}

TEST_CASE("aggregation ignores input order") {
  std::vector<RunEvents> runs = sample_runs();
  const KpiReport a = aggregate(runs);
  std::reverse(runs.begin(), runs.end());
  CHECK(aggregate(runs) == a);
}

TEST_CASE("report JSON round trip and table") {
  const KpiReport r = aggregate(sample_runs(), "corrective");
  CHECK(KpiReport::from_json(r.to_json()) == r);
  const std::string table = r.to_table();
  CHECK(table.find("baseline") != std::string::npos);
  CHECK(table.find("rank-sum p") != std::string::npos);
  std::ostringstream csv;
  r.write_samples_csv(csv);
  CHECK(csv.str().rfind("condition,metric,value", 0) == 0);
  CHECK_THROWS_AS(KpiReport::from_json("[1"), std::invalid_argument);
}
