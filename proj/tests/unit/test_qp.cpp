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

#include <random>

#include "sharedctl/qp.hpp"

using namespace sharedctl;

TEST_CASE("bound-constrained quadratic") {
  // min (x-2)^2 + (y+1)^2  s.t. x <= 1, y >= 0
  QpProblem p;
  p.H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.g = Eigen::Vector2d(-4.0, 2.0);
  p.C = Eigen::MatrixXd(2, 2);
  p.C << -1, 0, 0, 1;
  p.d = Eigen::Vector2d(-1.0, 0.0);
  DualActiveSetQp qp;
  const QpResult r = qp.solve(p);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(r.multipliers[0] == doctest::Approx(2.0));
  CHECK(r.multipliers[1] == doctest::Approx(2.0));
}

TEST_CASE("contradictory constraints are infeasible") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(1, 1);
  p.g = Eigen::VectorXd::Zero(1);
  p.C = Eigen::MatrixXd(2, 1);
  p.C << 1, -1;
  p.d = Eigen::Vector2d(1.0, 0.0);  // x >= 1 and x <= 0
  DualActiveSetQp qp;
  CHECK(qp.solve(p).status == QpStatus::Infeasible);
}

TEST_CASE("random problems satisfy the KKT conditions") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  DualActiveSetQp qp;
  for (int trial = 0; trial < 200; ++trial) {
    const int nv = 2 + trial % 8, nc = 1 + trial % 11;
    Eigen::MatrixXd M(nv, nv);
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) M(i, j) = n(rng);
    QpProblem p;
    p.H = M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(nv, nv);
    p.g = Eigen::VectorXd(nv);
    for (int i = 0; i < nv; ++i) p.g[i] = n(rng);
    p.C = Eigen::MatrixXd(nc, nv);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nv; ++j) p.C(i, j) = n(rng);
    // x = 0 feasible with slack
    p.d = Eigen::VectorXd(nc);
    for (int i = 0; i < nc; ++i) p.d[i] = -std::abs(n(rng));

    const QpResult r = qp.solve(p);
    REQUIRE(r.status == QpStatus::Optimal);
    const Eigen::VectorXd slack = p.C * r.x - p.d;
    const Eigen::VectorXd stationarity = p.H * r.x + p.g - p.C.transpose() * r.multipliers;
    CHECK(stationarity.cwiseAbs().maxCoeff() < 1e-7);
    for (int i = 0; i < nc; ++i) {
      CHECK(slack[i] >= -1e-8);
      CHECK(r.multipliers[i] >= -1e-10);
      CHECK(std::abs(r.multipliers[i] * slack[i]) < 1e-7);
    }
  }
}
