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

#include <Eigen/Dense>

#include <vector>

namespace sharedctl {

/// Dense convex QP: minimize 0.5 x'Hx + g'x subject to C x >= d.
/// H must be symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
};

enum class QpStatus { Optimal, Infeasible, IterationLimit, NotPositiveDefinite };

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  ///< one per inequality row, zero when inactive
  std::vector<int> active;
  QpStatus status = QpStatus::Optimal;
  int iterations = 0;
  double objective = 0.0;
};

/// Goldfarb-Idnani dual active-set method. Starts from the unconstrained
/// minimizer and adds the most violated constraint until primal feasible.
class DualActiveSetQp {
 public:
  QpResult solve(const QpProblem& problem, double feasibility_tol = 1e-10, int max_iterations = 0);

 private:
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
};

}  // namespace sharedctl
