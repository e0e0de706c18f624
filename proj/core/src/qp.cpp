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

#include "sharedctl/qp.hpp"

#include <cmath>
#include <limits>

namespace sharedctl {

namespace {

struct Givens {
  double c = 1.0;
  double s = 0.0;
  double h = 0.0;
};

Givens make_givens(double a, double b) {
  const double h = std::hypot(a, b);
  if (h == 0.0) return {1.0, 0.0, 0.0};
  return {a / h, b / h, h};
}

void rotate_columns(Eigen::MatrixXd& M, int i, int j, const Givens& g) {
  for (int k = 0; k < M.rows(); ++k) {
    const double a = M(k, i), b = M(k, j);
    M(k, i) = g.c * a + g.s * b;
    M(k, j) = -g.s * a + g.c * b;
  }
}

}  // namespace

QpResult DualActiveSetQp::solve(const QpProblem& qp, double feasibility_tol, int max_iterations) {
  const int n = static_cast<int>(qp.H.rows());
  const int m = static_cast<int>(qp.C.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (max_iterations <= 0) max_iterations = 10 * (n + m) + 50;

  QpResult res;
  res.multipliers = Eigen::VectorXd::Zero(m);

  Eigen::LLT<Eigen::MatrixXd> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    res.status = QpStatus::NotPositiveDefinite;
    res.x = Eigen::VectorXd::Zero(n);
    return res;
  }
  // J = L^{-T}, so that H^{-1} = J J'
  J_ = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n)).transpose();
  R_.setZero(n, n);

  Eigen::VectorXd x = -llt.solve(qp.g);
  std::vector<int> active;
  std::vector<double> u;
  active.reserve(n);
  u.reserve(n);
  std::vector<char> is_active(m, 0);

  Eigen::VectorXd row_norm(m);
  for (int i = 0; i < m; ++i) row_norm[i] = std::max(qp.C.row(i).norm(), 1e-300);

  Eigen::VectorXd dvec(n), z(n), r(n);
  int iter = 0;
  while (true) {
    // step 1: most violated constraint (normalized)
    int p = -1;
    double worst = -feasibility_tol;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double s = (qp.C.row(i).dot(x) - qp.d[i]) / row_norm[i];
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      res.status = QpStatus::Optimal;
      break;
    }

    std::vector<double> u_plus = u;
    u_plus.push_back(0.0);
    const Eigen::VectorXd np = qp.C.row(p).transpose();

    bool added = false;
    while (!added) {
      if (++iter > max_iterations) {
        res.status = QpStatus::IterationLimit;
        goto done;
      }
      const int q = static_cast<int>(active.size());
      // step 2a: primal and dual step directions
      dvec.noalias() = J_.transpose() * np;
      z.noalias() = J_.rightCols(n - q) * dvec.tail(n - q);
      if (q > 0) {
        r.head(q) = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(dvec.head(q));
      }

      // step 2b: partial (dual) step length
      double t1 = inf;
      int drop = -1;
      for (int j = 0; j < q; ++j) {
        if (r[j] > 1e-14) {
          const double ratio = u_plus[j] / r[j];
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      // full (primal) step length
      double t2 = inf;
      const double zn = z.dot(np);
      if (z.norm() > 1e-12 && zn > 1e-14) {
        t2 = -(np.dot(x) - qp.d[p]) / zn;
      }
      const double t = std::min(t1, t2);

      if (t == inf) {
        res.status = QpStatus::Infeasible;
        goto done;
      }

      for (int j = 0; j < q; ++j) u_plus[j] -= t * r[j];
      u_plus[q] += t;

      if (t2 < inf) x += t * z;

      if (t2 <= t1) {
        // add constraint p: rotate d[q..n) onto d[q]
        for (int j = n - 1; j > q; --j) {
          const Givens g = make_givens(dvec[j - 1], dvec[j]);
          if (g.h == 0.0) continue;
          dvec[j - 1] = g.h;
          dvec[j] = 0.0;
          rotate_columns(J_, j - 1, j, g);
        }
        R_.col(q).head(q + 1) = dvec.head(q + 1);
        active.push_back(p);
        is_active[p] = 1;
        u = u_plus;
        added = true;
      } else {
        // drop active constraint `drop`, restore R to upper triangular
        is_active[active[drop]] = 0;
        active.erase(active.begin() + drop);
        u_plus.erase(u_plus.begin() + drop);
        for (int j = drop; j < q - 1; ++j) R_.col(j) = R_.col(j + 1);
        R_.col(q - 1).setZero();
        for (int j = drop; j < q - 1; ++j) {
          const Givens g = make_givens(R_(j, j), R_(j + 1, j));
          if (g.h == 0.0) continue;
          for (int k = j; k < q - 1; ++k) {
            const double a = R_(j, k), b = R_(j + 1, k);
            R_(j, k) = g.c * a + g.s * b;
            R_(j + 1, k) = -g.s * a + g.c * b;
          }
          R_(j + 1, j) = 0.0;
          rotate_columns(J_, j, j + 1, g);
        }
        u.assign(u_plus.begin(), u_plus.end() - 1);
      }
    }
  }

done:
  res.x = x;
  res.iterations = iter;
  res.active = active;
  for (std::size_t j = 0; j < active.size() && j < u.size(); ++j) res.multipliers[active[j]] = u[j];
  res.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
  return res;
}

}  // namespace sharedctl
