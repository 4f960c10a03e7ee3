// Copyright 2026 The noisim authors
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

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace noisim {

/// Minimizes v^T Q v - b^T v subject to v >= 0, for PSD Q. Lawson-Hanson
/// active-set iteration on the normal-equation (Gram) form; the problems here
/// are small (N <= 32) and dense.
inline Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& q,
                                 const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  if (q.rows() != n || q.cols() != n)
    throw std::invalid_argument("gram matrix size mismatch");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  std::vector<bool> in_set(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * (b.cwiseAbs().maxCoeff() + 1.0);

  auto solve_subset = [&](const std::vector<int>& idx) {
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd qs(m, m);
    Eigen::VectorXd bs(m);
    for (int i = 0; i < m; ++i) {
      bs(i) = 0.5 * b(idx[static_cast<std::size_t>(i)]);
      for (int j = 0; j < m; ++j)
        qs(i, j) = q(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return Eigen::VectorXd(qs.ldlt().solve(bs));
  };

  auto passive = [&] {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (in_set[static_cast<std::size_t>(i)]) idx.push_back(i);
    return idx;
  };

  const int max_iter = 30 * n + 50;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd w = 0.5 * b - q * v;  // negative half-gradient
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!in_set[static_cast<std::size_t>(i)] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) return v;  // KKT satisfied
    in_set[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<int> idx = passive();
      Eigen::VectorXd z = solve_subset(idx);
      bool feasible = true;
      for (int i = 0; i < z.size(); ++i)
        if (z(i) <= 0) feasible = false;
      if (feasible) {
        v.setZero();
        for (std::size_t i = 0; i < idx.size(); ++i)
          v(idx[i]) = z(static_cast<int>(i));
        break;
      }
      // step back to the feasibility boundary and drop the binding variable
      double alpha = 1.0;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (z(static_cast<int>(i)) <= 0) {
          const double vi = v(idx[i]);
          const double a = vi / (vi - z(static_cast<int>(i)));
          if (a < alpha) alpha = a;
        }
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double zi = z(static_cast<int>(i));
        v(idx[i]) += alpha * (zi - v(idx[i]));
        if (v(idx[i]) <= tol) {
          v(idx[i]) = 0.0;
          in_set[static_cast<std::size_t>(idx[i])] = false;
        }
      }
    }
  }
  throw std::runtime_error("nnls did not converge");
}

}  // namespace noisim
