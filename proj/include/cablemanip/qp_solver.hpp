// Copyright 2026 The cablemanip Authors
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

#ifndef CABLEMANIP_QP_SOLVER_HPP_
#define CABLEMANIP_QP_SOLVER_HPP_

#include <string>
#include <vector>

#include "cablemanip/geometry.hpp"

namespace cablemanip {

// One stage of the multiple-shooting QP
//
//   min  sum_i 1/2 dx'Q dx + q'dx + 1/2 du'R du + r'du + dx'S du
//        + rho * sum(s_i)  + terminal 1/2 dx_N'Q_N dx_N + q_N'dx_N
//   s.t. dx_{i+1} = A dx_i + B du_i + b,   dx_0 fixed,
//        g0 + C dx + D du + s >= 0,  s >= 0.
//
// The L1 slack penalty keeps the subproblem feasible for any linearization.
struct QpStage {
  Eigen::Matrix<double, 12, 12> q_mat;
  MatX r_mat;  // nu x nu, positive definite
  MatX s_mat;  // 12 x nu
  Vec12 q_vec;
  VecX r_vec;
  Eigen::Matrix<double, 12, 12> a_mat;
  MatX b_mat;  // 12 x nu
  Vec12 b_vec;
  MatX c_mat;  // mc x 12
  MatX d_mat;  // mc x nu
  VecX g0;     // mc
};

struct QpTerminal {
  Eigen::Matrix<double, 12, 12> q_mat;
  Vec12 q_vec;
};

struct QpSettings {
  double penalty = 1e4;          // L1 slack weight rho
  int max_iterations = 100;
  double comp_tolerance = 1e-10; // mean complementarity
  double stat_tolerance = 1e-9;  // stationarity inf-norm
  double frac_to_boundary = 0.995;
};

enum class QpStatus { kConverged, kMaxIterations, kNumericalFailure };

inline std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kConverged: return "converged";
    case QpStatus::kMaxIterations: return "max_iterations";
    default: return "numerical_failure";
  }
}

struct QpSolution {
  std::vector<Vec12> dx;       // N+1, dx[0] == dx0
  std::vector<VecX> du;        // N
  std::vector<VecX> lambda;    // N, inequality multipliers in (0, rho)
  std::vector<VecX> slack;     // N
  std::vector<Vec12> costate;  // N+1, costate[i] multiplies dynamics into i
  QpStatus status = QpStatus::kNumericalFailure;
  int iterations = 0;
  double stat_residual = 0.0;
  double comp_residual = 0.0;
};

/// Solves the stage-structured QP by a Mehrotra-style primal-dual interior
/// point method; each Newton system is factorized with a Riccati recursion,
/// so cost is linear in the horizon length. Fully deterministic.
QpStatus solve_ocp_qp(const std::vector<QpStage>& stages,
                      const QpTerminal& terminal, const Vec12& dx0,
                      const QpSettings& settings, QpSolution* sol);

}  // namespace cablemanip

#endif  // CABLEMANIP_QP_SOLVER_HPP_
