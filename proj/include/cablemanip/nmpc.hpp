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

#ifndef CABLEMANIP_NMPC_HPP_
#define CABLEMANIP_NMPC_HPP_

#include <vector>

#include "cablemanip/ocp.hpp"
#include "cablemanip/qp_solver.hpp"

namespace cablemanip {

// Receding-horizon payload controller: multiple-shooting SQP over the
// 12-dim error states with RK4 stage propagation and L1-softened separation,
// obstacle and tension constraints. An instance owns a mutable workspace and
// is single-caller; distinct instances may run in parallel.
class PayloadNmpc {
 public:
  PayloadNmpc(PayloadParams params, AllocationModel model, OcpConfig cfg);

  const OcpConfig& config() const { return cfg_; }
  const AllocationModel& model() const { return model_; }
  void set_mode(SolverMode mode) { cfg_.mode = mode; }

  /// Solves from x0 against refs (horizon+1 entries). In rti mode performs
  /// exactly one SQP iteration from the warm start; in converge mode
  /// iterates until the KKT residual drops below the tolerance. Without a
  /// warm start the trajectory is initialized at x0 with reference wrenches.
  OcpSolution solve(const PayloadState& x0,
                    const std::vector<PayloadReference>& refs,
                    const OcpSolution* warm = nullptr);

  /// Standard RTI shift: stage i of the output equals stage i+1 of the
  /// input, with the last stage duplicated.
  static OcpSolution warm_start_shift(const OcpSolution& prev);

 private:
  void linearize(const std::vector<PayloadReference>& refs);
  double merit(const std::vector<Vec13>& xs, const std::vector<VecX>& us,
               const std::vector<PayloadReference>& refs, double penalty_eq,
               double* constraint_violation) const;
  double kkt_residual(const QpSolution& qp) const;

  PayloadParams params_;
  AllocationModel model_;
  OcpConfig cfg_;
  MatX input_error_map_;  // d e_U / d u = diag(-I6, I_{3n-6})

  std::vector<Vec13> xbar_;
  std::vector<VecX> ubar_;
  std::vector<QpStage> stages_;
  QpTerminal terminal_;
};

}  // namespace cablemanip

#endif  // CABLEMANIP_NMPC_HPP_
