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

#ifndef CABLEMANIP_OCP_HPP_
#define CABLEMANIP_OCP_HPP_

#include <string>
#include <vector>

#include "cablemanip/allocation.hpp"
#include "cablemanip/payload.hpp"

namespace cablemanip {

struct Obstacle {
  Vec3 position = Vec3::Zero();   // m, inertial
  double robot_clearance = 0.0;   // m, min distance to each robot
  double payload_clearance = 0.0; // m, min distance to payload center
};

enum class SolverMode { kRti, kConverge };

struct OcpConfig {
  int horizon = 20;    // N
  double dt = 0.05;    // s

  Eigen::Matrix<double, 12, 12> q_state;     // Q_X
  Eigen::Matrix<double, 12, 12> q_terminal;  // Q_XN
  MatX q_input;                              // Q_U, 3n x 3n

  double min_robot_distance = 0.6;  // d_r, m
  std::vector<Obstacle> obstacles;
  double tension_max = 4.0;  // f_max, N
  double tension_min = 0.1;  // mu_min, N

  SolverMode mode = SolverMode::kRti;
  int max_sqp_iterations = 40;
  double kkt_tolerance = 1e-7;
  double soft_penalty = 1e4;  // L1 weight on constraint violation
  bool gravity_compensated_wrench = true;

  /// Default weights: pos 200, vel 20, att 100, angvel 10; terminal 5x;
  /// wrench 1, lambda 10.
  static OcpConfig defaults(int robot_count);

  /// Throws ConfigError on violated invariants (given the scenario's n).
  void validate(int robot_count) const;
};

struct SolveDiagnostics {
  int sqp_iterations = 0;
  int qp_iterations = 0;
  std::string qp_status = "none";
  double kkt_residual = 0.0;
  double max_constraint_violation = 0.0;
  double cost = 0.0;
  double solve_time_s = 0.0;

  /// One-line JSON record for logging.
  std::string to_json() const;
};

struct OcpSolution {
  std::vector<PayloadState> states;   // N+1
  std::vector<ControlInput> inputs;   // N
  std::vector<TensionSet> tensions;   // N, payload frame
  SolveDiagnostics diagnostics;
};

/// Tracking cost: e_XN' QXN e_XN + sum_i e_Xi' QX e_Xi + e_Ui' QU e_Ui with
/// e_U = (F_des - F, M_des - M, Lambda).
double evaluate_cost(const std::vector<PayloadState>& states,
                     const std::vector<ControlInput>& inputs,
                     const std::vector<PayloadReference>& refs,
                     const OcpConfig& cfg, const PayloadParams& params);

/// Stacked constraint residuals, feasible iff every entry >= 0. Fixed order:
/// pairwise robot separations (k<j), per-obstacle robot clearances, per-
/// obstacle payload clearance, tension upper bounds, tension lower bounds.
VecX evaluate_constraints(const PayloadState& x, const ControlInput& u,
                          const AllocationModel& model, const OcpConfig& cfg);

int constraint_count(const AllocationModel& model, const OcpConfig& cfg);

// ---------------------------------------------------------------------------
// Linearization on the 12-dim error manifold (position, velocity,
// attitude-log, angular velocity). Local coordinates use the body-frame
// quaternion perturbation q (x) quat_exp(delta_theta).
// ---------------------------------------------------------------------------

Vec13 retract_state(const Vec13& ref, const Vec12& delta);
Vec12 lift_state(const Vec13& ref, const Vec13& x);

/// RK4 discretization of the payload dynamics followed by quaternion
/// renormalization. Throws SolverError on non-finite evaluations.
Vec13 discrete_dynamics(const Vec13& x, const Vec3& force, const Vec3& moment,
                        double dt, const PayloadParams& p);

/// Exact Jacobians of lift_state(x_next_ref, discrete_dynamics(
/// retract_state(x, dx), u)) at dx = 0, du = 0. a is 12x12, b is 12x6
/// (wrench columns only; Lambda does not enter the dynamics).
void discrete_dynamics_jacobian(const Vec13& x, const Vec3& force,
                                const Vec3& moment, double dt,
                                const PayloadParams& p,
                                const Vec13& x_next_ref,
                                Eigen::Matrix<double, 12, 12>* a,
                                Eigen::Matrix<double, 12, 6>* b);

/// d state_error / d delta at the linearization point.
Eigen::Matrix<double, 12, 12> state_error_jacobian(const PayloadState& x,
                                                   const PayloadReference& r);

/// d evaluate_constraints / d (delta, u).
void constraint_jacobian(const PayloadState& x, const ControlInput& u,
                         const AllocationModel& model, const OcpConfig& cfg,
                         MatX* c_state, MatX* d_input);

}  // namespace cablemanip

#endif  // CABLEMANIP_OCP_HPP_
