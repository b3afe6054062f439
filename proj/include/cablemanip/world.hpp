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

#ifndef CABLEMANIP_WORLD_HPP_
#define CABLEMANIP_WORLD_HPP_

#include <vector>

#include "cablemanip/allocation.hpp"
#include "cablemanip/cable_robot.hpp"
#include "cablemanip/payload.hpp"

namespace cablemanip {

struct SystemParams {
  PayloadParams payload;
  std::vector<RobotParams> robots;
  AllocationModel allocation;

  SystemParams(PayloadParams payload_, std::vector<RobotParams> robots_,
               AllocationModel allocation_);

  int robot_count() const { return allocation.robot_count(); }
};

// Full coupled state: payload pose/twist plus each robot's cable direction,
// cable angular velocity, attitude, and body rates. Robot positions are
// derived from the taut-cable constraint x_k = a_k - l_k xi_k, so the
// constraint holds exactly by construction.
struct WorldState {
  PayloadState payload;
  std::vector<CableRobotState> robots;
  double time = 0.0;

  Vec3 attach_point(int k, const SystemParams& sys) const;
  Vec3 attach_velocity(int k, const SystemParams& sys) const;
  Vec3 robot_position(int k, const SystemParams& sys) const;
  Vec3 robot_velocity(int k, const SystemParams& sys) const;
};

struct RobotCommand {
  double thrust = 0.0;   // N, along body z
  Vec3 moment = Vec3::Zero();  // N m, body frame
};

// Consistent accelerations of the coupled payload + taut-cable system under
// the applied robot forces, with the cable tensions recovered so Newton's
// third law holds across every cable.
struct CoupledAccel {
  Vec3 linear;                 // payload xddot, inertial
  Vec3 angular;                // payload Omegadot, payload frame
  std::vector<Vec3> cable;     // xiddot_k
  std::vector<Vec3> tension;   // mu_k acting on the payload, inertial
};

/// Solves the 6x6 block system coupling the payload equations of motion with
/// the n sphere constraints (forces u_k applied at the robots). Throws
/// PhysicsError when the coupling matrix is singular.
CoupledAccel coupled_accelerations(const WorldState& world,
                                   const std::vector<Vec3>& forces,
                                   const SystemParams& sys);

struct StepStats {
  double max_unit_drift = 0.0;  // worst |.|-1 before renormalization
};

/// One RK4 step of the coupled dynamics with zero-order-hold commands (the
/// thrust vector follows the integrated attitude within the step). Unit
/// quantities are renormalized afterwards; drift beyond 1e-3 faults.
WorldState step(const WorldState& world, const std::vector<RobotCommand>& cmd,
                const SystemParams& sys, double dt,
                StepStats* stats = nullptr);

}  // namespace cablemanip

#endif  // CABLEMANIP_WORLD_HPP_
