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

#ifndef CABLEMANIP_SCENARIO_HPP_
#define CABLEMANIP_SCENARIO_HPP_

#include <string>
#include <vector>

#include "cablemanip/ocp.hpp"
#include "cablemanip/trajectory.hpp"
#include "cablemanip/world.hpp"

namespace cablemanip {

// Full experiment description: system parameters, NMPC configuration,
// reference trajectory, and loop rates. Scenario files are JSON with units
// spelled out in the key names (mass_kg, cable_length_m, ...).
struct Scenario {
  std::string name = "scenario";

  // payload
  double payload_mass_kg = 0.232;
  Mat3 payload_inertia_kgm2 = Mat3::Identity() * 0.01;
  Vec3 gravity_mps2 = Vec3(0.0, 0.0, 9.81);

  // robots (shared parameters) and per-robot geometry
  double robot_mass_kg = 0.25;
  Mat3 robot_inertia_kgm2 =
      (Eigen::Vector3d(2.5e-3, 2.5e-3, 4.0e-3)).asDiagonal();
  std::vector<Vec3> attach_points_m;
  std::vector<double> cable_lengths_m;

  // controller gains (diagonal values)
  Vec3 gain_attitude = Vec3::Constant(1.5);     // K_R
  Vec3 gain_body_rates = Vec3::Constant(0.35);  // K_Omega
  Vec3 gain_cable = Vec3::Constant(12.0);       // K_xi
  Vec3 gain_cable_rate = Vec3::Constant(4.0);   // K_omega
  double cable_filter_cutoff_hz = 20.0;

  // NMPC weights as diagonal blocks; lambda weights sized 3n-6
  int nmpc_horizon = 20;
  double nmpc_dt_s = 0.05;
  Vec3 weight_position = Vec3::Constant(200.0);
  Vec3 weight_velocity = Vec3::Constant(20.0);
  Vec3 weight_attitude = Vec3::Constant(100.0);
  Vec3 weight_angular_velocity = Vec3::Constant(10.0);
  double terminal_scale = 5.0;
  VecX weight_wrench = VecX::Ones(6);
  VecX weight_lambda;  // defaults to 10 * ones(3n-6) when empty
  double min_robot_distance_m = 0.6;
  std::vector<Obstacle> obstacles;
  double tension_max_n = 4.0;
  double tension_min_n = 0.1;
  std::string nmpc_mode = "rti";  // or "converge"
  int max_sqp_iterations = 40;
  double kkt_tolerance = 1e-7;
  double soft_penalty = 1e4;
  bool gravity_compensated_wrench = true;

  // trajectory
  TrajectorySpec trajectory;

  // rates and duration
  double duration_s = 30.0;
  double physics_dt_s = 1e-3;
  double control_rate_hz = 500.0;
  double nmpc_rate_hz = 20.0;
  double log_rate_hz = 100.0;

  unsigned seed = 0;

  /// Collects every violated invariant (empty means valid).
  std::vector<std::string> validate() const;

  /// Derived objects; call validate() first (throws ConfigError otherwise).
  SystemParams system_params() const;
  OcpConfig ocp_config() const;

  int robot_count() const { return static_cast<int>(attach_points_m.size()); }

  std::string to_json() const;
  static Scenario from_json(const std::string& text);
};

/// Loads and validates; throws ConfigError listing all violations.
Scenario load_scenario(const std::string& path);

/// Convenience: n-robot regular polygon of attachment points at the given
/// circumradius (centroid at the payload origin).
std::vector<Vec3> polygon_attachments(int n, double circumradius);

}  // namespace cablemanip

#endif  // CABLEMANIP_SCENARIO_HPP_
