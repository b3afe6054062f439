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

#ifndef CABLEMANIP_CABLE_ROBOT_HPP_
#define CABLEMANIP_CABLE_ROBOT_HPP_

#include <utility>

#include "cablemanip/geometry.hpp"

namespace cablemanip {

// Per-robot state on the taut-cable manifold: xi points from the robot to
// its attach point (inertial), omega is the cable angular velocity with
// omega . xi = 0, so xidot = omega x xi.
struct CableRobotState {
  Vec3 xi = Vec3(0.0, 0.0, -1.0);
  Vec3 omega = Vec3::Zero();
  UnitQuat attitude;
  Vec3 body_rates = Vec3::Zero();

  Vec3 xi_dot() const { return omega.cross(xi); }
};

struct RobotParams {
  double mass;          // kg
  Mat3 inertia;         // kg m^2
  double cable_length;  // m
  Mat3 k_attitude;      // K_R
  Mat3 k_body_rates;    // K_Omega
  Mat3 k_cable;         // K_xi
  Mat3 k_cable_rate;    // K_omega

  Mat3 inertia_inv;

  RobotParams(double mass_kg, const Mat3& inertia_kgm2, double cable_length_m,
              const Mat3& k_attitude_, const Mat3& k_body_rates_,
              const Mat3& k_cable_, const Mat3& k_cable_rate_);
};

/// Cable state estimate from attach-point and robot odometry:
/// xi = (a - x)/|a - x|, xidot = (adot - xdot)/l. Throws PhysicsError when
/// |a - x| deviates from the cable length by more than 1% (slack or
/// overstretched).
std::pair<Vec3, Vec3> cable_state_from_positions(const Vec3& attach_pos,
                                                 const Vec3& robot_pos,
                                                 const Vec3& attach_vel,
                                                 const Vec3& robot_vel,
                                                 double cable_length);

/// Projection of the desired tension onto the actual cable: xi xi' mu_des.
Vec3 project_tension(const Vec3& mu_des, const Vec3& xi);

/// xi_des = -mu_des/|mu_des|. Throws PhysicsError below the tension floor.
Vec3 desired_cable_direction(const Vec3& mu_des, double mu_min = 0.1);

struct DesiredCableState {
  Vec3 xi_des = Vec3(0.0, 0.0, -1.0);
  Vec3 xi_dot_des = Vec3::Zero();
  Vec3 omega_des = Vec3::Zero();
};

// Turns the discrete tension commands into a smooth desired cable state:
// first-order low-pass on xi_des (default 20 Hz cutoff) differentiated by
// backward differences, omega_des = xi_des x xidot_des.
class CableCommandFilter {
 public:
  explicit CableCommandFilter(double cutoff_hz = 20.0, double mu_min = 0.1)
      : cutoff_rad_(2.0 * M_PI * cutoff_hz), mu_min_(mu_min) {}

  DesiredCableState step(const Vec3& mu_des, double dt);
  void reset() { primed_ = false; }

 private:
  double cutoff_rad_;
  double mu_min_;
  bool primed_ = false;
  Vec3 filt_ = Vec3::Zero();
};

/// Attach-point acceleration feedforward including gravity:
/// a = xddot + g - R_L hat(rho) omegadot + R_L hat(omega)^2 rho.
Vec3 attachment_accel(const Vec3& linear_accel, const Vec3& gravity,
                      const Mat3& r_load, const Vec3& omega_load,
                      const Vec3& omega_dot_load, const Vec3& rho);

/// Cable-tracking force u = u_par + u_perp with u_par along the cable
/// (tension delivery) and u_perp across it (direction tracking).
Vec3 control_force(const CableRobotState& state, const Vec3& mu_cmd,
                   const DesiredCableState& des, const Vec3& accel_ff,
                   const RobotParams& p);

/// Desired attitude with body z along u and the given yaw heading.
/// Throws PhysicsError when |u| < 1e-6 (direction undefined).
Mat3 desired_attitude(const Vec3& u, double yaw = 0.0);

/// e_R = 1/2 (R' R_des - R_des' R)^vee.
Vec3 attitude_error(const Mat3& r, const Mat3& r_des);

/// Thrust f = u . R e3 and the geometric attitude moment.
std::pair<double, Vec3> attitude_thrust_moment(
    const Vec3& u, const Mat3& r, const Vec3& body_rates, const Mat3& r_des,
    const Vec3& omega_des, const Vec3& omega_dot_des, const RobotParams& p);

/// Sphere dynamics solved for the cable acceleration:
/// xiddot = (1/(m l)) hat(xi)^2 (u - m a) - |xidot|^2 xi.
Vec3 robot_sphere_accel(const Vec3& xi, const Vec3& xi_dot, const Vec3& u,
                        double mass, double cable_length,
                        const Vec3& attach_accel);

}  // namespace cablemanip

#endif  // CABLEMANIP_CABLE_ROBOT_HPP_
