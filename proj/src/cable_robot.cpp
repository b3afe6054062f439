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

#include "cablemanip/cable_robot.hpp"

#include <cmath>

namespace cablemanip {

namespace {

void check_diagonal_positive(const Mat3& m, const char* name) {
  if ((m - Mat3(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 0.0 ||
      m.diagonal().minCoeff() <= 0.0) {
    throw ConfigError(std::string(name) + " must be diagonal positive");
  }
}

}  // namespace

RobotParams::RobotParams(double mass_kg, const Mat3& inertia_kgm2,
                         double cable_length_m, const Mat3& k_attitude_,
                         const Mat3& k_body_rates_, const Mat3& k_cable_,
                         const Mat3& k_cable_rate_)
    : mass(mass_kg),
      inertia(inertia_kgm2),
      cable_length(cable_length_m),
      k_attitude(k_attitude_),
      k_body_rates(k_body_rates_),
      k_cable(k_cable_),
      k_cable_rate(k_cable_rate_) {
  if (!(mass > 0.0)) throw ConfigError("robot mass must be positive");
  if (!(cable_length > 0.0)) throw ConfigError("cable length must be positive");
  check_diagonal_positive(k_attitude, "K_R");
  check_diagonal_positive(k_body_rates, "K_Omega");
  check_diagonal_positive(k_cable, "K_xi");
  check_diagonal_positive(k_cable_rate, "K_omega");
  inertia_inv = inertia.inverse();
}

std::pair<Vec3, Vec3> cable_state_from_positions(const Vec3& attach_pos,
                                                 const Vec3& robot_pos,
                                                 const Vec3& attach_vel,
                                                 const Vec3& robot_vel,
                                                 double cable_length) {
  const Vec3 d = attach_pos - robot_pos;
  const double dist = d.norm();
  if (std::abs(dist - cable_length) > 0.01 * cable_length) {
    throw PhysicsError("taut-cable violation: robot-attach distance " +
                       std::to_string(dist) + " m vs cable length " +
                       std::to_string(cable_length) + " m");
  }
  return {d / dist, (attach_vel - robot_vel) / cable_length};
}

Vec3 project_tension(const Vec3& mu_des, const Vec3& xi) {
  return xi * xi.dot(mu_des);
}

Vec3 desired_cable_direction(const Vec3& mu_des, double mu_min) {
  const double norm = mu_des.norm();
  if (norm < mu_min) {
    throw PhysicsError("desired tension norm " + std::to_string(norm) +
                       " N below floor " + std::to_string(mu_min) +
                       " N; cable direction undefined");
  }
  return -mu_des / norm;
}

DesiredCableState CableCommandFilter::step(const Vec3& mu_des, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("filter step needs dt > 0");
  const Vec3 raw = desired_cable_direction(mu_des, mu_min_);
  DesiredCableState out;
  if (!primed_) {
    filt_ = raw;
    primed_ = true;
    out.xi_des = raw;
    return out;
  }
  const double a = dt * cutoff_rad_ / (1.0 + dt * cutoff_rad_);
  const Vec3 prev = filt_;
  filt_ += a * (raw - filt_);
  out.xi_dot_des = (filt_ - prev) / dt;
  out.xi_des = filt_.normalized();
  out.omega_des = out.xi_des.cross(out.xi_dot_des);
  return out;
}

Vec3 attachment_accel(const Vec3& linear_accel, const Vec3& gravity,
                      const Mat3& r_load, const Vec3& omega_load,
                      const Vec3& omega_dot_load, const Vec3& rho) {
  return linear_accel + gravity - r_load * hat(rho) * omega_dot_load +
         r_load * hat(omega_load) * hat(omega_load) * rho;
}

Vec3 control_force(const CableRobotState& state, const Vec3& mu_cmd,
                   const DesiredCableState& des, const Vec3& accel_ff,
                   const RobotParams& p) {
  const Vec3& xi = state.xi;
  const Mat3 xi_hat2 = hat(xi) * hat(xi);
  const Vec3 e_xi = des.xi_des.cross(xi);
  const Vec3 e_omega = state.omega + xi_hat2 * des.omega_des;

  const Vec3 bracket = -p.k_cable * e_xi - p.k_cable_rate * e_omega -
                       xi_hat2 * des.omega_des -
                       xi.dot(des.omega_des) * des.xi_dot_des;
  const Vec3 u_perp =
      p.mass * p.cable_length * xi.cross(bracket) - p.mass * xi_hat2 * accel_ff;
  const Vec3 u_par = mu_cmd +
                     p.mass * p.cable_length * state.omega.squaredNorm() * xi +
                     p.mass * xi * xi.dot(accel_ff);
  return u_par + u_perp;
}

Mat3 desired_attitude(const Vec3& u, double yaw) {
  const double norm = u.norm();
  if (norm < 1e-6) {
    throw PhysicsError("thrust direction undefined: |u| < 1e-6 N");
  }
  const Vec3 b3 = u / norm;
  Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 b2 = b3.cross(heading);
  if (b2.norm() < 1e-8) {
    // Thrust parallel to the heading; complete with the vertical instead.
    heading = Vec3(0.0, 0.0, 1.0);
    b2 = b3.cross(heading);
  }
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);
  Mat3 r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b3;
  return r;
}

Vec3 attitude_error(const Mat3& r, const Mat3& r_des) {
  return vee(0.5 * (r.transpose() * r_des - r_des.transpose() * r));
}

std::pair<double, Vec3> attitude_thrust_moment(
    const Vec3& u, const Mat3& r, const Vec3& body_rates, const Mat3& r_des,
    const Vec3& omega_des, const Vec3& omega_dot_des, const RobotParams& p) {
  if (u.norm() < 1e-6) {
    throw PhysicsError("thrust direction undefined: |u| < 1e-6 N");
  }
  const double thrust = u.dot(r.col(2));
  const Vec3 e_r = attitude_error(r, r_des);
  const Mat3 r_rel = r.transpose() * r_des;
  const Vec3 e_omega = r_rel * omega_des - body_rates;
  const Vec3 moment =
      p.k_attitude * e_r + p.k_body_rates * e_omega +
      body_rates.cross(p.inertia * body_rates) -
      p.inertia * (hat(body_rates) * r_rel * omega_des - r_rel * omega_dot_des);
  return {thrust, moment};
}

Vec3 robot_sphere_accel(const Vec3& xi, const Vec3& xi_dot, const Vec3& u,
                        double mass, double cable_length,
                        const Vec3& attach_accel) {
  const Mat3 xi_hat2 = hat(xi) * hat(xi);
  return xi_hat2 * (u - mass * attach_accel) / (mass * cable_length) -
         xi_dot.squaredNorm() * xi;
}

}  // namespace cablemanip
