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

#include "cablemanip/world.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace cablemanip {

SystemParams::SystemParams(PayloadParams payload_,
                           std::vector<RobotParams> robots_,
                           AllocationModel allocation_)
    : payload(std::move(payload_)),
      robots(std::move(robots_)),
      allocation(std::move(allocation_)) {
  if (static_cast<int>(robots.size()) != allocation.robot_count()) {
    throw ConfigError("robot parameter list does not match allocation model");
  }
  for (int k = 0; k < allocation.robot_count(); ++k) {
    if (std::abs(robots[k].cable_length - allocation.cable_lengths()[k]) >
        1e-12) {
      throw ConfigError("cable length mismatch between robot " +
                        std::to_string(k) + " and allocation model");
    }
  }
}

Vec3 WorldState::attach_point(int k, const SystemParams& sys) const {
  return payload.position +
         payload.attitude.rotate(sys.allocation.attach_points()[k]);
}

Vec3 WorldState::attach_velocity(int k, const SystemParams& sys) const {
  return payload.velocity +
         payload.attitude.rotate(payload.angular_velocity.cross(
             sys.allocation.attach_points()[k]));
}

Vec3 WorldState::robot_position(int k, const SystemParams& sys) const {
  return attach_point(k, sys) - sys.robots[k].cable_length * robots[k].xi;
}

Vec3 WorldState::robot_velocity(int k, const SystemParams& sys) const {
  return attach_velocity(k, sys) -
         sys.robots[k].cable_length * robots[k].xi_dot();
}

CoupledAccel coupled_accelerations(const WorldState& world,
                                   const std::vector<Vec3>& forces,
                                   const SystemParams& sys) {
  const int n = sys.robot_count();
  const Mat3 r_load = quat_to_rot(world.payload.attitude);
  const Vec3& omega = world.payload.angular_velocity;
  const Vec3& g = sys.payload.gravity;
  const Mat3 omega_hat2 = hat(omega) * hat(omega);

  // Tension magnitude is affine in the payload accelerations:
  //   T_k = m_k xi' xddot - m_k xi' R_L hat(rho) Omegadot + c_k.
  Mat3 tl = sys.payload.mass * Mat3::Identity();
  Mat3 tr = Mat3::Zero();
  Mat3 br = sys.payload.inertia;
  Vec3 rhs_top = -sys.payload.mass * g;
  Vec3 rhs_bot = -omega.cross(sys.payload.inertia * omega);
  std::vector<double> c(n);
  for (int k = 0; k < n; ++k) {
    const Vec3& xi = world.robots[k].xi;
    const Vec3& rho = sys.allocation.attach_points()[k];
    const double m_k = sys.robots[k].mass;
    const double l_k = sys.robots[k].cable_length;
    const Vec3 xi_dot = world.robots[k].xi_dot();
    c[k] = m_k * xi.dot(g + r_load * omega_hat2 * rho) +
           m_k * l_k * xi_dot.squaredNorm() - xi.dot(forces[k]);
    const Mat3 xi_outer = xi * xi.transpose();
    const Vec3 load_xi = r_load.transpose() * xi;  // xi in payload frame
    tl += m_k * xi_outer;
    tr -= m_k * xi_outer * r_load * hat(rho);
    br -= m_k * hat(rho) * load_xi * (load_xi.transpose() * hat(rho));
    rhs_top -= c[k] * xi;
    rhs_bot -= c[k] * hat(rho) * load_xi;
  }

  Eigen::Matrix<double, 6, 6> mass_mat;
  mass_mat << tl, tr, tr.transpose(), br;
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(mass_mat);
  if (!lu.isInvertible()) {
    throw PhysicsError("coupled dynamics: singular mass matrix (degenerate "
                       "cable geometry)");
  }
  Vec6 rhs;
  rhs << rhs_top, rhs_bot;
  const Vec6 accel = lu.solve(rhs);

  CoupledAccel out;
  out.linear = accel.head<3>();
  out.angular = accel.tail<3>();
  out.cable.resize(n);
  out.tension.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec3& xi = world.robots[k].xi;
    const Vec3& rho = sys.allocation.attach_points()[k];
    const double m_k = sys.robots[k].mass;
    const double l_k = sys.robots[k].cable_length;
    const Vec3 xi_dot = world.robots[k].xi_dot();
    const Vec3 a_k = attachment_accel(out.linear, g, r_load, omega,
                                      out.angular, rho);
    const double tension =
        m_k * xi.dot(a_k) + m_k * l_k * xi_dot.squaredNorm() -
        xi.dot(forces[k]);
    out.tension[k] = -tension * xi;
    out.cable[k] =
        robot_sphere_accel(xi, xi_dot, forces[k], m_k, l_k, a_k);
  }
  return out;
}

namespace {

// Flattened layout: payload 13 | per robot xi(3) omega(3) q(4) Omega(3).
VecX pack_world(const WorldState& w) {
  const int n = static_cast<int>(w.robots.size());
  VecX v(13 + 13 * n);
  v.head<13>() = w.payload.pack();
  for (int k = 0; k < n; ++k) {
    const int o = 13 + 13 * k;
    v.segment<3>(o) = w.robots[k].xi;
    v.segment<3>(o + 3) = w.robots[k].omega;
    v.segment<4>(o + 6) = w.robots[k].attitude.wxyz();
    v.segment<3>(o + 10) = w.robots[k].body_rates;
  }
  return v;
}

WorldState unpack_world(const VecX& v, int n, double time) {
  WorldState w;
  w.time = time;
  w.payload = PayloadState::unpack(v.head<13>());
  w.robots.resize(n);
  for (int k = 0; k < n; ++k) {
    const int o = 13 + 13 * k;
    w.robots[k].xi = v.segment<3>(o);
    w.robots[k].omega = v.segment<3>(o + 3);
    w.robots[k].attitude = UnitQuat::from_wxyz(v.segment<4>(o + 6));
    w.robots[k].body_rates = v.segment<3>(o + 10);
  }
  return w;
}

VecX world_deriv(const VecX& v, const std::vector<RobotCommand>& cmd,
                 const SystemParams& sys, double time) {
  const int n = sys.robot_count();
  const WorldState w = unpack_world(v, n, time);

  std::vector<Vec3> forces(n);
  for (int k = 0; k < n; ++k) {
    const Mat3 r_k = quat_to_rot(w.robots[k].attitude.normalized());
    forces[k] = cmd[k].thrust * r_k.col(2);
  }
  const CoupledAccel acc = coupled_accelerations(w, forces, sys);

  VecX dv(v.size());
  dv.head<13>() = payload_deriv(w.payload.pack(),
                                sys.payload.mass * (acc.linear + sys.payload.gravity),
                                sys.payload.inertia * acc.angular +
                                    w.payload.angular_velocity.cross(
                                        sys.payload.inertia *
                                        w.payload.angular_velocity),
                                sys.payload);
  for (int k = 0; k < n; ++k) {
    const int o = 13 + 13 * k;
    const CableRobotState& rs = w.robots[k];
    dv.segment<3>(o) = rs.xi_dot();
    dv.segment<3>(o + 3) = rs.xi.cross(acc.cable[k]);
    dv.segment<4>(o + 6) =
        0.5 * quat_mul(rs.attitude, UnitQuat(0.0, rs.body_rates)).wxyz();
    dv.segment<3>(o + 10) =
        sys.robots[k].inertia_inv *
        (cmd[k].moment - rs.body_rates.cross(sys.robots[k].inertia *
                                             rs.body_rates));
  }
  return dv;
}

}  // namespace

WorldState step(const WorldState& world, const std::vector<RobotCommand>& cmd,
                const SystemParams& sys, double dt, StepStats* stats) {
  const int n = sys.robot_count();
  if (static_cast<int>(cmd.size()) != n) {
    throw ConfigError("command list does not match robot count");
  }
  const VecX packed = pack_world(world);
  const VecX next = rk4_step(
      [&](const VecX& x, int) { return world_deriv(x, cmd, sys, world.time); },
      packed, 0, dt);

  WorldState out = unpack_world(next, n, world.time + dt);

  double drift = std::abs(out.payload.attitude.norm() - 1.0);
  out.payload.attitude = out.payload.attitude.normalized();
  for (CableRobotState& r : out.robots) {
    drift = std::max(drift, std::abs(r.xi.norm() - 1.0));
    drift = std::max(drift, std::abs(r.attitude.norm() - 1.0));
    r.xi.normalize();
    r.attitude = r.attitude.normalized();
    r.omega -= r.xi * r.xi.dot(r.omega);
  }
  if (stats) stats->max_unit_drift = std::max(stats->max_unit_drift, drift);
  if (drift > 1e-3) {
    throw PhysicsError(
        "integration fault: unit-norm drift " + std::to_string(drift) +
        " at t = " + std::to_string(out.time) + " s");
  }
  return out;
}

}  // namespace cablemanip
