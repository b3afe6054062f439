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

#ifndef CABLEMANIP_PAYLOAD_HPP_
#define CABLEMANIP_PAYLOAD_HPP_

#include <utility>

#include "cablemanip/geometry.hpp"

namespace cablemanip {

// Payload pose and twist. Packed 13-vector layout: position (0:3),
// attitude wxyz (3:7), velocity (7:10), body angular velocity (10:13).
struct PayloadState {
  Vec3 position = Vec3::Zero();           // m, inertial
  UnitQuat attitude;                      // payload frame -> inertial
  Vec3 velocity = Vec3::Zero();           // m/s, inertial
  Vec3 angular_velocity = Vec3::Zero();   // rad/s, payload frame

  Vec13 pack() const {
    Vec13 x;
    x << position, attitude.wxyz(), velocity, angular_velocity;
    return x;
  }

  static PayloadState unpack(const Vec13& x) {
    PayloadState s;
    s.position = x.segment<3>(0);
    s.attitude = UnitQuat::from_wxyz(x.segment<4>(3));
    s.velocity = x.segment<3>(7);
    s.angular_velocity = x.segment<3>(10);
    return s;
  }
};

struct PayloadParams {
  double mass;       // kg
  Mat3 inertia;      // kg m^2, payload frame
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);  // m/s^2, enters dynamics as -g

  Mat3 inertia_inv;  // cached at construction

  PayloadParams(double mass_kg, const Mat3& inertia_kgm2,
                const Vec3& gravity_mps2 = Vec3(0.0, 0.0, 9.81));
};

// NMPC input: payload wrench (F inertial, M payload frame) plus the
// null-space coordinate vector Lambda of dimension 3n-6.
struct ControlInput {
  Vec3 force = Vec3::Zero();    // N, inertial
  Vec3 moment = Vec3::Zero();   // N m, payload frame
  VecX lambda;                  // N, null-space coordinates

  VecX pack() const {
    VecX u(6 + lambda.size());
    u << force, moment, lambda;
    return u;
  }

  static ControlInput unpack(const VecX& u) {
    ControlInput c;
    c.force = u.segment<3>(0);
    c.moment = u.segment<3>(3);
    c.lambda = u.tail(u.size() - 6);
    return c;
  }
};

struct PayloadReference {
  Vec3 position = Vec3::Zero();              // m
  Vec3 velocity = Vec3::Zero();              // m/s
  Vec3 acceleration = Vec3::Zero();          // m/s^2
  UnitQuat attitude;
  Vec3 angular_velocity = Vec3::Zero();      // rad/s
  Vec3 angular_acceleration = Vec3::Zero();  // rad/s^2

  static PayloadReference from_state(const PayloadState& x) {
    PayloadReference r;
    r.position = x.position;
    r.velocity = x.velocity;
    r.attitude = x.attitude;
    r.angular_velocity = x.angular_velocity;
    return r;
  }
};

/// Continuous payload dynamics: xdot = v, qdot = 1/2 q (x) (0, Omega),
/// vdot = F/m - g, Omegadot = J^-1 (M - Omega x J Omega).
Vec13 payload_deriv(const Vec13& x, const Vec3& force, const Vec3& moment,
                    const PayloadParams& p);

inline Vec13 payload_deriv(const PayloadState& x, const ControlInput& u,
                           const PayloadParams& p) {
  return payload_deriv(x.pack(), u.force, u.moment, p);
}

/// 12-vector (position, velocity, attitude-log, angular velocity) error:
/// [x_des - x, v_des - v, quat_log(q_des^-1 (x) q), Omega_des - Omega].
Vec12 state_error(const PayloadState& x, const PayloadReference& r);

/// Desired wrench from the reference. With gravity_compensated (default) the
/// force target is m*(a_des + g) so the input error vanishes at equilibrium;
/// otherwise the literal m*a_des.
std::pair<Vec3, Vec3> desired_wrench(const PayloadReference& r,
                                     const PayloadParams& p,
                                     bool gravity_compensated = true);

}  // namespace cablemanip

#endif  // CABLEMANIP_PAYLOAD_HPP_
