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

#include "cablemanip/payload.hpp"

#include <Eigen/Cholesky>

namespace cablemanip {

PayloadParams::PayloadParams(double mass_kg, const Mat3& inertia_kgm2,
                             const Vec3& gravity_mps2)
    : mass(mass_kg), inertia(inertia_kgm2), gravity(gravity_mps2) {
  if (!(mass > 0.0)) {
    throw ConfigError("payload mass must be positive");
  }
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("payload inertia must be symmetric");
  }
  Eigen::LLT<Mat3> llt(inertia);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("payload inertia must be positive definite");
  }
  inertia_inv = inertia.inverse();
}

Vec13 payload_deriv(const Vec13& x, const Vec3& force, const Vec3& moment,
                    const PayloadParams& p) {
  const UnitQuat q = UnitQuat::from_wxyz(x.segment<4>(3));
  const Vec3 vel = x.segment<3>(7);
  const Vec3 omega = x.segment<3>(10);

  Vec13 dx;
  dx.segment<3>(0) = vel;
  dx.segment<4>(3) = 0.5 * quat_mul(q, UnitQuat(0.0, omega)).wxyz();
  dx.segment<3>(7) = force / p.mass - p.gravity;
  dx.segment<3>(10) = p.inertia_inv * (moment - omega.cross(p.inertia * omega));
  return dx;
}

Vec12 state_error(const PayloadState& x, const PayloadReference& r) {
  Vec12 e;
  e.segment<3>(0) = r.position - x.position;
  e.segment<3>(3) = r.velocity - x.velocity;
  e.segment<3>(6) = quat_log(quat_mul(r.attitude.conjugate(), x.attitude));
  e.segment<3>(9) = r.angular_velocity - x.angular_velocity;
  return e;
}

std::pair<Vec3, Vec3> desired_wrench(const PayloadReference& r,
                                     const PayloadParams& p,
                                     bool gravity_compensated) {
  const Vec3 f_des =
      gravity_compensated ? Vec3(p.mass * (r.acceleration + p.gravity))
                          : Vec3(p.mass * r.acceleration);
  const Vec3 m_des =
      p.inertia * r.angular_acceleration +
      r.angular_velocity.cross(p.inertia * r.angular_velocity);
  return {f_des, m_des};
}

}  // namespace cablemanip
