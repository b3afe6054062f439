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

#include <doctest.h>

#include "test_util.hpp"

namespace cablemanip {
namespace {

using testutil::matrix_log;
using testutil::random_quat;
using testutil::random_vec3;

PayloadParams test_params() {
  return PayloadParams(0.232, Vec3(0.01, 0.02, 0.03).asDiagonal());
}

TEST_CASE("hover is an equilibrium of the payload dynamics") {
  const PayloadParams p = test_params();
  PayloadState x;
  ControlInput u;
  u.force = Vec3(0.0, 0.0, p.mass * 9.81);
  u.lambda = VecX::Zero(3);
  const Vec13 dx = payload_deriv(x, u, p);
  CHECK(dx.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("free fall") {
  const PayloadParams p = test_params();
  PayloadState x;
  x.velocity = Vec3(1, 0, 0);
  ControlInput u;
  u.lambda = VecX::Zero(3);
  const Vec13 dx = payload_deriv(x, u, p);
  CHECK((dx.segment<3>(0) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((dx.segment<3>(7) - Vec3(0, 0, -9.81)).norm() < 1e-15);
}

TEST_CASE("gyroscopic torque term") {
  const PayloadParams p = test_params();
  PayloadState x;
  x.angular_velocity = Vec3(1, 1, 1);
  ControlInput u;
  u.lambda = VecX::Zero(3);
  const Vec13 dx = payload_deriv(x, u, p);
  // Omega x J Omega = (0.01, -0.02, 0.01).
  const Vec3 expected(-1.0, 1.0, -1.0 / 3.0);
  CHECK((dx.segment<3>(10) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("state_error") {
  PayloadState x;
  x.position = random_vec3();
  x.velocity = random_vec3();
  x.attitude = random_quat();
  x.angular_velocity = random_vec3();
  const PayloadReference same = PayloadReference::from_state(x);
  CHECK(state_error(x, same).cwiseAbs().maxCoeff() == 0.0);

  PayloadState rot;
  rot.attitude = UnitQuat(std::cos(M_PI / 4), 0, 0, std::sin(M_PI / 4));
  PayloadReference ident;
  const Vec12 e = state_error(rot, ident);
  CHECK((e.segment<3>(6) - Vec3(0, 0, M_PI / 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(e.segment<3>(0).norm() == 0.0);

  for (int i = 0; i < 200; ++i) {
    PayloadState a;
    a.attitude = random_quat();
    PayloadReference r;
    r.attitude = random_quat();
    const Vec3 att = state_error(a, r).segment<3>(6);
    const Mat3 rel = quat_to_rot(r.attitude).transpose() * quat_to_rot(a.attitude);
    CHECK((att - matrix_log(rel)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("desired wrench") {
  const PayloadParams p = test_params();
  PayloadReference hover;
  hover.position = Vec3(0, 0, 0.5);
  const auto [f, m] = desired_wrench(hover, p);
  CHECK((f - Vec3(0, 0, 2.27592)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.norm() == 0.0);

  // Literal (uncompensated) variant.
  const auto [f_raw, m_raw] = desired_wrench(hover, p, false);
  CHECK(f_raw.norm() == 0.0);
  CHECK(m_raw.norm() == 0.0);

  PayloadReference spin;
  spin.angular_velocity = Vec3(0, 0, 1);
  const auto [f2, m2] = desired_wrench(spin, p);
  CHECK(m2.norm() < 1e-15);  // principal-axis spin: gyroscopic term vanishes
}

TEST_CASE("gravity-cancelled free payload conserves energy and momentum") {
  const PayloadParams p = test_params();
  Vec13 x = PayloadState{}.pack();
  x.segment<3>(10) = Vec3(1.0, 1.0, 1.0);  // tumbling start
  const Vec3 force = p.mass * p.gravity;

  const auto energy = [&](const Vec13& s) {
    const Vec3 w = s.segment<3>(10);
    return 0.5 * w.dot(p.inertia * w);
  };
  const auto momentum = [&](const Vec13& s) {
    return Vec3(quat_to_rot(UnitQuat::from_wxyz(s.segment<4>(3))) *
                (p.inertia * s.segment<3>(10)));
  };
  const double e0 = energy(x);
  const Vec3 h0 = momentum(x);

  const double dt = 1e-3;
  for (int i = 0; i < 10000; ++i) {
    x = rk4_step(
        [&](const Vec13& s, int) { return payload_deriv(s, force, Vec3::Zero(), p); },
        x, 0, dt);
    x.segment<4>(3).normalize();
  }
  CHECK(std::abs(energy(x) - e0) / e0 < 1e-6);
  CHECK((momentum(x) - h0).norm() / h0.norm() < 1e-6);
}

TEST_CASE("quaternion norm drift below 1e-6 before renormalization") {
  const PayloadParams p = test_params();
  Vec13 x = PayloadState{}.pack();
  x.segment<3>(10) = Vec3(0.7, -0.4, 1.2);
  const Vec3 force = p.mass * p.gravity;
  const double dt = 1e-3;
  for (int i = 0; i < 10000; ++i) {
    x = rk4_step(
        [&](const Vec13& s, int) { return payload_deriv(s, force, Vec3::Zero(), p); },
        x, 0, dt);
  }
  CHECK(std::abs(x.segment<4>(3).norm() - 1.0) < 1e-6);
}

TEST_CASE("payload parameter validation") {
  CHECK_THROWS_AS(PayloadParams(-1.0, Mat3::Identity()), ConfigError);
  Mat3 asym = Mat3::Identity();
  asym(0, 1) = 1e-3;
  CHECK_THROWS_AS(PayloadParams(1.0, asym), ConfigError);
  CHECK_THROWS_AS(PayloadParams(1.0, Mat3(-Mat3::Identity())), ConfigError);
}

}  // namespace
}  // namespace cablemanip
