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

#ifndef CABLEMANIP_GEOMETRY_HPP_
#define CABLEMANIP_GEOMETRY_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cablemanip {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec13 = Eigen::Matrix<double, 13, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Error hierarchy mirrored by the CLI exit codes (config 2, solver 3,
// physics 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct PhysicsError : Error {
  using Error::Error;
};

/// Skew-symmetric cross-product matrix: hat(a) * b == a x b.
inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat for (approximately) skew-symmetric matrices.
inline Vec3 vee(const Mat3& m) {
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

// Unit quaternion (w, xyz) under the Hamilton convention. Hemisphere
// canonicalization keeps w >= 0 so the log map is continuous near identity.
struct UnitQuat {
  double w = 1.0;
  Vec3 xyz = Vec3::Zero();

  UnitQuat() = default;
  UnitQuat(double w_, const Vec3& xyz_) : w(w_), xyz(xyz_) {}
  UnitQuat(double w_, double x, double y, double z) : w(w_), xyz(x, y, z) {}

  static UnitQuat identity() { return UnitQuat(); }

  static UnitQuat from_wxyz(const Vec4& c) {
    return UnitQuat(c(0), c.tail<3>());
  }

  Vec4 wxyz() const {
    Vec4 c;
    c << w, xyz;
    return c;
  }

  double norm() const { return std::sqrt(w * w + xyz.squaredNorm()); }

  UnitQuat normalized() const {
    const double n = norm();
    return UnitQuat(w / n, xyz / n);
  }

  /// Same rotation with w >= 0.
  UnitQuat canonical() const {
    return (w < 0.0) ? UnitQuat(-w, -xyz) : *this;
  }

  UnitQuat conjugate() const { return UnitQuat(w, -xyz); }

  Vec3 rotate(const Vec3& v) const {
    // q * (0, v) * q^-1 expanded.
    const Vec3 t = 2.0 * xyz.cross(v);
    return v + w * t + xyz.cross(t);
  }
};

/// Hamilton product a (x) b.
inline UnitQuat quat_mul(const UnitQuat& a, const UnitQuat& b) {
  return UnitQuat(a.w * b.w - a.xyz.dot(b.xyz),
                  a.w * b.xyz + b.w * a.xyz + a.xyz.cross(b.xyz));
}

inline UnitQuat operator*(const UnitQuat& a, const UnitQuat& b) {
  return quat_mul(a, b);
}

/// Exponential map: rotation vector (angle * axis) -> unit quaternion.
inline UnitQuat quat_exp(const Vec3& rotvec) {
  const double theta = rotvec.norm();
  double s;
  if (theta < 1e-6) {
    s = 0.5 - theta * theta / 48.0;
  } else {
    s = std::sin(0.5 * theta) / theta;
  }
  return UnitQuat(std::cos(0.5 * theta), s * rotvec);
}

/// Logarithm map: unit quaternion -> rotation vector with angle in [0, pi].
/// Canonicalizes internally, so q and -q give the same result.
inline Vec3 quat_log(const UnitQuat& q_in) {
  const UnitQuat q = q_in.canonical();
  const double s = q.xyz.norm();
  if (s < 1e-6) {
    // Two-term series of 2*atan2(s, w)/s.
    return (2.0 / q.w) * (1.0 - s * s / (3.0 * q.w * q.w)) * q.xyz;
  }
  const double theta = 2.0 * std::atan2(s, q.w);
  return (theta / s) * q.xyz;
}

inline Mat3 quat_to_rot(const UnitQuat& q) {
  const double w = q.w, x = q.xyz.x(), y = q.xyz.y(), z = q.xyz.z();
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Shepperd's method; returns the canonical (w >= 0) quaternion of R.
inline UnitQuat rot_to_quat(const Mat3& r) {
  const double tr = r.trace();
  UnitQuat q;
  if (tr > 0.0) {
    const double s = std::sqrt(tr + 1.0) * 2.0;
    q = UnitQuat(0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
                 (r(1, 0) - r(0, 1)) / s);
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q = UnitQuat((r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
                 (r(0, 2) + r(2, 0)) / s);
  } else if (r(1, 1) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q = UnitQuat((r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
                 (r(1, 2) + r(2, 1)) / s);
  } else {
    const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q = UnitQuat((r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
                 (r(1, 2) + r(2, 1)) / s, 0.25 * s);
  }
  return q.normalized().canonical();
}

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         std::abs(r.determinant() - 1.0) < tol;
}

// ---------------------------------------------------------------------------
// Quaternion calculus helpers for the solver linearization. All Jacobians use
// the (w, x, y, z) coefficient order and the body-frame (right) perturbation
// q(delta) = q (x) quat_exp(delta).
// ---------------------------------------------------------------------------

/// Left multiplication matrix: quat_mul(q, p).wxyz() == quat_left_mat(q) * p.wxyz().
inline Mat4 quat_left_mat(const UnitQuat& q) {
  const double w = q.w, x = q.xyz.x(), y = q.xyz.y(), z = q.xyz.z();
  Mat4 m;
  m << w, -x, -y, -z, x, w, -z, y, y, z, w, -x, z, -y, x, w;
  return m;
}

/// Right multiplication matrix: quat_mul(q, p).wxyz() == quat_right_mat(p) * q.wxyz().
inline Mat4 quat_right_mat(const UnitQuat& p) {
  const double w = p.w, x = p.xyz.x(), y = p.xyz.y(), z = p.xyz.z();
  Mat4 m;
  m << w, -x, -y, -z, x, w, z, -y, y, -z, w, x, z, y, -x, w;
  return m;
}

/// d(q (x) quat_exp(delta)) / d(delta) at delta = 0; a 4x3 matrix.
inline Eigen::Matrix<double, 4, 3> quat_tangent_mat(const UnitQuat& q) {
  Eigen::Matrix<double, 4, 3> m;
  // 0.5 * L(q) * [0; I3], i.e. columns are 0.5 * q (x) (0, e_i).
  m.row(0) = -0.5 * q.xyz.transpose();
  m.block<3, 3>(1, 0) = 0.5 * (q.w * Mat3::Identity() + hat(q.xyz));
  return m;
}

/// d(quat_log(p)) / d(p.wxyz()) for a unit quaternion p; a 3x4 matrix.
/// Handles the w < 0 chart via quat_log(p) == quat_log(-p).
inline Eigen::Matrix<double, 3, 4> quat_log_jacobian(const UnitQuat& p_in) {
  const double sign = (p_in.w < 0.0) ? -1.0 : 1.0;
  const UnitQuat p(sign * p_in.w, sign * p_in.xyz);
  const double s = p.xyz.norm();
  Eigen::Matrix<double, 3, 4> j;
  j.col(0) = -2.0 * p.xyz;  // d(theta*n)/dw, exact for unit p.
  if (s < 1e-4) {
    const double w = p.w;
    const double coef = 2.0 * (1.0 - 3.0 * w * w) / (3.0 * w * w * w);
    j.block<3, 3>(0, 1) =
        (2.0 / w) * Mat3::Identity() + coef * p.xyz * p.xyz.transpose();
  } else {
    const Vec3 n = p.xyz / s;
    const double theta = 2.0 * std::atan2(s, p.w);
    j.block<3, 3>(0, 1) = (theta / s) * (Mat3::Identity() - n * n.transpose()) +
                          2.0 * p.w * n * n.transpose();
  }
  return sign * j;
}

/// d(p / |p|) / dp for a 4-vector p.
inline Mat4 quat_normalize_jacobian(const Vec4& p) {
  const double n = p.norm();
  const Vec4 u = p / n;
  return (Mat4::Identity() - u * u.transpose()) / n;
}

// ---------------------------------------------------------------------------
// Classical fixed-step RK4.
// ---------------------------------------------------------------------------

/// One classical RK4 step of xdot = f(x, u). Throws PhysicsError if any
/// derivative evaluation is non-finite.
template <class F, class State, class Input>
State rk4_step(F&& f, const State& x, const Input& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rk4_step: dt must be positive");
  }
  const auto check = [](const State& k) -> const State& {
    if (!k.allFinite()) {
      throw PhysicsError("rk4_step: non-finite derivative evaluation");
    }
    return k;
  };
  const State k1 = check(f(x, u));
  const State k2 = check(f(x + (0.5 * dt) * k1, u));
  const State k3 = check(f(x + (0.5 * dt) * k2, u));
  const State k4 = check(f(x + dt * k3, u));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace cablemanip

#endif  // CABLEMANIP_GEOMETRY_HPP_
