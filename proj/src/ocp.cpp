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

#include "cablemanip/ocp.hpp"

#include <cstdio>

#include <Eigen/Cholesky>

namespace cablemanip {

namespace {

// Safe direction for near-zero tensions; residuals stay finite, the tension
// lower bound keeps iterates away from the singularity.
constexpr double kNormFloor = 1e-9;

bool is_psd(const Eigen::Ref<const MatX>& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::LLT<MatX> llt(m + 1e-12 * MatX::Identity(m.rows(), m.cols()));
  return llt.info() == Eigen::Success;
}

}  // namespace

OcpConfig OcpConfig::defaults(int robot_count) {
  OcpConfig cfg;
  Vec12 qx;
  qx << 200, 200, 200, 20, 20, 20, 100, 100, 100, 10, 10, 10;
  cfg.q_state = qx.asDiagonal();
  cfg.q_terminal = 5.0 * cfg.q_state;
  const int nl = 3 * robot_count - 6;
  VecX qu(6 + nl);
  qu.head<6>().setOnes();
  qu.tail(nl).setConstant(10.0);
  cfg.q_input = qu.asDiagonal();
  return cfg;
}

void OcpConfig::validate(int robot_count) const {
  if (horizon < 2) throw ConfigError("NMPC horizon must be >= 2");
  if (!(dt > 0.0)) throw ConfigError("NMPC step must be positive");
  if (!(min_robot_distance > 0.0)) {
    throw ConfigError("min robot distance must be positive");
  }
  if (!(tension_max > tension_min && tension_min > 0.0)) {
    throw ConfigError("tension bounds must satisfy f_max > mu_min > 0");
  }
  if (q_input.rows() != 3 * robot_count || q_input.cols() != 3 * robot_count) {
    throw ConfigError("input weight must be (6 + 3n-6) x (6 + 3n-6) = " +
                      std::to_string(3 * robot_count) + " square");
  }
  if (!is_psd(q_state) || !is_psd(q_terminal) || !is_psd(q_input)) {
    throw ConfigError("NMPC weights must be symmetric PSD");
  }
}

std::string SolveDiagnostics::to_json() const {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "{\"sqp_iterations\":%d,\"qp_iterations\":%d,"
                "\"qp_status\":\"%s\",\"kkt_residual\":%.6e,"
                "\"max_constraint_violation\":%.6e,\"cost\":%.6e,"
                "\"solve_time_s\":%.6e}",
                sqp_iterations, qp_iterations, qp_status.c_str(), kkt_residual,
                max_constraint_violation, cost, solve_time_s);
  return buf;
}

double evaluate_cost(const std::vector<PayloadState>& states,
                     const std::vector<ControlInput>& inputs,
                     const std::vector<PayloadReference>& refs,
                     const OcpConfig& cfg, const PayloadParams& params) {
  const size_t n_stages = inputs.size();
  double cost = 0.0;
  for (size_t i = 0; i < n_stages; ++i) {
    const Vec12 ex = state_error(states[i], refs[i]);
    cost += ex.dot(cfg.q_state * ex);
    const auto [f_des, m_des] =
        desired_wrench(refs[i], params, cfg.gravity_compensated_wrench);
    VecX eu(6 + inputs[i].lambda.size());
    eu << f_des - inputs[i].force, m_des - inputs[i].moment, inputs[i].lambda;
    cost += eu.dot(cfg.q_input * eu);
  }
  const Vec12 en = state_error(states[n_stages], refs[n_stages]);
  cost += en.dot(cfg.q_terminal * en);
  return cost;
}

int constraint_count(const AllocationModel& model, const OcpConfig& cfg) {
  const int n = model.robot_count();
  const int n_obs = static_cast<int>(cfg.obstacles.size());
  return n * (n - 1) / 2 + n_obs * (n + 1) + 2 * n;
}

VecX evaluate_constraints(const PayloadState& x, const ControlInput& u,
                          const AllocationModel& model, const OcpConfig& cfg) {
  const int n = model.robot_count();
  const Mat3 r_load = quat_to_rot(x.attitude);
  Vec6 wrench_load;
  wrench_load << r_load.transpose() * u.force, u.moment;
  const VecX mu =
      model.pseudo_inverse() * wrench_load + model.null_basis() * u.lambda;

  std::vector<Vec3> pos(n);
  for (int k = 0; k < n; ++k) {
    const Vec3 mu_k = mu.segment<3>(3 * k);
    const double norm = std::max(mu_k.norm(), kNormFloor);
    pos[k] = model.attach_points()[k] + model.cable_lengths()[k] * mu_k / norm;
  }

  VecX res(constraint_count(model, cfg));
  int idx = 0;
  const double dr2 = cfg.min_robot_distance * cfg.min_robot_distance;
  for (int k = 0; k < n; ++k) {
    for (int j = k + 1; j < n; ++j) {
      res(idx++) = (pos[k] - pos[j]).squaredNorm() - dr2;
    }
  }
  for (const Obstacle& obs : cfg.obstacles) {
    for (int k = 0; k < n; ++k) {
      const Vec3 w = obs.position - x.position - r_load * pos[k];
      res(idx++) = w.squaredNorm() - obs.robot_clearance * obs.robot_clearance;
    }
  }
  for (const Obstacle& obs : cfg.obstacles) {
    const Vec3 w = obs.position - x.position;
    res(idx++) = w.squaredNorm() - obs.payload_clearance * obs.payload_clearance;
  }
  for (int k = 0; k < n; ++k) {
    res(idx++) = cfg.tension_max * cfg.tension_max -
                 mu.segment<3>(3 * k).squaredNorm();
  }
  for (int k = 0; k < n; ++k) {
    res(idx++) = mu.segment<3>(3 * k).squaredNorm() -
                 cfg.tension_min * cfg.tension_min;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Manifold bookkeeping.
// ---------------------------------------------------------------------------

Vec13 retract_state(const Vec13& ref, const Vec12& delta) {
  Vec13 x;
  x.segment<3>(0) = ref.segment<3>(0) + delta.segment<3>(0);
  const UnitQuat q = quat_mul(UnitQuat::from_wxyz(ref.segment<4>(3)),
                              quat_exp(delta.segment<3>(6)));
  x.segment<4>(3) = q.wxyz();
  x.segment<3>(7) = ref.segment<3>(7) + delta.segment<3>(3);
  x.segment<3>(10) = ref.segment<3>(10) + delta.segment<3>(9);
  return x;
}

Vec12 lift_state(const Vec13& ref, const Vec13& x) {
  Vec12 d;
  d.segment<3>(0) = x.segment<3>(0) - ref.segment<3>(0);
  d.segment<3>(3) = x.segment<3>(7) - ref.segment<3>(7);
  d.segment<3>(6) =
      quat_log(quat_mul(UnitQuat::from_wxyz(ref.segment<4>(3)).conjugate(),
                        UnitQuat::from_wxyz(x.segment<4>(3))));
  d.segment<3>(9) = x.segment<3>(10) - ref.segment<3>(10);
  return d;
}

namespace {

// 13x12 Jacobian of retract_state w.r.t. delta at delta = 0.
Eigen::Matrix<double, 13, 12> retract_jacobian(const Vec13& ref) {
  Eigen::Matrix<double, 13, 12> j = Eigen::Matrix<double, 13, 12>::Zero();
  j.block<3, 3>(0, 0).setIdentity();
  j.block<4, 3>(3, 6) = quat_tangent_mat(UnitQuat::from_wxyz(ref.segment<4>(3)));
  j.block<3, 3>(7, 3).setIdentity();
  j.block<3, 3>(10, 9).setIdentity();
  return j;
}

// 12x13 Jacobian of lift_state(ref, x) w.r.t. x, evaluated at x.
Eigen::Matrix<double, 12, 13> lift_jacobian(const Vec13& ref, const Vec13& x) {
  Eigen::Matrix<double, 12, 13> j = Eigen::Matrix<double, 12, 13>::Zero();
  j.block<3, 3>(0, 0).setIdentity();
  j.block<3, 3>(3, 7).setIdentity();
  const UnitQuat ref_q = UnitQuat::from_wxyz(ref.segment<4>(3));
  const UnitQuat p = quat_mul(ref_q.conjugate(), UnitQuat::from_wxyz(x.segment<4>(3)));
  j.block<3, 4>(6, 3) =
      quat_log_jacobian(p) * quat_left_mat(ref_q.conjugate());
  j.block<3, 3>(9, 10).setIdentity();
  return j;
}

// Continuous dynamics Jacobians at a (possibly non-unit-quaternion) state.
void continuous_jacobian(const Vec13& x, const PayloadParams& p,
                         Eigen::Matrix<double, 13, 13>* jx,
                         Eigen::Matrix<double, 13, 6>* ju) {
  const UnitQuat q = UnitQuat::from_wxyz(x.segment<4>(3));
  const Vec3 omega = x.segment<3>(10);
  jx->setZero();
  jx->block<3, 3>(0, 7).setIdentity();
  jx->block<4, 4>(3, 3) = 0.5 * quat_right_mat(UnitQuat(0.0, omega));
  jx->block<4, 3>(3, 10) = quat_tangent_mat(q);
  jx->block<3, 3>(10, 10) =
      p.inertia_inv * (hat(p.inertia * omega) - hat(omega) * p.inertia);
  ju->setZero();
  ju->block<3, 3>(7, 0) = Mat3::Identity() / p.mass;
  ju->block<3, 3>(10, 3) = p.inertia_inv;
}

}  // namespace

Vec13 discrete_dynamics(const Vec13& x, const Vec3& force, const Vec3& moment,
                        double dt, const PayloadParams& p) {
  Vec13 next;
  try {
    next = rk4_step(
        [&](const Vec13& xi, const Vec6&) {
          return payload_deriv(xi, force, moment, p);
        },
        x, Vec6::Zero().eval(), dt);
  } catch (const PhysicsError& e) {
    throw SolverError(std::string("non-finite model evaluation: ") + e.what());
  }
  next.segment<4>(3).normalize();
  return next;
}

void discrete_dynamics_jacobian(const Vec13& x, const Vec3& force,
                                const Vec3& moment, double dt,
                                const PayloadParams& p,
                                const Vec13& x_next_ref,
                                Eigen::Matrix<double, 12, 12>* a,
                                Eigen::Matrix<double, 12, 6>* b) {
  using Mat13 = Eigen::Matrix<double, 13, 13>;
  using Mat13x6 = Eigen::Matrix<double, 13, 6>;

  const auto deriv = [&](const Vec13& xi) {
    return payload_deriv(xi, force, moment, p);
  };

  // RK4 chain rule through the four stage evaluations.
  Mat13 jx;
  Mat13x6 ju;
  const Vec13 x1 = x;
  const Vec13 k1 = deriv(x1);
  const Vec13 x2 = x + (0.5 * dt) * k1;
  const Vec13 k2 = deriv(x2);
  const Vec13 x3 = x + (0.5 * dt) * k2;
  const Vec13 k3 = deriv(x3);
  const Vec13 x4 = x + dt * k3;

  Mat13 f1, f2, f3, f4;
  Mat13x6 g1, g2, g3, g4;
  continuous_jacobian(x1, p, &f1, &g1);
  continuous_jacobian(x2, p, &f2, &g2);
  continuous_jacobian(x3, p, &f3, &g3);
  continuous_jacobian(x4, p, &f4, &g4);

  const Mat13 i13 = Mat13::Identity();
  const Mat13 k1x = f1;
  const Mat13 k2x = f2 * (i13 + (0.5 * dt) * k1x);
  const Mat13 k3x = f3 * (i13 + (0.5 * dt) * k2x);
  const Mat13 k4x = f4 * (i13 + dt * k3x);
  jx = i13 + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);

  const Mat13x6 k1u = g1;
  const Mat13x6 k2u = g2 + f2 * ((0.5 * dt) * k1u);
  const Mat13x6 k3u = g3 + f3 * ((0.5 * dt) * k2u);
  const Mat13x6 k4u = g4 + f4 * (dt * k3u);
  ju = (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);

  // Quaternion renormalization of the raw RK4 output.
  const Vec13 k4 = deriv(x4);
  Vec13 raw = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const Mat4 jnorm = quat_normalize_jacobian(raw.segment<4>(3));
  jx.block<4, 13>(3, 0) = jnorm * jx.block<4, 13>(3, 0);
  ju.block<4, 6>(3, 0) = jnorm * ju.block<4, 6>(3, 0);
  raw.segment<4>(3).normalize();

  const Eigen::Matrix<double, 12, 13> lift = lift_jacobian(x_next_ref, raw);
  const Eigen::Matrix<double, 13, 12> retract = retract_jacobian(x);
  *a = lift * jx * retract;
  *b = lift * ju;
}

Eigen::Matrix<double, 12, 12> state_error_jacobian(const PayloadState& x,
                                                   const PayloadReference& r) {
  Eigen::Matrix<double, 12, 12> j =
      -Eigen::Matrix<double, 12, 12>::Identity();
  const UnitQuat rel = quat_mul(r.attitude.conjugate(), x.attitude);
  j.block<3, 3>(6, 6) = quat_log_jacobian(rel) *
                        quat_left_mat(r.attitude.conjugate()) *
                        quat_tangent_mat(x.attitude);
  return j;
}

void constraint_jacobian(const PayloadState& x, const ControlInput& u,
                         const AllocationModel& model, const OcpConfig& cfg,
                         MatX* c_state, MatX* d_input) {
  const int n = model.robot_count();
  const int nl = model.null_dimension();
  const int nu = 6 + nl;
  const int mc = constraint_count(model, cfg);
  c_state->setZero(mc, 12);
  d_input->setZero(mc, nu);

  const Mat3 r_load = quat_to_rot(x.attitude);
  const Vec3 f_load = r_load.transpose() * u.force;
  Vec6 wrench_load;
  wrench_load << f_load, u.moment;
  const VecX mu =
      model.pseudo_inverse() * wrench_load + model.null_basis() * u.lambda;

  // Stacked tension Jacobians w.r.t. (delta_theta, F, M, Lambda).
  const MatX pinv_f = model.pseudo_inverse().leftCols<3>();   // 3n x 3
  const MatX pinv_m = model.pseudo_inverse().rightCols<3>();  // 3n x 3
  const MatX jmu_dtheta = pinv_f * hat(f_load);
  const MatX jmu_f = pinv_f * r_load.transpose();

  std::vector<Vec3> pos(n);
  std::vector<Mat3> jpos_mu(n);
  for (int k = 0; k < n; ++k) {
    const Vec3 mu_k = mu.segment<3>(3 * k);
    const double norm = std::max(mu_k.norm(), kNormFloor);
    const Vec3 dir = mu_k / norm;
    pos[k] = model.attach_points()[k] + model.cable_lengths()[k] * dir;
    jpos_mu[k] = model.cable_lengths()[k] / norm *
                 (Mat3::Identity() - dir * dir.transpose());
  }

  // Rows of the position Jacobians w.r.t. each input group.
  const auto jpos = [&](int k) {
    struct Blocks {
      Mat3 dtheta, f, m;
      MatX lambda;
    } b;
    b.dtheta = jpos_mu[k] * jmu_dtheta.middleRows<3>(3 * k);
    b.f = jpos_mu[k] * jmu_f.middleRows<3>(3 * k);
    b.m = jpos_mu[k] * pinv_m.middleRows<3>(3 * k);
    b.lambda = jpos_mu[k] * model.null_basis().middleRows<3>(3 * k);
    return b;
  };
  std::vector<decltype(jpos(0))> jp(n);
  for (int k = 0; k < n; ++k) jp[k] = jpos(k);

  int idx = 0;
  for (int k = 0; k < n; ++k) {
    for (int j = k + 1; j < n; ++j) {
      const Eigen::RowVector3d d2 = 2.0 * (pos[k] - pos[j]).transpose();
      c_state->block<1, 3>(idx, 6) = d2 * (jp[k].dtheta - jp[j].dtheta);
      d_input->block<1, 3>(idx, 0) = d2 * (jp[k].f - jp[j].f);
      d_input->block<1, 3>(idx, 3) = d2 * (jp[k].m - jp[j].m);
      d_input->block(idx, 6, 1, nl) = d2 * (jp[k].lambda - jp[j].lambda);
      ++idx;
    }
  }
  for (const Obstacle& obs : cfg.obstacles) {
    for (int k = 0; k < n; ++k) {
      const Vec3 w = obs.position - x.position - r_load * pos[k];
      const Eigen::RowVector3d w2 = 2.0 * w.transpose();
      c_state->block<1, 3>(idx, 0) = -w2;
      c_state->block<1, 3>(idx, 6) =
          w2 * (r_load * hat(pos[k]) - r_load * jp[k].dtheta);
      d_input->block<1, 3>(idx, 0) = -w2 * r_load * jp[k].f;
      d_input->block<1, 3>(idx, 3) = -w2 * r_load * jp[k].m;
      d_input->block(idx, 6, 1, nl) = -w2 * r_load * jp[k].lambda;
      ++idx;
    }
  }
  for (const Obstacle& obs : cfg.obstacles) {
    c_state->block<1, 3>(idx, 0) =
        -2.0 * (obs.position - x.position).transpose();
    ++idx;
  }
  for (int sign : {-1, 1}) {
    for (int k = 0; k < n; ++k) {
      const Eigen::RowVector3d mu2 =
          2.0 * sign * mu.segment<3>(3 * k).transpose();
      c_state->block<1, 3>(idx, 6) = mu2 * jmu_dtheta.middleRows<3>(3 * k);
      d_input->block<1, 3>(idx, 0) = mu2 * jmu_f.middleRows<3>(3 * k);
      d_input->block<1, 3>(idx, 3) = mu2 * pinv_m.middleRows<3>(3 * k);
      d_input->block(idx, 6, 1, nl) =
          mu2 * model.null_basis().middleRows<3>(3 * k);
      ++idx;
    }
  }
}

}  // namespace cablemanip
