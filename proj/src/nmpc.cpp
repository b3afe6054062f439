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

#include "cablemanip/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace cablemanip {

PayloadNmpc::PayloadNmpc(PayloadParams params, AllocationModel model,
                         OcpConfig cfg)
    : params_(std::move(params)),
      model_(std::move(model)),
      cfg_(std::move(cfg)) {
  cfg_.validate(model_.robot_count());
  const int nl = model_.null_dimension();
  input_error_map_ = MatX::Identity(6 + nl, 6 + nl);
  input_error_map_.topLeftCorner<6, 6>() *= -1.0;

  const int n_stage = cfg_.horizon;
  xbar_.resize(n_stage + 1);
  ubar_.resize(n_stage);
  stages_.resize(n_stage);
  const int mc = constraint_count(model_, cfg_);
  for (QpStage& st : stages_) {
    st.s_mat = MatX::Zero(12, 6 + nl);
    st.b_mat = MatX::Zero(12, 6 + nl);
    st.c_mat = MatX::Zero(mc, 12);
    st.d_mat = MatX::Zero(mc, 6 + nl);
    st.g0 = VecX::Zero(mc);
    st.r_vec = VecX::Zero(6 + nl);
  }
}

void PayloadNmpc::linearize(const std::vector<PayloadReference>& refs) {
  const int nl = model_.null_dimension();
  for (int i = 0; i < cfg_.horizon; ++i) {
    QpStage& st = stages_[i];
    const PayloadState xs = PayloadState::unpack(xbar_[i]);
    const ControlInput uc = ControlInput::unpack(ubar_[i]);

    Eigen::Matrix<double, 12, 6> b6;
    discrete_dynamics_jacobian(xbar_[i], uc.force, uc.moment, cfg_.dt, params_,
                               xbar_[i + 1], &st.a_mat, &b6);
    st.b_mat.leftCols<6>() = b6;
    st.b_vec = lift_state(
        xbar_[i + 1],
        discrete_dynamics(xbar_[i], uc.force, uc.moment, cfg_.dt, params_));

    const Eigen::Matrix<double, 12, 12> ex_jac =
        state_error_jacobian(xs, refs[i]);
    const Vec12 ex = state_error(xs, refs[i]);
    st.q_mat = 2.0 * ex_jac.transpose() * cfg_.q_state * ex_jac;
    st.q_vec = 2.0 * ex_jac.transpose() * (cfg_.q_state * ex);

    const auto [f_des, m_des] =
        desired_wrench(refs[i], params_, cfg_.gravity_compensated_wrench);
    VecX eu(6 + nl);
    eu << f_des - uc.force, m_des - uc.moment, uc.lambda;
    st.r_mat = 2.0 * input_error_map_.transpose() * cfg_.q_input *
               input_error_map_;
    st.r_vec = 2.0 * input_error_map_.transpose() * (cfg_.q_input * eu);

    st.g0 = evaluate_constraints(xs, uc, model_, cfg_);
    constraint_jacobian(xs, uc, model_, cfg_, &st.c_mat, &st.d_mat);
  }
  const PayloadState xn = PayloadState::unpack(xbar_[cfg_.horizon]);
  const Eigen::Matrix<double, 12, 12> en_jac =
      state_error_jacobian(xn, refs[cfg_.horizon]);
  const Vec12 en = state_error(xn, refs[cfg_.horizon]);
  terminal_.q_mat = 2.0 * en_jac.transpose() * cfg_.q_terminal * en_jac;
  terminal_.q_vec = 2.0 * en_jac.transpose() * (cfg_.q_terminal * en);
}

double PayloadNmpc::merit(const std::vector<Vec13>& xs,
                          const std::vector<VecX>& us,
                          const std::vector<PayloadReference>& refs,
                          double penalty_eq,
                          double* constraint_violation) const {
  std::vector<PayloadState> states(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) states[i] = PayloadState::unpack(xs[i]);
  std::vector<ControlInput> inputs(us.size());
  for (size_t i = 0; i < us.size(); ++i) inputs[i] = ControlInput::unpack(us[i]);

  double phi = evaluate_cost(states, inputs, refs, cfg_, params_);
  double worst = 0.0;
  for (int i = 0; i < cfg_.horizon; ++i) {
    const VecX g = evaluate_constraints(states[i], inputs[i], model_, cfg_);
    const double viol = (-g.array()).max(0.0).sum();
    worst = std::max(worst, g.size() ? (-g.array()).max(0.0).maxCoeff() : 0.0);
    phi += cfg_.soft_penalty * viol;
    const Vec12 defect = lift_state(
        xs[i + 1], discrete_dynamics(xs[i], inputs[i].force, inputs[i].moment,
                                     cfg_.dt, params_));
    phi += penalty_eq * defect.cwiseAbs().sum();
  }
  if (constraint_violation) *constraint_violation = worst;
  return phi;
}

double PayloadNmpc::kkt_residual(const QpSolution& qp) const {
  double res = 0.0;
  for (int i = 0; i < cfg_.horizon; ++i) {
    const QpStage& st = stages_[i];
    res = std::max(res, st.b_vec.cwiseAbs().maxCoeff());
    VecX stat_u = st.r_vec + st.b_mat.transpose() * qp.costate[i + 1] -
                  st.d_mat.transpose() * qp.lambda[i];
    res = std::max(res, stat_u.cwiseAbs().maxCoeff());
    if (i >= 1) {
      const Vec12 stat_x = st.q_vec + st.a_mat.transpose() * qp.costate[i + 1] -
                           qp.costate[i] - st.c_mat.transpose() * qp.lambda[i];
      res = std::max(res, stat_x.cwiseAbs().maxCoeff());
    }
    for (int j = 0; j < st.g0.size(); ++j) {
      const double pos = std::max(st.g0(j), 0.0);
      const double neg = std::max(-st.g0(j), 0.0);
      res = std::max(res, std::abs(qp.lambda[i](j) * pos));
      res = std::max(res, (cfg_.soft_penalty - qp.lambda[i](j)) * neg);
    }
  }
  const Vec12 stat_n = terminal_.q_vec - qp.costate[cfg_.horizon];
  return std::max(res, stat_n.cwiseAbs().maxCoeff());
}

OcpSolution PayloadNmpc::solve(const PayloadState& x0,
                               const std::vector<PayloadReference>& refs,
                               const OcpSolution* warm) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n_stage = cfg_.horizon;
  const int nl = model_.null_dimension();
  if (static_cast<int>(refs.size()) != n_stage + 1) {
    throw ConfigError("reference trajectory must have horizon+1 entries");
  }
  if (!x0.pack().allFinite()) {
    throw SolverError("non-finite initial state");
  }

  if (warm != nullptr) {
    if (static_cast<int>(warm->states.size()) != n_stage + 1 ||
        static_cast<int>(warm->inputs.size()) != n_stage) {
      throw ConfigError("warm start has wrong horizon");
    }
    for (int i = 0; i <= n_stage; ++i) xbar_[i] = warm->states[i].pack();
    for (int i = 0; i < n_stage; ++i) ubar_[i] = warm->inputs[i].pack();
  } else {
    for (int i = 0; i <= n_stage; ++i) xbar_[i] = x0.pack();
    for (int i = 0; i < n_stage; ++i) {
      const auto [f_des, m_des] =
          desired_wrench(refs[i], params_, cfg_.gravity_compensated_wrench);
      ControlInput u;
      u.force = f_des;
      u.moment = m_des;
      u.lambda = VecX::Zero(nl);
      ubar_[i] = u.pack();
    }
  }
  // Initial-value embedding: the first shooting node is the measured state.
  xbar_[0] = x0.pack();

  QpSettings qp_settings;
  qp_settings.penalty = cfg_.soft_penalty;

  OcpSolution out;
  SolveDiagnostics& diag = out.diagnostics;
  QpSolution qp;
  double penalty_eq = 100.0;

  const int max_iters =
      (cfg_.mode == SolverMode::kRti) ? 1 : cfg_.max_sqp_iterations;
  for (int it = 0; it < max_iters; ++it) {
    linearize(refs);
    const QpStatus status = solve_ocp_qp(stages_, terminal_, Vec12::Zero(),
                                         qp_settings, &qp);
    diag.qp_status = to_string(status);
    diag.qp_iterations += qp.iterations;
    diag.sqp_iterations = it + 1;
    if (status == QpStatus::kNumericalFailure) {
      throw SolverError("QP subproblem failed: " + diag.to_json());
    }

    diag.kkt_residual = kkt_residual(qp);
    if (cfg_.mode == SolverMode::kConverge &&
        diag.kkt_residual < cfg_.kkt_tolerance) {
      break;
    }

    double alpha = 1.0;
    if (cfg_.mode == SolverMode::kConverge) {
      for (const Vec12& p : qp.costate) {
        penalty_eq = std::max(penalty_eq, 10.0 * p.cwiseAbs().maxCoeff());
      }
      // Model decrease of the QP (quadratic part plus L1 terms).
      double quad = 0.0, viol0 = 0.0, viol1 = 0.0;
      for (int i = 0; i < n_stage; ++i) {
        const QpStage& st = stages_[i];
        quad += 0.5 * qp.dx[i].dot(st.q_mat * qp.dx[i]) +
                st.q_vec.dot(qp.dx[i]) +
                0.5 * qp.du[i].dot(st.r_mat * qp.du[i]) +
                st.r_vec.dot(qp.du[i]);
        viol0 += (-st.g0.array()).max(0.0).sum();
        const VecX lin = st.g0 + st.c_mat * qp.dx[i] + st.d_mat * qp.du[i];
        viol1 += (-lin.array()).max(0.0).sum();
      }
      quad += 0.5 * qp.dx[n_stage].dot(terminal_.q_mat * qp.dx[n_stage]) +
              terminal_.q_vec.dot(qp.dx[n_stage]);
      double defect_l1 = 0.0;
      for (const QpStage& st : stages_) defect_l1 += st.b_vec.cwiseAbs().sum();
      const double pred = -quad + cfg_.soft_penalty * (viol0 - viol1) +
                          penalty_eq * defect_l1;

      const double phi0 = merit(xbar_, ubar_, refs, penalty_eq, nullptr);
      if (pred <= 1e-14 * (1.0 + std::abs(phi0))) {
        break;  // no usable descent left at this linearization
      }
      std::vector<Vec13> trial_x(n_stage + 1);
      std::vector<VecX> trial_u(n_stage);
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        for (int i = 0; i <= n_stage; ++i) {
          trial_x[i] = retract_state(xbar_[i], alpha * qp.dx[i]);
        }
        for (int i = 0; i < n_stage; ++i) {
          trial_u[i] = ubar_[i] + alpha * qp.du[i];
        }
        const double phi = merit(trial_x, trial_u, refs, penalty_eq, nullptr);
        if (phi <= phi0 - 1e-4 * alpha * pred) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (accepted) {
        xbar_ = trial_x;
        ubar_ = trial_u;
      } else {
        break;  // stalled; report current iterate with its KKT residual
      }
    } else {
      for (int i = 1; i <= n_stage; ++i) {
        xbar_[i] = retract_state(xbar_[i], qp.dx[i]);
      }
      for (int i = 0; i < n_stage; ++i) ubar_[i] += qp.du[i];
    }
  }

  out.states.resize(n_stage + 1);
  for (int i = 0; i <= n_stage; ++i) {
    out.states[i] = PayloadState::unpack(xbar_[i]);
  }
  out.inputs.resize(n_stage);
  out.tensions.resize(n_stage);
  for (int i = 0; i < n_stage; ++i) {
    out.inputs[i] = ControlInput::unpack(ubar_[i]);
    const Mat3 r_load = quat_to_rot(out.states[i].attitude);
    Vec6 wrench_load;
    wrench_load << r_load.transpose() * out.inputs[i].force,
        out.inputs[i].moment;
    out.tensions[i] = distribute(wrench_load, out.inputs[i].lambda, model_);
  }

  double worst = 0.0;
  for (int i = 0; i < n_stage; ++i) {
    const VecX g =
        evaluate_constraints(out.states[i], out.inputs[i], model_, cfg_);
    if (g.size()) worst = std::max(worst, (-g.array()).max(0.0).maxCoeff());
  }
  diag.max_constraint_violation = worst;
  diag.cost = evaluate_cost(out.states, out.inputs, refs, cfg_, params_);
  diag.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

OcpSolution PayloadNmpc::warm_start_shift(const OcpSolution& prev) {
  OcpSolution next = prev;
  const size_t n_stage = prev.inputs.size();
  for (size_t i = 0; i + 1 <= n_stage; ++i) next.states[i] = prev.states[i + 1];
  next.states[n_stage] = prev.states[n_stage];
  for (size_t i = 0; i + 1 < n_stage; ++i) next.inputs[i] = prev.inputs[i + 1];
  next.inputs[n_stage - 1] = prev.inputs[n_stage - 1];
  for (size_t i = 0; i + 1 < n_stage; ++i) {
    next.tensions[i] = prev.tensions[i + 1];
  }
  next.diagnostics = SolveDiagnostics{};
  return next;
}

}  // namespace cablemanip
