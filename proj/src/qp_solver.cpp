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

#include "cablemanip/qp_solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace cablemanip {

namespace {

using Mat12 = Eigen::Matrix<double, 12, 12>;

struct StageWork {
  // Interior-point scaling, recomputed each iteration.
  VecX sigma, w_diag, lam_over_nu, d, d2_cache;
  // Riccati matrix factorization, shared by predictor and corrector.
  Eigen::LLT<MatX> huu_llt;
  MatX gain;    // K = -Huu^-1 Hux
  MatX hux;     // nu x 12
  Mat12 value;  // P_i
  Vec12 value_vec{};
  VecX ff;      // k = -Huu^-1 hu
  // Newton residuals.
  Vec12 stat_x{};
  VecX stat_u;
  VecX y;
};

// Largest alpha in (0, 1] with v + alpha*dv >= (1 - tau) * v elementwise.
double max_step(const VecX& v, const VecX& dv, double tau) {
  double alpha = 1.0;
  for (int j = 0; j < v.size(); ++j) {
    if (dv(j) < 0.0) {
      alpha = std::min(alpha, -tau * v(j) / dv(j));
    }
  }
  return alpha;
}

}  // namespace

QpStatus solve_ocp_qp(const std::vector<QpStage>& stages,
                      const QpTerminal& terminal, const Vec12& dx0,
                      const QpSettings& settings, QpSolution* sol) {
  const int horizon = static_cast<int>(stages.size());
  const double rho = settings.penalty;

  int total_ineq = 0;
  for (const QpStage& st : stages) total_ineq += static_cast<int>(st.g0.size());

  // Primal-dual iterate.
  std::vector<Vec12> dx(horizon + 1);
  std::vector<VecX> du(horizon), lam(horizon), slack(horizon);
  std::vector<Vec12> costate(horizon + 1, Vec12::Zero());

  dx[0] = dx0;
  for (int i = 0; i < horizon; ++i) {
    du[i] = VecX::Zero(stages[i].r_vec.size());
    dx[i + 1] = stages[i].a_mat * dx[i] + stages[i].b_vec;
    const VecX t0 = stages[i].g0 + stages[i].c_mat * dx[i];
    slack[i] = (1.0 - t0.array()).max(1.0).matrix();
    lam[i] = VecX::Constant(t0.size(), 0.5 * rho);
  }

  std::vector<StageWork> work(horizon + 1);
  std::vector<VecX> delta_du(horizon), delta_lam(horizon), delta_s(horizon),
      delta_y(horizon);
  std::vector<Vec12> delta_dx(horizon + 1), delta_p(horizon + 1);

  auto qp_fail = [&](QpStatus status) {
    sol->status = status;
    return status;
  };

  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    // Residuals of the KKT system at the current iterate.
    double stat_norm = 0.0;
    double gap = 0.0;
    for (int i = 0; i <= horizon; ++i) {
      StageWork& wk = work[i];
      if (i < horizon) {
        const QpStage& st = stages[i];
        wk.y = st.g0 + st.c_mat * dx[i] + st.d_mat * du[i] + slack[i];
        wk.stat_u = st.r_mat * du[i] + st.r_vec + st.s_mat.transpose() * dx[i] +
                    st.b_mat.transpose() * costate[i + 1] -
                    st.d_mat.transpose() * lam[i];
        stat_norm = std::max(stat_norm, wk.stat_u.size()
                                            ? wk.stat_u.cwiseAbs().maxCoeff()
                                            : 0.0);
        gap += lam[i].dot(wk.y) + (rho - lam[i].array()).matrix().dot(slack[i]);
        if (i >= 1) {
          wk.stat_x = st.q_mat * dx[i] + st.q_vec + st.s_mat * du[i] +
                      st.a_mat.transpose() * costate[i + 1] - costate[i] -
                      st.c_mat.transpose() * lam[i];
          stat_norm = std::max(stat_norm, wk.stat_x.cwiseAbs().maxCoeff());
        } else {
          wk.stat_x.setZero();  // dx_0 is fixed; no stationarity row.
        }
      } else {
        wk.stat_x = terminal.q_mat * dx[horizon] + terminal.q_vec -
                    costate[horizon];
        stat_norm = std::max(stat_norm, wk.stat_x.cwiseAbs().maxCoeff());
      }
    }
    const double mu = total_ineq > 0 ? gap / (2.0 * total_ineq) : 0.0;

    if (stat_norm < settings.stat_tolerance && mu < settings.comp_tolerance) {
      sol->status = QpStatus::kConverged;
      break;
    }

    // Diagonal interior-point scaling and the Riccati matrix sweep.
    for (int i = 0; i < horizon; ++i) {
      StageWork& wk = work[i];
      wk.lam_over_nu = lam[i].array() / (rho - lam[i].array());
      wk.w_diag = wk.y.array() + wk.lam_over_nu.array() * slack[i].array();
      wk.sigma = lam[i].array() / wk.w_diag.array();
    }
    work[horizon].value = terminal.q_mat;
    for (int i = horizon - 1; i >= 0; --i) {
      const QpStage& st = stages[i];
      StageWork& wk = work[i];
      const Mat12& vnext = work[i + 1].value;
      MatX huu = st.r_mat + st.b_mat.transpose() * vnext * st.b_mat;
      if (st.g0.size() > 0) {
        huu.noalias() +=
            st.d_mat.transpose() * wk.sigma.asDiagonal() * st.d_mat;
      }
      wk.huu_llt.compute(huu);
      if (wk.huu_llt.info() != Eigen::Success) {
        huu += 1e-11 * huu.trace() * MatX::Identity(huu.rows(), huu.cols());
        wk.huu_llt.compute(huu);
        if (wk.huu_llt.info() != Eigen::Success) {
          return qp_fail(QpStatus::kNumericalFailure);
        }
      }
      wk.hux = st.s_mat.transpose() + st.b_mat.transpose() * vnext * st.a_mat;
      if (st.g0.size() > 0) {
        wk.hux.noalias() +=
            st.d_mat.transpose() * wk.sigma.asDiagonal() * st.c_mat;
      }
      wk.gain = -wk.huu_llt.solve(wk.hux);
      Mat12 value = st.q_mat + st.a_mat.transpose() * vnext * st.a_mat +
                    wk.hux.transpose() * wk.gain;
      if (st.g0.size() > 0) {
        value.noalias() +=
            st.c_mat.transpose() * wk.sigma.asDiagonal() * st.c_mat;
      }
      wk.value = 0.5 * (value + value.transpose());
    }

    // One Newton solve for a given centering/corrector right-hand side.
    auto newton_solve = [&](double sigma_mu, const std::vector<VecX>* cor_y,
                            const std::vector<VecX>* cor_s) {
      for (int i = 0; i < horizon; ++i) {
        const QpStage& st = stages[i];
        StageWork& wk = work[i];
        if (st.g0.size() > 0) {
          VecX g1 = (lam[i].array() * wk.y.array() - sigma_mu).matrix();
          VecX g2 = ((rho - lam[i].array()) * slack[i].array() - sigma_mu)
                        .matrix();
          if (cor_y) g1 += (*cor_y)[i];
          if (cor_s) g2 += (*cor_s)[i];
          wk.d = (-g1.array() + wk.lam_over_nu.array() * g2.array()) /
                 wk.w_diag.array();
          wk.d2_cache = g2;
        } else {
          wk.d.resize(0);
          wk.d2_cache.resize(0);
        }
      }
      // Backward vector sweep.
      work[horizon].value_vec = work[horizon].stat_x;
      for (int i = horizon - 1; i >= 0; --i) {
        const QpStage& st = stages[i];
        StageWork& wk = work[i];
        Vec12 q_vec = wk.stat_x;
        VecX r_vec = wk.stat_u;
        if (st.g0.size() > 0) {
          q_vec.noalias() -= st.c_mat.transpose() * wk.d;
          r_vec.noalias() -= st.d_mat.transpose() * wk.d;
        }
        const Vec12& wnext = work[i + 1].value_vec;
        const VecX hu = r_vec + st.b_mat.transpose() * wnext;
        wk.ff = -wk.huu_llt.solve(hu);
        wk.value_vec = q_vec + st.a_mat.transpose() * wnext +
                       wk.hux.transpose() * wk.ff;
      }
      // Forward rollout of the increments.
      delta_dx[0].setZero();
      for (int i = 0; i < horizon; ++i) {
        const QpStage& st = stages[i];
        StageWork& wk = work[i];
        delta_du[i] = wk.gain * delta_dx[i] + wk.ff;
        delta_dx[i + 1] = st.a_mat * delta_dx[i] + st.b_mat * delta_du[i];
        if (st.g0.size() > 0) {
          const VecX cd = st.c_mat * delta_dx[i] + st.d_mat * delta_du[i];
          delta_lam[i] = wk.d - (wk.sigma.array() * cd.array()).matrix();
          delta_s[i] = (slack[i].array() * delta_lam[i].array() -
                        wk.d2_cache.array()) /
                       (rho - lam[i].array());
          delta_y[i] = cd + delta_s[i];
        } else {
          delta_lam[i].resize(0);
          delta_s[i].resize(0);
          delta_y[i].resize(0);
        }
      }
      for (int i = 1; i <= horizon; ++i) {
        delta_p[i] = work[i].value * delta_dx[i] + work[i].value_vec;
      }
    };

    double sigma_mu = 0.0;
    std::vector<VecX> cor_y(horizon), cor_s(horizon);
    if (total_ineq > 0) {
      // Affine predictor.
      newton_solve(0.0, nullptr, nullptr);
      double alpha_aff = 1.0;
      for (int i = 0; i < horizon; ++i) {
        alpha_aff = std::min(alpha_aff, max_step(slack[i], delta_s[i], 1.0));
        alpha_aff = std::min(alpha_aff, max_step(work[i].y, delta_y[i], 1.0));
        alpha_aff = std::min(alpha_aff, max_step(lam[i], delta_lam[i], 1.0));
        const VecX nu_vec = (rho - lam[i].array()).matrix();
        alpha_aff =
            std::min(alpha_aff, max_step(nu_vec, (-delta_lam[i]).eval(), 1.0));
      }
      double gap_aff = 0.0;
      for (int i = 0; i < horizon; ++i) {
        const VecX lam_a = lam[i] + alpha_aff * delta_lam[i];
        const VecX y_a = work[i].y + alpha_aff * delta_y[i];
        const VecX s_a = slack[i] + alpha_aff * delta_s[i];
        gap_aff += lam_a.dot(y_a) + (rho - lam_a.array()).matrix().dot(s_a);
      }
      const double mu_aff = gap_aff / (2.0 * total_ineq);
      const double ratio = std::clamp(mu_aff / std::max(mu, 1e-300), 0.0, 1.0);
      sigma_mu = ratio * ratio * ratio * mu;
      for (int i = 0; i < horizon; ++i) {
        cor_y[i] = (delta_lam[i].array() * delta_y[i].array()).matrix();
        cor_s[i] = (-delta_lam[i].array() * delta_s[i].array()).matrix();
      }
      newton_solve(sigma_mu, &cor_y, &cor_s);
    } else {
      newton_solve(0.0, nullptr, nullptr);
    }

    // Fraction-to-boundary step, one alpha for primal and dual.
    double alpha = 1.0;
    const double tau = settings.frac_to_boundary;
    for (int i = 0; i < horizon; ++i) {
      if (stages[i].g0.size() == 0) continue;
      alpha = std::min(alpha, max_step(slack[i], delta_s[i], tau));
      alpha = std::min(alpha, max_step(work[i].y, delta_y[i], tau));
      alpha = std::min(alpha, max_step(lam[i], delta_lam[i], tau));
      const VecX nu_vec = (rho - lam[i].array()).matrix();
      alpha = std::min(alpha, max_step(nu_vec, (-delta_lam[i]).eval(), tau));
    }

    for (int i = 0; i <= horizon; ++i) {
      if (i >= 1) {
        dx[i] += alpha * delta_dx[i];
        costate[i] += alpha * delta_p[i];
      }
      if (i < horizon) {
        du[i] += alpha * delta_du[i];
        if (stages[i].g0.size() > 0) {
          lam[i] += alpha * delta_lam[i];
          slack[i] += alpha * delta_s[i];
        }
      }
    }
  }

  if (iter == settings.max_iterations) {
    sol->status = QpStatus::kMaxIterations;
  }
  sol->dx = std::move(dx);
  sol->du = std::move(du);
  sol->lambda = std::move(lam);
  sol->slack = std::move(slack);
  sol->costate = std::move(costate);
  sol->iterations = iter;

  // Final residuals for diagnostics.
  double stat_norm = 0.0, gap = 0.0;
  for (int i = 0; i < horizon; ++i) {
    const QpStage& st = stages[i];
    const VecX y = st.g0 + st.c_mat * sol->dx[i] + st.d_mat * sol->du[i] +
                   sol->slack[i];
    const VecX su = st.r_mat * sol->du[i] + st.r_vec +
                    st.s_mat.transpose() * sol->dx[i] +
                    st.b_mat.transpose() * sol->costate[i + 1] -
                    st.d_mat.transpose() * sol->lambda[i];
    if (su.size()) stat_norm = std::max(stat_norm, su.cwiseAbs().maxCoeff());
    gap += sol->lambda[i].dot(y) +
           (rho - sol->lambda[i].array()).matrix().dot(sol->slack[i]);
  }
  sol->stat_residual = stat_norm;
  sol->comp_residual = total_ineq > 0 ? gap / (2.0 * total_ineq) : 0.0;
  return sol->status;
}

}  // namespace cablemanip
