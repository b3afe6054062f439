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

#include "cablemanip/allocation.hpp"

#include <Eigen/SVD>

namespace cablemanip {

AllocationModel::AllocationModel(std::vector<Vec3> attach_points,
                                 std::vector<double> cable_lengths)
    : n_(static_cast<int>(attach_points.size())),
      rho_(std::move(attach_points)),
      length_(std::move(cable_lengths)) {
  if (n_ < 3) {
    throw ConfigError("allocation requires n >= 3 robots, got n = " +
                      std::to_string(n_));
  }
  if (static_cast<int>(length_.size()) != n_) {
    throw ConfigError("cable length list size does not match robot count");
  }
  for (double l : length_) {
    if (!(l > 0.0)) throw ConfigError("cable lengths must be positive");
  }

  p_.setZero(6, 3 * n_);
  for (int k = 0; k < n_; ++k) {
    p_.block<3, 3>(0, 3 * k) = Mat3::Identity();
    p_.block<3, 3>(3, 3 * k) = hat(rho_[k]);
  }

  Eigen::JacobiSVD<MatX> svd(p_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VecX& sv = svd.singularValues();
  const double rank_tol = 1e-10 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tol) ++rank;
  }
  if (rank < 6) {
    throw ConfigError(
        "attachment geometry is degenerate (distribution matrix rank " +
        std::to_string(rank) + " < 6); attachment points are collinear or "
        "otherwise leave payload moments unreachable");
  }

  // Min-norm pseudo-inverse and orthonormal null basis from the same SVD.
  MatX sinv = MatX::Zero(3 * n_, 6);
  for (int i = 0; i < 6; ++i) sinv(i, i) = 1.0 / sv(i);
  p_pinv_ = svd.matrixV() * sinv * svd.matrixU().transpose();
  null_ = svd.matrixV().rightCols(3 * n_ - 6);
}

AllocationModel AllocationModel::with_rotated_null_basis(
    const MatX& rot) const {
  if (rot.rows() != null_dimension() || rot.cols() != null_dimension()) {
    throw ConfigError("null basis rotation has wrong dimensions");
  }
  if ((rot.transpose() * rot - MatX::Identity(rot.rows(), rot.cols()))
          .cwiseAbs()
          .maxCoeff() > 1e-9) {
    throw ConfigError("null basis rotation must be orthogonal");
  }
  AllocationModel m(*this);
  m.null_ = null_ * rot;
  return m;
}

TensionSet distribute(const Vec6& wrench_load, const VecX& lambda,
                      const AllocationModel& model) {
  if (lambda.size() != model.null_dimension()) {
    throw ConfigError("lambda dimension " + std::to_string(lambda.size()) +
                      " != 3n-6 = " + std::to_string(model.null_dimension()));
  }
  return TensionSet::from_stacked(model.pseudo_inverse() * wrench_load +
                                  model.null_basis() * lambda);
}

Vec3 robot_pos_load_frame(const Vec3& mu_k, const Vec3& rho_k, double l_k,
                          double mu_min) {
  const double norm = mu_k.norm();
  if (norm < mu_min) {
    throw PhysicsError(
        "cable direction undefined: tension norm " + std::to_string(norm) +
        " N below floor " + std::to_string(mu_min) + " N");
  }
  return rho_k + l_k * mu_k / norm;
}

double min_norm_check(const Vec6& wrench_load, const AllocationModel& model) {
  return (model.pseudo_inverse() * wrench_load).norm();
}

}  // namespace cablemanip
