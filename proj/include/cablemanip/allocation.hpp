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

#ifndef CABLEMANIP_ALLOCATION_HPP_
#define CABLEMANIP_ALLOCATION_HPP_

#include <vector>

#include "cablemanip/geometry.hpp"

namespace cablemanip {

/// Per-cable tension vectors expressed in the payload frame.
struct TensionSet {
  std::vector<Vec3> mu;

  VecX stacked() const {
    VecX v(3 * mu.size());
    for (size_t k = 0; k < mu.size(); ++k) v.segment<3>(3 * k) = mu[k];
    return v;
  }

  static TensionSet from_stacked(const VecX& v) {
    TensionSet t;
    t.mu.resize(v.size() / 3);
    for (size_t k = 0; k < t.mu.size(); ++k) t.mu[k] = v.segment<3>(3 * k);
    return t;
  }
};

// Cable-tension distribution geometry. P maps stacked payload-frame tensions
// to the payload wrench; P_pinv and the orthonormal null basis N are fixed by
// the attachment layout and computed once at construction.
class AllocationModel {
 public:
  /// Builds the model from attachment points (payload frame) and cable
  /// lengths. Throws ConfigError when n < 3, sizes mismatch, or the
  /// attachment geometry leaves P rank deficient (e.g. collinear points).
  AllocationModel(std::vector<Vec3> attach_points,
                  std::vector<double> cable_lengths);

  int robot_count() const { return n_; }
  int null_dimension() const { return 3 * n_ - 6; }
  const std::vector<Vec3>& attach_points() const { return rho_; }
  const std::vector<double>& cable_lengths() const { return length_; }
  const MatX& distribution() const { return p_; }        // 6 x 3n
  const MatX& pseudo_inverse() const { return p_pinv_; } // 3n x 6
  const MatX& null_basis() const { return null_; }       // 3n x (3n-6)

  /// Test hook: returns a copy whose null basis is N * rot for an orthogonal
  /// rot; downstream logic must be invariant to this choice.
  AllocationModel with_rotated_null_basis(const MatX& rot) const;

 private:
  int n_;
  std::vector<Vec3> rho_;
  std::vector<double> length_;
  MatX p_, p_pinv_, null_;
};

/// Tension distribution mu = P_pinv * W_load + N * Lambda (payload frame).
TensionSet distribute(const Vec6& wrench_load, const VecX& lambda,
                      const AllocationModel& model);

/// Robot position in the payload frame: rho + l * mu/|mu|. Throws
/// PhysicsError when |mu| < mu_min (cable direction undefined).
Vec3 robot_pos_load_frame(const Vec3& mu_k, const Vec3& rho_k, double l_k,
                          double mu_min = 0.1);

/// Norm of the minimum-norm tension solution P_pinv * W_load.
double min_norm_check(const Vec6& wrench_load, const AllocationModel& model);

}  // namespace cablemanip

#endif  // CABLEMANIP_ALLOCATION_HPP_
