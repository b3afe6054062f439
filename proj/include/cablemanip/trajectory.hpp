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

#ifndef CABLEMANIP_TRAJECTORY_HPP_
#define CABLEMANIP_TRAJECTORY_HPP_

#include <memory>
#include <vector>

#include "cablemanip/payload.hpp"

namespace cablemanip {

struct TrajectorySpec {
  enum class Kind { kHover, kCircle, kRectangle, kWaypoints };
  Kind kind = Kind::kHover;

  // hover
  Vec3 hover_position = Vec3(0.0, 0.0, 0.5);

  // circle: x(t) = (r cos(2 pi t/T), r sin(2 pi t/T), h)
  double radius = 1.0;   // m
  double period = 15.0;  // s
  double height = 0.5;   // m

  // rectangle: loop of length_x by width_y starting at origin
  double length_x = 2.0;  // m
  double width_y = 1.0;   // m
  Vec3 origin = Vec3::Zero();

  // waypoints: open polyline (rectangle reuses the same machinery)
  std::vector<Vec3> waypoints;

  // path traversal profile
  double cruise_speed = 0.25;    // m/s
  double path_accel = 0.125;     // m/s^2 speed ramp
  double corner_radius = 0.2;    // m blend radius

  // takeoff prologue: hold xy, quintic z ramp from origin z to first point z
  bool takeoff = false;
  double takeoff_duration = 3.0;  // s

  // attitude reference (fixed; identity by default)
  UnitQuat attitude;
};

// Analytic payload reference with consistent derivatives. Construction
// precomputes the blended path; evaluation is pure.
class ReferenceTrajectory {
 public:
  explicit ReferenceTrajectory(const TrajectorySpec& spec);
  ReferenceTrajectory(const ReferenceTrajectory&);
  ReferenceTrajectory& operator=(const ReferenceTrajectory&) = delete;
  ~ReferenceTrajectory();

  PayloadReference at(double t) const;

  /// Start of the tracking window: first time the reference moves at cruise
  /// speed (end of takeoff and speed ramp); 0 for hover and circle.
  double cruise_start() const;

  /// Time at which the reference comes to rest again (path end); +inf for
  /// hover and circle.
  double end_time() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper for one-off evaluation.
PayloadReference generate_reference(const TrajectorySpec& spec, double t);

}  // namespace cablemanip

#endif  // CABLEMANIP_TRAJECTORY_HPP_
