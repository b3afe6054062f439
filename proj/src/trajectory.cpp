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

#include "cablemanip/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cablemanip {

namespace {

struct Segment {
  enum class Type { kLine, kArc };
  Type type = Type::kLine;
  double s0 = 0.0;
  double len = 0.0;
  // line
  Vec3 p0 = Vec3::Zero();
  Vec3 dir = Vec3::UnitX();
  // arc: pos(theta) = center + r (e1 sin(theta) - e2 cos(theta))
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY();

  Vec3 pos(double s) const {
    if (type == Type::kLine) return p0 + (s - s0) * dir;
    const double th = (s - s0) / radius;
    return center + radius * (e1 * std::sin(th) - e2 * std::cos(th));
  }
  Vec3 tangent(double s) const {
    if (type == Type::kLine) return dir;
    const double th = (s - s0) / radius;
    return e1 * std::cos(th) + e2 * std::sin(th);
  }
  Vec3 dtangent_ds(double s) const {
    if (type == Type::kLine) return Vec3::Zero();
    const double th = (s - s0) / radius;
    return (-e1 * std::sin(th) + e2 * std::cos(th)) / radius;
  }
};

// Trapezoidal (or triangular) speed profile over a path of length total.
struct SpeedProfile {
  double accel = 0.0, v_cruise = 0.0;
  double t_ramp = 0.0, t_cruise = 0.0, total_len = 0.0;

  SpeedProfile() = default;
  SpeedProfile(double length, double cruise, double a) : accel(a) {
    total_len = length;
    const double d_ramp = 0.5 * cruise * cruise / a;
    if (length < 2.0 * d_ramp) {
      v_cruise = std::sqrt(a * length);
      t_ramp = v_cruise / a;
      t_cruise = 0.0;
    } else {
      v_cruise = cruise;
      t_ramp = cruise / a;
      t_cruise = (length - 2.0 * d_ramp) / cruise;
    }
  }

  double duration() const { return 2.0 * t_ramp + t_cruise; }

  void eval(double t, double* s, double* v, double* a) const {
    if (t <= 0.0) {
      *s = 0.0; *v = 0.0; *a = (t == 0.0) ? accel : 0.0;
      if (t < 0.0) *a = 0.0;
      return;
    }
    if (t < t_ramp) {
      *s = 0.5 * accel * t * t;
      *v = accel * t;
      *a = accel;
    } else if (t < t_ramp + t_cruise) {
      const double tc = t - t_ramp;
      *s = 0.5 * accel * t_ramp * t_ramp + v_cruise * tc;
      *v = v_cruise;
      *a = 0.0;
    } else if (t < duration()) {
      const double td = duration() - t;
      *s = total_len - 0.5 * accel * td * td;
      *v = accel * td;
      *a = -accel;
    } else {
      *s = total_len;
      *v = 0.0;
      *a = 0.0;
    }
  }
};

}  // namespace

struct ReferenceTrajectory::Impl {
  TrajectorySpec spec;
  std::vector<Segment> segments;
  SpeedProfile profile;
  double takeoff_time = 0.0;
  Vec3 ground_point = Vec3::Zero();
  Vec3 path_start = Vec3::Zero();

  void build_path(const std::vector<Vec3>& pts, double corner_radius);
  PayloadReference eval(double t) const;
};

void ReferenceTrajectory::Impl::build_path(const std::vector<Vec3>& pts,
                                           double corner_radius) {
  if (pts.size() < 2) {
    throw ConfigError("path needs at least two waypoints");
  }
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if ((pts[i + 1] - pts[i]).norm() < 1e-9) {
      throw ConfigError("consecutive waypoints coincide");
    }
  }
  path_start = pts.front();

  double s = 0.0;
  Vec3 cursor = pts.front();
  const auto push_line = [&](const Vec3& to) {
    const double len = (to - cursor).norm();
    if (len < 1e-12) return;
    Segment seg;
    seg.type = Segment::Type::kLine;
    seg.s0 = s;
    seg.len = len;
    seg.p0 = cursor;
    seg.dir = (to - cursor) / len;
    segments.push_back(seg);
    s += len;
    cursor = to;
  };

  for (size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec3 t1 = (pts[i] - pts[i - 1]).normalized();
    const Vec3 t2 = (pts[i + 1] - pts[i]).normalized();
    const double cosg = std::clamp(t1.dot(t2), -1.0, 1.0);
    const double gamma = std::acos(cosg);
    if (gamma < 1e-9 || corner_radius <= 0.0) {
      push_line(pts[i]);
      continue;
    }
    if (gamma > M_PI - 1e-6) {
      throw ConfigError("path reverses direction at a waypoint; cannot blend");
    }
    double trim = corner_radius * std::tan(0.5 * gamma);
    trim = std::min({trim, 0.5 * (pts[i] - pts[i - 1]).norm(),
                     0.5 * (pts[i + 1] - pts[i]).norm()});
    const double rb = trim / std::tan(0.5 * gamma);
    const Vec3 p_in = pts[i] - trim * t1;
    const Vec3 p_out = pts[i] + trim * t2;
    push_line(p_in);
    Segment arc;
    arc.type = Segment::Type::kArc;
    arc.s0 = s;
    arc.len = rb * gamma;
    arc.radius = rb;
    arc.e1 = t1;
    arc.e2 = (t2 - cosg * t1).normalized();
    arc.center = p_in + rb * arc.e2;
    segments.push_back(arc);
    s += arc.len;
    cursor = p_out;
  }
  push_line(pts.back());

  profile = SpeedProfile(s, spec.cruise_speed, spec.path_accel);
}

PayloadReference ReferenceTrajectory::Impl::eval(double t) const {
  PayloadReference ref;
  ref.attitude = spec.attitude;

  if (spec.kind == TrajectorySpec::Kind::kHover) {
    ref.position = spec.hover_position;
    return ref;
  }
  if (spec.kind == TrajectorySpec::Kind::kCircle) {
    const double w = 2.0 * M_PI / spec.period;
    const double c = std::cos(w * t), sn = std::sin(w * t);
    ref.position = spec.origin +
                   Vec3(spec.radius * c, spec.radius * sn, spec.height);
    ref.velocity = Vec3(-spec.radius * w * sn, spec.radius * w * c, 0.0);
    ref.acceleration =
        Vec3(-spec.radius * w * w * c, -spec.radius * w * w * sn, 0.0);
    return ref;
  }

  // Path kinds; optional takeoff prologue.
  if (t < takeoff_time) {
    const double tau = t / takeoff_time;
    // Quintic 0 -> 1 with zero boundary velocity/acceleration.
    const double sig = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
    const double dsig =
        (30.0 * tau * tau * (1.0 - tau) * (1.0 - tau)) / takeoff_time;
    const double ddsig = (60.0 * tau * (1.0 - 3.0 * tau + 2.0 * tau * tau)) /
                         (takeoff_time * takeoff_time);
    const Vec3 dir = path_start - ground_point;
    ref.position = ground_point + sig * dir;
    ref.velocity = dsig * dir;
    ref.acceleration = ddsig * dir;
    return ref;
  }

  double s, v, a;
  profile.eval(t - takeoff_time, &s, &v, &a);
  // Locate the segment containing s.
  const Segment* seg = &segments.back();
  for (const Segment& candidate : segments) {
    if (s <= candidate.s0 + candidate.len) {
      seg = &candidate;
      break;
    }
  }
  s = std::min(s, seg->s0 + seg->len);
  const Vec3 tangent = seg->tangent(s);
  ref.position = seg->pos(s);
  ref.velocity = v * tangent;
  ref.acceleration = a * tangent + v * v * seg->dtangent_ds(s);
  return ref;
}

ReferenceTrajectory::ReferenceTrajectory(const TrajectorySpec& spec)
    : impl_(std::make_unique<Impl>()) {
  impl_->spec = spec;
  switch (spec.kind) {
    case TrajectorySpec::Kind::kHover:
      break;
    case TrajectorySpec::Kind::kCircle:
      if (!(spec.period > 0.0) || !(spec.radius >= 0.0)) {
        throw ConfigError("circle trajectory needs period > 0 and radius >= 0");
      }
      break;
    case TrajectorySpec::Kind::kRectangle: {
      if (!(spec.length_x > 0.0) || !(spec.width_y > 0.0)) {
        throw ConfigError("rectangle sides must be positive");
      }
      if (!(spec.cruise_speed > 0.0) || !(spec.path_accel > 0.0)) {
        throw ConfigError("path profile needs positive cruise speed and accel");
      }
      const Vec3 o = spec.origin;
      const Vec3 up(0.0, 0.0, spec.height);
      const std::vector<Vec3> pts = {
          o + up,
          o + up + Vec3(spec.length_x, 0.0, 0.0),
          o + up + Vec3(spec.length_x, spec.width_y, 0.0),
          o + up + Vec3(0.0, spec.width_y, 0.0),
          o + up,
      };
      impl_->build_path(pts, spec.corner_radius);
      impl_->ground_point = o;
      impl_->takeoff_time = spec.takeoff ? spec.takeoff_duration : 0.0;
      break;
    }
    case TrajectorySpec::Kind::kWaypoints: {
      if (!(spec.cruise_speed > 0.0) || !(spec.path_accel > 0.0)) {
        throw ConfigError("path profile needs positive cruise speed and accel");
      }
      impl_->build_path(spec.waypoints, spec.corner_radius);
      impl_->ground_point = spec.origin;
      impl_->takeoff_time = spec.takeoff ? spec.takeoff_duration : 0.0;
      break;
    }
  }
  if (impl_->takeoff_time > 0.0 &&
      (impl_->path_start - impl_->ground_point).norm() < 1e-9) {
    impl_->takeoff_time = 0.0;  // nothing to climb
  }
}

ReferenceTrajectory::ReferenceTrajectory(const ReferenceTrajectory& other)
    : impl_(std::make_unique<Impl>(*other.impl_)) {}

ReferenceTrajectory::~ReferenceTrajectory() = default;

PayloadReference ReferenceTrajectory::at(double t) const {
  if (t < 0.0) throw ConfigError("reference time must be nonnegative");
  return impl_->eval(t);
}

double ReferenceTrajectory::cruise_start() const {
  switch (impl_->spec.kind) {
    case TrajectorySpec::Kind::kHover:
    case TrajectorySpec::Kind::kCircle:
      return 0.0;
    default:
      return impl_->takeoff_time + impl_->profile.t_ramp;
  }
}

double ReferenceTrajectory::end_time() const {
  switch (impl_->spec.kind) {
    case TrajectorySpec::Kind::kHover:
    case TrajectorySpec::Kind::kCircle:
      return std::numeric_limits<double>::infinity();
    default:
      return impl_->takeoff_time + impl_->profile.duration();
  }
}

PayloadReference generate_reference(const TrajectorySpec& spec, double t) {
  return ReferenceTrajectory(spec).at(t);
}

}  // namespace cablemanip
