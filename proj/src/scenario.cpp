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

#include "cablemanip/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cablemanip {

namespace {

using Json = nlohmann::ordered_json;

Json vec_to_json(const Eigen::Ref<const VecX>& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VecX json_to_vec(const Json& a) {
  VecX v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

Vec3 json_to_vec3(const Json& a) {
  if (a.size() != 3) throw ConfigError("expected a 3-vector");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

const char* kind_name(TrajectorySpec::Kind k) {
  switch (k) {
    case TrajectorySpec::Kind::kHover: return "hover";
    case TrajectorySpec::Kind::kCircle: return "circle";
    case TrajectorySpec::Kind::kRectangle: return "rectangle";
    default: return "waypoints";
  }
}

TrajectorySpec::Kind kind_from_name(const std::string& s) {
  if (s == "hover") return TrajectorySpec::Kind::kHover;
  if (s == "circle") return TrajectorySpec::Kind::kCircle;
  if (s == "rectangle") return TrajectorySpec::Kind::kRectangle;
  if (s == "waypoints") return TrajectorySpec::Kind::kWaypoints;
  throw ConfigError("unknown trajectory kind '" + s +
                    "' (expected hover|circle|rectangle|waypoints)");
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

std::vector<Vec3> polygon_attachments(int n, double circumradius) {
  std::vector<Vec3> pts(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    pts[k] = Vec3(circumradius * std::cos(a), circumradius * std::sin(a), 0.0);
  }
  return pts;
}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> bad;
  const int n = robot_count();
  if (n < 3) bad.push_back("robot count must be >= 3 (attach_points_m)");
  if (static_cast<int>(cable_lengths_m.size()) != n) {
    bad.push_back("cable_lengths_m size must equal attach_points_m size");
  }
  if (!(payload_mass_kg > 0.0)) bad.push_back("payload mass_kg must be > 0");
  if (!(robot_mass_kg > 0.0)) bad.push_back("robot mass_kg must be > 0");
  for (double l : cable_lengths_m) {
    if (!(l > 0.0)) bad.push_back("cable_lengths_m entries must be > 0");
  }
  if (n >= 3 && static_cast<int>(cable_lengths_m.size()) == n) {
    try {
      AllocationModel model(attach_points_m, cable_lengths_m);
    } catch (const ConfigError& e) {
      bad.push_back(e.what());
    }
    if (weight_lambda.size() != 0 && weight_lambda.size() != 3 * n - 6) {
      bad.push_back("weight_lambda dimension " +
                    std::to_string(weight_lambda.size()) +
                    " violates the null-space dimension 3n-6 = " +
                    std::to_string(3 * n - 6));
    }
    double min_spacing = 1e300, min_len = 1e300;
    for (int k = 0; k < n; ++k) {
      min_len = std::min(min_len, cable_lengths_m[k]);
      for (int j = k + 1; j < n; ++j) {
        min_spacing =
            std::min(min_spacing, (attach_points_m[k] - attach_points_m[j]).norm());
      }
    }
    if (!(min_robot_distance_m < min_spacing + 2.0 * min_len)) {
      bad.push_back("min_robot_distance_m must be < min attachment spacing + "
                    "2*cable length (separation unreachable)");
    }
  }
  if (weight_wrench.size() != 6) bad.push_back("weight_wrench must have 6 entries");
  if (nmpc_horizon < 2) bad.push_back("nmpc horizon_steps must be >= 2");
  if (!(nmpc_dt_s > 0.0)) bad.push_back("nmpc step_s must be > 0");
  if (!(tension_max_n > tension_min_n && tension_min_n > 0.0)) {
    bad.push_back("tension bounds must satisfy tension_max_n > tension_min_n > 0");
  }
  if (nmpc_mode != "rti" && nmpc_mode != "converge") {
    bad.push_back("nmpc mode must be 'rti' or 'converge'");
  }
  if (!(soft_penalty > 0.0)) bad.push_back("soft_penalty must be > 0");
  if (!(duration_s > 0.0)) bad.push_back("sim duration_s must be > 0");
  if (!(physics_dt_s > 0.0)) bad.push_back("physics_dt_s must be > 0");
  for (auto [rate, label] :
       {std::pair{control_rate_hz, "control_rate_hz"},
        std::pair{nmpc_rate_hz, "nmpc_rate_hz"},
        std::pair{log_rate_hz, "log_rate_hz"}}) {
    if (!(rate > 0.0)) {
      bad.push_back(std::string(label) + " must be > 0");
    } else if (!near_integer(1.0 / (rate * physics_dt_s))) {
      bad.push_back(std::string(label) +
                    " must divide the physics rate 1/physics_dt_s");
    }
  }
  if (control_rate_hz < nmpc_rate_hz) {
    bad.push_back("control_rate_hz must be >= nmpc_rate_hz");
  }
  for (const Vec3& g : {gain_attitude, gain_body_rates, gain_cable,
                        gain_cable_rate}) {
    if (g.minCoeff() <= 0.0) {
      bad.push_back("controller gains must be positive");
      break;
    }
  }
  try {
    ReferenceTrajectory traj(trajectory);
  } catch (const ConfigError& e) {
    bad.push_back(e.what());
  }
  return bad;
}

SystemParams Scenario::system_params() const {
  const auto bad = validate();
  if (!bad.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ConfigError(msg);
  }
  PayloadParams payload(payload_mass_kg, payload_inertia_kgm2, gravity_mps2);
  std::vector<RobotParams> robots;
  robots.reserve(robot_count());
  for (int k = 0; k < robot_count(); ++k) {
    robots.emplace_back(robot_mass_kg, robot_inertia_kgm2, cable_lengths_m[k],
                        Mat3(gain_attitude.asDiagonal()),
                        Mat3(gain_body_rates.asDiagonal()),
                        Mat3(gain_cable.asDiagonal()),
                        Mat3(gain_cable_rate.asDiagonal()));
  }
  return SystemParams(std::move(payload), std::move(robots),
                      AllocationModel(attach_points_m, cable_lengths_m));
}

OcpConfig Scenario::ocp_config() const {
  const int n = robot_count();
  OcpConfig cfg;
  cfg.horizon = nmpc_horizon;
  cfg.dt = nmpc_dt_s;
  Vec12 qx;
  qx << weight_position, weight_velocity, weight_attitude,
      weight_angular_velocity;
  cfg.q_state = qx.asDiagonal();
  cfg.q_terminal = terminal_scale * cfg.q_state;
  VecX qu(3 * n);
  qu.head<6>() = weight_wrench;
  if (weight_lambda.size() == 3 * n - 6) {
    qu.tail(3 * n - 6) = weight_lambda;
  } else {
    qu.tail(3 * n - 6).setConstant(10.0);
  }
  cfg.q_input = qu.asDiagonal();
  cfg.min_robot_distance = min_robot_distance_m;
  cfg.obstacles = obstacles;
  cfg.tension_max = tension_max_n;
  cfg.tension_min = tension_min_n;
  cfg.mode = nmpc_mode == "rti" ? SolverMode::kRti : SolverMode::kConverge;
  cfg.max_sqp_iterations = max_sqp_iterations;
  cfg.kkt_tolerance = kkt_tolerance;
  cfg.soft_penalty = soft_penalty;
  cfg.gravity_compensated_wrench = gravity_compensated_wrench;
  return cfg;
}

std::string Scenario::to_json() const {
  Json j;
  j["name"] = name;
  j["payload"] = {
      {"mass_kg", payload_mass_kg},
      {"inertia_kgm2", Json::array()},
      {"gravity_mps2", vec_to_json(gravity_mps2)},
  };
  for (int r = 0; r < 3; ++r) {
    j["payload"]["inertia_kgm2"].push_back(
        vec_to_json(payload_inertia_kgm2.row(r).transpose()));
  }
  Json robots;
  robots["mass_kg"] = robot_mass_kg;
  robots["inertia_kgm2"] = Json::array();
  for (int r = 0; r < 3; ++r) {
    robots["inertia_kgm2"].push_back(
        vec_to_json(robot_inertia_kgm2.row(r).transpose()));
  }
  robots["attach_points_m"] = Json::array();
  for (const Vec3& p : attach_points_m) {
    robots["attach_points_m"].push_back(vec_to_json(p));
  }
  robots["cable_lengths_m"] = Json::array();
  for (double l : cable_lengths_m) robots["cable_lengths_m"].push_back(l);
  j["robots"] = robots;
  j["controller"] = {
      {"gain_attitude", vec_to_json(gain_attitude)},
      {"gain_body_rates", vec_to_json(gain_body_rates)},
      {"gain_cable", vec_to_json(gain_cable)},
      {"gain_cable_rate", vec_to_json(gain_cable_rate)},
      {"cable_filter_cutoff_hz", cable_filter_cutoff_hz},
  };
  Json nmpc;
  nmpc["horizon_steps"] = nmpc_horizon;
  nmpc["step_s"] = nmpc_dt_s;
  nmpc["weight_position"] = vec_to_json(weight_position);
  nmpc["weight_velocity"] = vec_to_json(weight_velocity);
  nmpc["weight_attitude"] = vec_to_json(weight_attitude);
  nmpc["weight_angular_velocity"] = vec_to_json(weight_angular_velocity);
  nmpc["terminal_scale"] = terminal_scale;
  nmpc["weight_wrench"] = vec_to_json(weight_wrench);
  nmpc["weight_lambda"] = vec_to_json(
      weight_lambda.size() ? weight_lambda
                           : VecX(VecX::Constant(
                                 std::max(3 * robot_count() - 6, 0), 10.0)));
  nmpc["min_robot_distance_m"] = min_robot_distance_m;
  nmpc["obstacles"] = Json::array();
  for (const Obstacle& o : obstacles) {
    nmpc["obstacles"].push_back({{"position_m", vec_to_json(o.position)},
                                 {"robot_clearance_m", o.robot_clearance},
                                 {"payload_clearance_m", o.payload_clearance}});
  }
  nmpc["tension_max_n"] = tension_max_n;
  nmpc["tension_min_n"] = tension_min_n;
  nmpc["mode"] = nmpc_mode;
  nmpc["max_sqp_iterations"] = max_sqp_iterations;
  nmpc["kkt_tolerance"] = kkt_tolerance;
  nmpc["soft_penalty"] = soft_penalty;
  nmpc["gravity_compensated_wrench"] = gravity_compensated_wrench;
  j["nmpc"] = nmpc;
  Json traj;
  traj["kind"] = kind_name(trajectory.kind);
  traj["hover_position_m"] = vec_to_json(trajectory.hover_position);
  traj["radius_m"] = trajectory.radius;
  traj["period_s"] = trajectory.period;
  traj["height_m"] = trajectory.height;
  traj["length_x_m"] = trajectory.length_x;
  traj["width_y_m"] = trajectory.width_y;
  traj["origin_m"] = vec_to_json(trajectory.origin);
  traj["waypoints_m"] = Json::array();
  for (const Vec3& w : trajectory.waypoints) {
    traj["waypoints_m"].push_back(vec_to_json(w));
  }
  traj["cruise_speed_mps"] = trajectory.cruise_speed;
  traj["path_accel_mps2"] = trajectory.path_accel;
  traj["corner_radius_m"] = trajectory.corner_radius;
  traj["takeoff"] = trajectory.takeoff;
  traj["takeoff_duration_s"] = trajectory.takeoff_duration;
  traj["attitude_wxyz"] = vec_to_json(trajectory.attitude.wxyz());
  j["trajectory"] = traj;
  j["sim"] = {
      {"duration_s", duration_s},
      {"physics_dt_s", physics_dt_s},
      {"control_rate_hz", control_rate_hz},
      {"nmpc_rate_hz", nmpc_rate_hz},
      {"log_rate_hz", log_rate_hz},
  };
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

Scenario Scenario::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  Scenario s;
  try {
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (j.contains("payload")) {
      const Json& p = j["payload"];
      if (p.contains("mass_kg")) s.payload_mass_kg = p["mass_kg"];
      if (p.contains("inertia_kgm2")) {
        for (int r = 0; r < 3; ++r) {
          s.payload_inertia_kgm2.row(r) =
              json_to_vec3(p["inertia_kgm2"][r]).transpose();
        }
      }
      if (p.contains("inertia_diag_kgm2")) {
        s.payload_inertia_kgm2 =
            json_to_vec3(p["inertia_diag_kgm2"]).asDiagonal();
      }
      if (p.contains("gravity_mps2")) {
        s.gravity_mps2 = json_to_vec3(p["gravity_mps2"]);
      }
    }
    if (j.contains("robots")) {
      const Json& r = j["robots"];
      if (r.contains("mass_kg")) s.robot_mass_kg = r["mass_kg"];
      if (r.contains("inertia_kgm2")) {
        for (int row = 0; row < 3; ++row) {
          s.robot_inertia_kgm2.row(row) =
              json_to_vec3(r["inertia_kgm2"][row]).transpose();
        }
      }
      if (r.contains("inertia_diag_kgm2")) {
        s.robot_inertia_kgm2 = json_to_vec3(r["inertia_diag_kgm2"]).asDiagonal();
      }
      if (r.contains("attach_points_m")) {
        s.attach_points_m.clear();
        for (const Json& p : r["attach_points_m"]) {
          s.attach_points_m.push_back(json_to_vec3(p));
        }
      }
      if (r.contains("cable_lengths_m")) {
        s.cable_lengths_m = r["cable_lengths_m"].get<std::vector<double>>();
      }
    }
    if (j.contains("controller")) {
      const Json& c = j["controller"];
      if (c.contains("gain_attitude")) s.gain_attitude = json_to_vec3(c["gain_attitude"]);
      if (c.contains("gain_body_rates")) s.gain_body_rates = json_to_vec3(c["gain_body_rates"]);
      if (c.contains("gain_cable")) s.gain_cable = json_to_vec3(c["gain_cable"]);
      if (c.contains("gain_cable_rate")) s.gain_cable_rate = json_to_vec3(c["gain_cable_rate"]);
      if (c.contains("cable_filter_cutoff_hz")) {
        s.cable_filter_cutoff_hz = c["cable_filter_cutoff_hz"];
      }
    }
    if (j.contains("nmpc")) {
      const Json& m = j["nmpc"];
      if (m.contains("horizon_steps")) s.nmpc_horizon = m["horizon_steps"];
      if (m.contains("step_s")) s.nmpc_dt_s = m["step_s"];
      if (m.contains("weight_position")) s.weight_position = json_to_vec3(m["weight_position"]);
      if (m.contains("weight_velocity")) s.weight_velocity = json_to_vec3(m["weight_velocity"]);
      if (m.contains("weight_attitude")) s.weight_attitude = json_to_vec3(m["weight_attitude"]);
      if (m.contains("weight_angular_velocity")) {
        s.weight_angular_velocity = json_to_vec3(m["weight_angular_velocity"]);
      }
      if (m.contains("terminal_scale")) s.terminal_scale = m["terminal_scale"];
      if (m.contains("weight_wrench")) s.weight_wrench = json_to_vec(m["weight_wrench"]);
      if (m.contains("weight_lambda")) s.weight_lambda = json_to_vec(m["weight_lambda"]);
      if (m.contains("min_robot_distance_m")) {
        s.min_robot_distance_m = m["min_robot_distance_m"];
      }
      if (m.contains("obstacles")) {
        for (const Json& o : m["obstacles"]) {
          Obstacle obs;
          obs.position = json_to_vec3(o["position_m"]);
          obs.robot_clearance = o["robot_clearance_m"];
          obs.payload_clearance = o["payload_clearance_m"];
          s.obstacles.push_back(obs);
        }
      }
      if (m.contains("tension_max_n")) s.tension_max_n = m["tension_max_n"];
      if (m.contains("tension_min_n")) s.tension_min_n = m["tension_min_n"];
      if (m.contains("mode")) s.nmpc_mode = m["mode"].get<std::string>();
      if (m.contains("max_sqp_iterations")) s.max_sqp_iterations = m["max_sqp_iterations"];
      if (m.contains("kkt_tolerance")) s.kkt_tolerance = m["kkt_tolerance"];
      if (m.contains("soft_penalty")) s.soft_penalty = m["soft_penalty"];
      if (m.contains("gravity_compensated_wrench")) {
        s.gravity_compensated_wrench = m["gravity_compensated_wrench"];
      }
    }
    if (j.contains("trajectory")) {
      const Json& t = j["trajectory"];
      if (t.contains("kind")) {
        s.trajectory.kind = kind_from_name(t["kind"].get<std::string>());
      }
      if (t.contains("hover_position_m")) {
        s.trajectory.hover_position = json_to_vec3(t["hover_position_m"]);
      }
      if (t.contains("radius_m")) s.trajectory.radius = t["radius_m"];
      if (t.contains("period_s")) s.trajectory.period = t["period_s"];
      if (t.contains("height_m")) s.trajectory.height = t["height_m"];
      if (t.contains("length_x_m")) s.trajectory.length_x = t["length_x_m"];
      if (t.contains("width_y_m")) s.trajectory.width_y = t["width_y_m"];
      if (t.contains("origin_m")) s.trajectory.origin = json_to_vec3(t["origin_m"]);
      if (t.contains("waypoints_m")) {
        for (const Json& w : t["waypoints_m"]) {
          s.trajectory.waypoints.push_back(json_to_vec3(w));
        }
      }
      if (t.contains("cruise_speed_mps")) s.trajectory.cruise_speed = t["cruise_speed_mps"];
      if (t.contains("path_accel_mps2")) s.trajectory.path_accel = t["path_accel_mps2"];
      if (t.contains("corner_radius_m")) s.trajectory.corner_radius = t["corner_radius_m"];
      if (t.contains("takeoff")) s.trajectory.takeoff = t["takeoff"];
      if (t.contains("takeoff_duration_s")) {
        s.trajectory.takeoff_duration = t["takeoff_duration_s"];
      }
      if (t.contains("attitude_wxyz")) {
        const VecX q = json_to_vec(t["attitude_wxyz"]);
        if (q.size() != 4) throw ConfigError("attitude_wxyz must have 4 entries");
        s.trajectory.attitude = UnitQuat::from_wxyz(q).normalized().canonical();
      }
    }
    if (j.contains("sim")) {
      const Json& m = j["sim"];
      if (m.contains("duration_s")) s.duration_s = m["duration_s"];
      if (m.contains("physics_dt_s")) s.physics_dt_s = m["physics_dt_s"];
      if (m.contains("control_rate_hz")) s.control_rate_hz = m["control_rate_hz"];
      if (m.contains("nmpc_rate_hz")) s.nmpc_rate_hz = m["nmpc_rate_hz"];
      if (m.contains("log_rate_hz")) s.log_rate_hz = m["log_rate_hz"];
    }
    if (j.contains("seed")) s.seed = j["seed"];
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = Scenario::from_json(buf.str());
  const auto bad = s.validate();
  if (!bad.empty()) {
    std::string msg = "invalid scenario '" + path + "':";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ConfigError(msg);
  }
  return s;
}

}  // namespace cablemanip
