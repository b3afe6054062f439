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

#include "cablemanip/sim_runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cablemanip {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void append_vec(std::string* line, const Eigen::Ref<const VecX>& v) {
  for (int i = 0; i < v.size(); ++i) {
    *line += ',';
    *line += fmt(v(i));
  }
}

}  // namespace

void SimLog::write_csv(std::ostream& out) const {
  out << "# scenario=" << scenario_name << " robots=" << robot_count
      << " sample_period=" << fmt(sample_period)
      << " window_start=" << fmt(window_start)
      << " window_end=" << fmt(window_end) << "\n";
  std::string header = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz";
  header += ",ref_px,ref_py,ref_pz,ref_qw,ref_qx,ref_qy,ref_qz";
  header += ",ref_vx,ref_vy,ref_vz,ref_wx,ref_wy,ref_wz";
  for (int k = 0; k < robot_count; ++k) {
    const std::string i = std::to_string(k);
    header += ",mu" + i + "_x,mu" + i + "_y,mu" + i + "_z";
    header += ",xi" + i + "_x,xi" + i + "_y,xi" + i + "_z";
    header += ",rob" + i + "_px,rob" + i + "_py,rob" + i + "_pz";
    header += ",rob" + i + "_qw,rob" + i + "_qx,rob" + i + "_qy,rob" + i + "_qz";
  }
  for (int k = 0; k < robot_count; ++k) {
    for (int j = k + 1; j < robot_count; ++j) {
      header += ",dist_" + std::to_string(k) + "_" + std::to_string(j);
    }
  }
  header += ",nmpc_kkt,nmpc_sqp_iters,nmpc_qp_iters,nmpc_violation,nmpc_cost";
  out << header << "\n";

  for (const SimRecord& r : records) {
    std::string line = fmt(r.t);
    append_vec(&line, r.payload.position);
    append_vec(&line, r.payload.attitude.wxyz());
    append_vec(&line, r.payload.velocity);
    append_vec(&line, r.payload.angular_velocity);
    append_vec(&line, r.ref.position);
    append_vec(&line, r.ref.attitude.wxyz());
    append_vec(&line, r.ref.velocity);
    append_vec(&line, r.ref.angular_velocity);
    for (int k = 0; k < robot_count; ++k) {
      append_vec(&line, r.tension[k]);
      append_vec(&line, r.cable_dir[k]);
      append_vec(&line, r.robot_pos[k]);
      append_vec(&line, r.robot_att[k].wxyz());
    }
    for (double d : r.pair_distance) {
      line += ',';
      line += fmt(d);
    }
    line += ',' + fmt(r.nmpc.kkt_residual);
    line += ',' + std::to_string(r.nmpc.sqp_iterations);
    line += ',' + std::to_string(r.nmpc.qp_iterations);
    line += ',' + fmt(r.nmpc.max_constraint_violation);
    line += ',' + fmt(r.nmpc.cost);
    out << line << "\n";
  }
}

SimLog SimLog::read_csv(std::istream& in) {
  SimLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# scenario=", 0) != 0) {
    throw ConfigError("log CSV missing metadata line");
  }
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "scenario") log.scenario_name = val;
      else if (key == "robots") log.robot_count = std::stoi(val);
      else if (key == "sample_period") log.sample_period = std::stod(val);
      else if (key == "window_start") log.window_start = std::stod(val);
      else if (key == "window_end") log.window_end = std::stod(val);
    }
  }
  if (!std::getline(in, line)) throw ConfigError("log CSV missing header");
  std::map<std::string, int> col;
  {
    std::istringstream hs(line);
    std::string name;
    int idx = 0;
    while (std::getline(hs, name, ',')) col[name] = idx++;
  }
  const auto need = [&](const std::string& name) {
    const auto it = col.find(name);
    if (it == col.end()) throw ConfigError("log CSV missing column " + name);
    return it->second;
  };

  const int n = log.robot_count;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.clear();
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    SimRecord r;
    const auto get3 = [&](const std::string& base) {
      return Vec3(vals[need(base + "x")], vals[need(base + "y")],
                  vals[need(base + "z")]);
    };
    r.t = vals[need("t")];
    r.payload.position = get3("p");
    r.payload.attitude = UnitQuat(vals[need("qw")], vals[need("qx")],
                                  vals[need("qy")], vals[need("qz")]);
    r.payload.velocity = get3("v");
    r.payload.angular_velocity = get3("w");
    r.ref.position = get3("ref_p");
    r.ref.attitude = UnitQuat(vals[need("ref_qw")], vals[need("ref_qx")],
                              vals[need("ref_qy")], vals[need("ref_qz")]);
    r.ref.velocity = get3("ref_v");
    r.ref.angular_velocity = get3("ref_w");
    r.tension.resize(n);
    r.cable_dir.resize(n);
    r.robot_pos.resize(n);
    r.robot_att.resize(n);
    for (int k = 0; k < n; ++k) {
      const std::string i = std::to_string(k);
      r.tension[k] = get3("mu" + i + "_");
      r.cable_dir[k] = get3("xi" + i + "_");
      r.robot_pos[k] = get3("rob" + i + "_p");
      r.robot_att[k] =
          UnitQuat(vals[need("rob" + i + "_qw")], vals[need("rob" + i + "_qx")],
                   vals[need("rob" + i + "_qy")], vals[need("rob" + i + "_qz")]);
    }
    for (int k = 0; k < n; ++k) {
      for (int j = k + 1; j < n; ++j) {
        r.pair_distance.push_back(
            vals[need("dist_" + std::to_string(k) + "_" + std::to_string(j))]);
      }
    }
    r.nmpc.kkt_residual = vals[need("nmpc_kkt")];
    r.nmpc.sqp_iterations = static_cast<int>(vals[need("nmpc_sqp_iters")]);
    r.nmpc.qp_iterations = static_cast<int>(vals[need("nmpc_qp_iters")]);
    r.nmpc.max_constraint_violation = vals[need("nmpc_violation")];
    r.nmpc.cost = vals[need("nmpc_cost")];
    log.records.push_back(std::move(r));
  }
  return log;
}

std::string RunSummary::to_json() const {
  char buf[1024];
  std::snprintf(
      buf, sizeof(buf),
      "{\n"
      "  \"scenario\": \"%s\",\n"
      "  \"rmse_m\": [%.6g, %.6g, %.6g],\n"
      "  \"max_position_error_m\": %.6g,\n"
      "  \"min_separation_m\": %.6g,\n"
      "  \"max_tension_n\": %.6g,\n"
      "  \"window_s\": [%.6g, %.6g],\n"
      "  \"solves\": %d,\n"
      "  \"mean_solve_ms\": %.6g,\n"
      "  \"max_solve_ms\": %.6g,\n"
      "  \"mean_sqp_iterations\": %.6g,\n"
      "  \"max_kkt_residual\": %.6g,\n"
      "  \"max_constraint_violation\": %.6g,\n"
      "  \"max_unit_drift\": %.6g\n"
      "}\n",
      scenario_name.c_str(), rmse.x(), rmse.y(), rmse.z(), max_position_error,
      min_separation, max_tension, window_start, window_end, solves,
      mean_solve_ms, max_solve_ms, mean_sqp_iterations, max_kkt_residual,
      max_constraint_violation, max_unit_drift);
  return buf;
}

Vec3 compute_rmse(const SimLog& log) {
  if (log.records.empty()) throw ConfigError("empty log");
  Vec3 acc = Vec3::Zero();
  int count = 0;
  for (const SimRecord& r : log.records) {
    if (r.t < log.window_start || r.t > log.window_end) continue;
    const Vec3 e = r.payload.position - r.ref.position;
    acc += e.cwiseProduct(e);
    ++count;
  }
  if (count == 0) throw ConfigError("no samples inside the tracking window");
  return (acc / count).cwiseSqrt();
}

RunResult run_scenario(const Scenario& scenario) {
  const SystemParams sys = scenario.system_params();
  const OcpConfig cfg = scenario.ocp_config();
  const ReferenceTrajectory traj(scenario.trajectory);
  const int n = sys.robot_count();

  PayloadNmpc nmpc(sys.payload, sys.allocation, cfg);

  // Initial world on the reference with vertical cables at rest.
  WorldState world;
  const PayloadReference ref0 = traj.at(0.0);
  world.payload.position = ref0.position;
  world.payload.velocity = ref0.velocity;
  world.payload.attitude = ref0.attitude;
  world.payload.angular_velocity = ref0.angular_velocity;
  world.robots.assign(n, CableRobotState{});

  const double dt = scenario.physics_dt_s;
  const long n_steps = std::lround(scenario.duration_s / dt);
  const long control_every =
      std::lround(1.0 / (scenario.control_rate_hz * dt));
  const long nmpc_every = std::lround(1.0 / (scenario.nmpc_rate_hz * dt));
  const long log_every = std::lround(1.0 / (scenario.log_rate_hz * dt));
  const double control_dt = control_every * dt;

  std::vector<CableCommandFilter> filters(
      n, CableCommandFilter(scenario.cable_filter_cutoff_hz,
                            scenario.tension_min_n));
  std::vector<Vec3> mu_des(n, Vec3::Zero());
  Vec3 moment_cmd = Vec3::Zero();
  std::vector<RobotCommand> cmd(n);
  OcpSolution warm;
  bool have_warm = false;
  SolveDiagnostics last_diag;

  RunResult out;
  SimLog& log = out.log;
  log.scenario_name = scenario.name;
  log.robot_count = n;
  log.sample_period = log_every * dt;
  log.window_start = traj.cruise_start();
  log.window_end = scenario.duration_s;

  RunSummary& sum = out.summary;
  sum.scenario_name = scenario.name;
  sum.window_start = log.window_start;
  sum.window_end = log.window_end;
  sum.min_separation = 1e300;
  double solve_ms_acc = 0.0, sqp_acc = 0.0;
  StepStats stats;

  const auto log_record = [&](double t) {
    SimRecord r;
    r.t = t;
    r.payload = world.payload;
    r.ref = traj.at(t);
    std::vector<Vec3> forces(n);
    for (int k = 0; k < n; ++k) {
      forces[k] = cmd[k].thrust * quat_to_rot(world.robots[k].attitude).col(2);
    }
    const CoupledAccel acc = coupled_accelerations(world, forces, sys);
    r.tension = acc.tension;
    r.cable_dir.resize(n);
    r.robot_pos.resize(n);
    r.robot_att.resize(n);
    for (int k = 0; k < n; ++k) {
      r.cable_dir[k] = world.robots[k].xi;
      r.robot_pos[k] = world.robot_position(k, sys);
      r.robot_att[k] = world.robots[k].attitude;
    }
    for (int k = 0; k < n; ++k) {
      for (int j = k + 1; j < n; ++j) {
        const double d = (r.robot_pos[k] - r.robot_pos[j]).norm();
        r.pair_distance.push_back(d);
        sum.min_separation = std::min(sum.min_separation, d);
      }
    }
    for (int k = 0; k < n; ++k) {
      sum.max_tension = std::max(sum.max_tension, r.tension[k].norm());
    }
    if (t >= log.window_start) {
      sum.max_position_error =
          std::max(sum.max_position_error,
                   (r.payload.position - r.ref.position).norm());
    }
    r.nmpc = last_diag;
    log.records.push_back(std::move(r));
  };

  for (long i = 0; i < n_steps; ++i) {
    const double t = i * dt;

    if (i % nmpc_every == 0) {
      std::vector<PayloadReference> refs(cfg.horizon + 1);
      for (int j = 0; j <= cfg.horizon; ++j) {
        refs[j] = traj.at(t + j * cfg.dt);
      }
      if (!have_warm && cfg.mode == SolverMode::kRti) {
        // Settle the first horizon with a converged solve.
        nmpc.set_mode(SolverMode::kConverge);
        warm = nmpc.solve(world.payload, refs, nullptr);
        nmpc.set_mode(SolverMode::kRti);
        have_warm = true;
      }
      const OcpSolution sol =
          nmpc.solve(world.payload, refs, have_warm ? &warm : nullptr);
      last_diag = sol.diagnostics;
      have_warm = true;
      const Mat3 r_load = quat_to_rot(world.payload.attitude);
      for (int k = 0; k < n; ++k) {
        mu_des[k] = r_load * sol.tensions[0].mu[k];
      }
      moment_cmd = sol.inputs[0].moment;
      warm = PayloadNmpc::warm_start_shift(sol);
      ++sum.solves;
      solve_ms_acc += 1e3 * sol.diagnostics.solve_time_s;
      sum.max_solve_ms =
          std::max(sum.max_solve_ms, 1e3 * sol.diagnostics.solve_time_s);
      sqp_acc += sol.diagnostics.sqp_iterations;
      sum.max_kkt_residual =
          std::max(sum.max_kkt_residual, sol.diagnostics.kkt_residual);
      sum.max_constraint_violation =
          std::max(sum.max_constraint_violation,
                   sol.diagnostics.max_constraint_violation);
    }

    if (i % control_every == 0) {
      const PayloadReference ref_now = traj.at(t);
      const Mat3 r_load = quat_to_rot(world.payload.attitude);
      const Vec3& omega_l = world.payload.angular_velocity;
      // Angular-acceleration feedforward from the commanded moment.
      const Vec3 omega_dot_ff =
          sys.payload.inertia_inv *
          (moment_cmd - omega_l.cross(sys.payload.inertia * omega_l));
      for (int k = 0; k < n; ++k) {
        const auto [xi_est, xi_dot_est] = cable_state_from_positions(
            world.attach_point(k, sys), world.robot_position(k, sys),
            world.attach_velocity(k, sys), world.robot_velocity(k, sys),
            sys.robots[k].cable_length);
        CableRobotState est = world.robots[k];
        est.xi = xi_est;
        est.omega = xi_est.cross(xi_dot_est);
        const Vec3 mu_cmd = project_tension(mu_des[k], xi_est);
        const DesiredCableState des = filters[k].step(mu_des[k], control_dt);
        const Vec3 a_c = attachment_accel(
            ref_now.acceleration, sys.payload.gravity, r_load, omega_l,
            omega_dot_ff, sys.allocation.attach_points()[k]);
        const Vec3 u = control_force(est, mu_cmd, des, a_c, sys.robots[k]);
        const Mat3 r_des = desired_attitude(u);
        const auto [thrust, moment] = attitude_thrust_moment(
            u, quat_to_rot(est.attitude), est.body_rates, r_des, Vec3::Zero(),
            Vec3::Zero(), sys.robots[k]);
        cmd[k].thrust = thrust;
        cmd[k].moment = moment;
      }
    }

    if (i % log_every == 0) log_record(t);
    world = step(world, cmd, sys, dt, &stats);
  }
  log_record(n_steps * dt);

  sum.max_unit_drift = stats.max_unit_drift;
  if (sum.solves > 0) {
    sum.mean_solve_ms = solve_ms_acc / sum.solves;
    sum.mean_sqp_iterations = sqp_acc / sum.solves;
  }
  sum.rmse = compute_rmse(log);
  if (sum.min_separation == 1e300) sum.min_separation = 0.0;
  return out;
}

}  // namespace cablemanip
