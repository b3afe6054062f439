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

#ifndef CABLEMANIP_SIM_RUNNER_HPP_
#define CABLEMANIP_SIM_RUNNER_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "cablemanip/nmpc.hpp"
#include "cablemanip/scenario.hpp"

namespace cablemanip {

struct SimRecord {
  double t = 0.0;
  PayloadState payload;
  PayloadReference ref;
  std::vector<Vec3> tension;    // physical cable tensions on the payload, inertial
  std::vector<Vec3> cable_dir;  // xi_k
  std::vector<Vec3> robot_pos;
  std::vector<UnitQuat> robot_att;
  std::vector<double> pair_distance;  // (k, j) with k < j, lexicographic
  SolveDiagnostics nmpc;              // most recent solve
};

struct SimLog {
  std::string scenario_name;
  int robot_count = 0;
  double sample_period = 0.0;
  double window_start = 0.0;  // RMSE tracking window
  double window_end = 0.0;
  std::vector<SimRecord> records;

  void write_csv(std::ostream& out) const;
  static SimLog read_csv(std::istream& in);
};

struct RunSummary {
  std::string scenario_name;
  Vec3 rmse = Vec3::Zero();
  double max_position_error = 0.0;
  double min_separation = 0.0;
  double max_tension = 0.0;
  double window_start = 0.0, window_end = 0.0;
  int solves = 0;
  double mean_solve_ms = 0.0, max_solve_ms = 0.0;
  double mean_sqp_iterations = 0.0;
  double max_kkt_residual = 0.0;
  double max_constraint_violation = 0.0;
  double max_unit_drift = 0.0;

  std::string to_json() const;
};

struct RunResult {
  SimLog log;
  RunSummary summary;
};

/// Closed-loop run: NMPC at its configured rate with RTI warm starts, the
/// geometric robot controllers at the control rate, physics at physics_dt.
/// Deterministic for a fixed scenario.
RunResult run_scenario(const Scenario& scenario);

/// Per-axis RMSE of payload position vs reference over the tracking window.
/// Throws ConfigError on an empty log.
Vec3 compute_rmse(const SimLog& log);

}  // namespace cablemanip

#endif  // CABLEMANIP_SIM_RUNNER_HPP_
