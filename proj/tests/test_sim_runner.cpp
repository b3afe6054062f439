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

#include <cmath>
#include <functional>
#include <sstream>

#include <doctest.h>

namespace cablemanip {
namespace {

Scenario hover_scenario(double duration = 1.0) {
  Scenario s;
  s.name = "hover_test";
  s.attach_points_m = polygon_attachments(3, 0.306);
  s.cable_lengths_m = {1.0, 1.0, 1.0};
  s.min_robot_distance_m = 0.4;
  s.trajectory.kind = TrajectorySpec::Kind::kHover;
  s.trajectory.hover_position = Vec3(0, 0, 0.5);
  s.duration_s = duration;
  return s;
}

SimLog synthetic_log(int samples, double dt,
                     const std::function<Vec3(double)>& error) {
  SimLog log;
  log.scenario_name = "synthetic";
  log.robot_count = 3;
  log.sample_period = dt;
  log.window_start = 0.0;
  log.window_end = samples * dt;
  for (int i = 0; i < samples; ++i) {
    SimRecord r;
    r.t = i * dt;
    r.ref.position = Vec3(0.1 * i, 0, 0.5);
    r.payload.position = r.ref.position + error(r.t);
    r.tension.assign(3, Vec3(0, 0, 0.76));
    r.cable_dir.assign(3, Vec3(0, 0, -1));
    r.robot_pos.assign(3, Vec3::Zero());
    r.robot_att.assign(3, UnitQuat::identity());
    r.pair_distance = {0.5, 0.5, 0.5};
    log.records.push_back(r);
  }
  return log;
}

TEST_CASE("compute_rmse") {
  SUBCASE("zero error") {
    const SimLog log = synthetic_log(100, 0.01, [](double) { return Vec3::Zero(); });
    CHECK(compute_rmse(log).norm() == 0.0);
  }
  SUBCASE("constant offset") {
    const SimLog log =
        synthetic_log(100, 0.01, [](double) { return Vec3(0.05, 0, 0); });
    const Vec3 rmse = compute_rmse(log);
    CHECK(rmse.x() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(rmse.y() == 0.0);
  }
  SUBCASE("sinusoidal error of amplitude A gives A/sqrt(2)") {
    // Integer number of periods sampled uniformly: exact discrete RMS.
    const double amp = 0.08;
    const int samples = 400;
    const double period = 1.0, dt = period / 100.0;
    const SimLog log = synthetic_log(samples, dt, [&](double t) {
      return Vec3(0, amp * std::sin(2.0 * M_PI * t / period), 0);
    });
    const Vec3 rmse = compute_rmse(log);
    CHECK(std::abs(rmse.y() - amp / std::sqrt(2.0)) < 1e-6);
  }
  SUBCASE("empty log is an error") {
    SimLog log;
    CHECK_THROWS_AS(compute_rmse(log), ConfigError);
  }
}

TEST_CASE("log CSV round trip") {
  const SimLog log =
      synthetic_log(25, 0.01, [](double t) { return Vec3(0.01 * t, 0, 0); });
  std::ostringstream out;
  log.write_csv(out);
  std::istringstream in(out.str());
  const SimLog back = SimLog::read_csv(in);
  REQUIRE(back.records.size() == log.records.size());
  CHECK(back.robot_count == 3);
  CHECK(back.window_end == log.window_end);
  for (size_t i = 0; i < log.records.size(); ++i) {
    CHECK(back.records[i].t == log.records[i].t);
    CHECK((back.records[i].payload.position - log.records[i].payload.position)
              .norm() == 0.0);
    CHECK((back.records[i].ref.position - log.records[i].ref.position).norm() ==
          0.0);
  }
  // Re-serialization is byte-identical (deterministic formatting).
  std::ostringstream again;
  back.write_csv(again);
  CHECK(out.str() == again.str());
}

TEST_CASE("short hover run is stable and deterministic") {
  const Scenario s = hover_scenario(1.0);
  REQUIRE(s.validate().empty());
  const RunResult a = run_scenario(s);
  CHECK(a.summary.rmse.norm() < 0.02);
  CHECK(a.summary.max_tension < s.tension_max_n);
  CHECK(a.summary.max_unit_drift < 1e-6);
  CHECK(a.summary.solves == 20 + 0);  // 20 Hz for 1 s

  const RunResult b = run_scenario(s);
  std::ostringstream csv_a, csv_b;
  a.log.write_csv(csv_a);
  b.log.write_csv(csv_b);
  CHECK(csv_a.str() == csv_b.str());

  // Tension commands track the even hover split.
  const SimRecord& last = a.log.records.back();
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(last.tension[k].norm() - 0.232 * 9.81 / 3.0) < 0.01);
  }
}

TEST_CASE("run summary serializes") {
  RunSummary sum;
  sum.scenario_name = "x";
  sum.rmse = Vec3(0.01, 0.02, 0.03);
  const std::string j = sum.to_json();
  CHECK(j.find("\"rmse_m\"") != std::string::npos);
  CHECK(j.find("\"scenario\": \"x\"") != std::string::npos);
}

}  // namespace
}  // namespace cablemanip
