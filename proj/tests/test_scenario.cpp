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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

namespace cablemanip {
namespace {

Scenario base_scenario() {
  Scenario s;
  s.name = "test";
  s.attach_points_m = polygon_attachments(3, 0.306);
  s.cable_lengths_m = {1.0, 1.0, 1.0};
  s.trajectory.kind = TrajectorySpec::Kind::kHover;
  return s;
}

TEST_CASE("valid scenario passes validation and builds the system") {
  const Scenario s = base_scenario();
  CHECK(s.validate().empty());
  const SystemParams sys = s.system_params();
  CHECK(sys.robot_count() == 3);
  const OcpConfig cfg = s.ocp_config();
  CHECK(cfg.q_input.rows() == 9);
  CHECK(cfg.q_state(0, 0) == 200.0);
  cfg.validate(3);
}

TEST_CASE("serialize -> parse -> serialize is byte-identical") {
  const Scenario s = base_scenario();
  const std::string one = s.to_json();
  const Scenario parsed = Scenario::from_json(one);
  const std::string two = parsed.to_json();
  CHECK(one == two);
  const std::string three = Scenario::from_json(two).to_json();
  CHECK(two == three);
}

TEST_CASE("validation lists every violated invariant") {
  Scenario s = base_scenario();
  s.attach_points_m = {Vec3(0.1, 0, 0), Vec3(-0.1, 0, 0)};  // n = 2
  s.cable_lengths_m = {1.0};                                // size mismatch
  s.payload_mass_kg = -1.0;
  s.nmpc_mode = "weird";
  const auto bad = s.validate();
  CHECK(bad.size() >= 4);
  CHECK_THROWS_AS(s.system_params(), ConfigError);
}

TEST_CASE("lambda dimension invariant is enforced") {
  Scenario s = base_scenario();
  s.weight_lambda = VecX::Ones(4);  // 3n-6 = 3 for n = 3
  const auto bad = s.validate();
  REQUIRE(!bad.empty());
  bool mentions = false;
  for (const auto& b : bad) {
    if (b.find("3n-6") != std::string::npos) mentions = true;
  }
  CHECK(mentions);
}

TEST_CASE("separation reachability invariant") {
  Scenario s = base_scenario();
  s.min_robot_distance_m = 10.0;  // > spacing + 2 l
  CHECK(!s.validate().empty());
}

TEST_CASE("rate divisibility is enforced") {
  Scenario s = base_scenario();
  s.control_rate_hz = 333.0;  // does not divide 1 kHz
  CHECK(!s.validate().empty());
}

TEST_CASE("load_scenario throws with all violations listed") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cablemanip_test";
  fs::create_directories(dir);
  const fs::path file = dir / "bad.json";
  Scenario s = base_scenario();
  s.weight_lambda = VecX::Ones(5);
  s.payload_mass_kg = 0.0;
  {
    std::ofstream out(file);
    out << s.to_json();
  }
  try {
    load_scenario(file.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3n-6") != std::string::npos);
    CHECK(msg.find("mass_kg") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("bundled scenarios load cleanly") {
  namespace fs = std::filesystem;
  const fs::path dir(SCENARIOS_DIR);
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    const Scenario s = load_scenario(entry.path().string());
    CHECK(s.validate().empty());
    ++count;
  }
  CHECK(count >= 5);
}

TEST_CASE("polygon attachments") {
  const auto pts = polygon_attachments(3, 0.306);
  REQUIRE(pts.size() == 3);
  // Side length = sqrt(3) * circumradius, centroid at the origin.
  CHECK((pts[0] - pts[1]).norm() ==
        doctest::Approx(0.306 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK((pts[0] + pts[1] + pts[2]).norm() < 1e-15);
}

}  // namespace
}  // namespace cablemanip
