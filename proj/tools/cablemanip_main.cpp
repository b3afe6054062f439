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

// Batch front end: simulate scenarios, report RMSE from logs, and run
// parameter sweeps. Exit codes: 0 ok, 2 config error, 3 solver fault,
// 4 physics fault.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cablemanip/sim_runner.hpp"

namespace {

using cablemanip::ConfigError;
using cablemanip::PhysicsError;
using cablemanip::Scenario;
using cablemanip::SolverError;

int verbosity() {
  const char* env = std::getenv("CABLEMANIP_VERBOSITY");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void write_outputs(const cablemanip::RunResult& result,
                   const std::filesystem::path& out_dir,
                   const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / (stem + "_log.csv"));
    result.log.write_csv(csv);
  }
  {
    std::ofstream js(out_dir / (stem + "_summary.json"));
    js << result.summary.to_json();
  }
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const Scenario scenario = cablemanip::load_scenario(scenario_path);
  const cablemanip::RunResult result = cablemanip::run_scenario(scenario);
  write_outputs(result, out_dir, scenario.name);
  if (verbosity() >= 1) {
    std::cout << result.summary.to_json();
  }
  return 0;
}

int run_report(const std::string& log_path, const std::string& format) {
  std::ifstream in(log_path);
  if (!in) throw ConfigError("cannot open log file: " + log_path);
  const cablemanip::SimLog log = cablemanip::SimLog::read_csv(in);
  const cablemanip::Vec3 rmse = cablemanip::compute_rmse(log);
  if (format == "csv") {
    std::cout << "axis,rmse_m\nx," << rmse.x() << "\ny," << rmse.y() << "\nz,"
              << rmse.z() << "\n";
  } else {
    std::cout << "scenario: " << log.scenario_name << "\n"
              << "tracking window: [" << log.window_start << ", "
              << log.window_end << "] s\n"
              << "rmse x: " << rmse.x() << " m\n"
              << "rmse y: " << rmse.y() << " m\n"
              << "rmse z: " << rmse.z() << " m\n";
  }
  return 0;
}

int run_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& out_dir, int jobs) {
  const auto eq = param.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--param must be path=v1,v2,... e.g. nmpc.step_s=0.05,0.1");
  }
  const std::string path = param.substr(0, eq);
  std::vector<std::string> values;
  {
    std::istringstream vs(param.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--param has no values");

  std::ifstream in(scenario_path);
  if (!in) throw ConfigError("cannot open scenario file: " + scenario_path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::ordered_json base;
  try {
    base = nlohmann::ordered_json::parse(buf.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }

  // Resolve the dotted path and patch one scenario per value.
  std::vector<Scenario> runs;
  for (const std::string& v : values) {
    nlohmann::ordered_json patched = base;
    nlohmann::ordered_json* node = &patched;
    std::istringstream ps(path);
    std::string tok;
    std::vector<std::string> tokens;
    while (std::getline(ps, tok, '.')) tokens.push_back(tok);
    if (tokens.empty()) throw ConfigError("empty --param path");
    for (size_t i = 0; i + 1 < tokens.size(); ++i) node = &(*node)[tokens[i]];
    try {
      (*node)[tokens.back()] = nlohmann::ordered_json::parse(v);
    } catch (const std::exception&) {
      (*node)[tokens.back()] = v;  // plain string value
    }
    Scenario s = Scenario::from_json(patched.dump());
    s.name += "_" + tokens.back() + "_" + v;
    const auto bad = s.validate();
    if (!bad.empty()) {
      std::string msg = "invalid sweep point " + v + ":";
      for (const auto& b : bad) msg += "\n  - " + b;
      throw ConfigError(msg);
    }
    runs.push_back(std::move(s));
  }

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  std::atomic<int> failures{0};
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < runs.size();
           i = next.fetch_add(1)) {
        try {
          const cablemanip::RunResult result =
              cablemanip::run_scenario(runs[i]);
          write_outputs(result, out_dir, runs[i].name);
          std::lock_guard<std::mutex> lock(io_mutex);
          if (verbosity() >= 1) std::cout << result.summary.to_json();
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(io_mutex);
          std::cerr << "sweep point " << runs[i].name << " failed: "
                    << e.what() << "\n";
          ++failures;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative cable-suspended payload transport: NMPC + "
               "geometric control simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", log_path, format = "text", param;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 0) jobs = 2;

  CLI::App* sim = app.add_subcommand("simulate", "Run a scenario file");
  sim->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sim->add_option("--out", out_dir, "Output directory");

  CLI::App* rep = app.add_subcommand("report", "Per-axis RMSE from a log CSV");
  rep->add_option("log", log_path, "Log CSV produced by simulate")->required();
  rep->add_option("--format", format, "csv|text")
      ->check(CLI::IsMember({"csv", "text"}));

  CLI::App* swp = app.add_subcommand("sweep", "Batch parameter sweep");
  swp->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  swp->add_option("--param", param, "Dotted path=v1,v2,... to sweep")
      ->required();
  swp->add_option("--out", out_dir, "Output directory");
  swp->add_option("--jobs", jobs, "Parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(scenario_path, out_dir);
    if (rep->parsed()) return run_report(log_path, format);
    if (swp->parsed()) return run_sweep(scenario_path, param, out_dir, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver fault: " << e.what() << "\n";
    return 3;
  } catch (const PhysicsError& e) {
    std::cerr << "physics fault: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
