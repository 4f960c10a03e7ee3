// Copyright 2026 The noisim authors
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

#include <catch2/catch.hpp>
#include <filesystem>
#include <fstream>

#include "noisim/experiments.hpp"

using namespace noisim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig c;
  c.bath.n_bath = 2;
  c.bath.n_anc = 1;
  c.circuit.tau = 0.5;
  c.circuit.t_prep = 1.0;
  c.circuit.t_max = 2.0;
  c.circuit.n_time_points = 4;
  c.noise.t1 = 1e4;
  c.run.output = out;
  return c;
}

}  // namespace

TEST_CASE("config json round trip", "[experiments]") {
  ExperimentConfig c;
  c.model.epsilon = 0.7;
  c.bath.n_bath = 16;
  c.circuit.tau = 0.15;
  c.noise.t1 = 3e4;
  c.run.engine = "exact";
  c.run.output = "somewhere";
  nlohmann::json j = to_json(c);
  REQUIRE(j["bath"]["N_b"] == 16);
  REQUIRE(j["noise"]["T1"] == 3e4);
  ExperimentConfig back = config_from_json(j);
  REQUIRE(to_json(back) == j);
}

TEST_CASE("config validation", "[experiments]") {
  ExperimentConfig c;
  REQUIRE_NOTHROW(c.validate());
  SECTION("odd pseudomode bath") {
    c.bath.n_bath = 7;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SECTION("nonpositive durations") {
    c.circuit.tau = 0.0;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SECTION("unknown engine") {
    c.run.engine = "quantum";
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("fit command writes bath, report and spectra", "[experiments]") {
  TempDir dir("noisim_test_fit");
  ExperimentConfig c = small_config(dir.path.string());
  c.bath.n_bath = 8;
  REQUIRE(cmd_fit(c) == kExitOk);
  REQUIRE(fs::exists(dir.path / "bath.json"));
  REQUIRE(fs::exists(dir.path / "fit_report.json"));
  REQUIRE(fs::exists(dir.path / "emission_spectrum.csv"));

  PseudomodeBath bath = pseudomode_from_json(
      nlohmann::json::parse(slurp(dir.path / "bath.json")));
  REQUIRE(bath.size() == 8);

  SECTION("tiny fit runs and reports a large residual") {
    ExperimentConfig c2 = small_config((dir.path / "tiny").string());
    REQUIRE(cmd_fit(c2) == kExitOk);
    auto rep = nlohmann::json::parse(slurp(dir.path / "tiny" / "fit_report.json"));
    REQUIRE(rep["chi"].get<double>() > 0.1);
  }
  SECTION("odd bath size is a config error") {
    ExperimentConfig c3 = small_config(dir.path.string());
    c3.bath.n_bath = 5;
    REQUIRE_THROWS_AS(cmd_fit(c3), std::invalid_argument);
  }
}

TEST_CASE("exact command emits the reference curves", "[experiments]") {
  TempDir dir("noisim_test_exact");
  ExperimentConfig c = small_config(dir.path.string());
  c.circuit.t_max = 4.0;
  REQUIRE(cmd_exact(c) == kExitOk);
  REQUIRE(fs::exists(dir.path / "greens_exact_original.csv"));
  REQUIRE(fs::exists(dir.path / "greens_exact_pm.csv"));
  REQUIRE(fs::exists(dir.path / "prep_error.csv"));
  REQUIRE(slurp(dir.path / "greens_exact_pm.csv").find("exact_pm") !=
          std::string::npos);

  SECTION("closed mode swaps in the closed-bath curve") {
    ExperimentConfig c2 = small_config((dir.path / "closed").string());
    c2.bath.mode = "closed";
    c2.bath.n_bath = 11;  // closed baths have no parity constraint
    REQUIRE(cmd_exact(c2) == kExitOk);
    REQUIRE(fs::exists(dir.path / "closed" / "greens_closed_bath.csv"));
  }
}

TEST_CASE("simulate command is deterministic", "[experiments]") {
  TempDir dir("noisim_test_sim");
  ExperimentConfig c = small_config((dir.path / "a").string());
  REQUIRE(cmd_simulate(c) == kExitOk);
  std::string first = slurp(dir.path / "a" / "greens_circuit.csv");
  c.run.output = (dir.path / "b").string();
  REQUIRE(cmd_simulate(c) == kExitOk);
  REQUIRE(slurp(dir.path / "b" / "greens_circuit.csv") == first);
  REQUIRE(fs::exists(dir.path / "a" / "eps_report.json"));

  SECTION("shot mode reproduces the seed") {
    ExperimentConfig s = small_config((dir.path / "s1").string());
    s.run.shots = 2000;
    s.run.seed = 9;
    REQUIRE(cmd_simulate(s) == kExitOk);
    std::string one = slurp(dir.path / "s1" / "greens_circuit.csv");
    s.run.output = (dir.path / "s2").string();
    REQUIRE(cmd_simulate(s) == kExitOk);
    REQUIRE(slurp(dir.path / "s2" / "greens_circuit.csv") == one);
    REQUIRE(one.find("shots") != std::string::npos);
  }
  SECTION("exact engine writes only the reference") {
    ExperimentConfig e = small_config((dir.path / "e").string());
    e.run.engine = "exact";
    REQUIRE(cmd_simulate(e) == kExitOk);
    REQUIRE(fs::exists(dir.path / "e" / "greens_exact_pm.csv"));
    REQUIRE_FALSE(fs::exists(dir.path / "e" / "greens_circuit.csv"));
  }
}

TEST_CASE("report command writes counts and a parsable dump", "[experiments]") {
  TempDir dir("noisim_test_report");
  ExperimentConfig c = small_config(dir.path.string());
  c.bath.n_bath = 4;
  c.bath.n_anc = 1;
  REQUIRE(cmd_report_circuit(c) == kExitOk);
  const std::string counts = slurp(dir.path / "gate_counts.csv");
  REQUIRE(counts.rfind("n_anc,", 0) == 0);
  CircuitSchedule sched = parse_schedule(slurp(dir.path / "circuit.txt"));
  REQUIRE(sched.n_qubits == 6);

  SECTION("rate below the harvest floor is a config error") {
    ExperimentConfig bad = small_config(dir.path.string());
    bad.noise.t1 = 10.0;  // far below the floor
    try {
      cmd_report_circuit(bad);
      FAIL("expected throw");
    } catch (const std::invalid_argument& err) {
      const std::string msg = err.what();
      REQUIRE(msg.find("tau") != std::string::npos);
      REQUIRE(msg.find("T1") != std::string::npos);
      REQUIRE(msg.find("T_trotter") != std::string::npos);
    }
  }
}

TEST_CASE("scan command merges points in value order", "[experiments]") {
  TempDir dir("noisim_test_scan");
  ExperimentConfig c = small_config(dir.path.string());
  REQUIRE(cmd_scan(c, "tau", {0.5, 0.25}) == kExitOk);
  const std::string csv = slurp(dir.path / "scan_tau.csv");
  REQUIRE(csv.rfind("tau,eps_tot_vs_exact_pm,eps_tot_vs_exact_original\n", 0) == 0);
  const auto first_row = csv.find('\n') + 1;
  REQUIRE(csv.substr(first_row, 4) == "0.5,");
  REQUIRE_THROWS_AS(cmd_scan(c, "gamma", {0.1}), std::invalid_argument);
}
