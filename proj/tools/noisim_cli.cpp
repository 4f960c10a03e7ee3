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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisim/experiments.hpp"

namespace {

noisim::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file " + path);
  nlohmann::json j;
  f >> j;
  return noisim::config_from_json(j);
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impurity-model dynamics from pseudomode baths and noisy circuits"};
  app.require_subcommand(1);

  std::string config_path;
  noisim::ExperimentConfig overrides;
  bool has_nb = false, has_nanc = false, has_tau = false, has_t1 = false;
  bool has_tprep = false, has_tmax = false, has_npts = false, has_shots = false;
  bool has_seed = false, has_engine = false, has_mode = false, has_out = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--nb", overrides.bath.n_bath, "bath mode count")
        ->each([&](const std::string&) { has_nb = true; });
    cmd->add_option("--nanc", overrides.bath.n_anc, "ancilla count")
        ->each([&](const std::string&) { has_nanc = true; });
    cmd->add_option("--tau", overrides.circuit.tau, "Trotter step")
        ->each([&](const std::string&) { has_tau = true; });
    cmd->add_option("--t1", overrides.noise.t1, "qubit T1 in gate-time units")
        ->each([&](const std::string&) { has_t1 = true; });
    cmd->add_option("--t-prep", overrides.circuit.t_prep, "preparation time")
        ->each([&](const std::string&) { has_tprep = true; });
    cmd->add_option("--t-max", overrides.circuit.t_max, "largest measured time")
        ->each([&](const std::string&) { has_tmax = true; });
    cmd->add_option("--points", overrides.circuit.n_time_points,
                    "number of measured times")
        ->each([&](const std::string&) { has_npts = true; });
    cmd->add_option("--shots", overrides.run.shots, "shots (0 = exact mode)")
        ->each([&](const std::string&) { has_shots = true; });
    cmd->add_option("--seed", overrides.run.seed, "sampling seed")
        ->each([&](const std::string&) { has_seed = true; });
    cmd->add_option("--engine", overrides.run.engine, "circuit | exact")
        ->each([&](const std::string&) { has_engine = true; });
    cmd->add_option("--mode", overrides.bath.mode, "pseudomode | closed")
        ->each([&](const std::string&) { has_mode = true; });
    cmd->add_option("--output", overrides.run.output, "output directory")
        ->each([&](const std::string&) { has_out = true; });
  };

  CLI::App* fit = app.add_subcommand("fit", "fit the damped bath");
  CLI::App* exact = app.add_subcommand("exact", "exact reference curves");
  CLI::App* simulate = app.add_subcommand("simulate", "noisy-circuit pipeline");
  CLI::App* report =
      app.add_subcommand("report-circuit", "gate counts and circuit dump");
  CLI::App* scan = app.add_subcommand("scan", "parameter scan of the error");
  std::string scan_param = "tau";
  std::string scan_values = "0.3";
  scan->add_option("--param", scan_param, "tau | T1");
  scan->add_option("--values", scan_values, "comma-separated values");
  for (CLI::App* cmd : {fit, exact, simulate, report, scan}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    noisim::ExperimentConfig config = load_config(config_path);
    if (has_nb) config.bath.n_bath = overrides.bath.n_bath;
    if (has_nanc) config.bath.n_anc = overrides.bath.n_anc;
    if (has_tau) config.circuit.tau = overrides.circuit.tau;
    if (has_t1) config.noise.t1 = overrides.noise.t1;
    if (has_tprep) config.circuit.t_prep = overrides.circuit.t_prep;
    if (has_tmax) config.circuit.t_max = overrides.circuit.t_max;
    if (has_npts) config.circuit.n_time_points = overrides.circuit.n_time_points;
    if (has_shots) config.run.shots = overrides.run.shots;
    if (has_seed) config.run.seed = overrides.run.seed;
    if (has_engine) config.run.engine = overrides.run.engine;
    if (has_mode) config.bath.mode = overrides.bath.mode;
    if (has_out) config.run.output = overrides.run.output;

    if (fit->parsed()) return noisim::cmd_fit(config);
    if (exact->parsed()) return noisim::cmd_exact(config);
    if (simulate->parsed()) return noisim::cmd_simulate(config);
    if (report->parsed()) return noisim::cmd_report_circuit(config);
    if (scan->parsed())
      return noisim::cmd_scan(config, scan_param, parse_values(scan_values));
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return noisim::kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return noisim::kExitNumericalError;
  }
  return 0;
}
