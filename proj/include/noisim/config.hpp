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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "noisim/hybridization.hpp"

namespace noisim {

/// One experiment: model parameters, bath representation, circuit grid,
/// noise characteristics and run controls.
struct ExperimentConfig {
  struct Model {
    double epsilon = 0.5;
    double gamma = 0.6;
    double half_bandwidth = 10.0;
    double beta = 1.0;
  } model;

  struct Bath {
    int n_bath = 8;
    int n_anc = 1;
    std::string mode = "pseudomode";  // or "closed"
  } bath;

  struct Circuit {
    double tau = 0.3;
    double t_prep = 30.0;
    double t_max = 60.0;
    int n_time_points = 20;
  } circuit;

  struct Noise {
    double t1 = 1e5;
    double t_1q = 1.0;
    double t_2q = 10.0;
  } noise;

  struct Run {
    std::string engine = "circuit";  // or "exact"
    long shots = 0;                  // 0 = exact expectations
    std::uint64_t seed = 1;
    std::string output = ".";
  } run;

  HybridizationSpec spec() const {
    return HybridizationSpec{model.gamma, model.half_bandwidth, model.beta,
                             model.epsilon};
  }

  void validate() const {
    if (model.gamma < 0 || model.half_bandwidth <= 0 || model.beta <= 0)
      throw std::invalid_argument("model parameters must be positive");
    if (circuit.tau <= 0 || circuit.t_max <= 0 || circuit.t_prep < 0)
      throw std::invalid_argument("durations must be positive");
    if (circuit.n_time_points < 1)
      throw std::invalid_argument("need at least one time point");
    if (noise.t1 <= 0 || noise.t_1q <= 0 || noise.t_2q <= 0)
      throw std::invalid_argument("noise durations must be positive");
    if (bath.mode != "pseudomode" && bath.mode != "closed")
      throw std::invalid_argument("bath mode must be pseudomode or closed");
    if (bath.mode == "pseudomode" && (bath.n_bath < 2 || bath.n_bath % 2 != 0))
      throw std::invalid_argument(
          "pseudomode bath needs an even number of modes >= 2");
    if (bath.n_bath < 1) throw std::invalid_argument("empty bath");
    if (run.engine != "circuit" && run.engine != "exact")
      throw std::invalid_argument("engine must be circuit or exact");
    if (run.shots < 0) throw std::invalid_argument("negative shot count");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["model"] = {{"epsilon", c.model.epsilon},
                {"gamma", c.model.gamma},
                {"D", c.model.half_bandwidth},
                {"beta", c.model.beta}};
  j["bath"] = {{"N_b", c.bath.n_bath},
               {"N_anc", c.bath.n_anc},
               {"mode", c.bath.mode}};
  j["circuit"] = {{"tau", c.circuit.tau},
                  {"t_prep", c.circuit.t_prep},
                  {"t_max", c.circuit.t_max},
                  {"n_time_points", c.circuit.n_time_points}};
  j["noise"] = {{"T1", c.noise.t1},
                {"T_1q", c.noise.t_1q},
                {"T_2q", c.noise.t_2q}};
  j["run"] = {{"engine", c.run.engine},
              {"shots", c.run.shots},
              {"seed", c.run.seed},
              {"output", c.run.output}};
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("epsilon")) c.model.epsilon = m.at("epsilon").get<double>();
    if (m.contains("gamma")) c.model.gamma = m.at("gamma").get<double>();
    if (m.contains("D")) c.model.half_bandwidth = m.at("D").get<double>();
    if (m.contains("beta")) c.model.beta = m.at("beta").get<double>();
  }
  if (j.contains("bath")) {
    const auto& b = j.at("bath");
    if (b.contains("N_b")) c.bath.n_bath = b.at("N_b").get<int>();
    if (b.contains("N_anc")) c.bath.n_anc = b.at("N_anc").get<int>();
    if (b.contains("mode")) c.bath.mode = b.at("mode").get<std::string>();
  }
  if (j.contains("circuit")) {
    const auto& cc = j.at("circuit");
    if (cc.contains("tau")) c.circuit.tau = cc.at("tau").get<double>();
    if (cc.contains("t_prep")) c.circuit.t_prep = cc.at("t_prep").get<double>();
    if (cc.contains("t_max")) c.circuit.t_max = cc.at("t_max").get<double>();
    if (cc.contains("n_time_points"))
      c.circuit.n_time_points = cc.at("n_time_points").get<int>();
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    if (n.contains("T1")) c.noise.t1 = n.at("T1").get<double>();
    if (n.contains("T_1q")) c.noise.t_1q = n.at("T_1q").get<double>();
    if (n.contains("T_2q")) c.noise.t_2q = n.at("T_2q").get<double>();
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    if (r.contains("engine")) c.run.engine = r.at("engine").get<std::string>();
    if (r.contains("shots")) c.run.shots = r.at("shots").get<long>();
    if (r.contains("seed")) c.run.seed = r.at("seed").get<std::uint64_t>();
    if (r.contains("output")) c.run.output = r.at("output").get<std::string>();
  }
  return c;
}

}  // namespace noisim
