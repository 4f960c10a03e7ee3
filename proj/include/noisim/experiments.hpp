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

// Experiment drivers shared by the command-line tool and the test suites.
// Every command is deterministic for a given (config, seed); outputs are
// plain CSV/JSON files in the configured directory.

#pragma once

#include <filesystem>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "noisim/bath.hpp"
#include "noisim/config.hpp"
#include "noisim/density_matrix.hpp"
#include "noisim/green.hpp"
#include "noisim/hadamard.hpp"
#include "noisim/lindblad.hpp"

namespace noisim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

namespace exp_detail {

inline std::string out_path(const ExperimentConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.run.output);
  return (std::filesystem::path(c.run.output) / name).string();
}

inline std::vector<double> measurement_grid(const ExperimentConfig& c) {
  // n uniformly spaced points on (0, t_max], snapped to the step grid
  std::vector<double> times;
  for (int i = 1; i <= c.circuit.n_time_points; ++i) {
    const double t = c.circuit.t_max * i / c.circuit.n_time_points;
    const double snapped = std::lround(t / c.circuit.tau) * c.circuit.tau;
    if (times.empty() || snapped > times.back() + 1e-12) times.push_back(snapped);
  }
  return times;
}

inline std::vector<double> dense_grid(double t_max, double dt) {
  std::vector<double> times;
  for (double t = 0.0; t <= t_max + 1e-9; t += dt) times.push_back(t);
  return times;
}

inline GateDurations durations(const ExperimentConfig& c) {
  return GateDurations{c.noise.t_1q, c.noise.t_2q};
}

struct PmReference {
  PseudomodeBath bath;
  FitReport report;
  QuadraticLindblad ql;
  SteadyRDM steady;
};

inline PmReference fit_reference(const ExperimentConfig& c) {
  PmReference ref;
  ref.bath = fit_pseudomodes(c.spec(), c.bath.n_bath, &ref.report);
  ref.ql = build_lindblad(c.model.epsilon, ref.bath);
  ref.steady = steady_state(ref.ql);
  return ref;
}

}  // namespace exp_detail

/// Pseudomode fit: bath parameters, fit report, and the fitted emission /
/// absorption spectra against the exact ones.
inline int cmd_fit(const ExperimentConfig& config) {
  config.validate();
  if (config.bath.mode == "closed") {
    ClosedBath cb = discretize_closed(config.spec(), config.bath.n_bath);
    write_file(exp_detail::out_path(config, "bath_closed.json"),
               to_json(cb).dump(2) + "\n");
    return kExitOk;
  }
  FitReport report;
  PseudomodeBath bath = fit_pseudomodes(config.spec(), config.bath.n_bath, &report);
  write_file(exp_detail::out_path(config, "bath.json"), to_json(bath).dump(2) + "\n");

  nlohmann::json rep;
  rep["chi"] = report.chi;
  rep["rate"] = report.rate;
  rep["grid_size"] = report.grid_size;
  rep["emit_window"] = {report.emit_window_lo, report.emit_window_hi};
  rep["abs_window"] = {report.abs_window_lo, report.abs_window_hi};
  write_file(exp_detail::out_path(config, "fit_report.json"), rep.dump(2) + "\n");

  // spectra on a display grid: exact occupied weight and the fitted model
  const HybridizationSpec spec = config.spec();
  std::string csv = "omega,exact,model\n";
  const double lo = -spec.half_bandwidth - 2.0, hi = spec.half_bandwidth + 2.0;
  for (int i = 0; i <= 800; ++i) {
    const double w = lo + (hi - lo) * i / 800.0;
    const double exact = 2.0 * M_PI * hyb_spectra(spec, w).lesser;
    double model = 0.0;
    for (int p = 0; p < bath.size(); p += 2) {
      const double v = 2.0 * bath.couplings(p) * bath.couplings(p) * bath.rate;
      const double d = w - bath.energies(p);
      model += v / (d * d + bath.rate * bath.rate);
    }
    csv += green_detail::fmt_double(w) + "," + green_detail::fmt_double(exact) +
           "," + green_detail::fmt_double(model) + "\n";
  }
  write_file(exp_detail::out_path(config, "emission_spectrum.csv"), csv);
  return kExitOk;
}

/// Exact reference dynamics: the continuum-bath curve, plus either the
/// damped-bath curve with its preparation-error sweep, or the closed-bath
/// curve with its revival.
inline int cmd_exact(const ExperimentConfig& config) {
  config.validate();
  const HybridizationSpec spec = config.spec();
  const std::vector<double> grid =
      exp_detail::dense_grid(config.circuit.t_max, config.circuit.tau);

  write_file(exp_detail::out_path(config, "greens_exact_original.csv"),
             to_csv(rlm_reference_gf(spec, grid)));

  if (config.bath.mode == "closed") {
    ClosedBath cb = discretize_closed(spec, config.bath.n_bath);
    write_file(exp_detail::out_path(config, "greens_closed_bath.csv"),
               to_csv(closed_bath_gf(spec, cb, grid)));
    return kExitOk;
  }

  exp_detail::PmReference ref = exp_detail::fit_reference(config);
  write_file(exp_detail::out_path(config, "greens_exact_pm.csv"),
             to_csv(pm_greater_gf(ref.ql, ref.steady, grid)));

  // relaxation of the preparation error
  std::vector<double> tps;
  for (double tp = 0.0; tp <= 40.0; tp += 2.0) tps.push_back(tp);
  const auto errs = prep_error(ref.ql, emitter_filled_rdm(ref.bath), tps);
  std::string csv = "t_prep,error\n";
  for (std::size_t i = 0; i < tps.size(); ++i)
    csv += green_detail::fmt_double(tps[i]) + "," +
           green_detail::fmt_double(errs[i]) + "\n";
  write_file(exp_detail::out_path(config, "prep_error.csv"), csv);

  nlohmann::json rep;
  rep["relaxation_rate"] = relaxation_rate(ref.ql);
  rep["fit_chi"] = ref.report.chi;
  rep["rate"] = ref.report.rate;
  write_file(exp_detail::out_path(config, "exact_report.json"), rep.dump(2) + "\n");
  return kExitOk;
}

struct SimulationResult {
  GreenSeries circuit;
  double eps_vs_pm = 0.0;
  double eps_vs_original = 0.0;
};

/// Noisy-circuit pipeline at one parameter point. The interferometric
/// (probe-qubit) program is the default; the channel-direct evaluation gives
/// identical exact-mode values on a register one qubit smaller and is used
/// for parameter scans.
inline SimulationResult simulate_point(const ExperimentConfig& config,
                                       bool interferometric,
                                       const exp_detail::PmReference& ref) {
  const std::vector<double> times = exp_detail::measurement_grid(config);
  const GateDurations gd = exp_detail::durations(config);
  AncillaLayout lay = make_layout(config.bath.n_bath, config.bath.n_anc);

  SimulationResult result;
  if (interferometric) {
    HadamardCircuit circ(config.model.epsilon, ref.bath, lay, config.circuit.tau,
                         config.noise.t1, gd);
    result.circuit = greater_gf_curve(circ, config.circuit.t_prep, times);
  } else {
    result.circuit =
        direct_greater_gf(config.model.epsilon, ref.bath, lay, config.circuit.tau,
                          config.circuit.t_prep, times, config.noise.t1, gd);
  }
  GreenSeries pm = pm_greater_gf(ref.ql, ref.steady, result.circuit.times);
  GreenSeries orig = rlm_reference_gf(config.spec(), result.circuit.times);
  result.eps_vs_pm = eps_tot(result.circuit, pm);
  result.eps_vs_original = eps_tot(result.circuit, orig);
  return result;
}

/// Full simulation command: circuit Green's function, the two exact
/// references on the same grid, and the error report.
inline int cmd_simulate(const ExperimentConfig& config) {
  config.validate();
  exp_detail::PmReference ref = exp_detail::fit_reference(config);
  const std::vector<double> times = exp_detail::measurement_grid(config);

  if (config.run.engine == "exact") {
    write_file(exp_detail::out_path(config, "greens_exact_pm.csv"),
               to_csv(pm_greater_gf(ref.ql, ref.steady, times)));
    return kExitOk;
  }

  SimulationResult result = simulate_point(config, true, ref);
  std::vector<double> se_re(times.size(), 0.0), se_im(times.size(), 0.0);
  GreenSeries reported = result.circuit;
  EstimateMode mode = EstimateMode::exact_expectation;
  if (config.run.shots > 0) {
    // sample the measurement distribution around the exact expectations
    mode = EstimateMode::shots;
    std::mt19937_64 rng(config.run.seed);
    for (std::size_t i = 0; i < reported.size(); ++i) {
      auto sample_part = [&](double mean) {
        const double p = std::clamp(0.5 * (1.0 + mean), 0.0, 1.0);
        std::binomial_distribution<long> bin(config.run.shots, p);
        const double phat =
            static_cast<double>(bin(rng)) / static_cast<double>(config.run.shots);
        const double se = 2.0 * std::sqrt(std::max(phat * (1.0 - phat), 0.0) /
                                          static_cast<double>(config.run.shots));
        return std::pair<double, double>{2.0 * phat - 1.0, se};
      };
      auto [re, sre] = sample_part(reported.values[i].real());
      auto [im, sim] = sample_part(reported.values[i].imag());
      reported.values[i] = {re, im};
      se_re[i] = sre;
      se_im[i] = sim;
    }
  }
  write_file(exp_detail::out_path(config, "greens_circuit.csv"),
             results_csv(reported, se_re, se_im, mode));
  write_file(exp_detail::out_path(config, "greens_exact_pm.csv"),
             to_csv(pm_greater_gf(ref.ql, ref.steady, times)));
  write_file(exp_detail::out_path(config, "greens_exact_original.csv"),
             to_csv(rlm_reference_gf(config.spec(), times)));

  nlohmann::json rep;
  rep["eps_tot_vs_exact_pm"] = result.eps_vs_pm;
  rep["eps_tot_vs_exact_original"] = result.eps_vs_original;
  rep["fit_chi"] = ref.report.chi;
  rep["rate"] = ref.report.rate;
  write_file(exp_detail::out_path(config, "eps_report.json"), rep.dump(2) + "\n");
  return kExitOk;
}

/// Gate-count table across the valid ancilla counts for this bath size, plus
/// the text dump of the configured schedule.
inline int cmd_report_circuit(const ExperimentConfig& config) {
  config.validate();
  exp_detail::PmReference ref = exp_detail::fit_reference(config);
  const GateDurations gd = exp_detail::durations(config);

  std::string csv =
      "n_anc,encoding_two_qubit,coupling_two_qubit,cz_trick,step_two_qubit,"
      "t_trotter\n";
  for (int nanc = 0; nanc < config.bath.n_bath; ++nanc) {
    AncillaLayout lay;
    try {
      lay = make_layout(config.bath.n_bath, nanc);
    } catch (const std::invalid_argument&) {
      continue;  // uneven block split
    }
    CircuitSchedule sched =
        schedule(config.model.epsilon, ref.bath, lay, config.circuit.tau,
                 config.circuit.tau, 0.0, config.noise.t1, gd);
    GateCountReport r = gate_counts(sched);
    csv += std::to_string(nanc) + "," + std::to_string(r.encoding_two_qubit) +
           "," + std::to_string(r.coupling_two_qubit) + "," +
           std::to_string(r.cz_trick) + "," + std::to_string(r.step_two_qubit) +
           "," + green_detail::fmt_double(r.t_trotter) + "\n";
  }
  write_file(exp_detail::out_path(config, "gate_counts.csv"), csv);

  AncillaLayout lay = make_layout(config.bath.n_bath, config.bath.n_anc);
  CircuitSchedule sched =
      schedule(config.model.epsilon, ref.bath, lay, config.circuit.tau,
               config.circuit.t_prep, config.circuit.t_max, config.noise.t1, gd);
  write_file(exp_detail::out_path(config, "circuit.txt"), dump_schedule(sched));
  return kExitOk;
}

/// Parameter scan (tau or T1): one channel-direct pipeline per value, fanned
/// out over a worker pool; per-point rows merge in value order so the output
/// is independent of scheduling.
inline int cmd_scan(const ExperimentConfig& config, const std::string& param,
                    const std::vector<double>& values) {
  config.validate();
  if (param != "tau" && param != "T1")
    throw std::invalid_argument("scan parameter must be tau or T1");
  if (values.empty()) throw std::invalid_argument("empty scan value list");
  exp_detail::PmReference ref = exp_detail::fit_reference(config);

  auto run_point = [&](double value) {
    ExperimentConfig point = config;
    if (param == "tau") point.circuit.tau = value;
    else point.noise.t1 = value;
    point.validate();
    SimulationResult r = simulate_point(point, false, ref);
    return std::pair<double, double>{r.eps_vs_pm, r.eps_vs_original};
  };

  std::vector<std::future<std::pair<double, double>>> jobs;
  for (double v : values)
    jobs.push_back(std::async(std::launch::async, run_point, v));

  std::string csv = param + ",eps_tot_vs_exact_pm,eps_tot_vs_exact_original\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [pm, orig] = jobs[i].get();
    csv += green_detail::fmt_double(values[i]) + "," +
           green_detail::fmt_double(pm) + "," + green_detail::fmt_double(orig) +
           "\n";
  }
  write_file(exp_detail::out_path(config, "scan_" + param + ".csv"), csv);
  return kExitOk;
}

}  // namespace noisim
