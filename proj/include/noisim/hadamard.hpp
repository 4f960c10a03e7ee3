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

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisim/circuit.hpp"
#include "noisim/density_matrix.hpp"
#include "noisim/green.hpp"

namespace noisim {

enum class EstimateMode { exact_expectation, shots };

/// One interferometric circuit: controlled U1 at the preparation boundary,
/// unconditional evolution to t, S^k and anti-controlled U2^dag on the probe
/// qubit. The weighted sum over the eight (U1, U2, k) variants reconstructs
/// the greater Green's function of the impurity.
struct HadamardPlan {
  double t_prep = 0.0;
  double t = 0.0;
  Pauli u1 = Pauli::X;
  Pauli u2 = Pauli::X;
  int k = 0;
  complex weight{0, 0};
};

struct GFEstimate {
  double t = 0.0;
  complex value{0, 0};
  EstimateMode mode = EstimateMode::exact_expectation;
  long n_shots = 0;         // 0 in exact mode
  double stderr_value = 0;  // 0 in exact mode
};

/// The eight plans measuring G^>(t) = -i < d(t) d^dag(0) >. The barred
/// impurity operators are single-qubit: d (-1)^N = -S^- and (-1)^N d^dag =
/// -S^+, each splitting into X and Y with the S^± = (X -/+ iY)/2 weights.
inline std::vector<HadamardPlan> plan_greater_gf(double t_prep, double t) {
  if (t_prep < 0 || t < 0) throw std::invalid_argument("negative time");
  const complex i{0, 1};
  const std::pair<Pauli, complex> inner[2] = {
      {Pauli::X, complex{-0.5, 0}},   // from -(X - iY)/2
      {Pauli::Y, complex{0, 0.5}}};
  const std::pair<Pauli, complex> outer[2] = {
      {Pauli::X, complex{-0.5, 0}},   // from -(X + iY)/2
      {Pauli::Y, complex{0, -0.5}}};
  std::vector<HadamardPlan> plans;
  for (const auto& [u1, w1] : inner) {
    for (const auto& [u2, w2] : outer) {
      // Tr(U2 E[U1 E[rho]]) = v_{k=0} - i v_{k=1}
      for (int k = 0; k < 2; ++k) {
        HadamardPlan p;
        p.t_prep = t_prep;
        p.t = t;
        p.u1 = u1;
        p.u2 = u2;
        p.k = k;
        const complex base = -i * w1 * w2;
        p.weight = (k == 0) ? base : -i * base;
        plans.push_back(p);
      }
    }
  }
  return plans;
}

namespace hadamard_detail {

inline Eigen::Matrix2cd mat_h2() {
  Eigen::Matrix2cd m;
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Eigen::Matrix2cd mat_s2() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(1, 1) = complex{0, 1};
  return m;
}

// expectation of the final control measurement, P(0) - P(1)
inline double control_z_expectation(const Eigen::MatrixXcd& rho, int control,
                                    int n) {
  const long dim = 1L << n;
  const long cm = 1L << (n - 1 - control);
  double v = 0.0;
  for (long idx = 0; idx < dim; ++idx)
    v += (idx & cm) ? -rho(idx, idx).real() : rho(idx, idx).real();
  return v;
}

}  // namespace hadamard_detail

/// Shared fixture for the measurement circuits: the system program pieces
/// plus one noiseless probe qubit appended at the top of the register.
class HadamardCircuit {
 public:
  HadamardCircuit(double imp_energy, const PseudomodeBath& bath,
                  const AncillaLayout& lay, double tau, double t1,
                  GateDurations gd = {})
      : lay_(lay), tau_(tau), gd_(gd) {
    base_ = schedule(imp_energy, bath, lay, tau, 0.0, 0.0, t1, gd);
    step_ = trotter_step(imp_energy, bath, lay, tau, gd);
    for (int p = 0; p < lay.n_bath; ++p)
      if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
        init_.push_back(Event::x_on(lay.bath_qubit[static_cast<std::size_t>(p)],
                                    EventTag::init, gd));
    encode_ = encoding_circuit(lay, bath.parity, gd);
    decode_ = decoding_circuit(lay, bath.parity, gd);
  }

  int control_qubit() const { return lay_.n_qubits(); }
  int n_qubits() const { return lay_.n_qubits() + 1; }
  double tau() const { return tau_; }
  const ScheduleMeta& meta() const { return base_.meta; }
  const AncillaLayout& layout() const { return lay_; }

  NoiseModel noise() const {
    std::vector<bool> mask = base_.noisy;
    mask.push_back(false);  // the probe stays clean
    return NoiseModel{base_.meta.t1, mask};
  }

  /// Program head: probe H, emitter initialization, encoding, then the
  /// preparation steps.
  std::vector<Event> head(long n_prep_steps) const {
    std::vector<Event> ev;
    ev.push_back(Event::unitary1(control_qubit(), hadamard_detail::mat_h2(),
                                 EventTag::measure, gd_));
    ev.insert(ev.end(), init_.begin(), init_.end());
    ev.insert(ev.end(), encode_.begin(), encode_.end());
    append_steps(ev, n_prep_steps);
    return ev;
  }

  Event controlled_on_impurity(Pauli p, bool anti) const {
    return Event::controlled_pauli_on(control_qubit(), lay_.impurity_qubit(), p,
                                      anti, EventTag::measure, gd_);
  }

  void append_steps(std::vector<Event>& ev, long n) const {
    for (long s = 0; s < n; ++s) {
      ev.insert(ev.end(), step_.begin(), step_.end());
      ev.push_back(Event::wait_for(base_.meta.t_wait));
    }
  }

  /// Decoding plus the probe tail for one (u2, k) variant.
  std::vector<Event> tail(Pauli u2, int k) const {
    std::vector<Event> ev = decode_;
    if (k == 1)
      ev.push_back(Event::unitary1(control_qubit(), hadamard_detail::mat_s2(),
                                   EventTag::measure, gd_));
    ev.push_back(controlled_on_impurity(u2, true));  // U2^dag = U2 for X, Y
    ev.push_back(Event::unitary1(control_qubit(), hadamard_detail::mat_h2(),
                                 EventTag::measure, gd_));
    return ev;
  }

 private:
  AncillaLayout lay_;
  double tau_;
  GateDurations gd_;
  CircuitSchedule base_;
  std::vector<Event> step_;
  std::vector<Event> init_, encode_, decode_;
};

/// Runs one plan end to end. Exact mode reads the measurement expectation off
/// the final density matrix; shot mode draws Bernoulli samples from it.
inline GFEstimate execute_plan(const HadamardPlan& plan,
                               const HadamardCircuit& circ,
                               EstimateMode mode = EstimateMode::exact_expectation,
                               long n_shots = 0, std::uint64_t seed = 1) {
  const long n_prep = std::lround(plan.t_prep / circ.tau());
  const long n_t = std::lround(plan.t / circ.tau());

  ScheduleRunner runner(circ.n_qubits(), circ.noise());
  runner.run(circ.head(n_prep));
  runner.step(circ.controlled_on_impurity(plan.u1, false));
  std::vector<Event> evolve;
  circ.append_steps(evolve, n_t);
  runner.run(evolve);
  runner.run(circ.tail(plan.u2, plan.k));
  runner.flush_all();

  const double value = hadamard_detail::control_z_expectation(
      runner.state(), circ.control_qubit(), circ.n_qubits());

  GFEstimate est;
  est.t = n_t * circ.tau();
  est.mode = mode;
  if (mode == EstimateMode::exact_expectation) {
    est.value = value;
    return est;
  }
  if (n_shots <= 0) throw std::invalid_argument("shot mode needs n_shots > 0");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(std::clamp(0.5 * (1.0 + value), 0.0, 1.0));
  long ones = 0;
  for (long s = 0; s < n_shots; ++s)
    if (flip(rng)) ++ones;
  const double phat = static_cast<double>(ones) / static_cast<double>(n_shots);
  est.value = 2.0 * phat - 1.0;
  est.n_shots = n_shots;
  est.stderr_value =
      2.0 * std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(n_shots));
  return est;
}

/// Weighted recombination of per-plan estimates into a Green's function
/// series. Plans must cover every (u1, u2, k) variant for each time.
inline GreenSeries assemble_gf(const std::vector<HadamardPlan>& plans,
                               const std::vector<GFEstimate>& estimates,
                               std::vector<double>* stderr_re = nullptr,
                               std::vector<double>* stderr_im = nullptr) {
  if (plans.size() != estimates.size())
    throw std::invalid_argument("plan/estimate length mismatch");
  std::vector<double> times;
  for (const auto& p : plans) {
    if (std::find(times.begin(), times.end(), p.t) == times.end())
      times.push_back(p.t);
  }
  std::sort(times.begin(), times.end());
  GreenSeries out;
  out.component = GfComponent::greater;
  out.provenance = Provenance::circuit;
  out.times = times;
  out.values.assign(times.size(), complex{0, 0});
  if (stderr_re) stderr_re->assign(times.size(), 0.0);
  if (stderr_im) stderr_im->assign(times.size(), 0.0);
  std::vector<int> seen(times.size(), 0);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto it = std::find(times.begin(), times.end(), plans[i].t);
    const std::size_t idx = static_cast<std::size_t>(it - times.begin());
    out.values[idx] += plans[i].weight * estimates[i].value;
    if (stderr_re && stderr_im) {
      // plans are measured independently, so variances add
      const double var = estimates[i].stderr_value * estimates[i].stderr_value;
      (*stderr_re)[idx] += plans[i].weight.real() * plans[i].weight.real() * var;
      (*stderr_im)[idx] += plans[i].weight.imag() * plans[i].weight.imag() * var;
    }
    ++seen[idx];
  }
  for (std::size_t idx = 0; idx < times.size(); ++idx) {
    if (seen[idx] != 8)
      throw std::invalid_argument("missing plan variants for one time point");
    if (stderr_re) (*stderr_re)[idx] = std::sqrt((*stderr_re)[idx]);
    if (stderr_im) (*stderr_im)[idx] = std::sqrt((*stderr_im)[idx]);
  }
  return out;
}

/// Exact-expectation curve over a time grid, sharing one evolution per inner
/// Pauli: the register advances once and the decode + probe tail runs on a
/// settled copy at every grid point. Bitwise equal to running execute_plan
/// per plan.
inline GreenSeries greater_gf_curve(const HadamardCircuit& circ, double t_prep,
                                    const std::vector<double>& times,
                                    std::vector<HadamardPlan>* plans_out = nullptr,
                                    std::vector<GFEstimate>* estimates_out = nullptr) {
  std::vector<long> steps;
  for (double t : times) {
    steps.push_back(std::lround(t / circ.tau()));
    if (steps.size() > 1 && steps.back() <= steps[steps.size() - 2])
      throw std::invalid_argument("time grid must map to increasing step counts");
  }
  const long n_prep = std::lround(t_prep / circ.tau());

  std::vector<HadamardPlan> plans;
  std::vector<GFEstimate> estimates;
  for (double t : times) {
    for (const HadamardPlan& p : plan_greater_gf(t_prep, t)) {
      plans.push_back(p);
      estimates.emplace_back();
    }
  }

  for (Pauli u1 : {Pauli::X, Pauli::Y}) {
    ScheduleRunner runner(circ.n_qubits(), circ.noise());
    runner.run(circ.head(n_prep));
    runner.step(circ.controlled_on_impurity(u1, false));
    long done = 0;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      std::vector<Event> ev;
      circ.append_steps(ev, steps[ti] - done);
      runner.run(ev);
      done = steps[ti];
      for (Pauli u2 : {Pauli::X, Pauli::Y}) {
        for (int k = 0; k < 2; ++k) {
          ScheduleRunner probe(circ.n_qubits(), circ.noise());
          probe.set_state(runner.settled_state());
          probe.run(circ.tail(u2, k));
          probe.flush_all();
          const double value = hadamard_detail::control_z_expectation(
              probe.state(), circ.control_qubit(), circ.n_qubits());
          for (std::size_t i = 0; i < plans.size(); ++i) {
            if (plans[i].u1 == u1 && plans[i].u2 == u2 && plans[i].k == k &&
                plans[i].t == times[ti]) {
              estimates[i].t = times[ti];
              estimates[i].value = value;
            }
          }
        }
      }
    }
  }
  GreenSeries out = assemble_gf(plans, estimates);
  if (plans_out) *plans_out = plans;
  if (estimates_out) *estimates_out = estimates;
  return out;
}

/// The same quantity without the probe qubit: the channel is linear, so
/// evolving S^+ rho directly and tracing against S^- reproduces the assembled
/// interferometric value exactly in exact-expectation mode.
inline GreenSeries direct_greater_gf(double imp_energy,
                                     const PseudomodeBath& bath,
                                     const AncillaLayout& lay, double tau,
                                     double t_prep,
                                     const std::vector<double>& times,
                                     double t1, GateDurations gd = {}) {
  CircuitSchedule base = schedule(imp_energy, bath, lay, tau, 0.0, 0.0, t1, gd);
  const std::vector<Event> step = trotter_step(imp_energy, bath, lay, tau, gd);
  const std::vector<Event> decode = decoding_circuit(lay, bath.parity, gd);
  const int n = lay.n_qubits();
  NoiseModel nm = noise_from_schedule(base);

  std::vector<long> steps;
  for (double t : times) steps.push_back(std::lround(t / tau));
  const long n_prep = std::lround(t_prep / tau);

  ScheduleRunner runner(n, nm);
  std::vector<Event> head;
  for (int p = 0; p < lay.n_bath; ++p)
    if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
      head.push_back(Event::x_on(lay.bath_qubit[static_cast<std::size_t>(p)],
                                 EventTag::init, gd));
  std::vector<Event> enc = encoding_circuit(lay, bath.parity, gd);
  head.insert(head.end(), enc.begin(), enc.end());
  runner.run(head);
  for (long s = 0; s < n_prep; ++s) {
    runner.run(step);
    runner.step(Event::wait_for(base.meta.t_wait));
  }
  runner.flush_all();

  // left-multiply by S^+ on the impurity (impurity ops commute with the
  // encoding); the matrix is no longer a state but the channel is linear
  {
    Eigen::MatrixXcd& m = runner.state();
    const long dim = 1L << n;
    const long im = 1L << (n - 1);
    for (long col = 0; col < dim; ++col) {
      complex* base_ptr = m.data() + col * dim;
      for (long i = dim - 1; i >= 0; --i)
        base_ptr[i] = (i & im) ? base_ptr[i & ~im] : complex{0, 0};
    }
  }
  // the interferometric circuit inserts the operator through a two-qubit
  // gate; mirror its wall-clock so both evaluations see the same noise
  runner.step(Event::wait_for(gd.two_qubit));

  GreenSeries out;
  out.component = GfComponent::greater;
  out.provenance = Provenance::circuit;
  out.times = times;
  out.values.reserve(times.size());
  long done = 0;
  const std::complex<double> mi{0, -1};
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (long s = done; s < steps[ti]; ++s) {
      runner.run(step);
      runner.step(Event::wait_for(base.meta.t_wait));
    }
    done = steps[ti];
    ScheduleRunner probe(n, nm);
    probe.set_state(runner.settled_state());
    probe.run(decode);
    probe.flush_all();
    // Tr(S^-_0 M) picks the lower-left impurity block diagonal
    const Eigen::MatrixXcd& m = probe.state();
    const long dim = 1L << n;
    const long im = 1L << (n - 1);
    complex tr{0, 0};
    for (long i = 0; i < dim; ++i)
      if (!(i & im)) tr += m(i | im, i);
    out.values.push_back(mi * tr);
  }
  return out;
}

/// Results file rows "t,re,im,stderr_re,stderr_im,mode".
inline std::string results_csv(const GreenSeries& g,
                               const std::vector<double>& stderr_re,
                               const std::vector<double>& stderr_im,
                               EstimateMode mode) {
  std::string out = "t,re,im,stderr_re,stderr_im,mode\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += green_detail::fmt_double(g.times[i]) + "," +
           green_detail::fmt_double(g.values[i].real()) + "," +
           green_detail::fmt_double(g.values[i].imag()) + "," +
           green_detail::fmt_double(i < stderr_re.size() ? stderr_re[i] : 0.0) + "," +
           green_detail::fmt_double(i < stderr_im.size() ? stderr_im[i] : 0.0) + "," +
           (mode == EstimateMode::exact_expectation ? "exact_expectation" : "shots") +
           "\n";
  }
  return out;
}

}  // namespace noisim
