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
#include <cstdio>
#include <random>

#include "noisim/density_matrix.hpp"
#include "noisim/lindblad.hpp"
#include "support/dense_circuit.hpp"
#include "support/dense_fermion.hpp"
#include "support/superop.hpp"

using namespace noisim;
namespace ts = testsupport;
using complexd = std::complex<double>;

namespace {

Eigen::MatrixXcd random_density(int n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const long dim = 1L << n;
  Eigen::MatrixXcd a(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) a(i, j) = complexd{g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace();
  return rho;
}

Event random_gate(int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_int_distribution<int> qd(0, n - 1);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
  const GateDurations gd;
  int q0 = qd(rng), q1 = qd(rng);
  while (q1 == q0) q1 = qd(rng);
  switch (pick(rng)) {
    case 0: return Event::x_on(q0, EventTag::phase, gd);
    case 1: return Event::cz_on(q0, q1, EventTag::phase, gd);
    case 2: return Event::cnot_on(q0, q1, EventTag::phase, gd);
    case 3: {
      const Pauli letters[3] = {Pauli::X, Pauli::Y, Pauli::Z};
      return Event::controlled_pauli_on(q0, q1, letters[pick(rng) % 3],
                                        pick(rng) % 2 == 0, EventTag::phase, gd);
    }
    case 4: {
      const double th = ang(rng);
      Eigen::Matrix2cd u;
      u << std::cos(th), complexd{0, -std::sin(th)}, complexd{0, -std::sin(th)},
          std::cos(th);
      return Event::unitary1(q0, u, EventTag::phase, gd);
    }
    default: {
      Eigen::Matrix4cd gen = Eigen::Matrix4cd::Zero();
      gen(1, 2) = complexd{0, ang(rng)};
      gen(2, 1) = std::conj(gen(1, 2));
      Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(gen);
      Eigen::Vector4cd ph;
      for (int i = 0; i < 4; ++i)
        ph(i) = std::exp(complexd{0, -es.eigenvalues()(i)});
      u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
      return Event::unitary2(q0, q1, u, EventTag::phase, gd);
    }
  }
}

}  // namespace

TEST_CASE("gate application basics", "[dm]") {
  SECTION("x flips a population") {
    DensityMatrix dm = DensityMatrix::zero_state(1);
    apply_gate(dm, Event::x_on(0, EventTag::init, {}));
    REQUIRE(std::abs(dm.data(1, 1) - complexd{1, 0}) < 1e-15);
    REQUIRE(std::abs(dm.data(0, 0)) < 1e-15);
  }
  SECTION("cz keeps a product of pluses pure") {
    DensityMatrix dm = DensityMatrix::zero_state(2);
    Eigen::Matrix2cd h = ts::mat_h();
    apply_gate(dm, Event::unitary1(0, h, EventTag::init, {}));
    apply_gate(dm, Event::unitary1(1, h, EventTag::init, {}));
    apply_gate(dm, Event::cz_on(0, 1, EventTag::init, {}));
    REQUIRE(dm.purity() == Approx(1.0).margin(1e-12));
    REQUIRE(dm.trace_error() < 1e-12);
  }
  SECTION("malformed payloads are rejected") {
    DensityMatrix dm = DensityMatrix::zero_state(1);
    Event e = Event::unitary1(0, Eigen::Matrix2cd::Identity() * 1.2,
                              EventTag::init, {});
    REQUIRE_THROWS_AS(apply_gate(dm, e), std::invalid_argument);
  }
}

TEST_CASE("all gate kinds match the dense oracle", "[dm][property]") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    Eigen::MatrixXcd rho = random_density(n, rng);
    Event e = random_gate(n, rng);
    Eigen::MatrixXcd expect;
    {
      Eigen::MatrixXcd u = ts::dense_event(e, n);
      expect = u * rho * u.adjoint();
    }
    Eigen::MatrixXcd got = rho;
    apply_gate(got, e, n);
    REQUIRE((got - expect).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(std::abs(got.trace() - rho.trace()) < 1e-12);
    REQUIRE((got - got.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("amplitude damping channel", "[dm]") {
  NoiseModel nm{100.0, {true, false}};

  SECTION("zero elapsed time is the identity") {
    std::mt19937 rng(5);
    Eigen::MatrixXcd rho = random_density(2, rng);
    Eigen::MatrixXcd before = rho;
    apply_damping(rho, 0, 0.0, nm, 2);
    REQUIRE((rho - before).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("textbook decay of the excited state") {
    DensityMatrix dm = DensityMatrix::zero_state(1);
    apply_gate(dm, Event::x_on(0, EventTag::init, {}));
    NoiseModel nm1{100.0, {true}};
    const double dt = 37.0;
    const double p = 1.0 - std::exp(-dt / 100.0);
    apply_damping(dm, 0, dt, nm1);
    REQUIRE(dm.data(1, 1).real() == Approx(1.0 - p).margin(1e-14));
    REQUIRE(dm.data(0, 0).real() == Approx(p).margin(1e-14));
  }
  SECTION("half life") {
    DensityMatrix dm = DensityMatrix::zero_state(1);
    apply_gate(dm, Event::x_on(0, EventTag::init, {}));
    NoiseModel nm1{100.0, {true}};
    apply_damping(dm, 0, 100.0 * std::log(2.0), nm1);
    REQUIRE(dm.data(1, 1).real() == Approx(0.5).margin(1e-12));
  }
  SECTION("masked qubits are untouched") {
    std::mt19937 rng(6);
    Eigen::MatrixXcd rho = random_density(2, rng);
    Eigen::MatrixXcd before = rho;
    apply_damping(rho, 1, 50.0, nm, 2);
    REQUIRE((rho - before).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("semigroup composition") {
    std::mt19937 rng(7);
    Eigen::MatrixXcd rho = random_density(2, rng);
    Eigen::MatrixXcd split = rho;
    apply_damping(split, 0, 12.0, nm, 2);
    apply_damping(split, 0, 30.0, nm, 2);
    Eigen::MatrixXcd whole = rho;
    apply_damping(whole, 0, 42.0, nm, 2);
    REQUIRE((split - whole).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("cptp on random states") {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 3;
      NoiseModel nmn{40.0, std::vector<bool>(static_cast<std::size_t>(n), true)};
      Eigen::MatrixXcd rho = random_density(n, rng);
      apply_damping(rho, trial % n, 5.0 + trial, nmn, n);
      REQUIRE(std::abs(rho.trace() - complexd{1, 0}) < 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
      REQUIRE(es.eigenvalues().minCoeff() > -1e-8);
    }
  }
}

TEST_CASE("lazy damping flush matches damping after every event", "[dm][property]") {
  std::mt19937 rng(31);
  const GateDurations gd;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3;
    NoiseModel nm{200.0, {true, true, false}};
    std::vector<Event> events;
    for (int k = 0; k < 12; ++k) {
      if (k % 4 == 3) events.push_back(Event::wait_for(15.0));
      else events.push_back(random_gate(n, rng));
    }

    ScheduleRunner runner(n, nm);
    runner.run(events);
    runner.flush_all();

    // naive reference: damp every noisy qubit after each event
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(8, 8);
    rho(0, 0) = 1.0;
    for (const Event& e : events) {
      if (!e.is_wait()) apply_gate(rho, e, n);
      for (int q = 0; q < n; ++q) apply_damping(rho, q, e.duration, nm, n);
    }
    REQUIRE((runner.state() - rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("schedule execution", "[dm]") {
  const HybridizationSpec spec;
  PseudomodeBath bath = fit_pseudomodes(spec, 2);
  AncillaLayout lay = make_layout(2, 1);

  SECTION("noise-free run stays pure") {
    CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, 0.3, 3.0, 0.0, 1e5);
    NoiseModel off{0.0, s.noisy};
    DensityMatrix dm = run_schedule(s, off);
    REQUIRE(dm.purity() == Approx(1.0).margin(1e-10));
    REQUIRE(dm.trace_error() < 1e-10);
  }
  SECTION("noiseless limit reproduces the bare circuit") {
    // short waits (built for T1 = 1e3) run under nearly noise-free hardware
    CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, 0.3, 0.3, 0.0, 1e3);
    NoiseModel weak{1e12, s.noisy};
    DensityMatrix noisy = run_schedule(s, weak);
    NoiseModel off{0.0, s.noisy};
    DensityMatrix pure = run_schedule(s, off);
    const double fidelity = (noisy.data * pure.data).trace().real() / pure.purity();
    REQUIRE(fidelity >= 1.0 - 1e-8);
  }
  SECTION("deterministic") {
    CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, 0.3, 1.5, 0.0, 1e5);
    NoiseModel nm = noise_from_schedule(s);
    DensityMatrix a = run_schedule(s, nm);
    DensityMatrix b = run_schedule(s, nm);
    REQUIRE(std::memcmp(a.data.data(), b.data.data(),
                        sizeof(complexd) * static_cast<std::size_t>(a.data.size())) == 0);
  }
  SECTION("rejects oversized registers") {
    CircuitSchedule s;
    s.n_qubits = 13;
    REQUIRE_THROWS_AS(run_schedule(s, NoiseModel{}), std::invalid_argument);
  }
}

TEST_CASE("one-step channel converges to the dissipative propagator",
          "[dm][trotter]") {
  const HybridizationSpec spec;
  PseudomodeBath bath = fit_pseudomodes(spec, 2);
  AncillaLayout lay = make_layout(2, 1);
  const int n = lay.n_qubits();  // 4: impurity, bath, ancilla, bath
  const double t1 = 1e9;        // waits dominate; gate-noise floor ~ 1e-8

  // many-body reference with the layout's jump operators
  ts::DenseLindblad ref;
  const long dim = 1L << n;
  ref.hamiltonian = Eigen::MatrixXcd::Zero(dim, dim);
  ref.hamiltonian += spec.impurity_energy * ts::dense_number(0, n);
  for (int p = 0; p < 2; ++p) {
    const int bq = lay.bath_qubit[p];
    ref.hamiltonian += bath.energies(p) * ts::dense_number(bq, n);
    Eigen::MatrixXcd hop = ts::dense_creation(0, n) * ts::dense_annihilation(bq, n);
    ref.hamiltonian += bath.couplings(p) * (hop + hop.adjoint().eval());
  }
  for (int p = 0; p < 2; ++p)
    ref.jumps.push_back(std::sqrt(bath.rate) *
                        jump_operator(lay, bath.parity, p).dense());
  ts::SuperopEvolver ev(ref.superop());

  // physical initial state: emitter filled
  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(dim, dim);
  rho0(4, 4) = 1.0;  // bits (imp, b0, anc, b1) = 0100

  auto one_step_error = [&](double tau) {
    CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, tau, tau, 0.0, t1);
    DensityMatrix dm = run_schedule(s, noise_from_schedule(s));
    Eigen::MatrixXcd expect = ev.apply_exp(rho0, tau);
    return (dm.data - expect).cwiseAbs().maxCoeff();
  };

  // the fitted two-mode bath is strongly damped (rate ~ 3.7), so the
  // quadratic regime needs rate*tau well below one
  const double e1 = one_step_error(0.05);
  const double e2 = one_step_error(0.025);
  REQUIRE(e1 < 0.01);
  const double order = std::log2(e1 / e2);
  REQUIRE(order > 1.6);
  REQUIRE(order < 2.6);
}

TEST_CASE("long preparation reaches the steady occupation", "[dm]") {
  const HybridizationSpec spec;
  PseudomodeBath bath = fit_pseudomodes(spec, 2);
  AncillaLayout lay = make_layout(2, 1);
  QuadraticLindblad ql = build_lindblad(spec.impurity_energy, bath);
  const double n_steady = steady_state(ql).r(0, 0).real();

  CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, 0.3, 30.0, 0.0, 1e5);
  DensityMatrix dm = run_schedule(s, noise_from_schedule(s));
  // impurity occupation = sum of populations with the impurity bit set
  double n_imp = 0.0;
  for (long i = 0; i < dm.data.rows(); ++i)
    if (i & (1L << (lay.n_qubits() - 1))) n_imp += dm.data(i, i).real();
  REQUIRE(n_imp == Approx(n_steady).margin(2e-2));
}

TEST_CASE("dissipation rate bookkeeping", "[dm]") {
  const HybridizationSpec spec;
  PseudomodeBath bath = fit_pseudomodes(spec, 8);
  AncillaLayout lay = make_layout(8, 1);
  CircuitSchedule s = schedule(spec.impurity_energy, bath, lay, 0.3, 30.0, 60.0, 1e5);
  REQUIRE(dissipation_rate_check(s) == Approx(bath.rate).margin(1e-12));

  // doubling T1 stretches the wait but leaves the harvested rate fixed
  CircuitSchedule s2 = schedule(spec.impurity_energy, bath, lay, 0.3, 30.0, 60.0, 2e5);
  REQUIRE(s2.meta.t_wait > s.meta.t_wait);
  REQUIRE(dissipation_rate_check(s2) == Approx(bath.rate).margin(1e-12));

  // a forced zero wait under-delivers
  CircuitSchedule s3 = s;
  s3.meta.t_wait = 0.0;
  REQUIRE(dissipation_rate_check(s3) < bath.rate);
}

TEST_CASE("binary state dump round trip", "[dm]") {
  std::mt19937 rng(77);
  DensityMatrix dm;
  dm.n_qubits = 3;
  dm.data = random_density(3, rng);
  const std::string path = "/tmp/noisim_state_test.bin";
  dump_state(dm, path);
  DensityMatrix back = load_state(path);
  REQUIRE(back.n_qubits == 3);
  REQUIRE((back.data - dm.data).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
