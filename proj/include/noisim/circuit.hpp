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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noisim/bath.hpp"
#include "noisim/pauli.hpp"

namespace noisim {

// ---------------------------------------------------------------------------
// Layout: impurity first, bath modes grouped into blocks of K consecutive
// modes, one buffer ancilla after each block except the last. Modes in the
// last block borrow the preceding ancilla so every damping operator keeps a
// Majorana partner.
// ---------------------------------------------------------------------------

struct AncillaLayout {
  int n_bath = 0;
  int n_anc = 0;
  int block_size = 0;  // K

  std::vector<int> bath_qubit;     // register index per bath mode
  std::vector<int> ancilla_qubit;  // register index per ancilla
  std::vector<int> block_of;       // block id per bath mode
  std::vector<int> partner;        // partner ancilla qubit per bath mode, -1 if none
  FermionOrdering ordering;

  int n_qubits() const { return 1 + n_bath + n_anc; }
  int impurity_qubit() const { return 0; }
  int n_blocks() const { return n_anc + 1; }
};

inline AncillaLayout make_layout(int n_bath, int n_anc) {
  if (n_bath < 1) throw std::invalid_argument("need at least one bath mode");
  if (n_anc < 0 || n_anc >= n_bath)
    throw std::invalid_argument("ancilla count must satisfy 0 <= N_anc < N_b");
  AncillaLayout lay;
  lay.n_bath = n_bath;
  lay.n_anc = n_anc;
  lay.block_size = (n_bath + n_anc) / (n_anc + 1);  // ceil(n_bath/(n_anc+1))
  const int k = lay.block_size;
  if ((n_bath + k - 1) / k != n_anc + 1)
    throw std::invalid_argument("bath size and ancilla count give uneven blocks");

  lay.bath_qubit.resize(static_cast<std::size_t>(n_bath));
  lay.ancilla_qubit.resize(static_cast<std::size_t>(n_anc));
  lay.block_of.resize(static_cast<std::size_t>(n_bath));
  lay.partner.assign(static_cast<std::size_t>(n_bath), -1);
  lay.ordering.roles.push_back(ModeRole::impurity);

  int qubit = 1;
  for (int p = 0; p < n_bath; ++p) {
    const int block = p / k;
    lay.block_of[static_cast<std::size_t>(p)] = block;
    lay.bath_qubit[static_cast<std::size_t>(p)] = qubit++;
    lay.ordering.roles.push_back(ModeRole::bath);
    const bool block_ends = (p + 1 == n_bath) || ((p + 1) % k == 0);
    if (block_ends && block < n_anc) {
      lay.ancilla_qubit[static_cast<std::size_t>(block)] = qubit++;
      lay.ordering.roles.push_back(ModeRole::ancilla);
    }
  }
  for (int p = 0; p < n_bath; ++p) {
    const int block = lay.block_of[static_cast<std::size_t>(p)];
    if (n_anc == 0) continue;
    const int a = std::min(block, n_anc - 1);  // last block borrows backward
    lay.partner[static_cast<std::size_t>(p)] =
        lay.ancilla_qubit[static_cast<std::size_t>(a)];
  }
  return lay;
}

// ---------------------------------------------------------------------------
// Events.
// ---------------------------------------------------------------------------

enum class EventType : std::uint8_t {
  wait,
  x,
  cz,
  cnot,
  controlled_pauli,
  single_qubit_unitary,
  two_qubit_unitary,
};

enum class EventTag : std::uint8_t {
  init,
  encode,
  decode,
  phase,
  coupling,
  cz_trick,
  measure,
};

struct GateDurations {
  double one_qubit = 1.0;
  double two_qubit = 10.0;
};

struct Event {
  EventType type = EventType::wait;
  EventTag tag = EventTag::phase;
  double duration = 0.0;
  int q0 = -1, q1 = -1;
  Eigen::Matrix2cd u1 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix4cd u2 = Eigen::Matrix4cd::Identity();
  Pauli cpauli = Pauli::I;
  bool anti_control = false;

  bool is_wait() const { return type == EventType::wait; }
  bool is_two_qubit() const {
    return type == EventType::cz || type == EventType::cnot ||
           type == EventType::controlled_pauli ||
           type == EventType::two_qubit_unitary;
  }

  static Event wait_for(double dt) {
    Event e;
    e.type = EventType::wait;
    e.duration = dt;
    return e;
  }
  static Event x_on(int q, EventTag tag, const GateDurations& gd) {
    Event e;
    e.type = EventType::x;
    e.tag = tag;
    e.q0 = q;
    e.duration = gd.one_qubit;
    return e;
  }
  static Event cz_on(int a, int b, EventTag tag, const GateDurations& gd) {
    Event e;
    e.type = EventType::cz;
    e.tag = tag;
    e.q0 = a;
    e.q1 = b;
    e.duration = gd.two_qubit;
    return e;
  }
  static Event cnot_on(int c, int t, EventTag tag, const GateDurations& gd) {
    Event e;
    e.type = EventType::cnot;
    e.tag = tag;
    e.q0 = c;
    e.q1 = t;
    e.duration = gd.two_qubit;
    return e;
  }
  static Event controlled_pauli_on(int c, int t, Pauli p, bool anti,
                                   EventTag tag, const GateDurations& gd) {
    Event e;
    e.type = EventType::controlled_pauli;
    e.tag = tag;
    e.q0 = c;
    e.q1 = t;
    e.cpauli = p;
    e.anti_control = anti;
    e.duration = gd.two_qubit;
    return e;
  }
  static Event unitary1(int q, const Eigen::Matrix2cd& u, EventTag tag,
                        const GateDurations& gd) {
    Event e;
    e.type = EventType::single_qubit_unitary;
    e.tag = tag;
    e.q0 = q;
    e.u1 = u;
    e.duration = gd.one_qubit;
    return e;
  }
  static Event unitary2(int a, int b, const Eigen::Matrix4cd& u, EventTag tag,
                        const GateDurations& gd) {
    Event e;
    e.type = EventType::two_qubit_unitary;
    e.tag = tag;
    e.q0 = a;
    e.q1 = b;
    e.u2 = u;
    e.duration = gd.two_qubit;
    return e;
  }
};

enum class QubitRole : std::uint8_t { impurity, bath, ancilla, control };

struct ScheduleMeta {
  double tau = 0.0;
  double rate = 0.0;  // harvested dissipation rate
  double t1 = 0.0;
  double t_trotter = 0.0;
  double t_wait = 0.0;
  double requested_t_prep = 0.0, realized_t_prep = 0.0;
  double requested_t = 0.0, realized_t = 0.0;
};

struct CircuitSchedule {
  int n_qubits = 0;
  std::vector<QubitRole> roles;
  std::vector<bool> noisy;
  std::vector<Event> events;
  ScheduleMeta meta;
};

// ---------------------------------------------------------------------------
// Jump operators and noise encoding.
// ---------------------------------------------------------------------------

/// Canonical damping target for bath mode p: the raising/lowering operator on
/// its qubit, a Z chain to the partner ancilla and X on that ancilla (a plain
/// Z chain to the end of the register when no ancilla exists). Equal, up to a
/// unit phase, to the Jordan-Wigner image of the mode operator times a
/// Majorana of the partner ancilla.
inline LadderTerm jump_operator(const AncillaLayout& lay,
                                const std::vector<ModeParity>& parity, int p) {
  if (p < 0 || p >= lay.n_bath) throw std::out_of_range("bath mode");
  const int n = lay.n_qubits();
  const int q = lay.bath_qubit[static_cast<std::size_t>(p)];
  const int a = lay.partner[static_cast<std::size_t>(p)];
  LadderTerm t;
  t.coefficient = 1.0;
  t.projector_qubit = q;
  t.raising = parity[static_cast<std::size_t>(p)] == ModeParity::emitter;
  t.tail = PauliString::identity(n);
  if (a < 0) {
    for (int r = q + 1; r < n; ++r) t.tail.at(r) = Pauli::Z;
  } else {
    t.tail.at(a) = Pauli::X;
    for (int r = std::min(q, a) + 1; r < std::max(q, a); ++r)
      t.tail.at(r) = Pauli::Z;
  }
  return t;
}

/// Gate list conjugating the bare lowering operator on one bath qubit into
/// that mode's jump operator: controlled copies of the tail letters, preceded
/// by X on emitter qubits.
inline std::vector<Event> mode_encoding(const AncillaLayout& lay,
                                        const std::vector<ModeParity>& parity,
                                        int p, const GateDurations& gd = {}) {
  std::vector<Event> ev;
  const int q = lay.bath_qubit[static_cast<std::size_t>(p)];
  if (parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
    ev.push_back(Event::x_on(q, EventTag::encode, gd));
  LadderTerm jump = jump_operator(lay, parity, p);
  for (int r = 0; r < lay.n_qubits(); ++r) {
    if (jump.tail.at(r) == Pauli::Z)
      ev.push_back(Event::cz_on(q, r, EventTag::encode, gd));
  }
  const int a = lay.partner[static_cast<std::size_t>(p)];
  if (a >= 0) ev.push_back(Event::cnot_on(q, a, EventTag::encode, gd));
  return ev;
}

/// Full noise encoding: the per-mode circuits in mode order.
inline std::vector<Event> encoding_circuit(const AncillaLayout& lay,
                                           const std::vector<ModeParity>& parity,
                                           const GateDurations& gd = {}) {
  if (parity.size() != static_cast<std::size_t>(lay.n_bath))
    throw std::invalid_argument("parity list size mismatch");
  std::vector<Event> ev;
  for (int p = 0; p < lay.n_bath; ++p) {
    std::vector<Event> one = mode_encoding(lay, parity, p, gd);
    ev.insert(ev.end(), one.begin(), one.end());
  }
  return ev;
}

inline std::vector<Event> decoding_circuit(const AncillaLayout& lay,
                                           const std::vector<ModeParity>& parity,
                                           const GateDurations& gd = {}) {
  std::vector<Event> ev = encoding_circuit(lay, parity, gd);
  std::reverse(ev.begin(), ev.end());
  for (Event& e : ev) e.tag = EventTag::decode;
  return ev;
}

// ---------------------------------------------------------------------------
// Encoded Hamiltonian.
// ---------------------------------------------------------------------------

namespace circuit_detail {

struct WeightedString {
  complex coef;
  PauliString op;
};

// Conjugates P -> U P U^dag for the Clifford part of an event list, in
// circuit order.
inline PauliString conj_by_events(PauliString p, const std::vector<Event>& evs) {
  for (const Event& e : evs) {
    switch (e.type) {
      case EventType::x: conj_x(p, e.q0); break;
      case EventType::cz: conj_cz(p, e.q0, e.q1); break;
      case EventType::cnot: conj_cnot(p, e.q0, e.q1); break;
      default:
        throw std::logic_error("conj_by_events: unsupported event");
    }
  }
  return p;
}

// Hamiltonian as a list of weighted Pauli strings; identity terms dropped.
inline void accumulate(std::vector<WeightedString>& terms, complex c,
                       const PauliString& p) {
  if (p.is_identity_letters()) return;
  for (auto& t : terms) {
    if (t.op.letters == p.letters) {
      t.coef += c * (p.phase / t.op.phase);
      return;
    }
  }
  WeightedString w{c * p.phase, p};
  w.op.phase = 1.0;
  terms.push_back(w);
}

inline void prune(std::vector<WeightedString>& terms, double tol = 1e-14) {
  std::erase_if(terms, [tol](const WeightedString& t) {
    return std::abs(t.coef) < tol;
  });
}

struct EncodedHamiltonian {
  // single-qubit Z coefficients: exp(-i tau sum_q z_coef[q] Z_q)
  std::vector<double> z_coef;
  // per bath mode, the two conjugated hopping strings
  std::vector<std::vector<WeightedString>> couplings;
};

inline EncodedHamiltonian encode_hamiltonian(double imp_energy,
                                             const PseudomodeBath& bath,
                                             const AncillaLayout& lay,
                                             const std::vector<Event>& encode) {
  const int n = lay.n_qubits();
  EncodedHamiltonian enc;
  enc.z_coef.assign(static_cast<std::size_t>(n), 0.0);

  // number operators: n_hat = (I - Z)/2; identity parts are global phase
  std::vector<WeightedString> zterms;
  accumulate(zterms, -0.5 * imp_energy,
             PauliString::single(n, lay.impurity_qubit(), Pauli::Z));
  for (int p = 0; p < lay.n_bath; ++p)
    accumulate(zterms, -0.5 * bath.energies(p),
               PauliString::single(n, lay.bath_qubit[static_cast<std::size_t>(p)],
                                   Pauli::Z));
  for (const auto& t : zterms) {
    PauliString img = conj_by_events(t.op, encode);
    std::vector<int> sup = img.support();
    if (sup.size() != 1 || img.at(sup[0]) != Pauli::Z)
      throw std::logic_error("number operator not diagonal after encoding");
    enc.z_coef[static_cast<std::size_t>(sup[0])] += (t.coef * img.phase).real();
  }

  // hopping terms V_p (d^dag c_p + c_p^dag d)
  for (int p = 0; p < lay.n_bath; ++p) {
    const int mode = 0;
    const int bmode = [&] {
      // register mode index of bath mode p equals its qubit (identity map)
      return lay.bath_qubit[static_cast<std::size_t>(p)];
    }();
    LadderTerm dimp = jw_annihilation(mode, lay.ordering);
    LadderTerm dbath = jw_annihilation(bmode, lay.ordering);
    std::vector<WeightedString> terms;
    for (const auto& [ca, pa] : dimp.dagger().expand())
      for (const auto& [cb, pb] : dbath.expand())
        accumulate(terms, bath.couplings(p) * ca * cb, pa * pb);
    for (const auto& [ca, pa] : dbath.dagger().expand())
      for (const auto& [cb, pb] : dimp.expand())
        accumulate(terms, bath.couplings(p) * ca * cb, pa * pb);
    prune(terms);
    std::vector<WeightedString> images;
    for (const auto& t : terms) {
      PauliString img = conj_by_events(t.op, encode);
      accumulate(images, t.coef * img.phase, [&] {
        PauliString s = img;
        s.phase = 1.0;
        return s;
      }());
    }
    prune(images);
    if (!images.empty() && images.size() != 2)
      throw std::logic_error("encoded hopping is not a two-string pair");
    for (const auto& t : images)
      if (std::abs(t.coef.imag()) > 1e-12)
        throw std::logic_error("encoded hopping lost hermiticity");
    enc.couplings.push_back(images);  // empty for decoupled modes
  }
  return enc;
}

}  // namespace circuit_detail

// ---------------------------------------------------------------------------
// Trotter step synthesis.
// ---------------------------------------------------------------------------

namespace circuit_detail {

inline Eigen::Matrix2cd phase_gate(double zcoef, double tau) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::exp(complex{0, -zcoef * tau});
  u(1, 1) = std::exp(complex{0, zcoef * tau});
  return u;
}

inline Eigen::Matrix2cd mat_h2() {
  Eigen::Matrix2cd m;
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Eigen::Matrix2cd mat_s2(bool dagger) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(1, 1) = dagger ? complex{0, -1} : complex{0, 1};
  return m;
}

// 4x4 matrix of a two-qubit Pauli pair exponential exp(-i tau (c1 P1 + c2 P2))
// with P1, P2 supported on the ordered qubit pair (q_low, q_high).
inline Eigen::Matrix4cd pair_rotation(const std::vector<WeightedString>& terms,
                                      int qa, int qb, double tau) {
  Eigen::Matrix4cd gen = Eigen::Matrix4cd::Zero();
  for (const auto& t : terms) {
    Eigen::Matrix2cd la = detail::letter_matrix(t.op.at(qa));
    Eigen::Matrix2cd lb = detail::letter_matrix(t.op.at(qb));
    Eigen::Matrix4cd kronm;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        kronm.block<2, 2>(2 * i, 2 * j) = la(i, j) * lb;
    gen += (t.coef * t.op.phase).real() * kronm;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(gen);
  Eigen::Vector4cd ph;
  for (int i = 0; i < 4; ++i)
    ph(i) = std::exp(complex{0, -tau * es.eigenvalues()(i)});
  return es.eigenvectors() * ph.asDiagonal() *
         es.eigenvectors().adjoint();
}

// Compiles exp(-i tau (c1 P1 + c2 P2)) for the encoded hopping pair of one
// bath mode: basis changes to Z on the tail, a CNOT fan-in onto one tail
// qubit, one CZ hooking it to the impurity, and the remaining two-qubit
// rotation. `conj_set` returns the stripped ancilla-Z qubits handled by the
// surrounding block CZs.
inline std::vector<Event> compile_coupling(
    const std::vector<WeightedString>& pair, const AncillaLayout& lay, int p,
    double tau, const GateDurations& gd, bool strip_ancilla_z,
    std::set<int>* conj_set) {
  const int imp = lay.impurity_qubit();
  const int q = lay.bath_qubit[static_cast<std::size_t>(p)];

  std::vector<WeightedString> work = pair;
  conj_set->clear();
  if (strip_ancilla_z) {
    for (int a = 0; a < lay.n_anc; ++a) {
      const int aq = lay.ancilla_qubit[static_cast<std::size_t>(a)];
      bool both_z = true;
      for (const auto& t : work)
        if (t.op.at(aq) != Pauli::Z) both_z = false;
      if (both_z) {
        conj_set->insert(aq);
        for (auto& t : work) t.op.at(aq) = Pauli::I;
      }
    }
  }

  // common tail away from the impurity and the bath qubit
  std::vector<int> tail;
  for (int r = 0; r < lay.n_qubits(); ++r) {
    if (r == imp || r == q) continue;
    const Pauli l0 = work[0].op.at(r);
    if (work.size() > 1 && work[1].op.at(r) != l0)
      throw std::logic_error("hopping strings disagree on the tail");
    if (l0 != Pauli::I) tail.push_back(r);
  }

  std::vector<Event> pre;
  for (int r : tail) {
    switch (work[0].op.at(r)) {
      case Pauli::Z: break;
      case Pauli::X:
        pre.push_back(Event::unitary1(r, mat_h2(), EventTag::coupling, gd));
        break;
      case Pauli::Y:
        pre.push_back(Event::unitary1(r, mat_s2(true), EventTag::coupling, gd));
        pre.push_back(Event::unitary1(r, mat_h2(), EventTag::coupling, gd));
        break;
      default:
        break;
    }
  }
  if (!tail.empty()) {
    const int pivot = tail.back();
    for (std::size_t i = 0; i + 1 < tail.size(); ++i)
      pre.push_back(Event::cnot_on(tail[i], pivot, EventTag::coupling, gd));
    pre.push_back(Event::cz_on(imp, pivot, EventTag::coupling, gd));
  }

  // conjugate the generator into the (imp, q) pair
  std::vector<WeightedString> core = work;
  for (auto& t : core) {
    for (const Event& e : pre) {
      switch (e.type) {
        case EventType::cz: conj_cz(t.op, e.q0, e.q1); break;
        case EventType::cnot: conj_cnot(t.op, e.q0, e.q1); break;
        case EventType::single_qubit_unitary:
          // H or S^dag by construction
          if (std::abs(e.u1(0, 1).real() - e.u1(0, 0).real()) < 1e-14 &&
              std::abs(e.u1(0, 0).real()) > 0.5)
            conj_h(t.op, e.q0);
          else
            conj_sdg(t.op, e.q0);
          break;
        default:
          throw std::logic_error("unexpected basis gate");
      }
    }
    for (int r = 0; r < lay.n_qubits(); ++r)
      if (r != imp && r != q && t.op.at(r) != Pauli::I)
        throw std::logic_error("coupling reduction left residual support");
  }

  // adjacent one-qubit basis gates on the same wire merge into one event
  std::vector<Event> fused;
  for (const Event& e : pre) {
    if (!fused.empty() && e.type == EventType::single_qubit_unitary &&
        fused.back().type == EventType::single_qubit_unitary &&
        fused.back().q0 == e.q0) {
      fused.back().u1 = Eigen::Matrix2cd(e.u1 * fused.back().u1);
      continue;
    }
    fused.push_back(e);
  }
  std::vector<Event> ev = fused;
  ev.push_back(Event::unitary2(imp, q, pair_rotation(core, imp, q, tau),
                               EventTag::coupling, gd));
  for (auto it = fused.rbegin(); it != fused.rend(); ++it) {
    Event e = *it;
    if (e.type == EventType::single_qubit_unitary)
      e.u1 = Eigen::Matrix2cd(e.u1.adjoint());
    ev.push_back(e);
  }
  return ev;
}

}  // namespace circuit_detail

/// One first-order Trotter step of the encoded Hamiltonian: single-qubit
/// phase rotations, then one compiled hopping block per bath mode. Ancilla Z
/// chains shared inside the hopping strings collapse into CZ gates between
/// the impurity and the ancillas, emitted at block boundaries plus a closing
/// group. With the last block sharing its partner ancilla this costs
/// 2 (N_anc - 1) gates per step; an all-forward layout would need 2 N_anc.
inline std::vector<Event> trotter_step(double imp_energy,
                                       const PseudomodeBath& bath,
                                       const AncillaLayout& lay, double tau,
                                       const GateDurations& gd = {},
                                       bool cz_trick = true) {
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  if (bath.size() != lay.n_bath)
    throw std::invalid_argument("bath/layout size mismatch");
  const std::vector<Event> enc = encoding_circuit(lay, bath.parity, gd);
  circuit_detail::EncodedHamiltonian ham =
      circuit_detail::encode_hamiltonian(imp_energy, bath, lay, enc);

  std::vector<Event> ev;
  for (int qb = 0; qb < lay.n_qubits(); ++qb) {
    if (ham.z_coef[static_cast<std::size_t>(qb)] != 0.0)
      ev.push_back(Event::unitary1(
          qb, circuit_detail::phase_gate(ham.z_coef[static_cast<std::size_t>(qb)], tau),
          EventTag::phase, gd));
  }

  std::set<int> active;
  for (int p = 0; p < lay.n_bath; ++p) {
    if (ham.couplings[static_cast<std::size_t>(p)].empty()) continue;
    std::set<int> need;
    std::vector<Event> body = circuit_detail::compile_coupling(
        ham.couplings[static_cast<std::size_t>(p)], lay, p, tau, gd, cz_trick,
        &need);
    // block transition: flip the symmetric difference of the conjugation sets
    std::vector<int> toggle;
    std::set_symmetric_difference(active.begin(), active.end(), need.begin(),
                                  need.end(), std::back_inserter(toggle));
    for (int aq : toggle)
      ev.push_back(Event::cz_on(lay.impurity_qubit(), aq, EventTag::cz_trick, gd));
    active = need;
    ev.insert(ev.end(), body.begin(), body.end());
  }
  for (int aq : active)
    ev.push_back(Event::cz_on(lay.impurity_qubit(), aq, EventTag::cz_trick, gd));
  return ev;
}

// ---------------------------------------------------------------------------
// Schedule.
// ---------------------------------------------------------------------------

inline double serialized_duration(const std::vector<Event>& evs) {
  double t = 0;
  for (const Event& e : evs) t += e.duration;
  return t;
}

/// Full program: emitter initialization, encoding, prepare + measure Trotter
/// steps each followed by the harvesting wait, and the decoding block.
/// The wait is tuned so that one step's amplitude damping matches the bath
/// dissipation semigroup over tau: (T_trotter + T_wait) / T1 = 2 rate tau.
inline CircuitSchedule schedule(double imp_energy, const PseudomodeBath& bath,
                                const AncillaLayout& lay, double tau,
                                double t_prep, double t, double t1,
                                const GateDurations& gd = {}) {
  if (t1 <= 0) throw std::invalid_argument("T1 must be positive");
  if (t_prep < 0 || t < 0) throw std::invalid_argument("negative time");
  CircuitSchedule sched;
  sched.n_qubits = lay.n_qubits();
  sched.roles.assign(static_cast<std::size_t>(sched.n_qubits), QubitRole::bath);
  sched.noisy.assign(static_cast<std::size_t>(sched.n_qubits), false);
  sched.roles[0] = QubitRole::impurity;
  for (int p = 0; p < lay.n_bath; ++p) {
    sched.roles[static_cast<std::size_t>(lay.bath_qubit[static_cast<std::size_t>(p)])] =
        QubitRole::bath;
    sched.noisy[static_cast<std::size_t>(lay.bath_qubit[static_cast<std::size_t>(p)])] =
        true;
  }
  for (int a = 0; a < lay.n_anc; ++a)
    sched.roles[static_cast<std::size_t>(lay.ancilla_qubit[static_cast<std::size_t>(a)])] =
        QubitRole::ancilla;

  const std::vector<Event> step = trotter_step(imp_energy, bath, lay, tau, gd);
  const double t_trotter = serialized_duration(step);
  const double t_wait = 2.0 * bath.rate * tau * t1 - t_trotter;
  if (t_wait < 0) {
    char msg[512];
    std::snprintf(msg, sizeof msg,
                  "dissipation rate %.6g below the floor %.6g = T_trotter/(2 T1 tau); "
                  "increase the Trotter step tau, increase T1, or reduce the "
                  "Trotter step execution time T_trotter",
                  bath.rate, t_trotter / (2.0 * t1 * tau));
    throw std::invalid_argument(msg);
  }

  const long n_prep = std::lround(t_prep / tau);
  const long n_t = std::lround(t / tau);
  sched.meta.tau = tau;
  sched.meta.rate = bath.rate;
  sched.meta.t1 = t1;
  sched.meta.t_trotter = t_trotter;
  sched.meta.t_wait = t_wait;
  sched.meta.requested_t_prep = t_prep;
  sched.meta.realized_t_prep = n_prep * tau;
  sched.meta.requested_t = t;
  sched.meta.realized_t = n_t * tau;

  for (int p = 0; p < lay.n_bath; ++p)
    if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
      sched.events.push_back(Event::x_on(
          lay.bath_qubit[static_cast<std::size_t>(p)], EventTag::init, gd));
  const std::vector<Event> enc = encoding_circuit(lay, bath.parity, gd);
  sched.events.insert(sched.events.end(), enc.begin(), enc.end());
  for (long k = 0; k < n_prep + n_t; ++k) {
    sched.events.insert(sched.events.end(), step.begin(), step.end());
    sched.events.push_back(Event::wait_for(t_wait));
  }
  const std::vector<Event> dec = decoding_circuit(lay, bath.parity, gd);
  sched.events.insert(sched.events.end(), dec.begin(), dec.end());
  return sched;
}

// ---------------------------------------------------------------------------
// Gate counting.
// ---------------------------------------------------------------------------

struct GateCountReport {
  long encoding_two_qubit = 0;
  long coupling_two_qubit = 0;  // per Trotter step
  long cz_trick = 0;            // per Trotter step
  long phase_one_qubit = 0;     // per Trotter step
  long step_two_qubit = 0;      // per Trotter step, all categories
  long total_two_qubit = 0;     // whole schedule
  double t_trotter = 0.0;
};

inline GateCountReport gate_counts(const CircuitSchedule& sched) {
  GateCountReport r;
  r.t_trotter = sched.meta.t_trotter;
  bool in_first_step = false;
  bool first_step_done = false;
  for (const Event& e : sched.events) {
    if (e.is_wait()) {
      if (in_first_step) first_step_done = true;
      in_first_step = false;
      continue;
    }
    if (e.is_two_qubit()) ++r.total_two_qubit;
    switch (e.tag) {
      case EventTag::encode:
        if (e.is_two_qubit()) ++r.encoding_two_qubit;
        break;
      case EventTag::phase:
      case EventTag::coupling:
      case EventTag::cz_trick:
        if (!first_step_done) {
          in_first_step = true;
          if (e.tag == EventTag::cz_trick) ++r.cz_trick;
          else if (e.is_two_qubit()) ++r.coupling_two_qubit;
          if (e.tag == EventTag::phase) ++r.phase_one_qubit;
          if (e.is_two_qubit()) ++r.step_two_qubit;
        }
        break;
      default:
        break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text dump.
// ---------------------------------------------------------------------------

namespace circuit_detail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void dump_matrix(std::string& out, const Eigen::MatrixXcd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      out += (i == 0 && j == 0) ? "" : ",";
      out += fmt(m(i, j).real()) + "," + fmt(m(i, j).imag());
    }
}

}  // namespace circuit_detail

inline std::string dump_schedule(const CircuitSchedule& sched) {
  std::string out;
  out += "QUBITS " + std::to_string(sched.n_qubits) + "\n";
  for (int q = 0; q < sched.n_qubits; ++q) {
    const char* role = "bath";
    switch (sched.roles[static_cast<std::size_t>(q)]) {
      case QubitRole::impurity: role = "impurity"; break;
      case QubitRole::bath: role = "bath"; break;
      case QubitRole::ancilla: role = "ancilla"; break;
      case QubitRole::control: role = "control"; break;
    }
    out += "ROLE " + std::to_string(q) + " " + role + "\n";
  }
  for (int q = 0; q < sched.n_qubits; ++q)
    out += "NOISY " + std::to_string(q) + " " +
           (sched.noisy[static_cast<std::size_t>(q)] ? "1" : "0") + "\n";
  for (const Event& e : sched.events) {
    if (e.is_wait()) {
      out += "WAIT dur=" + circuit_detail::fmt(e.duration) + "\n";
      continue;
    }
    out += "GATE ";
    std::string params;
    switch (e.type) {
      case EventType::x: out += "x q=" + std::to_string(e.q0); break;
      case EventType::cz:
        out += "cz q=" + std::to_string(e.q0) + "," + std::to_string(e.q1);
        break;
      case EventType::cnot:
        out += "cnot q=" + std::to_string(e.q0) + "," + std::to_string(e.q1);
        break;
      case EventType::controlled_pauli:
        out += "controlled_pauli q=" + std::to_string(e.q0) + "," +
               std::to_string(e.q1);
        params = std::string(1, pauli_char(e.cpauli)) + "," +
                 (e.anti_control ? "1" : "0");
        break;
      case EventType::single_qubit_unitary:
        out += "single_qubit_unitary q=" + std::to_string(e.q0);
        circuit_detail::dump_matrix(params, e.u1);
        break;
      case EventType::two_qubit_unitary:
        out += "two_qubit_unitary q=" + std::to_string(e.q0) + "," +
               std::to_string(e.q1);
        circuit_detail::dump_matrix(params, e.u2);
        break;
      case EventType::wait: break;
    }
    out += " dur=" + circuit_detail::fmt(e.duration);
    if (!params.empty()) out += " params=" + params;
    out += "\n";
  }
  return out;
}

inline CircuitSchedule parse_schedule(const std::string& text) {
  CircuitSchedule sched;
  std::istringstream in(text);
  std::string line;
  auto parse_qubits = [](const std::string& spec, int* a, int* b) {
    const auto comma = spec.find(',');
    *a = std::stoi(spec.substr(0, comma));
    *b = comma == std::string::npos ? -1 : std::stoi(spec.substr(comma + 1));
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "QUBITS") {
      ls >> sched.n_qubits;
      sched.roles.assign(static_cast<std::size_t>(sched.n_qubits), QubitRole::bath);
      sched.noisy.assign(static_cast<std::size_t>(sched.n_qubits), false);
    } else if (word == "ROLE") {
      int q;
      std::string role;
      ls >> q >> role;
      QubitRole r = QubitRole::bath;
      if (role == "impurity") r = QubitRole::impurity;
      else if (role == "ancilla") r = QubitRole::ancilla;
      else if (role == "control") r = QubitRole::control;
      sched.roles.at(static_cast<std::size_t>(q)) = r;
    } else if (word == "NOISY") {
      int q, flag;
      ls >> q >> flag;
      sched.noisy.at(static_cast<std::size_t>(q)) = flag != 0;
    } else if (word == "WAIT") {
      std::string dur;
      ls >> dur;
      sched.events.push_back(Event::wait_for(std::stod(dur.substr(4))));
    } else if (word == "GATE") {
      std::string kind, qspec, durspec, paramspec;
      ls >> kind >> qspec >> durspec;
      std::getline(ls, paramspec);
      if (!paramspec.empty()) {
        const auto pos = paramspec.find("params=");
        paramspec = pos == std::string::npos ? "" : paramspec.substr(pos + 7);
      }
      Event e;
      parse_qubits(qspec.substr(2), &e.q0, &e.q1);
      e.duration = std::stod(durspec.substr(4));
      auto read_values = [&paramspec] {
        std::vector<double> vals;
        std::istringstream ps(paramspec);
        std::string tok;
        while (std::getline(ps, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
      };
      if (kind == "x") e.type = EventType::x;
      else if (kind == "cz") e.type = EventType::cz;
      else if (kind == "cnot") e.type = EventType::cnot;
      else if (kind == "controlled_pauli") {
        e.type = EventType::controlled_pauli;
        e.cpauli = pauli_from_char(paramspec.at(0));
        e.anti_control = paramspec.at(2) == '1';
      } else if (kind == "single_qubit_unitary") {
        e.type = EventType::single_qubit_unitary;
        const auto vals = read_values();
        if (vals.size() != 8) throw std::invalid_argument("bad 1q payload");
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            e.u1(i, j) = complex{vals[static_cast<std::size_t>(2 * (2 * i + j))],
                                 vals[static_cast<std::size_t>(2 * (2 * i + j) + 1)]};
      } else if (kind == "two_qubit_unitary") {
        e.type = EventType::two_qubit_unitary;
        const auto vals = read_values();
        if (vals.size() != 32) throw std::invalid_argument("bad 2q payload");
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            e.u2(i, j) = complex{vals[static_cast<std::size_t>(2 * (4 * i + j))],
                                 vals[static_cast<std::size_t>(2 * (4 * i + j) + 1)]};
      } else {
        throw std::invalid_argument("unknown gate kind: " + kind);
      }
      sched.events.push_back(e);
    } else {
      throw std::invalid_argument("unknown line: " + line);
    }
  }
  return sched;
}

}  // namespace noisim
