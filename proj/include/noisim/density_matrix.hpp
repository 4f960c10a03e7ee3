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
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "noisim/circuit.hpp"

namespace noisim {

inline constexpr int kDenseQubitLimit = 12;

/// Dense density matrix; qubit 0 is the most significant index bit.
struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd data;

  static DensityMatrix zero_state(int n) {
    if (n < 1 || n > kDenseQubitLimit)
      throw std::invalid_argument("qubit count outside dense limit");
    DensityMatrix dm;
    dm.n_qubits = n;
    dm.data = Eigen::MatrixXcd::Zero(1L << n, 1L << n);
    dm.data(0, 0) = 1.0;
    return dm;
  }

  double trace_error() const { return std::abs(data.trace() - complex{1, 0}); }
  double hermiticity_error() const {
    return (data - data.adjoint()).cwiseAbs().maxCoeff();
  }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (data + data.adjoint()));
    return es.eigenvalues().minCoeff();
  }
  double purity() const { return (data * data).trace().real(); }
};

/// Amplitude-damping environment: decay probability 1 - e^{-dt/T1} on the
/// masked qubits.
struct NoiseModel {
  double t1 = 0.0;  // <= 0 disables noise entirely
  std::vector<bool> noisy;

  double damping_probability(double dt) const {
    if (t1 <= 0 || dt <= 0) return 0.0;
    return 1.0 - std::exp(-dt / t1);
  }
  bool is_noisy(int q) const {
    return q >= 0 && q < static_cast<int>(noisy.size()) &&
           noisy[static_cast<std::size_t>(q)];
  }
};

inline NoiseModel noise_from_schedule(const CircuitSchedule& sched) {
  return NoiseModel{sched.meta.t1, sched.noisy};
}

// ---------------------------------------------------------------------------
// Gate application (works on any matrix of the register dimension; density
// matrices are the usual case).
// ---------------------------------------------------------------------------

namespace dm_detail {

inline long mask_of(int q, int n) { return 1L << (n - 1 - q); }

inline void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw std::out_of_range("qubit index");
}

// diagonal one-qubit gate: entry (i, j) picks up d_i conj(d_j)
inline void conj_diagonal_one_qubit(Eigen::MatrixXcd& m, const Eigen::Matrix2cd& u,
                                    int q, int n) {
  const long dim = 1L << n;
  const long qm = mask_of(q, n);
  for (long col = 0; col < dim; ++col) {
    const complex fc = std::conj((col & qm) ? u(1, 1) : u(0, 0));
    complex* base = m.data() + col * dim;
    const complex f0 = u(0, 0) * fc;
    const complex f1 = u(1, 1) * fc;
    for (long i = 0; i < dim; ++i) base[i] *= (i & qm) ? f1 : f0;
  }
}

// rho -> U rho U^dag for a one-qubit unitary; one traversal over column
// pairs keeps the update memory-bound at a single read+write of the matrix
inline void conj_one_qubit(Eigen::MatrixXcd& m, const Eigen::Matrix2cd& u,
                           int q, int n) {
  if (std::abs(u(0, 1)) == 0.0 && std::abs(u(1, 0)) == 0.0) {
    conj_diagonal_one_qubit(m, u, q, n);
    return;
  }
  const long dim = 1L << n;
  const long qm = mask_of(q, n);
  const Eigen::Matrix2cd ud = u.adjoint();
  for (long col = 0; col < dim; ++col) {
    if (col & qm) continue;
    complex* c0 = m.data() + col * dim;
    complex* c1 = m.data() + (col | qm) * dim;
    for (long i = 0; i < dim; ++i) {
      if (i & qm) continue;
      const long i1 = i | qm;
      const complex a00 = c0[i], a10 = c0[i1];
      const complex a01 = c1[i], a11 = c1[i1];
      // rows first (U on the left), then columns (U^dag on the right)
      const complex b00 = u(0, 0) * a00 + u(0, 1) * a10;
      const complex b10 = u(1, 0) * a00 + u(1, 1) * a10;
      const complex b01 = u(0, 0) * a01 + u(0, 1) * a11;
      const complex b11 = u(1, 0) * a01 + u(1, 1) * a11;
      c0[i] = b00 * ud(0, 0) + b01 * ud(1, 0);
      c1[i] = b00 * ud(0, 1) + b01 * ud(1, 1);
      c0[i1] = b10 * ud(0, 0) + b11 * ud(1, 0);
      c1[i1] = b10 * ud(0, 1) + b11 * ud(1, 1);
    }
  }
}

// number-conserving-plus-pairing pattern: the (00,11) and (01,10) sectors
// mix only among themselves, as produced by the hopping rotations
inline bool is_checkerboard(const Eigen::Matrix4cd& u) {
  static const int off[8][2] = {{0, 1}, {0, 2}, {1, 0}, {1, 3},
                                {2, 0}, {2, 3}, {3, 1}, {3, 2}};
  for (const auto& o : off)
    if (std::abs(u(o[0], o[1])) > 1e-15) return false;
  return true;
}

inline void conj_checkerboard_two_qubit(Eigen::MatrixXcd& m,
                                        const Eigen::Matrix4cd& u, int qa,
                                        int qb, int n) {
  const long dim = 1L << n;
  const long am = mask_of(qa, n), bm = mask_of(qb, n);
  const long offs[4] = {0, bm, am, am | bm};
  // sector pairs: outer {0,3}, inner {1,2}
  const complex p00 = u(0, 0), p01 = u(0, 3), p10 = u(3, 0), p11 = u(3, 3);
  const complex q00 = u(1, 1), q01 = u(1, 2), q10 = u(2, 1), q11 = u(2, 2);
  const Eigen::Matrix4cd ud = u.adjoint();
  const complex d00 = ud(0, 0), d01 = ud(0, 3), d10 = ud(3, 0), d11 = ud(3, 3);
  const complex e00 = ud(1, 1), e01 = ud(1, 2), e10 = ud(2, 1), e11 = ud(2, 2);
  for (long col = 0; col < dim; ++col) {
    if (col & (am | bm)) continue;
    complex* cols[4];
    for (int k = 0; k < 4; ++k) cols[k] = m.data() + (col | offs[k]) * dim;
    for (long i = 0; i < dim; ++i) {
      if (i & (am | bm)) continue;
      complex v[4][4];
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) v[r][c] = cols[c][i | offs[r]];
      complex w[4][4];
      for (int c = 0; c < 4; ++c) {
        w[0][c] = p00 * v[0][c] + p01 * v[3][c];
        w[3][c] = p10 * v[0][c] + p11 * v[3][c];
        w[1][c] = q00 * v[1][c] + q01 * v[2][c];
        w[2][c] = q10 * v[1][c] + q11 * v[2][c];
      }
      for (int r = 0; r < 4; ++r) {
        const complex w0 = w[r][0], w1 = w[r][1], w2 = w[r][2], w3 = w[r][3];
        cols[0][i | offs[r]] = w0 * d00 + w3 * d10;
        cols[3][i | offs[r]] = w0 * d01 + w3 * d11;
        cols[1][i | offs[r]] = w1 * e00 + w2 * e10;
        cols[2][i | offs[r]] = w1 * e01 + w2 * e11;
      }
    }
  }
}

inline void conj_two_qubit_gate(Eigen::MatrixXcd& m, const Eigen::Matrix4cd& u,
                                int qa, int qb, int n) {
  if (is_checkerboard(u)) {
    conj_checkerboard_two_qubit(m, u, qa, qb, n);
    return;
  }
  const long dim = 1L << n;
  const long am = mask_of(qa, n), bm = mask_of(qb, n);
  const long offs[4] = {0, bm, am, am | bm};
  const Eigen::Matrix4cd ud = u.adjoint();
  for (long col = 0; col < dim; ++col) {
    if (col & (am | bm)) continue;
    complex* cols[4];
    for (int k = 0; k < 4; ++k) cols[k] = m.data() + (col | offs[k]) * dim;
    for (long i = 0; i < dim; ++i) {
      if (i & (am | bm)) continue;
      complex block[4][4];
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) block[r][c] = cols[c][i | offs[r]];
      complex rowmix[4][4];
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          complex acc{0, 0};
          for (int l = 0; l < 4; ++l) acc += u(r, l) * block[l][c];
          rowmix[r][c] = acc;
        }
      }
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          complex acc{0, 0};
          for (int l = 0; l < 4; ++l) acc += rowmix[r][l] * ud(l, c);
          cols[c][i | offs[r]] = acc;
        }
      }
    }
  }
}

// X: symmetric permutation of rows and columns, one traversal
inline void conj_x_gate(Eigen::MatrixXcd& m, int q, int n) {
  const long dim = 1L << n;
  const long qm = mask_of(q, n);
  for (long col = 0; col < dim; ++col) {
    if (col & qm) continue;
    complex* c0 = m.data() + col * dim;
    complex* c1 = m.data() + (col | qm) * dim;
    for (long i = 0; i < dim; ++i) {
      if (i & qm) continue;
      const long i1 = i | qm;
      const complex a00 = c0[i], a10 = c0[i1], a01 = c1[i], a11 = c1[i1];
      c0[i] = a11;
      c0[i1] = a01;
      c1[i] = a10;
      c1[i1] = a00;
    }
  }
}

inline void conj_cz_gate(Eigen::MatrixXcd& m, int qa, int qb, int n) {
  const long dim = 1L << n;
  const long am = mask_of(qa, n), bm = mask_of(qb, n);
  const long both = am | bm;
  for (long col = 0; col < dim; ++col) {
    const bool sc = (col & both) == both;
    complex* base = m.data() + col * dim;
    for (long i = 0; i < dim; ++i) {
      const bool si = (i & both) == both;
      if (si != sc) base[i] = -base[i];
    }
  }
}

inline void conj_cnot_gate(Eigen::MatrixXcd& m, int qc, int qt, int n) {
  const long dim = 1L << n;
  const long cm = mask_of(qc, n), tm = mask_of(qt, n);
  // permutes rows and columns with the control bit set, one traversal
  for (long col = 0; col < dim; ++col) {
    if (col & cm) {
      if (col & tm) continue;  // handled with its pair column
      complex* c0 = m.data() + col * dim;
      complex* c1 = m.data() + (col | tm) * dim;
      for (long i = 0; i < dim; ++i) {
        if (i & cm) {
          if (i & tm) continue;  // partner row, handled below
          const long i1 = i | tm;
          const complex a00 = c0[i], a10 = c0[i1], a01 = c1[i], a11 = c1[i1];
          c0[i] = a11;
          c0[i1] = a01;
          c1[i] = a10;
          c1[i1] = a00;
        } else {
          std::swap(c0[i], c1[i]);
        }
      }
    } else {
      complex* base = m.data() + col * dim;
      for (long i = 0; i < dim; ++i)
        if ((i & cm) && !(i & tm)) std::swap(base[i], base[i | tm]);
    }
  }
}

inline void check_unitary2(const Eigen::Matrix2cd& u) {
  if ((u * u.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() >
      1e-10)
    throw std::invalid_argument("malformed one-qubit unitary payload");
}

inline void check_unitary4(const Eigen::Matrix4cd& u) {
  if ((u * u.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() >
      1e-10)
    throw std::invalid_argument("malformed two-qubit unitary payload");
}

}  // namespace dm_detail

/// Applies one gate event, rho -> U rho U^dag.
inline void apply_gate(Eigen::MatrixXcd& m, const Event& e, int n) {
  using namespace dm_detail;
  switch (e.type) {
    case EventType::wait:
      throw std::invalid_argument("wait is not a gate");
    case EventType::x:
      check_qubit(e.q0, n);
      conj_x_gate(m, e.q0, n);
      break;
    case EventType::cz:
      check_qubit(e.q0, n);
      check_qubit(e.q1, n);
      conj_cz_gate(m, e.q0, e.q1, n);
      break;
    case EventType::cnot:
      check_qubit(e.q0, n);
      check_qubit(e.q1, n);
      conj_cnot_gate(m, e.q0, e.q1, n);
      break;
    case EventType::controlled_pauli: {
      check_qubit(e.q0, n);
      check_qubit(e.q1, n);
      Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
      const Eigen::Matrix2cd p = detail::letter_matrix(e.cpauli);
      if (e.anti_control) u.block<2, 2>(0, 0) = p;
      else u.block<2, 2>(2, 2) = p;
      conj_two_qubit_gate(m, u, e.q0, e.q1, n);
      break;
    }
    case EventType::single_qubit_unitary:
      check_qubit(e.q0, n);
      check_unitary2(e.u1);
      conj_one_qubit(m, e.u1, e.q0, n);
      break;
    case EventType::two_qubit_unitary:
      check_qubit(e.q0, n);
      check_qubit(e.q1, n);
      check_unitary4(e.u2);
      conj_two_qubit_gate(m, e.u2, e.q0, e.q1, n);
      break;
  }
}

inline void apply_gate(DensityMatrix& dm, const Event& e) {
  apply_gate(dm.data, e, dm.n_qubits);
}

/// Amplitude damping of strength p = 1 - e^{-dt/T1} on one qubit:
/// Kraus pair diag(1, sqrt(1-p)) and sqrt(p) |0><1|. No-op off the mask.
inline void apply_damping(Eigen::MatrixXcd& m, int q, double dt,
                          const NoiseModel& nm, int n) {
  dm_detail::check_qubit(q, n);
  if (!nm.is_noisy(q) || dt <= 0) return;
  const double p = nm.damping_probability(dt);
  if (p == 0.0) return;
  const double s = std::sqrt(1.0 - p);
  const long dim = 1L << n;
  const long qm = dm_detail::mask_of(q, n);
  for (long col = 0; col < dim; ++col) {
    if (col & qm) continue;
    complex* c0 = m.data() + col * dim;
    complex* c1 = m.data() + (col | qm) * dim;
    for (long i = 0; i < dim; ++i) {
      if (i & qm) continue;
      const long i1 = i | qm;
      c0[i] += p * c1[i1];      // decay feeds the ground population
      c0[i1] *= s;              // coherences shrink
      c1[i] *= s;
      c1[i1] *= 1.0 - p;
    }
  }
}

inline void apply_damping(DensityMatrix& dm, int q, double dt,
                          const NoiseModel& nm) {
  apply_damping(dm.data, q, dt, nm, dm.n_qubits);
}

// ---------------------------------------------------------------------------
// Schedule execution.
// ---------------------------------------------------------------------------

/// Streams events into a register matrix. Damping commutes with gates on
/// other qubits, so per-qubit elapsed noise is accumulated lazily and flushed
/// only when a gate touches the qubit (and at extraction points); the
/// realized channel is identical to damping after every event.
class ScheduleRunner {
 public:
  ScheduleRunner(int n_qubits, NoiseModel nm)
      : n_(n_qubits), nm_(std::move(nm)),
        pending_(static_cast<std::size_t>(n_qubits), 0.0) {
    if (n_qubits > kDenseQubitLimit)
      throw std::invalid_argument("qubit count outside dense limit");
    state_ = Eigen::MatrixXcd::Zero(1L << n_, 1L << n_);
    state_(0, 0) = 1.0;
  }

  void set_state(const Eigen::MatrixXcd& m) { state_ = m; }

  void run(const std::vector<Event>& events) {
    for (const Event& e : events) step(e);
  }

  void step(const Event& e) {
    if (e.is_wait()) {
      add_elapsed(e.duration);
      return;
    }
    flush(e.q0);
    flush(e.q1);
    apply_gate(state_, e, n_);
    add_elapsed(e.duration);
  }

  void flush_all() {
    for (int q = 0; q < n_; ++q) flush(q);
  }

  /// State with all pending noise applied; the running state is untouched.
  Eigen::MatrixXcd settled_state() const {
    Eigen::MatrixXcd m = state_;
    for (int q = 0; q < n_; ++q) {
      if (pending_[static_cast<std::size_t>(q)] > 0)
        apply_damping(m, q, pending_[static_cast<std::size_t>(q)], nm_, n_);
    }
    return m;
  }

  Eigen::MatrixXcd& state() { return state_; }
  int n_qubits() const { return n_; }
  const NoiseModel& noise() const { return nm_; }

 private:
  void add_elapsed(double dt) {
    if (dt <= 0) return;
    for (int q = 0; q < n_; ++q)
      if (nm_.is_noisy(q)) pending_[static_cast<std::size_t>(q)] += dt;
  }
  void flush(int q) {
    if (q < 0) return;
    double& dt = pending_[static_cast<std::size_t>(q)];
    if (dt > 0) {
      apply_damping(state_, q, dt, nm_, n_);
      dt = 0;
    }
  }

  int n_;
  NoiseModel nm_;
  Eigen::MatrixXcd state_;
  std::vector<double> pending_;
};

/// Runs a schedule from |0...0> under the given noise model.
inline DensityMatrix run_schedule(const CircuitSchedule& sched,
                                  const NoiseModel& nm) {
  ScheduleRunner runner(sched.n_qubits, nm);
  runner.run(sched.events);
  runner.flush_all();
  DensityMatrix dm;
  dm.n_qubits = sched.n_qubits;
  dm.data = runner.state();
  return dm;
}

/// Realized harvested dissipation rate (T_trotter + T_wait) / (2 T1 tau).
inline double dissipation_rate_check(const CircuitSchedule& sched) {
  return (sched.meta.t_trotter + sched.meta.t_wait) /
         (2.0 * sched.meta.t1 * sched.meta.tau);
}

// ---------------------------------------------------------------------------
// Binary state dump: 8-byte qubit count then 2^{2n} little-endian complex
// doubles, row-major.
// ---------------------------------------------------------------------------

inline void dump_state(const DensityMatrix& dm, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(dm.n_qubits);
  f.write(reinterpret_cast<const char*>(&n), 8);
  const long dim = 1L << dm.n_qubits;
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      const double re = dm.data(i, j).real(), im = dm.data(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), 8);
      f.write(reinterpret_cast<const char*>(&im), 8);
    }
  }
}

inline DensityMatrix load_state(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), 8);
  DensityMatrix dm;
  dm.n_qubits = static_cast<int>(n);
  const long dim = 1L << dm.n_qubits;
  dm.data.resize(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      double re = 0, im = 0;
      f.read(reinterpret_cast<char*>(&re), 8);
      f.read(reinterpret_cast<char*>(&im), 8);
      dm.data(i, j) = {re, im};
    }
  }
  if (!f) throw std::runtime_error("truncated state file");
  return dm;
}

}  // namespace noisim
