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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace noisim {

using complex = std::complex<double>;

/// Single-qubit Pauli letter.
enum class Pauli : std::uint8_t { I, X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
  }
  throw std::invalid_argument("unknown Pauli letter");
}

namespace detail {

// a*b = phase * letter, e.g. X*Y = i Z.
struct LetterProduct {
  Pauli letter;
  complex phase;
};

inline LetterProduct mul_letters(Pauli a, Pauli b) {
  static const complex one{1, 0}, pi{0, 1}, mi{0, -1};
  if (a == Pauli::I) return {b, one};
  if (b == Pauli::I) return {a, one};
  if (a == b) return {Pauli::I, one};
  if (a == Pauli::X && b == Pauli::Y) return {Pauli::Z, pi};
  if (a == Pauli::Y && b == Pauli::X) return {Pauli::Z, mi};
  if (a == Pauli::Y && b == Pauli::Z) return {Pauli::X, pi};
  if (a == Pauli::Z && b == Pauli::Y) return {Pauli::X, mi};
  if (a == Pauli::Z && b == Pauli::X) return {Pauli::Y, pi};
  return {Pauli::Y, mi};  // X*Z
}

inline Eigen::Matrix2cd letter_matrix(Pauli p) {
  Eigen::Matrix2cd m;
  const complex i{0, 1};
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

}  // namespace detail

/// Tensor product of Pauli letters with a unit phase in {1, -1, i, -i}.
/// Qubit 0 is the first (leftmost) tensor factor.
struct PauliString {
  std::vector<Pauli> letters;
  complex phase{1.0, 0.0};

  PauliString() = default;
  explicit PauliString(int n_qubits, complex ph = {1.0, 0.0})
      : letters(static_cast<std::size_t>(n_qubits), Pauli::I), phase(ph) {
    if (n_qubits < 0) throw std::invalid_argument("negative qubit count");
  }

  static PauliString identity(int n_qubits) { return PauliString(n_qubits); }

  static PauliString single(int n_qubits, int qubit, Pauli p,
                            complex ph = {1.0, 0.0}) {
    PauliString s(n_qubits, ph);
    s.at(qubit) = p;
    return s;
  }

  int n_qubits() const { return static_cast<int>(letters.size()); }

  Pauli& at(int q) { return letters.at(static_cast<std::size_t>(q)); }
  Pauli at(int q) const { return letters.at(static_cast<std::size_t>(q)); }

  bool is_identity_letters() const {
    for (Pauli p : letters)
      if (p != Pauli::I) return false;
    return true;
  }

  /// Qubits with a non-identity letter.
  std::vector<int> support() const {
    std::vector<int> s;
    for (int q = 0; q < n_qubits(); ++q)
      if (at(q) != Pauli::I) s.push_back(q);
    return s;
  }

  PauliString dagger() const {
    PauliString s = *this;
    s.phase = std::conj(phase);
    return s;
  }

  bool commutes_with(const PauliString& o) const {
    if (o.n_qubits() != n_qubits()) throw std::invalid_argument("size mismatch");
    int anti = 0;
    for (int q = 0; q < n_qubits(); ++q) {
      Pauli a = at(q), b = o.at(q);
      if (a != Pauli::I && b != Pauli::I && a != b) ++anti;
    }
    return (anti % 2) == 0;
  }

  std::string str() const {
    std::string out;
    if (phase == complex{1, 0}) out = "+";
    else if (phase == complex{-1, 0}) out = "-";
    else if (phase == complex{0, 1}) out = "+i";
    else if (phase == complex{0, -1}) out = "-i";
    else out = "(" + std::to_string(phase.real()) + "," + std::to_string(phase.imag()) + ")";
    for (Pauli p : letters) out += pauli_char(p);
    return out;
  }

  friend PauliString operator*(const PauliString& a, const PauliString& b) {
    if (a.n_qubits() != b.n_qubits())
      throw std::invalid_argument("PauliString size mismatch");
    PauliString out(a.n_qubits(), a.phase * b.phase);
    for (int q = 0; q < a.n_qubits(); ++q) {
      auto lp = detail::mul_letters(a.at(q), b.at(q));
      out.at(q) = lp.letter;
      out.phase *= lp.phase;
    }
    return out;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.letters == b.letters && a.phase == b.phase;
  }

  /// Dense 2^n x 2^n matrix. Guarded by a size limit to keep memory bounded.
  Eigen::MatrixXcd dense(int max_qubits = 12) const {
    if (n_qubits() > max_qubits)
      throw std::invalid_argument("dense limit exceeded");
    const long dim = 1L << n_qubits();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1) * phase;
    for (int q = n_qubits() - 1; q >= 0; --q) {
      Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
      const Eigen::Matrix2cd l = detail::letter_matrix(at(q));
      next.topLeftCorner(m.rows(), m.cols()) = l(0, 0) * m;
      next.topRightCorner(m.rows(), m.cols()) = l(0, 1) * m;
      next.bottomLeftCorner(m.rows(), m.cols()) = l(1, 0) * m;
      next.bottomRightCorner(m.rows(), m.cols()) = l(1, 1) * m;
      m.swap(next);
    }
    if (m.rows() != dim) throw std::logic_error("dense build failed");
    return m;
  }
};

inline Eigen::MatrixXcd pauli_to_dense(const PauliString& p, int max_qubits = 12) {
  return p.dense(max_qubits);
}

// ---------------------------------------------------------------------------
// Clifford conjugation P -> U P U^dag, with exact phase tracking.
// ---------------------------------------------------------------------------

inline void conj_x(PauliString& p, int q) {
  Pauli l = p.at(q);
  if (l == Pauli::Y || l == Pauli::Z) p.phase = -p.phase;
}

inline void conj_h(PauliString& p, int q) {
  switch (p.at(q)) {
    case Pauli::X: p.at(q) = Pauli::Z; break;
    case Pauli::Z: p.at(q) = Pauli::X; break;
    case Pauli::Y: p.phase = -p.phase; break;
    default: break;
  }
}

inline void conj_s(PauliString& p, int q) {
  switch (p.at(q)) {
    case Pauli::X: p.at(q) = Pauli::Y; break;
    case Pauli::Y: p.at(q) = Pauli::X; p.phase = -p.phase; break;
    default: break;
  }
}

inline void conj_sdg(PauliString& p, int q) {
  switch (p.at(q)) {
    case Pauli::X: p.at(q) = Pauli::Y; p.phase = -p.phase; break;
    case Pauli::Y: p.at(q) = Pauli::X; break;
    default: break;
  }
}

namespace detail {

// Conjugates the two-qubit restriction of p by rebuilding it from generator
// images. `imgs` are the images of X_a, Z_a, X_b, Z_b in that order, given on
// the full register.
inline void conj_two_qubit_from_images(PauliString& p, int a, int b,
                                       const PauliString imgs[4]) {
  const Pauli la = p.at(a), lb = p.at(b);
  const bool xa = (la == Pauli::X || la == Pauli::Y);
  const bool za = (la == Pauli::Z || la == Pauli::Y);
  const bool xb = (lb == Pauli::X || lb == Pauli::Y);
  const bool zb = (lb == Pauli::Z || lb == Pauli::Y);
  // Y = i X Z on each qubit.
  complex canon{1, 0};
  if (la == Pauli::Y) canon *= complex{0, 1};
  if (lb == Pauli::Y) canon *= complex{0, 1};
  PauliString rest = p;
  rest.at(a) = Pauli::I;
  rest.at(b) = Pauli::I;
  rest.phase *= canon;
  PauliString acc = PauliString::identity(p.n_qubits());
  if (xa) acc = acc * imgs[0];
  if (za) acc = acc * imgs[1];
  if (xb) acc = acc * imgs[2];
  if (zb) acc = acc * imgs[3];
  p = rest * acc;
}

}  // namespace detail

inline void conj_cnot(PauliString& p, int control, int target) {
  const int n = p.n_qubits();
  PauliString imgs[4] = {
      PauliString::single(n, control, Pauli::X),  // X_c -> X_c X_t
      PauliString::single(n, control, Pauli::Z),  // Z_c -> Z_c
      PauliString::single(n, target, Pauli::X),   // X_t -> X_t
      PauliString::single(n, control, Pauli::Z),  // Z_t -> Z_c Z_t
  };
  imgs[0].at(target) = Pauli::X;
  imgs[3].at(target) = Pauli::Z;
  detail::conj_two_qubit_from_images(p, control, target, imgs);
}

inline void conj_cz(PauliString& p, int a, int b) {
  const int n = p.n_qubits();
  PauliString imgs[4] = {
      PauliString::single(n, a, Pauli::X),  // X_a -> X_a Z_b
      PauliString::single(n, a, Pauli::Z),
      PauliString::single(n, b, Pauli::X),  // X_b -> Z_a X_b
      PauliString::single(n, b, Pauli::Z),
  };
  imgs[0].at(b) = Pauli::Z;
  imgs[2].at(a) = Pauli::Z;
  detail::conj_two_qubit_from_images(p, a, b, imgs);
}

// ---------------------------------------------------------------------------
// Fermion-to-qubit machinery.
// ---------------------------------------------------------------------------

enum class ModeRole : std::uint8_t { impurity, bath, ancilla };

/// Assignment of fermionic modes to qubits. Modes and qubits share indices;
/// the impurity occupies index 0 and annihilation strings run toward higher
/// indices.
struct FermionOrdering {
  std::vector<ModeRole> roles;

  int n_modes() const { return static_cast<int>(roles.size()); }
  int qubit_of(int mode) const {
    if (mode < 0 || mode >= n_modes()) throw std::out_of_range("mode index");
    return mode;
  }
  ModeRole role_of(int mode) const {
    if (mode < 0 || mode >= n_modes()) throw std::out_of_range("mode index");
    return roles[static_cast<std::size_t>(mode)];
  }

  static FermionOrdering impurity_plus_bath(int n_bath) {
    FermionOrdering f;
    f.roles.assign(static_cast<std::size_t>(n_bath) + 1, ModeRole::bath);
    f.roles[0] = ModeRole::impurity;
    return f;
  }

  void validate() const {
    if (roles.empty()) throw std::invalid_argument("empty ordering");
    bool seen_non_imp = false;
    for (ModeRole r : roles) {
      if (r == ModeRole::impurity && seen_non_imp)
        throw std::invalid_argument("impurity modes must come first");
      if (r != ModeRole::impurity) seen_non_imp = true;
    }
  }
};

/// Ladder operator: coefficient * S^{+/-} on one qubit, tensored with a Pauli
/// tail acting on the remaining qubits (identity on the projector qubit).
struct LadderTerm {
  complex coefficient{1.0, 0.0};
  int projector_qubit = 0;
  bool raising = false;  // S^+ if true, S^- otherwise
  PauliString tail;

  int n_qubits() const { return tail.n_qubits(); }

  void check() const {
    if (projector_qubit < 0 || projector_qubit >= tail.n_qubits())
      throw std::out_of_range("projector qubit");
    if (tail.at(projector_qubit) != Pauli::I)
      throw std::invalid_argument("tail must be identity on projector qubit");
  }

  /// Expansion S^+- = (X -+ iY)/2 into two weighted Pauli strings.
  std::vector<std::pair<complex, PauliString>> expand() const {
    check();
    const complex i{0, 1};
    PauliString xs = PauliString::single(n_qubits(), projector_qubit, Pauli::X);
    PauliString ys = PauliString::single(n_qubits(), projector_qubit, Pauli::Y);
    complex ycoef = raising ? -i : i;
    std::vector<std::pair<complex, PauliString>> out;
    out.emplace_back(coefficient * 0.5, xs * tail);
    out.emplace_back(coefficient * 0.5 * ycoef, ys * tail);
    return out;
  }

  Eigen::MatrixXcd dense(int max_qubits = 12) const {
    Eigen::MatrixXcd m;
    bool first = true;
    for (const auto& [c, p] : expand()) {
      if (first) {
        m = c * p.dense(max_qubits);
        first = false;
      } else {
        m += c * p.dense(max_qubits);
      }
    }
    return m;
  }

  LadderTerm dagger() const {
    LadderTerm t = *this;
    t.coefficient = std::conj(coefficient);
    t.raising = !raising;
    t.tail = tail.dagger();
    return t;
  }
};

/// Jordan-Wigner annihilation operator: S^- on the mode's qubit with Z on
/// every strictly higher qubit.
inline LadderTerm jw_annihilation(int mode, const FermionOrdering& ordering) {
  const int n = ordering.n_modes();
  const int q = ordering.qubit_of(mode);
  LadderTerm t;
  t.coefficient = 1.0;
  t.projector_qubit = q;
  t.raising = false;
  t.tail = PauliString::identity(n);
  for (int k = q + 1; k < n; ++k) t.tail.at(k) = Pauli::Z;
  return t;
}

inline LadderTerm jw_creation(int mode, const FermionOrdering& ordering) {
  LadderTerm t = jw_annihilation(mode, ordering);
  t.raising = true;
  return t;
}

/// Majorana c + c^dag of an ancilla mode: X on the ancilla qubit with Z on all
/// higher qubits. Hermitian and squares to the identity.
inline PauliString jw_majorana(int ancilla_mode, const FermionOrdering& ordering) {
  if (ordering.role_of(ancilla_mode) != ModeRole::ancilla)
    throw std::invalid_argument("jw_majorana requires an ancilla mode");
  const int n = ordering.n_modes();
  const int q = ordering.qubit_of(ancilla_mode);
  PauliString p = PauliString::single(n, q, Pauli::X);
  for (int k = q + 1; k < n; ++k) p.at(k) = Pauli::Z;
  return p;
}

/// Second Majorana i(c^dag - c) of an ancilla mode: Y with the same Z string.
inline PauliString jw_majorana_second(int ancilla_mode,
                                      const FermionOrdering& ordering) {
  PauliString p = jw_majorana(ancilla_mode, ordering);
  p.at(ordering.qubit_of(ancilla_mode)) = Pauli::Y;
  return p;
}

/// Multiplies an impurity ladder operator by the total fermion parity
/// (product of Z over every qubit). With the impurity at index 0 the result
/// is a single-qubit operator.
inline LadderTerm bar_operator(const LadderTerm& impurity_ladder,
                               const FermionOrdering& ordering) {
  impurity_ladder.check();
  const int n = ordering.n_modes();
  if (impurity_ladder.n_qubits() != n)
    throw std::invalid_argument("register size mismatch");
  LadderTerm t = impurity_ladder;
  // S^- Z = -S^-, S^+ Z = +S^+ on the projector qubit.
  if (!t.raising) t.coefficient = -t.coefficient;
  PauliString parity(n);
  for (int q = 0; q < n; ++q)
    if (q != t.projector_qubit) parity.at(q) = Pauli::Z;
  t.tail = t.tail * parity;
  t.coefficient *= t.tail.phase;
  t.tail.phase = 1.0;
  return t;
}

}  // namespace noisim
