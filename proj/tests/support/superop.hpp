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

// Dense many-body Lindblad superoperator, vectorized column-major. Used as
// the independent oracle for the single-particle formulas and for circuit
// channel checks. Jump operators are arbitrary dense matrices.

#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dense_fermion.hpp"

namespace testsupport {

using Mat = Eigen::MatrixXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct DenseLindblad {
  Mat hamiltonian;
  std::vector<Mat> jumps;

  long dim() const { return hamiltonian.rows(); }

  // d rho / dt = -i[H,rho] + sum_k (2 L rho L^dag - {L^dag L, rho})
  Mat superop() const {
    const long d = dim();
    const Mat eye = Mat::Identity(d, d);
    const std::complex<double> i{0, 1};
    Mat s = -i * (kron(eye, hamiltonian) - kron(hamiltonian.transpose(), eye));
    for (const Mat& l : jumps) {
      const Mat ldl = l.adjoint() * l;
      s += 2.0 * kron(l.conjugate(), l) - kron(eye, ldl) -
           kron(ldl.transpose(), eye);
    }
    return s;
  }

  // Variant entering two-time functions of anticommuting operators: the jump
  // sandwich flips sign.
  Mat underline_superop() const {
    const long d = dim();
    const Mat eye = Mat::Identity(d, d);
    const std::complex<double> i{0, 1};
    Mat s = -i * (kron(eye, hamiltonian) - kron(hamiltonian.transpose(), eye));
    for (const Mat& l : jumps) {
      const Mat ldl = l.adjoint() * l;
      s += -2.0 * kron(l.conjugate(), l) - kron(eye, ldl) -
           kron(ldl.transpose(), eye);
    }
    return s;
  }
};

// Builds the many-body generator of a star-geometry single-particle model
// with diagonal gain/loss rates, using the occupation-basis fermion
// operators (fully independent of the Pauli code path).
inline DenseLindblad dense_from_quadratic(const Eigen::MatrixXcd& h,
                                          const Eigen::MatrixXcd& gain,
                                          const Eigen::MatrixXcd& loss) {
  const int n = static_cast<int>(h.rows());
  DenseLindblad out;
  const long d = 1L << n;
  out.hamiltonian = Mat::Zero(d, d);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      if (std::abs(h(k, l)) > 0)
        out.hamiltonian += h(k, l) * (dense_creation(k, n) * dense_annihilation(l, n));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (k != l && (std::abs(gain(k, l)) > 1e-15 || std::abs(loss(k, l)) > 1e-15))
        throw std::invalid_argument("dense oracle expects diagonal rates");
    }
    if (gain(k, k).real() > 0)
      out.jumps.push_back(std::sqrt(gain(k, k).real()) * dense_creation(k, n));
    if (loss(k, k).real() > 0)
      out.jumps.push_back(std::sqrt(loss(k, k).real()) * dense_annihilation(k, n));
  }
  return out;
}

class SuperopEvolver {
 public:
  explicit SuperopEvolver(const Mat& s) : es_(s) {
    if (es_.info() != Eigen::Success) throw std::runtime_error("eigensolve failed");
    inv_ = es_.eigenvectors().inverse();
  }

  Mat apply_exp(const Mat& x, double t) const {
    const long d = x.rows();
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(x.data(), d * d);
    Eigen::VectorXcd w = inv_ * v;
    for (long i = 0; i < w.size(); ++i)
      w(i) *= std::exp(es_.eigenvalues()(i) * t);
    Eigen::VectorXcd y = es_.eigenvectors() * w;
    return Eigen::Map<Mat>(y.data(), d, d);
  }

  // eigenvector with eigenvalue closest to zero, trace-normalized
  Mat steady_state() const {
    long best = 0;
    for (long i = 1; i < es_.eigenvalues().size(); ++i)
      if (std::abs(es_.eigenvalues()(i)) < std::abs(es_.eigenvalues()(best)))
        best = i;
    const long d2 = es_.eigenvectors().rows();
    const long d = static_cast<long>(std::sqrt(static_cast<double>(d2)) + 0.5);
    Eigen::VectorXcd v = es_.eigenvectors().col(best);
    Mat rho = Eigen::Map<Mat>(v.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return rho;
  }

 private:
  Eigen::ComplexEigenSolver<Mat> es_;
  Mat inv_;
};

// Reduced density matrix over the given kept qubits (ascending order),
// tracing out the rest. Bit convention as in dense_fermion.hpp.
inline Mat partial_trace(const Mat& rho, int n, const std::vector<int>& keep) {
  const int nk = static_cast<int>(keep.size());
  const long dk = 1L << nk;
  Mat out = Mat::Zero(dk, dk);
  const long d = 1L << n;
  for (long i = 0; i < d; ++i) {
    long ik = 0;
    for (int b = 0; b < nk; ++b)
      ik |= static_cast<long>(bit_of(i, keep[static_cast<std::size_t>(b)], n)) << (nk - 1 - b);
    for (long j = 0; j < d; ++j) {
      bool same_env = true;
      for (int q = 0; q < n && same_env; ++q) {
        bool kept = false;
        for (int b : keep)
          if (b == q) kept = true;
        if (!kept && bit_of(i, q, n) != bit_of(j, q, n)) same_env = false;
      }
      if (!same_env) continue;
      long jk = 0;
      for (int b = 0; b < nk; ++b)
        jk |= static_cast<long>(bit_of(j, keep[static_cast<std::size_t>(b)], n)) << (nk - 1 - b);
      out(ik, jk) += rho(i, j);
    }
  }
  return out;
}

}  // namespace testsupport
