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
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "noisim/bath.hpp"
#include "noisim/green.hpp"
#include "noisim/hybridization.hpp"
#include "noisim/quadrature.hpp"

namespace noisim {

/// Free-fermion Lindblad generator in single-particle form: Hamiltonian
/// matrix h, gain-rate matrix (filling jumps) and loss-rate matrix (draining
/// jumps), both PSD. The single-particle drift is -i h - (gain + loss).
struct QuadraticLindblad {
  Eigen::MatrixXcd h;
  Eigen::MatrixXcd gain;
  Eigen::MatrixXcd loss;

  int size() const { return static_cast<int>(h.rows()); }

  Eigen::MatrixXcd drift() const {
    return std::complex<double>(0, -1) * h - gain - loss;
  }

  void check() const {
    const int n = size();
    if (h.cols() != n || gain.rows() != n || gain.cols() != n ||
        loss.rows() != n || loss.cols() != n)
      throw std::invalid_argument("matrix size mismatch");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("h must be hermitian");
    for (const auto* m : {&gain, &loss}) {
      if ((*m - m->adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("rate matrix must be hermitian");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(*m);
      if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("rate matrix must be PSD");
    }
  }
};

/// Star-geometry generator for an impurity level coupled to damped bath
/// modes: emitters carry gain at the shared rate, absorbers carry loss, the
/// impurity itself is undamped.
inline QuadraticLindblad build_lindblad(double imp_energy,
                                        const PseudomodeBath& bath) {
  const int nb = bath.size();
  const int n = nb + 1;
  QuadraticLindblad ql;
  ql.h = Eigen::MatrixXcd::Zero(n, n);
  ql.gain = Eigen::MatrixXcd::Zero(n, n);
  ql.loss = Eigen::MatrixXcd::Zero(n, n);
  ql.h(0, 0) = imp_energy;
  for (int p = 0; p < nb; ++p) {
    ql.h(0, p + 1) = bath.couplings(p);
    ql.h(p + 1, 0) = bath.couplings(p);
    ql.h(p + 1, p + 1) = bath.energies(p);
    if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
      ql.gain(p + 1, p + 1) = bath.rate;
    else
      ql.loss(p + 1, p + 1) = bath.rate;
  }
  return ql;
}

/// Steady-state 1-RDM.
struct SteadyRDM {
  Eigen::MatrixXcd r;

  double sylvester_residual(const QuadraticLindblad& ql) const {
    const Eigen::MatrixXcd l = ql.drift();
    return (r * l.adjoint() + l * r + 2.0 * ql.gain)
        .cwiseAbs()
        .maxCoeff();
  }
};

/// Solves R L^dag + L R + 2 gain = 0 through the Kronecker-vectorized linear
/// system. Throws when the Sylvester operator is singular (an undamped mode).
inline SteadyRDM steady_state(const QuadraticLindblad& ql) {
  const int n = ql.size();
  const Eigen::MatrixXcd l = ql.drift();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  // column-major vec: vec(L R) = (I (x) L) vec(R), vec(R L^dag) = (conj(L) (x) I) vec(R)
  Eigen::MatrixXcd op = Eigen::kroneckerProduct(eye, l).eval() +
                        Eigen::kroneckerProduct(l.conjugate(), eye).eval();
  Eigen::VectorXcd rhs = -2.0 * Eigen::Map<const Eigen::VectorXcd>(
                                    ql.gain.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(op);
  if (!lu.isInvertible())
    throw std::runtime_error("singular Sylvester operator: undamped mode");
  Eigen::VectorXcd x = lu.solve(rhs);
  SteadyRDM out;
  out.r = Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n);
  out.r = 0.5 * (out.r + out.r.adjoint()).eval();
  if (out.sylvester_residual(ql) > 1e-8)
    throw std::runtime_error("Sylvester solve failed");
  return out;
}

/// Cached evolution e^{drift * t}, by eigendecomposition with a
/// scaling-and-squaring fallback when the eigenbasis is ill-conditioned.
class Propagator {
 public:
  explicit Propagator(const QuadraticLindblad& ql) : drift_(ql.drift()) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(drift_);
    vecs_ = es.eigenvectors();
    vals_ = es.eigenvalues();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vecs_);
    const double cond =
        svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    use_eig_ = std::isfinite(cond) && cond < 1e8;
    if (use_eig_) inv_ = vecs_.inverse();
  }

  Eigen::MatrixXcd exp_drift(double t) const {
    if (use_eig_) {
      Eigen::VectorXcd ph(vals_.size());
      for (int i = 0; i < vals_.size(); ++i) ph(i) = std::exp(vals_(i) * t);
      return vecs_ * ph.asDiagonal() * inv_;
    }
    return (drift_ * t).exp();
  }

  const Eigen::MatrixXcd& drift() const { return drift_; }

 private:
  Eigen::MatrixXcd drift_;
  Eigen::MatrixXcd vecs_, inv_;
  Eigen::VectorXcd vals_;
  bool use_eig_ = true;
};

/// Matrix Green's function at time t from the steady (or any) 1-RDM:
/// greater -i e^{Lt}(1-R), lesser +i e^{Lt} R for t >= 0, negative times via
/// G(-t) = -G(t)^dag; retarded -i theta(t) e^{Lt}.
inline Eigen::MatrixXcd gf_time(const Propagator& prop,
                                const Eigen::MatrixXcd& r, double t,
                                GfComponent component) {
  const int n = static_cast<int>(r.rows());
  const std::complex<double> mi{0, -1};
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  switch (component) {
    case GfComponent::greater: {
      if (t >= 0) return mi * prop.exp_drift(t) * (eye - r);
      return -gf_time(prop, r, -t, component).adjoint().eval();
    }
    case GfComponent::lesser: {
      if (t >= 0) return -mi * prop.exp_drift(t) * r;
      return -gf_time(prop, r, -t, component).adjoint().eval();
    }
    case GfComponent::retarded: {
      if (t < 0) return Eigen::MatrixXcd::Zero(n, n);
      return mi * prop.exp_drift(t);
    }
  }
  throw std::logic_error("bad component");
}

inline Eigen::MatrixXcd gf_time(const QuadraticLindblad& ql, const SteadyRDM& rdm,
                                double t, GfComponent component) {
  return gf_time(Propagator(ql), rdm.r, t, component);
}

struct GfFreq {
  Eigen::MatrixXcd retarded, advanced, lesser, greater;
};

/// Frequency-domain components: G^R = (w - iL)^{-1}, G^A = G^R^dag,
/// G^< = 2i G^R gain G^A, G^> = -2i G^R loss G^A.
inline GfFreq gf_freq(const QuadraticLindblad& ql, double w) {
  const int n = ql.size();
  const std::complex<double> i{0, 1};
  Eigen::MatrixXcd m =
      w * Eigen::MatrixXcd::Identity(n, n) - i * ql.drift();
  GfFreq out;
  out.retarded = m.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
  out.advanced = out.retarded.adjoint();
  out.lesser = 2.0 * i * out.retarded * ql.gain * out.advanced;
  out.greater = -2.0 * i * out.retarded * ql.loss * out.advanced;
  return out;
}

/// Relaxation rate of the 1-RDM toward the steady state. Deviations evolve
/// as e^{Lt} dR e^{L^dag t}, so the slowest observable decay is twice the
/// smallest real part among the eigenvalues of i h + gain + loss.
inline double relaxation_rate(const QuadraticLindblad& ql) {
  Eigen::MatrixXcd m = std::complex<double>(0, 1) * ql.h + ql.gain + ql.loss;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  return 2.0 * es.eigenvalues().real().minCoeff();
}

/// 1-RDM after evolving `r0` for time t: R(t) = Rss + e^{Lt}(R0-Rss)e^{L^dag t}.
inline Eigen::MatrixXcd propagate_rdm(const Propagator& prop,
                                      const Eigen::MatrixXcd& r_steady,
                                      const Eigen::MatrixXcd& r0, double t) {
  const Eigen::MatrixXcd u = prop.exp_drift(t);
  return r_steady + u * (r0 - r_steady) * u.adjoint();
}

/// Deviation of the finite-preparation-time Green's function from the fully
/// relaxed one, as an L2 norm over the full decay of G.
/// Returns one error value per entry of t_prep_list.
inline std::vector<double> prep_error(const QuadraticLindblad& ql,
                                      const Eigen::MatrixXcd& r_init,
                                      const std::vector<double>& t_prep_list,
                                      double t_prep_ref = 100.0,
                                      double t_max = 150.0, double dt = 0.1) {
  const Propagator prop(ql);
  const SteadyRDM ss = steady_state(ql);
  const int nt = static_cast<int>(std::lround(t_max / dt)) + 1;

  auto curve = [&](double t_prep) {
    const Eigen::MatrixXcd r = propagate_rdm(prop, ss.r, r_init, t_prep);
    std::vector<std::complex<double>> g(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i)
      g[static_cast<std::size_t>(i)] =
          gf_time(prop, r, i * dt, GfComponent::greater)(0, 0);
    return g;
  };

  const auto ref = curve(t_prep_ref);
  std::vector<double> out;
  out.reserve(t_prep_list.size());
  for (double tp : t_prep_list) {
    const auto g = curve(tp);
    double acc = 0.0;
    for (int i = 0; i < nt; ++i) {
      const double w = (i == 0 || i == nt - 1) ? 0.5 : 1.0;  // trapezoid
      acc += w * std::norm(g[static_cast<std::size_t>(i)] -
                           ref[static_cast<std::size_t>(i)]);
    }
    out.push_back(std::sqrt(acc * dt));
  }
  return out;
}

/// Initial 1-RDM with emitters filled, absorbers and the impurity empty.
inline Eigen::MatrixXcd emitter_filled_rdm(const PseudomodeBath& bath) {
  const int n = bath.size() + 1;
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
  for (int p = 0; p < bath.size(); ++p)
    if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
      r(p + 1, p + 1) = 1.0;
  return r;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope needs matching data");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Reference dynamics of the flat-band model.
// ---------------------------------------------------------------------------

/// Impurity occupation of the flat-band model from the occupied spectral
/// weight.
inline double rlm_occupation(const HybridizationSpec& spec) {
  const double dhb = spec.half_bandwidth;
  auto f = [&](double w) { return rlm_spectral_lesser(spec, w); };
  return integrate_split(f, {-dhb, 0.0, spec.impurity_energy, dhb}, 1e-12, 1e-9);
}

/// Exact greater Green's function of the original (continuum-bath) model by
/// frequency integration of the empty spectral weight.
inline GreenSeries rlm_reference_gf(const HybridizationSpec& spec,
                                    const std::vector<double>& times) {
  const double dhb = spec.half_bandwidth;
  GreenSeries out;
  out.component = GfComponent::greater;
  out.provenance = Provenance::exact_original;
  out.times = times;
  out.values.reserve(times.size());
  std::vector<double> splits{-dhb, 0.0, spec.impurity_energy, dhb};
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  const std::complex<double> mi{0, -1};
  for (double t : times) {
    auto f = [&](double w) {
      return std::exp(std::complex<double>(0, -w * t)) *
             rlm_spectral_greater(spec, w);
    };
    out.values.push_back(mi * integrate_split(f, splits, 1e-12, 1e-9));
  }
  return out;
}

/// Greater Green's function of a closed discretized bath prepared in its
/// Gibbs state, from the one-particle eigenbasis.
inline GreenSeries closed_bath_gf(const HybridizationSpec& spec,
                                  const ClosedBath& bath,
                                  const std::vector<double>& times) {
  const int nb = bath.size();
  const int n = nb + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  h(0, 0) = spec.impurity_energy;
  for (int p = 0; p < nb; ++p) {
    h(0, p + 1) = h(p + 1, 0) = bath.couplings(p);
    h(p + 1, p + 1) = bath.energies(p);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXd eps = es.eigenvalues();
  const Eigen::VectorXd amp0 = es.eigenvectors().row(0);

  GreenSeries out;
  out.component = GfComponent::greater;
  out.provenance = Provenance::closed_bath;
  out.times = times;
  out.values.reserve(times.size());
  const std::complex<double> mi{0, -1};
  for (double t : times) {
    std::complex<double> g{0, 0};
    for (int k = 0; k < n; ++k)
      g += amp0(k) * amp0(k) * std::exp(std::complex<double>(0, -eps(k) * t)) *
           (1.0 - fermi(bath.beta, eps(k)));
    out.values.push_back(mi * g);
  }
  return out;
}

/// Greater impurity Green's function of the damped-bath model on a time grid.
inline GreenSeries pm_greater_gf(const QuadraticLindblad& ql,
                                 const SteadyRDM& ss,
                                 const std::vector<double>& times) {
  const Propagator prop(ql);
  GreenSeries out;
  out.component = GfComponent::greater;
  out.provenance = Provenance::exact_pm;
  out.times = times;
  out.values.reserve(times.size());
  for (double t : times)
    out.values.push_back(gf_time(prop, ss.r, t, GfComponent::greater)(0, 0));
  return out;
}

}  // namespace noisim
