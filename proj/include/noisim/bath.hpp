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
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "noisim/hybridization.hpp"
#include "noisim/nnls.hpp"
#include "noisim/quadrature.hpp"

namespace noisim {

enum class ModeParity { emitter, absorber };

/// Bath discretized into closed (undamped) modes.
struct ClosedBath {
  Eigen::VectorXd energies;
  Eigen::VectorXd couplings;
  double beta = 1.0;

  int size() const { return static_cast<int>(energies.size()); }
};

/// Damped bath modes with a shared jump rate. Emitters occupy even positions
/// and absorbers odd positions in the canonical ordering.
struct PseudomodeBath {
  Eigen::VectorXd energies;
  Eigen::VectorXd couplings;
  double rate = 0.0;
  std::vector<ModeParity> parity;

  int size() const { return static_cast<int>(energies.size()); }

  void check() const {
    if (couplings.size() != energies.size() ||
        parity.size() != static_cast<std::size_t>(energies.size()))
      throw std::invalid_argument("inconsistent pseudomode bath");
    if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
    for (int p = 0; p < size(); ++p) {
      const bool even = (p % 2 == 0);
      if ((parity[static_cast<std::size_t>(p)] == ModeParity::emitter) != even)
        throw std::invalid_argument("emitters must sit at even positions");
      if (couplings(p) < 0) throw std::invalid_argument("negative coupling");
    }
  }
};

inline nlohmann::json to_json(const ClosedBath& b) {
  nlohmann::json j;
  j["energies"] = std::vector<double>(b.energies.begin(), b.energies.end());
  j["couplings"] = std::vector<double>(b.couplings.begin(), b.couplings.end());
  return j;
}

inline nlohmann::json to_json(const PseudomodeBath& b) {
  nlohmann::json j;
  j["energies"] = std::vector<double>(b.energies.begin(), b.energies.end());
  j["couplings"] = std::vector<double>(b.couplings.begin(), b.couplings.end());
  j["rate"] = b.rate;
  std::vector<std::string> par;
  for (ModeParity p : b.parity)
    par.push_back(p == ModeParity::emitter ? "emit" : "abs");
  j["parity"] = par;
  return j;
}

inline PseudomodeBath pseudomode_from_json(const nlohmann::json& j) {
  PseudomodeBath b;
  const auto e = j.at("energies").get<std::vector<double>>();
  const auto v = j.at("couplings").get<std::vector<double>>();
  b.energies = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<long>(e.size()));
  b.couplings = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
  b.rate = j.at("rate").get<double>();
  for (const auto& s : j.at("parity").get<std::vector<std::string>>()) {
    if (s == "emit") b.parity.push_back(ModeParity::emitter);
    else if (s == "abs") b.parity.push_back(ModeParity::absorber);
    else throw std::invalid_argument("unknown parity tag: " + s);
  }
  b.check();
  return b;
}

// ---------------------------------------------------------------------------
// Closed-bath discretization.
// ---------------------------------------------------------------------------

namespace bath_detail {

// Quantile of the truncated Gaussian density exp(-2 w^2 / D^2) on [-D, D].
inline double gaussian_quantile(double u, double dhb) {
  if (u <= 0.0) return -dhb;
  if (u >= 1.0) return dhb;
  const double norm = std::erf(std::sqrt(2.0));
  const double target = (2.0 * u - 1.0) * norm;  // erf(sqrt(2) x / D)
  double lo = -dhb, hi = dhb;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(std::sqrt(2.0) * mid / dhb) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bath_detail

/// Deterministic quantile discretization: 2 N_b + 1 points of the centered
/// Gaussian density form an alternating grid of interval edges and mode
/// energies; each coupling carries the spectral weight of its interval.
inline ClosedBath discretize_closed(const HybridizationSpec& spec, int n_bath) {
  if (n_bath < 1) throw std::invalid_argument("need at least one bath mode");
  const double dhb = spec.half_bandwidth;
  ClosedBath out;
  out.beta = spec.beta;
  out.energies.resize(n_bath);
  out.couplings.resize(n_bath);
  std::vector<double> edges(static_cast<std::size_t>(n_bath) + 1);
  for (int p = 0; p <= n_bath; ++p)
    edges[static_cast<std::size_t>(p)] =
        bath_detail::gaussian_quantile(static_cast<double>(p) / n_bath, dhb);
  for (int p = 0; p < n_bath; ++p) {
    out.energies(p) = bath_detail::gaussian_quantile(
        (2.0 * p + 1.0) / (2.0 * n_bath), dhb);
    // flat band: the interval weight is density * width
    const double w2 = spec.band_density() *
                      (edges[static_cast<std::size_t>(p) + 1] -
                       edges[static_cast<std::size_t>(p)]);
    out.couplings(p) = std::sqrt(w2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lorentzian fitting.
// ---------------------------------------------------------------------------

/// Gram matrix of unit Lorentzians of half-width `rate` centered on `egrid`:
/// the full-line overlap integral has the closed form
/// 2 pi / (rate ((e_p - e_q)^2 + 4 rate^2)).
inline Eigen::MatrixXd lorentz_gram(const Eigen::VectorXd& egrid, double rate) {
  if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
  const int n = static_cast<int>(egrid.size());
  Eigen::MatrixXd q(n, n);
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r <= p; ++r) {
      const double d = egrid(p) - egrid(r);
      q(p, r) = q(r, p) = 2.0 * M_PI / (rate * (d * d + 4.0 * rate * rate));
    }
  }
  return q;
}

/// Overlap vector b_p = 2 int f(w) / ((w - e_p)^2 + rate^2) dw over the
/// support [lo, hi], by adaptive quadrature split at each grid energy.
inline Eigen::VectorXd lorentz_overlap(const std::function<double(double)>& f,
                                       const Eigen::VectorXd& egrid, double rate,
                                       double lo, double hi) {
  if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
  const int n = static_cast<int>(egrid.size());
  Eigen::VectorXd b(n);
  for (int p = 0; p < n; ++p) {
    const double ep = egrid(p);
    auto g = [&](double w) {
      const double d = w - ep;
      return f(w) / (d * d + rate * rate);
    };
    std::vector<double> pts{lo};
    if (ep > lo && ep < hi) pts.push_back(ep);
    pts.push_back(hi);
    b(p) = 2.0 * integrate_split(g, pts, 1e-12, 1e-8);
  }
  return b;
}

struct LorentzFit {
  Eigen::VectorXd weights;  // v_p >= 0
  double chi2 = 0.0;
};

struct FitReport {
  double rate = 0.0;
  double chi = 0.0;  // sqrt of the total squared residual
  double emit_window_lo = 0.0, emit_window_hi = 0.0;
  double abs_window_lo = 0.0, abs_window_hi = 0.0;
  int grid_size = 0;
};

namespace bath_detail {

struct FitTarget {
  std::function<double(double)> f;
  Eigen::VectorXd grid;
  double support_lo, support_hi;
  double fsq;  // int f^2
};

inline LorentzFit fit_at_rate(const FitTarget& t, double rate) {
  Eigen::MatrixXd q = lorentz_gram(t.grid, rate);
  Eigen::VectorXd b = lorentz_overlap(t.f, t.grid, rate, t.support_lo, t.support_hi);
  LorentzFit fit;
  fit.weights = nnls_gram(q, b);
  fit.chi2 = t.fsq - b.dot(fit.weights) +
             fit.weights.dot(q * fit.weights);
  return fit;
}

// Regular grid spanning the window where f >= threshold, endpoints included.
inline Eigen::VectorXd threshold_grid(const std::function<double(double)>& f,
                                      double lo_bound, double hi_bound,
                                      double threshold, int n, bool falling,
                                      double* win_lo, double* win_hi) {
  // One window edge is a band edge, the other crosses the threshold.
  double a = lo_bound, b = hi_bound;
  if (falling) {
    // f decreasing: window [lo_bound, w*]
    double xl = lo_bound, xh = hi_bound;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (xl + xh);
      if (f(mid) >= threshold) xl = mid;
      else xh = mid;
    }
    b = 0.5 * (xl + xh);
  } else {
    double xl = lo_bound, xh = hi_bound;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (xl + xh);
      if (f(mid) >= threshold) xh = mid;
      else xl = mid;
    }
    a = 0.5 * (xl + xh);
  }
  *win_lo = a;
  *win_hi = b;
  Eigen::VectorXd grid(n);
  if (n == 1) {
    grid(0) = 0.5 * (a + b);
  } else {
    for (int i = 0; i < n; ++i)
      grid(i) = a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  return grid;
}

}  // namespace bath_detail

/// Fits the bath emission and absorption spectra with N_b/2 Lorentzians each
/// on regular grids, under a shared width. Inner problem: nonnegative
/// quadratic program in the Lorentzian weights; outer problem: golden-section
/// search of the shared width on a log scale.
inline PseudomodeBath fit_pseudomodes(const HybridizationSpec& spec, int n_bath,
                                      FitReport* report = nullptr) {
  if (n_bath < 2 || n_bath % 2 != 0)
    throw std::invalid_argument("pseudomode fit needs an even bath size >= 2");
  const int n = n_bath / 2;
  const double dhb = spec.half_bandwidth;
  const double twopi = 2.0 * M_PI;
  const double threshold = spec.gamma * spec.gamma / 10.0;

  // Spectral weight functions (including the 2 pi of the lesser/greater
  // hybridization components): emitters fit the occupied side, absorbers the
  // empty side.
  auto femit = [spec, twopi](double w) { return twopi * hyb_spectra(spec, w).lesser; };
  auto fabsorb = [spec, twopi](double w) { return twopi * hyb_spectra(spec, w).greater; };

  bath_detail::FitTarget emit, absorb;
  emit.f = femit;
  absorb.f = fabsorb;
  double elo, ehi, alo, ahi;
  emit.grid = bath_detail::threshold_grid(femit, -dhb, dhb, threshold, n, true,
                                          &elo, &ehi);
  absorb.grid = bath_detail::threshold_grid(fabsorb, -dhb, dhb, threshold, n,
                                            false, &alo, &ahi);
  emit.support_lo = absorb.support_lo = -dhb;
  emit.support_hi = absorb.support_hi = dhb;
  emit.fsq = integrate([&](double w) { const double v = femit(w); return v * v; },
                       -dhb, dhb, 1e-14, 1e-10);
  absorb.fsq = integrate([&](double w) { const double v = fabsorb(w); return v * v; },
                         -dhb, dhb, 1e-14, 1e-10);

  auto chi2_total = [&](double rate) {
    return bath_detail::fit_at_rate(emit, rate).chi2 +
           bath_detail::fit_at_rate(absorb, rate).chi2;
  };

  // golden-section on log(rate)
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double ua = std::log(1e-3), ub = std::log(dhb);
  double u1 = ub - gr * (ub - ua);
  double u2 = ua + gr * (ub - ua);
  double f1 = chi2_total(std::exp(u1));
  double f2 = chi2_total(std::exp(u2));
  while (ub - ua > 1e-4) {
    if (f1 <= f2) {
      ub = u2;
      u2 = u1;
      f2 = f1;
      u1 = ub - gr * (ub - ua);
      f1 = chi2_total(std::exp(u1));
    } else {
      ua = u1;
      u1 = u2;
      f1 = f2;
      u2 = ua + gr * (ub - ua);
      f2 = chi2_total(std::exp(u2));
    }
  }
  const double rate = std::exp(0.5 * (ua + ub));

  LorentzFit fe = bath_detail::fit_at_rate(emit, rate);
  LorentzFit fa = bath_detail::fit_at_rate(absorb, rate);

  PseudomodeBath bath;
  bath.rate = rate;
  bath.energies.resize(n_bath);
  bath.couplings.resize(n_bath);
  bath.parity.resize(static_cast<std::size_t>(n_bath));
  for (int k = 0; k < n; ++k) {
    bath.energies(2 * k) = emit.grid(k);
    bath.couplings(2 * k) = std::sqrt(std::max(0.0, fe.weights(k)) / (2.0 * rate));
    bath.parity[static_cast<std::size_t>(2 * k)] = ModeParity::emitter;
    bath.energies(2 * k + 1) = absorb.grid(k);
    bath.couplings(2 * k + 1) = std::sqrt(std::max(0.0, fa.weights(k)) / (2.0 * rate));
    bath.parity[static_cast<std::size_t>(2 * k + 1)] = ModeParity::absorber;
  }
  bath.check();

  if (report) {
    report->rate = rate;
    report->chi = std::sqrt(std::max(0.0, fe.chi2 + fa.chi2));
    report->emit_window_lo = elo;
    report->emit_window_hi = ehi;
    report->abs_window_lo = alo;
    report->abs_window_hi = ahi;
    report->grid_size = n;
  }
  return bath;
}

/// Residual of the Lorentzian model at a given shared width; used by tests to
/// certify the outer search found a local minimum.
inline double fit_chi2_at_rate(const HybridizationSpec& spec, int n_bath,
                               double rate) {
  const int n = n_bath / 2;
  const double dhb = spec.half_bandwidth;
  const double twopi = 2.0 * M_PI;
  const double threshold = spec.gamma * spec.gamma / 10.0;
  auto femit = [spec, twopi](double w) { return twopi * hyb_spectra(spec, w).lesser; };
  auto fabsorb = [spec, twopi](double w) { return twopi * hyb_spectra(spec, w).greater; };
  double d1, d2;
  bath_detail::FitTarget emit, absorb;
  emit.f = femit;
  absorb.f = fabsorb;
  emit.grid = bath_detail::threshold_grid(femit, -dhb, dhb, threshold, n, true, &d1, &d2);
  absorb.grid = bath_detail::threshold_grid(fabsorb, -dhb, dhb, threshold, n, false, &d1, &d2);
  emit.support_lo = absorb.support_lo = -dhb;
  emit.support_hi = absorb.support_hi = dhb;
  emit.fsq = integrate([&](double w) { const double v = femit(w); return v * v; },
                       -dhb, dhb, 1e-14, 1e-10);
  absorb.fsq = integrate([&](double w) { const double v = fabsorb(w); return v * v; },
                         -dhb, dhb, 1e-14, 1e-10);
  return bath_detail::fit_at_rate(emit, rate).chi2 +
         bath_detail::fit_at_rate(absorb, rate).chi2;
}

// ---------------------------------------------------------------------------
// Pseudomode hybridization components.
// ---------------------------------------------------------------------------

struct PmHyb {
  std::complex<double> retarded;
  std::complex<double> lesser;
  std::complex<double> greater;
};

/// Steady-state hybridization of the damped bath: a sum of Lorentzians of
/// half-width `rate`. Emitters feed the lesser (occupied) component and
/// absorbers the greater one; 2i Im Delta^R = Delta^> - Delta^<.
inline PmHyb pm_hyb_check(const PseudomodeBath& bath, double w) {
  const std::complex<double> i{0, 1};
  PmHyb out{{0, 0}, {0, 0}, {0, 0}};
  for (int p = 0; p < bath.size(); ++p) {
    const double v2 = bath.couplings(p) * bath.couplings(p);
    const std::complex<double> den = w - bath.energies(p) + i * bath.rate;
    out.retarded += v2 / den;
    const double weight = v2 * bath.rate / std::norm(den);
    if (bath.parity[static_cast<std::size_t>(p)] == ModeParity::emitter)
      out.lesser += 2.0 * i * weight;
    else
      out.greater += -2.0 * i * weight;
  }
  return out;
}

}  // namespace noisim
