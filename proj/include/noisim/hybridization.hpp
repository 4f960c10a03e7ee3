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

namespace noisim {

/// Fermi function 1/(1 + e^{beta w}), overflow-safe.
inline double fermi(double beta, double w) {
  const double x = beta * w;
  if (x > 40.0) return std::exp(-x);
  if (x < -40.0) return 1.0 - std::exp(x);
  return 1.0 / (1.0 + std::exp(x));
}

/// Flat-band resonant-level bath: spectral density gamma^2/(2D) inside the
/// band |w| <= D, zero outside, at inverse temperature beta. The impurity
/// level sits at `impurity_energy`.
struct HybridizationSpec {
  double gamma = 0.6;
  double half_bandwidth = 10.0;
  double beta = 1.0;
  double impurity_energy = 0.5;

  double band_density() const {
    return gamma * gamma / (2.0 * half_bandwidth);
  }
  bool in_band(double w) const { return std::abs(w) <= half_bandwidth; }
};

struct HybSpectra {
  double density;  // Delta(w)
  double lesser;   // Delta(w) * n_F(w)
  double greater;  // Delta(w) * (1 - n_F(w))
};

/// Spectral density and its thermally weighted lesser/greater components.
/// lesser + greater == density pointwise.
inline HybSpectra hyb_spectra(const HybridizationSpec& spec, double w) {
  const double d = spec.in_band(w) ? spec.band_density() : 0.0;
  const double nf = fermi(spec.beta, w);
  return {d, d * nf, d * (1.0 - nf)};
}

/// Retarded component: Hilbert transform of the flat band minus i pi Delta.
/// The real part diverges logarithmically at the band edges.
inline std::complex<double> delta_retarded(const HybridizationSpec& spec,
                                           double w) {
  const double dhb = spec.half_bandwidth;
  const double re =
      spec.band_density() * std::log(std::abs((w + dhb) / (w - dhb)));
  const double im = spec.in_band(w) ? -M_PI * spec.band_density() : 0.0;
  return {re, im};
}

/// Impurity retarded propagator 1/(w - eps - Delta^R(w)); zero in the
/// band-edge limit where the level shift diverges.
inline std::complex<double> rlm_gr(const HybridizationSpec& spec, double w) {
  const std::complex<double> den =
      w - spec.impurity_energy - delta_retarded(spec, w);
  if (!std::isfinite(den.real()) || !std::isfinite(den.imag())) return {0, 0};
  return 1.0 / den;
}

/// Occupied / empty parts of the impurity spectral function.
inline double rlm_spectral_lesser(const HybridizationSpec& spec, double w) {
  const auto s = hyb_spectra(spec, w);
  return std::norm(rlm_gr(spec, w)) * s.lesser;
}

inline double rlm_spectral_greater(const HybridizationSpec& spec, double w) {
  const auto s = hyb_spectra(spec, w);
  return std::norm(rlm_gr(spec, w)) * s.greater;
}

}  // namespace noisim
