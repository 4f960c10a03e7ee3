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

// Adaptive Gauss-Kronrod 7-15 integration. The error estimate per panel is
// |K15 - G7|; panels are bisected until the local estimate passes.
namespace quad_detail {

inline constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
inline constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <typename F>
struct Panel {
  using R = decltype(std::declval<F>()(0.0));
  R kronrod;
  double err;
};

template <typename F>
Panel<F> gk15(const F& f, double a, double b) {
  using R = decltype(f(0.0));
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  R fc = f(c);
  R kron = kWgk[7] * fc;
  R gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    R fsum = f(c - dx) + f(c + dx);
    kron = kron + kWgk[i] * fsum;
    if (i % 2 == 1) gauss = gauss + kWg[i / 2] * fsum;
  }
  kron = h * kron;
  gauss = h * gauss;
  return {kron, std::abs(kron - gauss)};
}

template <typename F>
auto integrate_rec(const F& f, double a, double b, double atol, double rtol,
                   int depth) -> decltype(f(0.0)) {
  auto panel = gk15(f, a, b);
  if (panel.err <= atol + rtol * std::abs(panel.kronrod) || depth <= 0)
    return panel.kronrod;
  const double c = 0.5 * (a + b);
  return integrate_rec(f, a, c, 0.5 * atol, rtol, depth - 1) +
         integrate_rec(f, c, b, 0.5 * atol, rtol, depth - 1);
}

}  // namespace quad_detail

/// Integrates f on [a, b] to the requested absolute/relative tolerance.
template <typename F>
auto integrate(const F& f, double a, double b, double atol = 1e-12,
               double rtol = 1e-10, int max_depth = 48) -> decltype(f(0.0)) {
  if (!(a <= b)) throw std::invalid_argument("integration bounds reversed");
  if (a == b) return decltype(f(0.0)){};
  return quad_detail::integrate_rec(f, a, b, atol, rtol, max_depth);
}

/// Same, but with interior split points (peaks, kinks) known to the caller.
template <typename F>
auto integrate_split(const F& f, const std::vector<double>& points,
                     double atol = 1e-12, double rtol = 1e-10,
                     int max_depth = 48) -> decltype(f(0.0)) {
  if (points.size() < 2) throw std::invalid_argument("need at least two points");
  decltype(f(0.0)) total{};
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    total = total + integrate(f, points[i], points[i + 1], atol, rtol, max_depth);
  return total;
}

}  // namespace noisim
