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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisim {

enum class GfComponent { greater, lesser, retarded };
enum class Provenance { exact_original, exact_pm, closed_bath, circuit };

inline std::string to_string(GfComponent c) {
  switch (c) {
    case GfComponent::greater: return "greater";
    case GfComponent::lesser: return "lesser";
    case GfComponent::retarded: return "retarded";
  }
  return "?";
}

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::exact_original: return "exact_original";
    case Provenance::exact_pm: return "exact_pm";
    case Provenance::closed_bath: return "closed_bath";
    case Provenance::circuit: return "circuit";
  }
  return "?";
}

/// Sampled complex Green's function G(t).
struct GreenSeries {
  std::vector<double> times;
  std::vector<std::complex<double>> values;
  GfComponent component = GfComponent::greater;
  Provenance provenance = Provenance::exact_pm;

  std::size_t size() const { return times.size(); }

  void check() const {
    if (times.size() != values.size())
      throw std::invalid_argument("times/values length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] <= times[i - 1])
        throw std::invalid_argument("times must be strictly increasing");
  }
};

namespace green_detail {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace green_detail

inline std::string to_csv(const GreenSeries& g) {
  g.check();
  std::string out = "t,re,im,component,provenance\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += green_detail::fmt_double(g.times[i]) + "," +
           green_detail::fmt_double(g.values[i].real()) + "," +
           green_detail::fmt_double(g.values[i].imag()) + "," +
           to_string(g.component) + "," + to_string(g.provenance) + "\n";
  }
  return out;
}

/// Frequency-domain samples, "omega,re,im" rows.
inline std::string freq_csv(const std::vector<double>& omegas,
                            const std::vector<std::complex<double>>& values) {
  if (omegas.size() != values.size())
    throw std::invalid_argument("freq_csv length mismatch");
  std::string out = "omega,re,im\n";
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    out += green_detail::fmt_double(omegas[i]) + "," +
           green_detail::fmt_double(values[i].real()) + "," +
           green_detail::fmt_double(values[i].imag()) + "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << content;
}

/// Root-mean-square complex deviation between two series on identical grids.
inline double eps_tot(const GreenSeries& a, const GreenSeries& b) {
  a.check();
  b.check();
  if (a.size() != b.size()) throw std::invalid_argument("grid size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.times[i] != b.times[i])
      throw std::invalid_argument("grid point mismatch");
    sum += std::norm(a.values[i] - b.values[i]);
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace noisim
