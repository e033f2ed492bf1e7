/*
 * Copyright 2026 The iapdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Shared helpers for the test programs: hand-rolled property generators and
// small statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "iapdf/measures.hpp"
#include "iapdf/rng.hpp"

namespace iapdf::testing {

/// Random inputs for property tests. Every case is reproducible from
/// (seed, case index).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed, 17) {}
  Rng& rng() { return rng_; }
  double real(double lo, double hi) { return rng_.uniform(lo, hi); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.next_u64() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (rng_.next_u64() & 1) != 0; }

  std::vector<double> increasing(int n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = real(lo, hi);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  /// Uniform, tabulated or atomic measure on a random interval in [0, 5].
  BaseMeasure measure() {
    const double lo = real(0.0, 2.0);
    const double hi = lo + real(0.5, 3.0);
    switch (integer(0, 3)) {
      case 0:
        return BaseMeasure::uniform(lo, hi, real(0.3, 5.0));
      case 1: {
        const int n = integer(2, 6);
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
          xs[i] = lo + (hi - lo) * i / (n - 1);
          ys[i] = real(0.05, 2.0);
        }
        return BaseMeasure::tabulated(xs, ys);
      }
      case 2: {
        std::vector<Atom> atoms;
        const int n = integer(1, 4);
        for (int i = 0; i < n; ++i) atoms.push_back({lo + (hi - lo) * (i + 0.5) / n, real(0.2, 2.0)});
        return BaseMeasure::atoms_only(atoms);
      }
      default:
        return BaseMeasure::tabulated({lo, hi}, {real(0.1, 1.0), real(0.1, 1.0)}, {{0.5 * (lo + hi), real(0.2, 1.0)}});
    }
  }

  Kernel kernel() {
    if (coin()) return Kernel::exp_conv(real(0.5, 4.0));
    return Kernel::indicator();
  }

 private:
  Rng rng_;
};

/// Runs `body(gen, case)` for `cases` cases; returns the first failing case
/// description or an empty string.
inline std::string for_all(std::uint64_t seed, int cases, const std::function<std::string(Gen&, int)>& body) {
  Gen g(seed);
  for (int i = 0; i < cases; ++i) {
    std::string why = body(g, i);
    if (!why.empty()) {
      std::ostringstream os;
      os << "seed " << seed << " case " << i << ": " << why;
      return os.str();
    }
  }
  return "";
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.var = m2 / (n - 1.0);
  m4 /= n;
  m.se_mean = std::sqrt(m.var / n);
  m.se_var = std::sqrt(std::max(m4 - m.var * m.var, 0.0) / n);
  return m;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous d.f.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return d;
}

/// Linear interpolation of (xs, ys) at x, clamped at the ends.
inline double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace iapdf::testing
