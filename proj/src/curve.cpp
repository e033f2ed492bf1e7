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

#include "iapdf/curve.hpp"

#include <algorithm>
#include <cmath>

#include "iapdf/error.hpp"
#include "iapdf/numerics.hpp"

namespace iapdf {

const char* to_string(CurveKind kind) noexcept { return kind == CurveKind::cdf ? "cdf" : "density"; }

double curve_integral(const DistCurve& c) { return trapezoid(c.grid, c.values); }

double curve_mean(const DistCurve& c) {
  if (c.grid.size() < 2) throw Error(ErrorKind::domain, "curve needs at least two grid points");
  if (c.kind == CurveKind::cdf) return c.grid.back() - trapezoid(c.grid, c.values);
  std::vector<double> m(c.grid.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = c.grid[i] * c.values[i];
  return trapezoid(c.grid, m);
}

double monotonicity_violation(const DistCurve& c) {
  double worst = 0.0;
  for (std::size_t i = 1; i < c.values.size(); ++i) worst = std::max(worst, c.values[i - 1] - c.values[i]);
  return worst;
}

DistCurve cumulative(const DistCurve& density) {
  DistCurve out;
  out.grid = density.grid;
  out.kind = CurveKind::cdf;
  out.quad_tol = density.quad_tol;
  out.values.assign(density.grid.size(), 0.0);
  for (std::size_t i = 1; i < out.grid.size(); ++i)
    out.values[i] = out.values[i - 1] + 0.5 * (out.grid[i] - out.grid[i - 1]) * (density.values[i] + density.values[i - 1]);
  return out;
}

DistCurve differentiate(const DistCurve& cdf) {
  const std::size_t n = cdf.grid.size();
  if (n < 2) throw Error(ErrorKind::domain, "curve needs at least two grid points");
  DistCurve out;
  out.grid = cdf.grid;
  out.kind = CurveKind::density;
  out.values.resize(n);
  const auto& x = cdf.grid;
  const auto& y = cdf.values;
  out.values[0] = (y[1] - y[0]) / (x[1] - x[0]);
  out.values[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // Three-point derivative on a possibly nonuniform grid.
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    out.values[i] = (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1];
  }
  return out;
}

double sup_distance(const DistCurve& a, const DistCurve& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorKind::domain, "curves are on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorKind::config, "grid needs n >= 2 and lo < hi");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace iapdf
