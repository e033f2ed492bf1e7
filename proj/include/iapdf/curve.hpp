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

#pragma once

#include <string>
#include <vector>

namespace iapdf {

enum class CurveKind { cdf, density };

/// A distribution function or density tabulated on a strictly increasing grid.
struct DistCurve {
  std::vector<double> grid;
  std::vector<double> values;
  CurveKind kind = CurveKind::cdf;
  double quad_tol = 0.0;            // achieved quadrature tolerance (max over grid)
  std::vector<double> std_error;    // Monte Carlo standard errors, empty if exact
  double ess = 0.0;                 // importance-sampling effective sample size
  bool low_ess = false;             // set when ess < 10
};

const char* to_string(CurveKind kind) noexcept;

/// Trapezoid integral of the values over the grid.
double curve_integral(const DistCurve& c);
/// Mean of the law: hi - int F for a cdf (assumes F = 0 at the first node),
/// int sigma rho for a density.
double curve_mean(const DistCurve& c);
/// Largest decrease between consecutive values (0 for a monotone curve).
double monotonicity_violation(const DistCurve& c);
/// Running trapezoid integral of a density curve.
DistCurve cumulative(const DistCurve& density);
/// Central differences of a cdf curve (one-sided at the ends).
DistCurve differentiate(const DistCurve& cdf);
/// max_i |a_i - b_i| on a common grid.
double sup_distance(const DistCurve& a, const DistCurve& b);

/// Strictly increasing grid of n points from lo to hi.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace iapdf
