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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace iapdf {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached, thread-safe. Nodes in increasing order.
const GaussRule& gauss_legendre(int n);

/// Weighted point set approximating integration against some measure.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  void append(double x, double w) {
    nodes.push_back(x);
    weights.push_back(w);
  }
  /// Appends the n-point Gauss-Legendre rule mapped to [a, b], each weight
  /// multiplied by density(x).
  template <class Density>
  void append_panel(double a, double b, int n, Density&& density);
};

template <class Density>
void QuadratureRule::append_panel(double a, double b, int n, Density&& density) {
  if (!(b > a)) return;
  const GaussRule& gl = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    const double x = mid + half * gl.nodes[i];
    append(x, half * gl.weights[i] * density(x));
  }
}

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.
/// Power series for x <= 1, Lentz continued fraction above.
double exp_integral_e1(double x);

/// Outcome of an adaptive integration.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
  /// Final subintervals, recorded when requested.
  std::vector<std::pair<double, double>> intervals;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Points at which a GK15 rule evaluates on [a, b], paired with weights.
void append_kronrod_nodes(QuadratureRule& rule, double a, double b);

/// Globally adaptive G7-K15 integration of f over [a, b]; bisects the
/// interval with the largest error estimate until the total error meets
/// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                              int max_intervals = 1000, bool keep_intervals = false) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  QuadResult out;
  if (!(b > a)) return out;
  std::priority_queue<Piece> heap;
  auto [v0, e0] = detail::gk15(f, a, b);
  heap.push({a, b, v0, e0});
  out.evaluations = 15;
  double value = v0, error = e0;
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && count < max_intervals) {
    Piece worst = heap.top();
    // Stop splitting once intervals reach roundoff width.
    if (worst.b - worst.a <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(worst.a))) break;
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    auto [vl, el] = detail::gk15(f, worst.a, m);
    auto [vr, er] = detail::gk15(f, m, worst.b);
    out.evaluations += 30;
    value += vl + vr - worst.value;
    error += el + er - worst.error;
    heap.push({worst.a, m, vl, el});
    heap.push({m, worst.b, vr, er});
    ++count;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    const Piece& p = heap.top();
    value += p.value;
    error += p.error;
    if (keep_intervals) out.intervals.emplace_back(p.a, p.b);
    heap.pop();
  }
  if (keep_intervals) std::sort(out.intervals.begin(), out.intervals.end());
  out.value = value;
  out.error = error;
  out.converged = error <= std::max(abs_tol, rel_tol * std::abs(value));
  return out;
}

/// Options for integrate_decaying.
struct DecayOptions {
  double first_panel = 1.0;   // width of [0, s0]; later panels double
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double tail_tol = 1e-10;    // stop once the estimated tail drops below this
  int max_panels = 400;
  bool keep_intervals = false;
};

/// Integral over (0, inf) of an integrand that decays polynomially or
/// faster. `f(s)` returns the integrand and `envelope(s)` a nonincreasing
/// bound on its modulus for s' >= s. The tail beyond S is estimated from the
/// local power-law decay of the envelope; integration stops once it falls
/// below tail_tol. Panels are [0, s0], [s0, 2 s0], [2 s0, 4 s0], ...
template <class F, class Env>
QuadResult integrate_decaying(F&& f, Env&& envelope, const DecayOptions& opt) {
  QuadResult out;
  double a = 0.0;
  double b = opt.first_panel;
  double env_prev = envelope(b);
  double tail = std::numeric_limits<double>::infinity();
  for (int panel = 0; panel < opt.max_panels; ++panel) {
    const double panel_tol = std::max(opt.abs_tol / 8.0, 0.0);
    QuadResult piece = integrate_adaptive(f, a, b, panel_tol, opt.rel_tol, 400, opt.keep_intervals);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
    if (opt.keep_intervals)
      out.intervals.insert(out.intervals.end(), piece.intervals.begin(), piece.intervals.end());
    const double env_b = envelope(b);
    if (panel > 0) {
      if (env_b <= 0.0 || !std::isfinite(env_b)) {
        tail = 0.0;
      } else {
        const double slope = std::log(env_prev / env_b) / std::log(b / a);
        tail = slope > 1.0 + 1e-3 ? env_b * b / (slope - 1.0) : std::numeric_limits<double>::infinity();
      }
      if (tail < opt.tail_tol) break;
    }
    env_prev = env_b;
    a = b;
    b *= 2.0;
  }
  // A tail that never became estimable leaves the error unbounded.
  out.error += tail;
  out.converged = tail < opt.tail_tol && out.error <= std::max(16.0 * opt.abs_tol, opt.rel_tol * std::abs(out.value)) + opt.tail_tol;
  return out;
}

/// Root of f on [a, b] where f(a) and f(b) differ in sign (or one is zero),
/// by bisection to the given absolute x tolerance.
double bisect_root(const std::function<double(double)>& f, double a, double b, double x_tol = 0.0);

/// Composite trapezoid of y over strictly increasing x.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace iapdf
