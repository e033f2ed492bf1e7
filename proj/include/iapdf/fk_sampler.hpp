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

#include <functional>
#include <span>
#include <vector>

#include "iapdf/measures.hpp"
#include "iapdf/rng.hpp"

namespace iapdf {

struct Jump {
  double location;
  double size;
};

/// A realized trajectory: random jumps in nonincreasing size order plus the
/// fixed-discontinuity jumps.
struct JumpPath {
  std::vector<Jump> random_jumps;
  std::vector<Jump> fixed_jumps;
  double upsilon = 1.0;
  double threshold = 1e-4;
  /// Size of the last accepted jump over the accepted total (>= threshold).
  double last_ratio = 1.0;
  /// Ratio of the first rejected candidate (< threshold).
  double stop_ratio = 0.0;

  std::size_t size() const { return random_jumps.size() + fixed_jumps.size(); }
  bool empty() const { return random_jumps.empty() && fixed_jumps.empty(); }
  double random_mass() const;
  double total_mass() const;

  template <class F>
  void for_each(F&& f) const {
    for (const Jump& j : random_jumps) f(j);
    for (const Jump& j : fixed_jumps) f(j);
  }
};

/// Tail mass M(v) = sum_b alpha_b E1(beta_b v) of the gamma-type intensity
/// exp(-beta(x) v) v^-1 dv alpha(dx), with alpha's density part restricted to
/// (-inf, upsilon] and beta frozen at bin midpoints of a uniform grid.
/// Adjacent bins with equal beta are merged (exact for constant beta).
class LevyTail {
 public:
  LevyTail(const BaseMeasure& alpha, const std::function<double(double)>& beta, double upsilon, int bins = 256);

  double operator()(double v) const;
  double derivative(double v) const;
  /// v with M(v) = m, to relative tolerance 1e-10. A positive `upper` is a
  /// known bound v <= upper (the previous jump in a decreasing series).
  double inverse(double m, double upper = 0.0) const;
  /// Location drawn from exp(-J beta(x)) alpha(dx) on the binned grid.
  double sample_location(double jump, Rng& rng) const;

  double mass() const { return mass_; }
  bool empty() const { return groups_.empty(); }

 private:
  struct Group {
    double beta;
    double mass;
    double cum_start;  // continuous alpha mass below the group
  };
  BaseMeasure alpha_;
  std::vector<Group> groups_;
  double mass_ = 0.0;
  double min_beta_ = 0.0;
  mutable std::vector<double> weights_;
};

double levy_tail_mass(const IapSpec& spec, double v);

/// Random jumps by the Ferguson-Klass series: J_k = M^-1(xi_k) with xi_k the
/// arrival times of a unit-rate Poisson process, stopping at the first
/// candidate whose share of the accepted total (itself included) falls
/// below `threshold`.
void sample_random_jumps(const LevyTail& tail, double threshold, Rng& rng, JumpPath& path);

/// Fixed-jump laws of the prior: the fixed jumps of the IapSpec plus one
/// gamma(mass, beta(x)) jump for each atom of alpha at x <= upsilon.
std::vector<FixedJump> prior_fixed_jumps(const IapSpec& spec);

JumpPath sample_jump_path(const IapSpec& spec, double threshold, Rng& rng);

struct ProcessValue {
  double Z;
  double Zbar;
  double F;
  double f;
};

/// Z(t), Zbar = Z(upsilon), F = Z / Zbar and f = sum k'(t, x) J / Zbar.
/// F is 1 and f is 0 beyond upsilon.
ProcessValue eval_process(const JumpPath& path, const Kernel& kernel, double t);
double path_zbar(const JumpPath& path, const Kernel& kernel);

/// F and f on a grid of t values.
void eval_process_grid(const JumpPath& path, const Kernel& kernel, std::span<const double> ts, std::span<double> F,
                       std::span<double> f);

}  // namespace iapdf
