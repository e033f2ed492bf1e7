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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iapdf/numerics.hpp"

namespace iapdf {

struct Atom {
  double location;
  double mass;
};

/// Finite nondegenerate measure on the real line: an optional density on a
/// bounded interval plus point masses.
///
/// The density is integrated with 256-node Gauss-Legendre panels between
/// consecutive breakpoints (support ends and declared kinks).
class BaseMeasure {
 public:
  using Density = std::function<double(double)>;

  /// General constructor. `kinks` are interior points where the density is
  /// not smooth. Pass an empty density (or lo == hi) for a purely atomic
  /// measure.
  BaseMeasure(double lo, double hi, Density density, std::vector<double> kinks, std::vector<Atom> atoms);

  static BaseMeasure uniform(double lo, double hi, double mass);
  /// Piecewise-linear density through (xs[i], values[i]).
  static BaseMeasure tabulated(std::vector<double> xs, std::vector<double> values, std::vector<Atom> atoms = {});
  static BaseMeasure atoms_only(std::vector<Atom> atoms);

  double total_mass() const { return total_mass_; }
  double continuous_mass() const { return continuous_mass_; }
  bool has_density() const { return continuous_mass_ > 0.0; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Smallest / largest point carrying mass.
  double support_min() const;
  double support_max() const;

  double density(double x) const;
  /// A(x) = alpha((-inf, x]).
  double cdf(double x) const;
  /// Mass of the density part on (-inf, x].
  double continuous_cdf(double x) const;
  /// Inverse of continuous_cdf: the x with continuous_cdf(x) = m, m in [0, continuous_mass].
  double continuous_quantile(double m) const;
  /// Generalized inverse of the normalized d.f. A / a.
  double quantile(double p) const;

  /// Support ends and kinks of the density, sorted.
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Rule for integrating against alpha: n-node Gauss-Legendre panels over
  /// the density part split at breakpoints and `extra_breaks`, followed by
  /// one node per atom.
  QuadratureRule rule(std::span<const double> extra_breaks = {}, int nodes_per_panel = 256) const;

  /// int f d alpha.
  template <class F>
  double integrate(F&& f, std::span<const double> extra_breaks = {}) const {
    const QuadratureRule r = rule(extra_breaks);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * f(r.nodes[i]);
    return sum;
  }

  /// alpha + sum_i weight * delta_{locations[i]}, merging coincident atoms.
  BaseMeasure with_atoms(std::span<const double> locations, double weight = 1.0) const;

 private:
  double continuous_cdf_on_panel(std::size_t panel, double x) const;

  double lo_ = 0.0;
  double hi_ = 0.0;
  Density density_;
  bool uniform_ = false;
  std::vector<double> breaks_;      // density breakpoints
  std::vector<double> panel_edges_;  // refined panels for the cumulative table
  std::vector<double> cumulative_;   // continuous mass up to each panel edge
  std::vector<Atom> atoms_;          // sorted by location
  double continuous_mass_ = 0.0;
  double total_mass_ = 0.0;
};

struct KernelValue {
  double value;  // k(t, x)
  double deriv;  // k'(t, x) = d/dt k(t, x)
  double limit;  // kbar(x) = lim_{t -> inf} k(t, x)
};

/// Convolution kernel k(t, x), nondecreasing and right-continuous in t.
class Kernel {
 public:
  enum class Family { exp_conv, indicator, tabulated };

  /// k(t, x) = (1 - exp(-rate (t - x))) / rate for 0 <= x <= t, else 0.
  static Kernel exp_conv(double rate);
  /// k(t, x) = 1 if x <= t else 0.
  static Kernel indicator();
  /// Bilinear table: values[ix * t_grid.size() + it] = k(t_grid[it], x_grid[ix]).
  /// Piecewise linear in t, so k' is the piecewise slope. kbar(x) is the
  /// value at the last t node. Queries outside the table are domain errors.
  static Kernel tabulated(std::vector<double> t_grid, std::vector<double> x_grid, std::vector<double> values);

  KernelValue eval(double t, double x) const;
  double value(double t, double x) const;
  double deriv(double t, double x) const;
  double limit(double x) const;

  Family family() const { return family_; }
  double rate() const { return rate_; }
  /// False for the indicator kernel, whose t-derivative is a point mass.
  bool has_density() const { return family_ != Family::indicator; }

  /// Points in x at which k(t, .), kbar or h may fail to be smooth.
  std::vector<double> x_kinks() const;
  /// Points in t at which k'(., x) may jump.
  std::vector<double> t_breaks(double x) const;
  /// Interval of t on which k'(., x) can be nonzero (may be infinite).
  std::pair<double, double> t_support(double x) const;

  const std::vector<double>& t_grid() const;
  const std::vector<double>& x_grid() const;

 private:
  struct Table {
    std::vector<double> t, x, v;
  };
  double table_value(double t, double x) const;
  double table_slope(double t, double x) const;

  Family family_ = Family::indicator;
  double rate_ = 1.0;
  std::shared_ptr<const Table> table_;
};

/// Nonnegative rate function beta(x), constant or piecewise linear.
class RateFunction {
 public:
  static RateFunction constant(double value);
  static RateFunction tabulated(std::vector<double> xs, std::vector<double> values);

  double operator()(double x) const;
  bool is_constant() const { return xs_.empty(); }
  double constant_value() const { return value_; }
  std::vector<double> kinks() const { return xs_; }

 private:
  double value_ = 1.0;
  std::vector<double> xs_, ys_;
};

struct FixedJump {
  double location;
  double shape;  // gamma law of the jump size
  double rate;
};

/// Extended gamma increasing additive process: Poisson intensity
/// exp(-beta(x) v) v^-1 dv alpha(dx), plus fixed jumps, observed on (-inf, upsilon].
class IapSpec {
 public:
  IapSpec(BaseMeasure base, RateFunction beta, std::vector<FixedJump> fixed_jumps, double upsilon);

  const BaseMeasure& base() const { return base_; }
  const RateFunction& beta() const { return beta_; }
  const std::vector<FixedJump>& fixed_jumps() const { return fixed_jumps_; }
  double upsilon() const { return upsilon_; }

  IapSpec with_upsilon(double upsilon) const { return IapSpec(base_, beta_, fixed_jumps_, upsilon); }

 private:
  BaseMeasure base_;
  RateFunction beta_;
  std::vector<FixedJump> fixed_jumps_;
  double upsilon_;
};

enum class FunctionalForm { identity, constant, indicator_interval, user };

/// Description of g before pairing with a kernel.
struct FunctionalSpec {
  FunctionalForm form = FunctionalForm::identity;
  double constant = 1.0;                  // constant form
  double lo = 0.0, hi = 1.0;              // indicator_interval form
  std::function<double(double)> g;         // user form
  std::vector<double> g_breaks;            // user form: points where g is not smooth
};

/// Mean functional g paired with a kernel, exposing
/// h(x) = int g(t) k'(t, x) dt. Closed forms are used for the built-in
/// forms and exp_conv / indicator kernels, adaptive quadrature otherwise.
/// h is evaluated lazily; a divergent integral raises ErrorKind::nonintegrable.
class MeanFunctional {
 public:
  MeanFunctional(FunctionalSpec spec, Kernel kernel);

  double g(double t) const;
  double h(double x) const;
  /// h with |g| in place of g.
  double h_abs(double x) const;
  /// int_{t <= horizon} g(t) k'(t, x) dt: the functional of F restricted to
  /// a finite observation horizon.
  double h_upto(double x, double horizon) const;
  /// h(x) / kbar(x); the integrand of the equivalent Dirichlet mean when
  /// kbar is constant. Zero where kbar vanishes.
  double hbar(double x) const;

  bool closed_form() const;
  FunctionalForm form() const { return spec_.form; }
  const FunctionalSpec& spec() const { return spec_; }
  const Kernel& kernel() const { return kernel_; }
  /// Points in x where h may fail to be smooth.
  std::vector<double> x_kinks() const;

 private:
  double h_quadrature(double x, double horizon, bool absolute) const;

  FunctionalSpec spec_;
  Kernel kernel_;
};

/// Pairs g with a kernel. Pure construction; h is validated on use.
MeanFunctional h_transform(const FunctionalSpec& g, const Kernel& kernel);

struct ConditionCheck {
  std::string name;
  bool passed;
  bool required;  // informational checks do not affect all_passed()
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;

  bool all_passed() const;
  const ConditionCheck* find(const std::string& name) const;
};

/// Probes the regularity conditions that make F a random d.f. and the
/// existence condition for the mean of g.
ValidationReport validate_spec(const IapSpec& spec, const Kernel& kernel, const MeanFunctional& functional);

}  // namespace iapdf
