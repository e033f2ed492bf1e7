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

#include <optional>
#include <span>
#include <vector>

#include "iapdf/curve.hpp"
#include "iapdf/measures.hpp"
#include "iapdf/rng.hpp"

namespace iapdf {

struct InversionOptions {
  // Outer integral over s in (0, inf).
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double tail_tol = 1e-10;
  int max_panels = 300;
  // Inner integrals against alpha: panels graded geometrically toward the
  // zeros of h - sigma kbar.
  int grading_levels = 30;
  int graded_nodes = 12;
  int panel_nodes = 48;
  // A point whose achieved error exceeds this raises ToleranceError.
  double fail_tol = 1e-6;
};

/// P(int g dF <= sigma), symmetrized at atoms, for the gamma-family IAP
/// described by `spec` and `kernel`. The exponent and phase are
/// -1/2 int log(1 + s^2 z^2) and int arctan(s z) with
/// z = (h - sigma kbar) / beta against alpha, plus the fixed jumps.
double prior_mean_cdf_general(double sigma, const MeanFunctional& h, const Kernel& kernel, const IapSpec& spec,
                              const InversionOptions& opt = {});

/// Law of the Dirichlet mean int hbar dD_alpha:
/// F(sigma) = 1/2 - 1/pi int_0^inf exp{-1/2 int log(1 + s^2 z^2) d alpha}
///            sin(int arctan(s z) d alpha) / s ds,  z = hbar - sigma.
double prior_mean_cdf_dirichlet(double sigma, const MeanFunctional& h, const BaseMeasure& alpha,
                                const InversionOptions& opt = {});

DistCurve prior_mean_cdf_general_curve(std::span<const double> grid, const MeanFunctional& h, const Kernel& kernel,
                                       const IapSpec& spec, const InversionOptions& opt = {});
DistCurve prior_mean_cdf_dirichlet_curve(std::span<const double> grid, const MeanFunctional& h, const BaseMeasure& alpha,
                                         const InversionOptions& opt = {});

/// Prior density of the Dirichlet mean by central differences of the cdf.
DistCurve prior_mean_density_dirichlet(std::span<const double> grid, const MeanFunctional& h, const BaseMeasure& alpha,
                                       const InversionOptions& opt = {});

/// Density of int hbar dD given latents u, D ~ DP(alpha*), alpha* = alpha + sum delta_{u_i}:
/// rho(sigma) = (theta - 1)/pi int_0^inf Re exp{-int log(1 + i s (hbar - sigma)) d alpha*} ds,
/// theta = alpha*(R). Zero outside the range of hbar over the support of alpha*.
double posterior_mean_density_latent(double sigma, const MeanFunctional& h, const BaseMeasure& alpha,
                                     std::span<const double> u, const InversionOptions& opt = {});

/// Curve version. When alpha* is a single point the law is a point mass,
/// represented as a spike of unit trapezoid mass at the nearest grid node.
DistCurve posterior_mean_density_latent_curve(std::span<const double> grid, const MeanFunctional& h,
                                              const BaseMeasure& alpha, std::span<const double> u,
                                              const InversionOptions& opt = {});

struct LatentDraw {
  std::vector<double> u;
  double log_weight = 0.0;
};

/// Sequential Polya-urn proposal for the latents given observations:
/// u_k ~ k'(t_k, u) (alpha + sum_{i<k} delta_{u_i})(du), with the log of the
/// product of per-step normalizers as importance weight.
class LatentUrn {
 public:
  LatentUrn(std::vector<double> t, Kernel kernel, BaseMeasure alpha);

  LatentDraw sample(Rng& rng) const;
  /// Draw from the even mixture of the urn and a flat urn that replaces
  /// k'(t_k, u) by the indicator k'(t_k, u) > 0. The weight is the density
  /// ratio of the latent posterior against that mixture, so tail
  /// configurations the tilted urn rarely visits are still covered.
  LatentDraw sample_defensive(Rng& rng) const;
  /// int k'(t_k, u) alpha(du).
  double base_normalizer(std::size_t k) const { return obs_[k].mass; }
  std::size_t size() const { return obs_.size(); }

 private:
  struct Obs {
    double t;
    double mass;
    std::optional<BaseMeasure> tilted;  // k'(t, u) alpha(du)
    double flat_mass = 0.0;
    std::optional<BaseMeasure> flat;  // alpha restricted to k'(t, u) > 0
  };
  std::vector<Obs> obs_;
  Kernel kernel_;
};

LatentDraw sample_latents_urn(std::span<const double> t, const Kernel& kernel, const BaseMeasure& alpha, Rng& rng);

/// Self-normalized importance-sampling estimate of the posterior density of
/// the mean over `draws` defensive urn proposals, with per-point standard errors and
/// the effective sample size. With no data, the prior density.
DistCurve posterior_mean_density_mixture(std::span<const double> grid, const MeanFunctional& h, const BaseMeasure& alpha,
                                         std::span<const double> t, const Kernel& kernel, int draws, Rng& rng,
                                         const InversionOptions& opt = {});

/// Exact posterior density of the mean as a sum over set partitions of the
/// observations (n <= 10). Each partition weighs prod (c_i - 1)! times the
/// cell integrals int prod_{p in C_i} k'(t_p, u) alpha(du).
DistCurve posterior_mean_density_exact_smalln(std::span<const double> grid, const MeanFunctional& h,
                                              const BaseMeasure& alpha, std::span<const double> t, const Kernel& kernel,
                                              const InversionOptions& opt = {});

/// sum_P prod_i (c_i - 1)! int prod_{p in C_i} k'(t_p, u) alpha(du): the
/// normalizer of the exact form, by explicit partition enumeration.
double partition_normalizer(const BaseMeasure& alpha, std::span<const double> t, const Kernel& kernel);

namespace detail {

/// Quadrature against a measure with the argument z precomputed at each node.
struct ArgRule {
  std::vector<double> x, z, w;
  void add(double xi, double zi, double wi) {
    x.push_back(xi);
    z.push_back(zi);
    w.push_back(wi);
  }
};

/// Rule for alpha with panels split at its breakpoints and `breaks`, and
/// graded toward the sign changes of z.
ArgRule argument_rule(const BaseMeasure& alpha, const std::function<double(double)>& z, std::span<const double> breaks,
                      const InversionOptions& opt);

struct PointEstimate {
  double value;
  double error;
};

PointEstimate cdf_from_rule(const ArgRule& r, const InversionOptions& opt);
PointEstimate density_from_rule(const ArgRule& r, double theta, const InversionOptions& opt);

}  // namespace detail

}  // namespace iapdf
