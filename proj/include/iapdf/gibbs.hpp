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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "iapdf/fk_sampler.hpp"
#include "iapdf/measures.hpp"
#include "iapdf/rng.hpp"

namespace iapdf {

struct GibbsConfig {
  int iterations = 10000;
  int burn_in = 1000;
  double threshold = 1e-4;  // Ferguson-Klass relative-error cutoff
  /// Observation horizon; 0 selects 1.5 * max(data).
  double upsilon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> t_grid;  // where F and f are recorded
  int bins = 256;              // beta* grid of the continuous part
  bool keep_curves = true;     // store F, f per kept iteration
};

struct GibbsState {
  std::vector<double> s;  // latent locations, s_i < t_i
  std::vector<double> u;  // latent scales, u_i > 0
  JumpPath path;
  long iter = 0;
};

double default_upsilon(std::span<const double> data);

GibbsState init_state(std::span<const double> t, Rng& rng);

/// beta*(x) = beta(x) + k(upsilon, x) sum u.
double tilted_beta(const IapSpec& spec, const Kernel& kernel, double usum, double x);

/// Law of a prior fixed jump at tau after r latents landed on it:
/// gamma(shape + r, rate + k(upsilon, tau) sum u).
FixedJump posterior_fixed_jump(const FixedJump& prior, int r, double usum, double k_upsilon);
/// Law of the jump at a latent location s not among the prior fixed jumps:
/// gamma(r, beta(s) + k(upsilon, s) sum u).
FixedJump latent_jump(double s, int r, double beta_s, double usum, double k_upsilon);

/// Fixed-jump laws of L given (s, u): updated prior fixed jumps (including
/// alpha's atoms) and new jumps at the remaining distinct latents.
std::vector<FixedJump> posterior_fixed_jumps(const IapSpec& spec, const Kernel& kernel, std::span<const double> s,
                                             std::span<const double> u);

/// Step 1: new path from p(L | s, u): the continuous part under beta*, the
/// fixed jumps from posterior_fixed_jumps.
JumpPath step_update_process(const GibbsState& state, const IapSpec& spec, const Kernel& kernel, double threshold,
                             Rng& rng, int bins = 256);

/// Step 2 weights for observation t: J_j k'(t, x_j) over jumps with x_j < t,
/// in the order of `locations`.
void step2_weights(const JumpPath& path, const Kernel& kernel, double t, std::vector<double>& locations,
                   std::vector<double>& weights);

/// Step 2: s_i drawn over the jumps below t_i. Throws a degenerate-path
/// error when some t_i has no admissible jump.
void step_update_s(GibbsState& state, std::span<const double> t, const Kernel& kernel, Rng& rng);

/// Step 3 rate: Zbar = sum k(upsilon, x_j) J_j.
double step3_rate(const JumpPath& path, const Kernel& kernel);

/// Step 3: u_i i.i.d. exponential with rate Zbar.
void step_update_u(GibbsState& state, const Kernel& kernel, Rng& rng);

/// int g dF on a path with F = Z / Z(upsilon): sum h_upsilon(x) J / Zbar,
/// h_upsilon(x) = int_{t <= upsilon} g(t) k'(t, x) dt.
double path_mean_functional(const JumpPath& path, const Kernel& kernel, const MeanFunctional& g);

struct IterationRecord {
  long iter;
  double mean_functional;
  double zbar;
  std::size_t jumps;
  double u_mean;
  int path_resamples;
};

struct PosteriorSummary {
  std::vector<double> t_grid;
  std::vector<double> mean_F, mean_f;  // pointwise posterior means
  std::vector<double> sd_F, sd_f;      // pointwise posterior standard deviations
  std::vector<IterationRecord> trace;  // kept iterations
  std::vector<std::vector<double>> F_draws, f_draws;
  double mean_functional = 0.0;
  double upsilon = 0.0;
  int kept = 0;
  int path_resamples = 0;
};

using GibbsCallback = std::function<void(const GibbsState&, const IterationRecord&)>;

PosteriorSummary run_chain(const GibbsConfig& config, std::span<const double> data, const IapSpec& spec,
                           const Kernel& kernel, const MeanFunctional& g, const GibbsCallback& callback = {});

}  // namespace iapdf
