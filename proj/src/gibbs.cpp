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

#include "iapdf/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "iapdf/error.hpp"

namespace iapdf {

double default_upsilon(std::span<const double> data) {
  if (data.empty()) throw Error(ErrorKind::config, "upsilon must be given when there are no observations");
  return 1.5 * *std::max_element(data.begin(), data.end());
}

GibbsState init_state(std::span<const double> t, Rng& rng) {
  GibbsState st;
  for (double ti : t) {
    if (!(ti > 0.0) || !std::isfinite(ti)) {
      std::ostringstream os;
      os << "observations must be positive and finite, got " << ti;
      throw Error(ErrorKind::data, os.str());
    }
  }
  st.u.reserve(t.size());
  st.s.reserve(t.size());
  for (double ti : t) {
    st.u.push_back(rng.gamma(1.0, 1.0));
    st.s.push_back(rng.uniform(0.0, ti));
  }
  return st;
}

double tilted_beta(const IapSpec& spec, const Kernel& kernel, double usum, double x) {
  return spec.beta()(x) + kernel.value(spec.upsilon(), x) * usum;
}

FixedJump posterior_fixed_jump(const FixedJump& prior, int r, double usum, double k_upsilon) {
  return {prior.location, prior.shape + r, prior.rate + k_upsilon * usum};
}

FixedJump latent_jump(double s, int r, double beta_s, double usum, double k_upsilon) {
  if (r < 1) throw Error(ErrorKind::domain, "a latent jump needs at least one latent");
  return {s, static_cast<double>(r), beta_s + k_upsilon * usum};
}

std::vector<FixedJump> posterior_fixed_jumps(const IapSpec& spec, const Kernel& kernel, std::span<const double> s,
                                             std::span<const double> u) {
  double usum = 0.0;
  for (double v : u) usum += v;
  std::map<double, int> counts;
  for (double x : s) ++counts[x];
  const double ups = spec.upsilon();
  std::vector<FixedJump> out;
  for (const FixedJump& f : prior_fixed_jumps(spec)) {
    auto it = counts.find(f.location);
    int r = 0;
    if (it != counts.end()) {
      r = it->second;
      counts.erase(it);
    }
    out.push_back(posterior_fixed_jump(f, r, usum, kernel.value(ups, f.location)));
  }
  for (const auto& [x, r] : counts) out.push_back(latent_jump(x, r, spec.beta()(x), usum, kernel.value(ups, x)));
  std::sort(out.begin(), out.end(), [](const FixedJump& a, const FixedJump& b) { return a.location < b.location; });
  return out;
}

JumpPath step_update_process(const GibbsState& state, const IapSpec& spec, const Kernel& kernel, double threshold,
                             Rng& rng, int bins) {
  double usum = 0.0;
  for (double v : state.u) usum += v;
  JumpPath path;
  path.upsilon = spec.upsilon();
  const LevyTail tail(spec.base(), [&](double x) { return tilted_beta(spec, kernel, usum, x); }, spec.upsilon(), bins);
  sample_random_jumps(tail, threshold, rng, path);
  for (const FixedJump& f : posterior_fixed_jumps(spec, kernel, state.s, state.u))
    path.fixed_jumps.push_back({f.location, rng.gamma(f.shape, f.rate)});
  return path;
}

void step2_weights(const JumpPath& path, const Kernel& kernel, double t, std::vector<double>& locations,
                   std::vector<double>& weights) {
  locations.clear();
  weights.clear();
  path.for_each([&](const Jump& j) {
    if (!(j.location < t)) return;
    const double w = j.size * kernel.deriv(t, j.location);
    if (w > 0.0) {
      locations.push_back(j.location);
      weights.push_back(w);
    }
  });
}

void step_update_s(GibbsState& state, std::span<const double> t, const Kernel& kernel, Rng& rng) {
  std::vector<double> loc, w;
  std::vector<double> next(state.s.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    step2_weights(state.path, kernel, t[i], loc, w);
    if (loc.empty()) {
      std::ostringstream os;
      os << "no jump below observation t=" << t[i];
      throw Error(ErrorKind::degenerate, os.str());
    }
    next[i] = loc[rng.categorical(w)];
  }
  state.s = std::move(next);
}

double step3_rate(const JumpPath& path, const Kernel& kernel) { return path_zbar(path, kernel); }

void step_update_u(GibbsState& state, const Kernel& kernel, Rng& rng) {
  const double rate = step3_rate(state.path, kernel);
  if (!(rate > 0.0)) throw Error(ErrorKind::degenerate, "jump path has Zbar = 0");
  for (double& ui : state.u) ui = rng.exponential() / rate;
}

double path_mean_functional(const JumpPath& path, const Kernel& kernel, const MeanFunctional& g) {
  double num = 0.0;
  path.for_each([&](const Jump& j) { num += g.h_upto(j.location, path.upsilon) * j.size; });
  const double zbar = path_zbar(path, kernel);
  if (!(zbar > 0.0)) throw Error(ErrorKind::degenerate, "jump path has Zbar = 0");
  return num / zbar;
}

PosteriorSummary run_chain(const GibbsConfig& config, std::span<const double> data, const IapSpec& spec_in,
                           const Kernel& kernel, const MeanFunctional& g, const GibbsCallback& callback) {
  if (config.iterations < 1 || config.burn_in < 0 || config.burn_in >= config.iterations)
    throw Error(ErrorKind::config, "gibbs needs 0 <= burn_in < iterations");
  if (!(config.threshold > 0.0 && config.threshold < 1.0))
    throw Error(ErrorKind::config, "FK threshold must lie in (0, 1)");
  for (std::size_t i = 1; i < config.t_grid.size(); ++i)
    if (!(config.t_grid[i] > config.t_grid[i - 1])) throw Error(ErrorKind::config, "t grid must be strictly increasing");
  if (!data.empty() && !kernel.has_density())
    throw Error(ErrorKind::unsupported, "the Gibbs sampler needs a kernel with a t-density");

  const double ups = config.upsilon > 0.0 ? config.upsilon : (data.empty() ? spec_in.upsilon() : default_upsilon(data));
  const IapSpec spec = spec_in.with_upsilon(ups);
  for (double ti : data)
    if (ti > ups) throw Error(ErrorKind::config, "observations beyond upsilon");

  Rng rng(config.seed);
  GibbsState state = init_state(data, rng);

  PosteriorSummary sum;
  sum.t_grid = config.t_grid;
  sum.upsilon = ups;
  const std::size_t ng = config.t_grid.size();
  std::vector<double> F(ng), f(ng), sF(ng, 0.0), sf(ng, 0.0), sF2(ng, 0.0), sf2(ng, 0.0);
  double sum_functional = 0.0;

  for (int it = 0; it < config.iterations; ++it) {
    int resamples = 0;
    for (;;) {
      state.path = step_update_process(state, spec, kernel, config.threshold, rng, config.bins);
      if (data.empty()) break;
      try {
        step_update_s(state, data, kernel, rng);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate || ++resamples >= 10) throw;
      }
    }
    if (!data.empty()) step_update_u(state, kernel, rng);
    state.iter = it + 1;
    sum.path_resamples += resamples;

    double umean = 0.0;
    for (double v : state.u) umean += v;
    if (!state.u.empty()) umean /= static_cast<double>(state.u.size());
    const IterationRecord rec{state.iter, path_mean_functional(state.path, kernel, g), path_zbar(state.path, kernel),
                              state.path.size(), umean, resamples};
    if (it >= config.burn_in) {
      eval_process_grid(state.path, kernel, config.t_grid, F, f);
      for (std::size_t i = 0; i < ng; ++i) {
        sF[i] += F[i];
        sF2[i] += F[i] * F[i];
        sf[i] += f[i];
        sf2[i] += f[i] * f[i];
      }
      if (config.keep_curves) {
        sum.F_draws.push_back(F);
        sum.f_draws.push_back(f);
      }
      sum_functional += rec.mean_functional;
      sum.trace.push_back(rec);
      ++sum.kept;
    }
    if (callback) callback(state, rec);
  }

  const double kept = sum.kept;
  sum.mean_functional = sum_functional / kept;
  sum.mean_F.resize(ng);
  sum.mean_f.resize(ng);
  sum.sd_F.resize(ng);
  sum.sd_f.resize(ng);
  for (std::size_t i = 0; i < ng; ++i) {
    sum.mean_F[i] = sF[i] / kept;
    sum.mean_f[i] = sf[i] / kept;
    sum.sd_F[i] = std::sqrt(std::max(0.0, sF2[i] / kept - sum.mean_F[i] * sum.mean_F[i]));
    sum.sd_f[i] = std::sqrt(std::max(0.0, sf2[i] / kept - sum.mean_f[i] * sum.mean_f[i]));
  }
  return sum;
}

}  // namespace iapdf
