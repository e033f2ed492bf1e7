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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "iapdf/error.hpp"
#include "iapdf/gibbs.hpp"
#include "iapdf/inversion.hpp"
#include "support.hpp"

using namespace iapdf;

namespace {

const Kernel kExp = Kernel::exp_conv(2.0);
const MeanFunctional kId = h_transform(FunctionalSpec{}, kExp);

IapSpec spec_on(double lo, double hi, double mass, double upsilon, std::vector<FixedJump> fixed = {}) {
  return IapSpec(BaseMeasure::uniform(lo, hi, mass), RateFunction::constant(1.0), std::move(fixed), upsilon);
}

// Batch-means standard error of a chain average.
double batch_se(const std::vector<double>& x, int batches = 20) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[b * len + i];
    means.push_back(s / len);
  }
  return iapdf::testing::moments(means).se_mean;
}

}  // namespace

TEST_CASE("update for a prior fixed jump hit by latents") {
  const FixedJump prior{1.0, 2.5, 0.75};
  const FixedJump one = posterior_fixed_jump(prior, 1, 0.4, 0.3);
  CHECK(one.location == 1.0);
  CHECK(one.shape == 3.5);
  CHECK(one.rate == 0.75 + 0.3 * 0.4);
  const FixedJump none = posterior_fixed_jump(prior, 0, 0.4, 0.3);
  CHECK(none.shape == 2.5);
  CHECK(none.rate == 0.75 + 0.3 * 0.4);
}

TEST_CASE("law of a new jump at a latent location") {
  const FixedJump j = latent_jump(0.6, 1, 1.0, 2.0, 0.45);
  CHECK(j.location == 0.6);
  CHECK(j.shape == 1.0);
  CHECK(j.rate == 1.0 + 0.45 * 2.0);
  CHECK(latent_jump(0.6, 3, 1.0, 2.0, 0.45).shape == 3.0);
}

TEST_CASE("posterior fixed jumps group coincident latents") {
  const IapSpec spec = spec_on(0.0, 5.0, 5.0, 8.0, {{2.0, 1.5, 1.0}});
  const std::vector<double> s = {2.0, 0.5, 0.5, 3.0};
  const std::vector<double> u = {0.1, 0.2, 0.3, 0.4};
  const auto jumps = posterior_fixed_jumps(spec, kExp, s, u);
  REQUIRE(jumps.size() == 3);
  const double usum = 1.0;
  for (const FixedJump& j : jumps) {
    const double kU = kExp.value(8.0, j.location);
    if (j.location == 2.0) {
      CHECK(j.shape == 2.5);
      CHECK(j.rate == doctest::Approx(1.0 + kU * usum).epsilon(1e-15));
    } else if (j.location == 0.5) {
      CHECK(j.shape == 2.0);
      CHECK(j.rate == doctest::Approx(1.0 + kU * usum).epsilon(1e-15));
    } else {
      CHECK(j.location == 3.0);
      CHECK(j.shape == 1.0);
    }
  }
  CHECK(tilted_beta(spec, kExp, usum, 1.0) == doctest::Approx(1.0 + kExp.value(8.0, 1.0)).epsilon(1e-15));
}

TEST_CASE("step 2 weights and step 3 rate") {
  JumpPath p;
  p.upsilon = 6.0;
  p.random_jumps = {{1.0, 2.0}, {2.5, 0.5}, {4.0, 1.0}};
  p.fixed_jumps = {{0.5, 0.25}};
  std::vector<double> loc, w;
  step2_weights(p, kExp, 3.0, loc, w);
  REQUIRE(loc.size() == 3);
  CHECK(loc[0] == 1.0);
  CHECK(w[0] == 2.0 * kExp.deriv(3.0, 1.0));
  CHECK(loc[1] == 2.5);
  CHECK(w[1] == 0.5 * kExp.deriv(3.0, 2.5));
  CHECK(loc[2] == 0.5);
  CHECK(w[2] == 0.25 * kExp.deriv(3.0, 0.5));
  const double zbar = 2.0 * kExp.value(6.0, 1.0) + 0.5 * kExp.value(6.0, 2.5) + 1.0 * kExp.value(6.0, 4.0) +
                      0.25 * kExp.value(6.0, 0.5);
  CHECK(step3_rate(p, kExp) == doctest::Approx(zbar).epsilon(1e-15));
}

TEST_CASE("step 3 draws exponentials with rate Zbar") {
  JumpPath p;
  p.upsilon = 6.0;
  p.random_jumps = {{1.0, 2.0}};
  GibbsState st;
  st.path = p;
  st.u.assign(50000, 0.0);
  Rng rng(3);
  step_update_u(st, kExp, rng);
  const auto m = iapdf::testing::moments(st.u);
  const double rate = step3_rate(p, kExp);
  CHECK(std::abs(m.mean - 1.0 / rate) < 3.0 * m.se_mean);
}

TEST_CASE("step 2 picks admissible jumps with the right frequencies") {
  JumpPath p;
  p.upsilon = 6.0;
  p.random_jumps = {{1.0, 2.0}, {2.5, 0.5}, {4.0, 1.0}};
  GibbsState st;
  st.path = p;
  st.s.assign(1, 0.0);
  const std::vector<double> t = {3.0};
  Rng rng(5);
  int first = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    step_update_s(st, t, kExp, rng);
    CHECK(st.s[0] < 3.0);
    first += st.s[0] == 1.0;
  }
  const double w0 = 2.0 * kExp.deriv(3.0, 1.0), w1 = 0.5 * kExp.deriv(3.0, 2.5);
  const double prob = w0 / (w0 + w1);
  CHECK(std::abs(first / double(n) - prob) < 3.0 * std::sqrt(prob * (1 - prob) / n) + 1e-3);

  const std::vector<double> early = {0.5};
  CHECK_THROWS_AS(step_update_s(st, early, kExp, rng), Error);
}

TEST_CASE("mean functional on a path") {
  JumpPath p;
  p.upsilon = 7.0;
  p.random_jumps = {{1.0, 2.0}, {3.0, 1.0}};
  const double num = kId.h_upto(1.0, 7.0) * 2.0 + kId.h_upto(3.0, 7.0) * 1.0;
  const double den = kExp.value(7.0, 1.0) * 2.0 + kExp.value(7.0, 3.0) * 1.0;
  CHECK(path_mean_functional(p, kExp, kId) == doctest::Approx(num / den).epsilon(1e-14));
}

TEST_CASE("chain bookkeeping, validity of kept curves and determinism") {
  const std::vector<double> data = {0.4, 1.1, 0.7, 2.0, 0.9};
  GibbsConfig c;
  c.iterations = 300;
  c.burn_in = 100;
  c.seed = 42;
  c.t_grid = {0.0, 0.5, 1.0, 2.0, 3.0};
  const IapSpec spec = spec_on(0.0, 5.0, 5.0, 3.0);
  const PosteriorSummary a = run_chain(c, data, spec, kExp, kId);
  CHECK(a.kept == 200);
  CHECK(a.upsilon == doctest::Approx(3.0));
  REQUIRE(a.F_draws.size() == 200);
  for (const auto& F : a.F_draws) {
    for (std::size_t i = 1; i < F.size(); ++i) CHECK(F[i] >= F[i - 1] - 1e-12);
    CHECK(F.back() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const PosteriorSummary b = run_chain(c, data, spec, kExp, kId);
  REQUIRE(a.trace.size() == b.trace.size());
  bool same = true;
  for (std::size_t i = 0; i < a.trace.size(); ++i) same = same && a.trace[i].mean_functional == b.trace[i].mean_functional;
  CHECK(same);

  GibbsConfig bad = c;
  bad.burn_in = 300;
  CHECK_THROWS_AS(run_chain(bad, data, spec, kExp, kId), Error);
  const std::vector<double> negative = {-1.0};
  CHECK_THROWS_AS(run_chain(c, negative, spec, kExp, kId), Error);
  CHECK_THROWS_AS(run_chain(c, data, spec, Kernel::indicator(), kId), Error);
}

TEST_CASE("Gibbs posterior mean matches the exact posterior law") {
  // With a long horizon the truncated model is close to the untruncated
  // one, whose posterior law of the mean is available exactly.
  const std::vector<double> data = {0.6, 1.4, 0.9};
  const IapSpec spec = spec_on(0.0, 2.0, 2.0, 25.0);
  GibbsConfig c;
  c.iterations = 6000;
  c.burn_in = 500;
  c.seed = 11;
  c.keep_curves = false;
  c.t_grid = {1.0};
  c.upsilon = 25.0;
  const PosteriorSummary s = run_chain(c, data, spec, kExp, kId);
  std::vector<double> trace;
  for (const auto& r : s.trace) trace.push_back(r.mean_functional);
  const double se = batch_se(trace);

  // Exact law of int g dF, the Dirichlet mean of hbar under the posterior.
  const DistCurve rho = posterior_mean_density_exact_smalln(linspace(0.5, 2.5, 201), kId, spec.base(), data, kExp);
  const double exact = curve_mean(rho);
  MESSAGE("gibbs " << s.mean_functional << " +- " << se << ", exact " << exact);
  CHECK(std::abs(s.mean_functional - exact) < 3.0 * se + 2e-3);
}

TEST_CASE("Gibbs without data samples the prior") {
  const IapSpec spec = spec_on(0.0, 5.0, 5.0, 10.0);
  GibbsConfig c;
  c.iterations = 3000;
  c.burn_in = 0;
  c.seed = 8;
  c.t_grid = {1.0, 3.0, 6.0};
  const PosteriorSummary s = run_chain(c, {}, spec, kExp, kId);
  Rng rng(99);
  std::vector<std::vector<double>> F(3);
  for (int i = 0; i < 3000; ++i) {
    const JumpPath p = sample_jump_path(spec, c.threshold, rng);
    for (int j = 0; j < 3; ++j) F[j].push_back(eval_process(p, kExp, c.t_grid[j]).F);
  }
  for (int j = 0; j < 3; ++j) {
    const auto m = iapdf::testing::moments(F[j]);
    const double se = std::sqrt(m.se_mean * m.se_mean + s.sd_F[j] * s.sd_F[j] / s.kept);
    CHECK(std::abs(s.mean_F[j] - m.mean) < 3.0 * se);
  }
}
