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
#include "iapdf/inversion.hpp"
#include "iapdf/numerics.hpp"
#include "iapdf/oracle.hpp"
#include "support.hpp"

using namespace iapdf;
using iapdf::testing::for_all;
using iapdf::testing::Gen;

namespace {

const Kernel kInd = Kernel::indicator();
const MeanFunctional kIdentity = h_transform(FunctionalSpec{}, kInd);

// Density of the mean of a Dirichlet process with uniform [0, 1] base of
// mass 1: (e / pi) sin(pi y) y^-y (1 - y)^-(1 - y).
double uniform_mean_density(double y) {
  return std::exp(1.0) / M_PI * std::sin(M_PI * y) * std::pow(y, -y) * std::pow(1.0 - y, -(1.0 - y));
}

MeanFunctional shifted(double c, double scale) {
  FunctionalSpec s;
  s.form = FunctionalForm::user;
  s.g = [c, scale](double t) { return scale * t + c; };
  return h_transform(s, kInd);
}

}  // namespace

TEST_CASE("Dirichlet mean cdf against the closed-form density") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 1.0, 1.0);
  for (double s : {0.1, 0.2, 0.35, 0.5, 0.7, 0.9}) {
    const double exact = integrate_adaptive(uniform_mean_density, 0.0, s, 1e-13, 1e-12).value;
    CHECK(prior_mean_cdf_dirichlet(s, kIdentity, a) == doctest::Approx(exact).epsilon(1e-8));
  }
  CHECK(prior_mean_cdf_dirichlet(0.2, kIdentity, a) == doctest::Approx(0.0772801529).epsilon(1e-8));
}

TEST_CASE("symmetric base gives 0.5 at the centre") {
  CHECK(std::abs(prior_mean_cdf_dirichlet(0.5, kIdentity, BaseMeasure::uniform(0.0, 1.0, 1.0)) - 0.5) < 1e-10);
  CHECK(std::abs(prior_mean_cdf_dirichlet(2.0, kIdentity, BaseMeasure::uniform(0.0, 4.0, 7.0)) - 0.5) < 1e-10);
}

TEST_CASE("two-atom base gives a Beta law") {
  const BaseMeasure a = BaseMeasure::atoms_only({{0.0, 1.0}, {1.0, 2.0}});
  for (double s : {0.1, 0.25, 0.5, 0.8, 0.95}) CHECK(prior_mean_cdf_dirichlet(s, kIdentity, a) == doctest::Approx(s * s).epsilon(1e-8));
}

TEST_CASE("single atom gives a step at h(x0)") {
  const BaseMeasure a = BaseMeasure::atoms_only({{2.0, 1.0}});
  CHECK(prior_mean_cdf_dirichlet(1.9, kIdentity, a) == 0.0);
  CHECK(prior_mean_cdf_dirichlet(2.0, kIdentity, a) == 0.5);
  CHECK(prior_mean_cdf_dirichlet(2.1, kIdentity, a) == 1.0);
}

TEST_CASE("values outside the range of h are 0 and 1") {
  const BaseMeasure a = BaseMeasure::uniform(1.0, 3.0, 2.0);
  CHECK(prior_mean_cdf_dirichlet(0.99, kIdentity, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prior_mean_cdf_dirichlet(3.01, kIdentity, a) == doctest::Approx(1.0).epsilon(1e-12));
  const IapSpec spec(a, RateFunction::constant(1.0), {}, 10.0);
  CHECK(prior_mean_cdf_general(0.5, kIdentity, kInd, spec) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prior_mean_cdf_general(3.5, kIdentity, kInd, spec) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: general inversion with the indicator kernel equals the Dirichlet form") {
  const std::string fail = for_all(31, 12, [](Gen& g, int) -> std::string {
    const BaseMeasure a = g.measure();
    const IapSpec spec(a, RateFunction::constant(g.real(0.5, 3.0)), {}, a.support_max() + 1.0);
    for (int i = 0; i < 4; ++i) {
      const double s = g.real(a.support_min(), a.support_max());
      const double d = prior_mean_cdf_dirichlet(s, kIdentity, a);
      const double q = prior_mean_cdf_general(s, kIdentity, kInd, spec);
      if (std::abs(d - q) > 1e-5) return "differ at " + std::to_string(s);
    }
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("worked example: general form equals the Dirichlet mean of x + 1/a") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 5.0, 5.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const MeanFunctional h = h_transform(FunctionalSpec{}, k);
  const IapSpec spec(a, RateFunction::constant(1.0), {}, 200.0);
  for (double s : {1.0, 2.0, 3.0, 3.7, 5.0}) {
    CHECK(std::abs(prior_mean_cdf_general(s, h, k, spec) - prior_mean_cdf_dirichlet(s, h, a)) < 1e-5);
  }
  const DistCurve c = prior_mean_cdf_dirichlet_curve(linspace(0.5, 5.5, 201), h, a);
  CHECK(std::abs(curve_mean(c) - 3.0) < 0.02);
  CHECK(monotonicity_violation(c) < 1e-6);
}

TEST_CASE("property: shift and scale equivariance") {
  const std::string fail = for_all(32, 10, [](Gen& g, int) -> std::string {
    const BaseMeasure a = BaseMeasure::uniform(g.real(0.0, 1.0), g.real(1.5, 3.0), g.real(0.5, 4.0));
    const double c = g.real(-2.0, 2.0), sc = g.real(0.3, 3.0);
    const MeanFunctional shift = shifted(c, 1.0), scale = shifted(0.0, sc);
    for (int i = 0; i < 3; ++i) {
      const double s = g.real(a.lower(), a.upper());
      const double base = prior_mean_cdf_dirichlet(s, kIdentity, a);
      if (std::abs(prior_mean_cdf_dirichlet(s + c, shift, a) - base) > 1e-6) return "shift";
      if (std::abs(prior_mean_cdf_dirichlet(s * sc, scale, a) - base) > 1e-6) return "scale";
    }
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("prior density integrates to one and matches the closed form") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 1.0, 1.0);
  const DistCurve d = prior_mean_density_dirichlet(linspace(0.0, 1.0, 201), kIdentity, a);
  CHECK(std::abs(curve_integral(d) - 1.0) < 1e-3);
  for (std::size_t i = 20; i < 190; i += 17) CHECK(d.values[i] == doctest::Approx(uniform_mean_density(d.grid[i])).epsilon(1e-5));
}

TEST_CASE("posterior density given latents: normalization and mean") {
  // alpha* = U[0, 1] + delta_0.5 has a log singularity at 0.5; integrate
  // adaptively on each side of it.
  const BaseMeasure a = BaseMeasure::uniform(0.0, 1.0, 1.0);
  const double u[] = {0.5};
  auto rho = [&](double s) { return posterior_mean_density_latent(s, kIdentity, a, u); };
  auto srho = [&](double s) { return s * rho(s); };
  const double mass = integrate_adaptive(rho, 0.0, 0.5, 1e-6, 1e-6, 60).value +
                      integrate_adaptive(rho, 0.5, 1.0, 1e-6, 1e-6, 60).value;
  const double mean = integrate_adaptive(srho, 0.0, 0.5, 1e-6, 1e-6, 60).value +
                      integrate_adaptive(srho, 0.5, 1.0, 1e-6, 1e-6, 60).value;
  CHECK(std::abs(mass - 1.0) < 1e-3);
  CHECK(std::abs(mean - 0.5) < 1e-3);
  CHECK(std::isinf(rho(0.5)));
  CHECK(rho(1.2) == 0.0);
}

TEST_CASE("posterior density given latents agrees with the stick-breaking oracle") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 1.0, 1.0);
  const std::vector<double> u = {0.2, 0.7};
  const std::vector<double> grid = linspace(0.0, 1.0, 161);
  const DistCurve rho = posterior_mean_density_latent_curve(grid, kIdentity, a, u);
  CHECK(std::abs(curve_integral(rho) - 1.0) < 1e-3);
  const DistCurve F = cumulative(rho);
  Rng rng(19);
  const DistCurve mc = mc_mean_cdf(a.with_atoms(u), [](double x) { return x; }, 100000, grid, rng);
  CHECK(sup_distance(F, mc) <= 0.01);
}

TEST_CASE("a single-point posterior base is a unit spike") {
  const BaseMeasure a = BaseMeasure::atoms_only({{0.3, 1.0}});
  const std::vector<double> u = {0.3};
  const DistCurve c = posterior_mean_density_latent_curve(linspace(0.0, 1.0, 101), kIdentity, a, u);
  CHECK(curve_integral(c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.values[30] > 0.0);
  CHECK(c.values[10] == 0.0);
}

TEST_CASE("urn with one observation draws the tilted base exactly") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 5.0, 5.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const LatentUrn urn({1.0}, k, a);
  Rng rng(23);
  std::vector<double> us;
  const double w0 = urn.sample(rng).log_weight;
  bool constant = true;
  for (int i = 0; i < 100000; ++i) {
    const LatentDraw d = urn.sample(rng);
    constant = constant && d.log_weight == w0;
    us.push_back(d.u[0]);
  }
  CHECK(constant);
  // Density proportional to exp(2u) on [0, 1].
  const double e2 = std::exp(2.0);
  const double mean = (e2 / 2.0 - (e2 - 1.0) / 4.0) / ((e2 - 1.0) / 2.0);
  const auto m = iapdf::testing::moments(us);
  CHECK(std::abs(m.mean - mean) < 3.0 * m.se_mean);
  CHECK(urn.base_normalizer(0) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("urn on an atomic base ties every latent") {
  const BaseMeasure a = BaseMeasure::atoms_only({{0.4, 2.0}});
  const std::vector<double> t = {1.0, 2.0, 0.9};
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const LatentDraw d = sample_latents_urn(t, Kernel::exp_conv(1.0), a, rng);
    for (double x : d.u) CHECK(x == 0.4);
  }
  CHECK_THROWS_AS(sample_latents_urn(std::vector<double>{0.2}, Kernel::exp_conv(1.0), a, rng), Error);
}

TEST_CASE("mixture with no data is the prior density") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 1.0, 1.0);
  const std::vector<double> grid = linspace(0.05, 0.95, 31);
  Rng rng(1);
  const DistCurve m = posterior_mean_density_mixture(grid, kIdentity, a, {}, Kernel::exp_conv(2.0), 10, rng);
  const DistCurve p = prior_mean_density_dirichlet(grid, kIdentity, a);
  CHECK(sup_distance(m, p) < 1e-3);
}

TEST_CASE("partition normalizer for two observations") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 5.0, 5.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const double t1 = 1.0, t2 = 2.5;
  const double c1 = (1.0 - std::exp(-2.0 * t1)) / 2.0, c2 = (1.0 - std::exp(-2.0 * t2)) / 2.0;
  const double joint = std::exp(-2.0 * (t1 + t2)) * (std::exp(4.0 * t1) - 1.0) / 4.0;
  const std::vector<double> t = {t1, t2};
  CHECK(partition_normalizer(a, t, k) == doctest::Approx(c1 * c2 + joint).epsilon(1e-12));
}

TEST_CASE("urn weights are unbiased for the partition normalizer") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 5.0, 5.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const std::vector<double> t = {1.0, 2.5, 0.4};
  const double target = partition_normalizer(a, t, k);
  const LatentUrn urn(t, k, a);
  for (bool defensive : {false, true}) {
    Rng rng(defensive ? 41 : 40);
    std::vector<double> w;
    for (int i = 0; i < 200000; ++i) {
      const LatentDraw d = defensive ? urn.sample_defensive(rng) : urn.sample(rng);
      w.push_back(std::exp(d.log_weight));
    }
    const auto m = iapdf::testing::moments(w);
    CAPTURE(defensive);
    CHECK(std::abs(m.mean - target) < 4.0 * m.se_mean);
  }
}

TEST_CASE("exact posterior density: tied pair integrates to one, size limit") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 2.0, 2.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const MeanFunctional h = h_transform(FunctionalSpec{}, k);
  const std::vector<double> t = {0.8, 0.8};
  const DistCurve c = posterior_mean_density_exact_smalln(linspace(0.4, 2.6, 221), h, a, t, k);
  CHECK(std::abs(curve_integral(c) - 1.0) < 1e-3);
  CHECK(monotonicity_violation(cumulative(c)) == 0.0);
  const std::vector<double> big(11, 1.0);
  try {
    posterior_mean_density_exact_smalln(linspace(0.4, 2.6, 3), h, a, big, k);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
}

TEST_CASE("exact and mixture agree for one observation") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 2.0, 2.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const MeanFunctional h = h_transform(FunctionalSpec{}, k);
  const std::vector<double> t = {1.3};
  const std::vector<double> grid = linspace(0.55, 2.45, 39);
  const DistCurve ex = posterior_mean_density_exact_smalln(grid, h, a, t, k);
  Rng rng(4);
  const DistCurve mx = posterior_mean_density_mixture(grid, h, a, t, k, 400, rng);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(ex.values[i] - mx.values[i]) <= 3.0 * mx.std_error[i] + ex.quad_tol + mx.quad_tol);
}

TEST_CASE("degenerate argument rule is symmetrized") {
  detail::ArgRule r;
  r.add(1.0, 0.0, 2.0);
  CHECK(detail::cdf_from_rule(r, InversionOptions{}).value == 0.5);
}
