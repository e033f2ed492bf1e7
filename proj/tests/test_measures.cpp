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
#include "iapdf/measures.hpp"
#include "iapdf/numerics.hpp"
#include "support.hpp"

using namespace iapdf;
using iapdf::testing::Gen;
using iapdf::testing::for_all;

TEST_CASE("exponential integral against reference values") {
  CHECK(exp_integral_e1(1.0) == doctest::Approx(0.219383934395520).epsilon(1e-12));
  CHECK(exp_integral_e1(0.1) == doctest::Approx(1.822923958419390).epsilon(1e-12));
  CHECK(exp_integral_e1(5.0) == doctest::Approx(1.148295591275325e-3).epsilon(1e-12));
  CHECK(exp_integral_e1(1e-8) == doctest::Approx(17.8434650890508).epsilon(1e-9));
}

TEST_CASE("adaptive quadrature on known integrals") {
  auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.converged);
  auto s = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10, 1e-10, 2000);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-8));
  DecayOptions opt;
  auto d = integrate_decaying([](double x) { return 1.0 / (1.0 + x * x); }, [](double x) { return 1.0 / (1.0 + x * x); },
                              opt);
  CHECK(d.value == doctest::Approx(M_PI / 2).epsilon(1e-8));
}

TEST_CASE("kernel evaluation examples") {
  const Kernel e = Kernel::exp_conv(2.0);
  const KernelValue v = e.eval(1.0, 0.0);
  CHECK(v.value == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-14));
  CHECK(v.value == doctest::Approx(0.432332).epsilon(1e-6));
  CHECK(v.deriv == doctest::Approx(0.135335).epsilon(1e-5));
  CHECK(v.limit == doctest::Approx(0.5));
  CHECK(e.value(1e6, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e.value(0.5, 1.0) == 0.0);

  const Kernel ind = Kernel::indicator();
  CHECK(ind.value(1.0, 2.0) == 0.0);
  CHECK(ind.limit(2.0) == 1.0);
  CHECK(ind.value(2.0, 2.0) == 1.0);
}

TEST_CASE("tabulated kernel is bilinear and rejects queries outside the table") {
  // k(t, x) = t for both x nodes.
  const Kernel k = Kernel::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0}, {0.0, 1.0, 2.0, 0.0, 0.5, 1.0});
  CHECK(k.value(1.5, 0.0) == doctest::Approx(1.5));
  CHECK(k.value(1.0, 0.5) == doctest::Approx(0.75));
  CHECK(k.deriv(0.5, 1.0) == doctest::Approx(0.5));
  CHECK(k.limit(0.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(k.value(3.0, 0.0), Error);
  try {
    k.value(0.5, 2.0);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("property: kernels are nondecreasing in t and bounded by their limit") {
  const std::string fail = for_all(11, 200, [](Gen& g, int) -> std::string {
    const Kernel k = g.kernel();
    const double x = g.real(0.0, 5.0);
    double prev = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double t = -2.0 + 0.25 * i;
      const double v = k.value(t, x);
      if (v < prev - 1e-15) return "decrease at t=" + std::to_string(t);
      if (v > k.limit(x) + 1e-15) return "exceeds limit";
      prev = v;
    }
    if (k.value(-1e6, x) != 0.0) return "no vanishing at -inf";
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("property: exp_conv derivative matches finite differences") {
  const std::string fail = for_all(12, 200, [](Gen& g, int) -> std::string {
    const Kernel k = Kernel::exp_conv(g.real(0.2, 5.0));
    const double x = g.real(0.0, 3.0);
    const double t = x + g.real(0.01, 4.0);
    const double d = 1e-6;
    const double fd = (k.value(t + d, x) - k.value(t - d, x)) / (2 * d);
    if (std::abs(fd - k.deriv(t, x)) > 1e-6 * std::max(1.0, k.deriv(t, x))) return "mismatch";
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("base measure mass, d.f. and quantile") {
  const BaseMeasure u = BaseMeasure::uniform(0.0, 5.0, 5.0);
  CHECK(u.total_mass() == doctest::Approx(5.0));
  CHECK(u.cdf(2.0) == doctest::Approx(2.0));
  CHECK(u.quantile(0.3) == doctest::Approx(1.5));

  const BaseMeasure t = BaseMeasure::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, {{3.0, 1.0}});
  CHECK(t.total_mass() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(t.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.cdf(3.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(t.quantile(0.9) == doctest::Approx(3.0));

  CHECK_THROWS_AS(BaseMeasure::uniform(1.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(BaseMeasure::atoms_only({{1.0, -1.0}}), Error);
}

TEST_CASE("property: total mass matches density integral plus atoms") {
  const std::string fail = for_all(13, 100, [](Gen& g, int) -> std::string {
    const BaseMeasure m = g.measure();
    double atoms = 0.0;
    for (const Atom& a : m.atoms()) atoms += a.mass;
    const double dens = m.integrate([](double) { return 1.0; });
    if (std::abs(dens - m.total_mass()) > 1e-9 * m.total_mass()) return "rule mass";
    if (std::abs(m.continuous_mass() + atoms - m.total_mass()) > 1e-9 * m.total_mass()) return "split mass";
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("property: quantile and d.f. are mutual inverses on the support") {
  const std::string fail = for_all(14, 100, [](Gen& g, int) -> std::string {
    const BaseMeasure m = g.measure();
    if (!m.has_density()) return "";
    for (int i = 0; i < 20; ++i) {
      const double p = g.real(0.001, 0.999) * m.continuous_mass();
      const double x = m.continuous_quantile(p);
      if (std::abs(m.continuous_cdf(x) - p) > 1e-9 * m.total_mass()) return "continuous inverse";
    }
    for (int i = 0; i < 20; ++i) {
      const double p = g.real(0.001, 0.999);
      const double x = m.quantile(p);
      // Generalized inverse: A(x-) / a <= p <= A(x) / a.
      if (m.cdf(x) / m.total_mass() < p - 1e-9) return "quantile below";
      if (m.cdf(x - 1e-9) / m.total_mass() > p + 1e-9) return "quantile above";
    }
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("with_atoms merges coincident atoms") {
  const BaseMeasure a = BaseMeasure::atoms_only({{1.0, 1.0}});
  const double locs[] = {1.0, 2.0, 2.0};
  const BaseMeasure b = a.with_atoms(locs, 1.0);
  REQUIRE(b.atoms().size() == 2);
  CHECK(b.atoms()[0].mass == doctest::Approx(2.0));
  CHECK(b.atoms()[1].mass == doctest::Approx(2.0));
  CHECK(b.total_mass() == doctest::Approx(4.0));
}

TEST_CASE("mean functional closed forms") {
  const Kernel e = Kernel::exp_conv(2.0);
  const MeanFunctional id = h_transform(FunctionalSpec{}, e);
  CHECK(id.h(1.0) == doctest::Approx(0.75));
  CHECK(id.hbar(1.0) == doctest::Approx(1.5));
  FunctionalSpec c;
  c.form = FunctionalForm::constant;
  c.constant = 3.0;
  CHECK(h_transform(c, e).h(0.7) == doctest::Approx(1.5));
  const MeanFunctional ind = h_transform(FunctionalSpec{}, Kernel::indicator());
  CHECK(ind.h(2.5) == doctest::Approx(2.5));
  // Truncated horizon: int_x^H t k'(t, x) dt.
  const double x = 1.0, H = 3.0, r = 2.0;
  const double expected = 0.5 * 1.0 / r * 2 * (x + 1 / r) - std::exp(-r * (H - x)) * (H / r + 1 / (r * r));
  CHECK(id.h_upto(x, H) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("property: closed-form h agrees with quadrature of a user g") {
  const std::string fail = for_all(15, 30, [](Gen& g, int) -> std::string {
    const Kernel k = Kernel::exp_conv(g.real(0.5, 4.0));
    const double lo = g.real(0.0, 2.0), hi = lo + g.real(0.5, 3.0);
    FunctionalSpec ind;
    ind.form = FunctionalForm::indicator_interval;
    ind.lo = lo;
    ind.hi = hi;
    FunctionalSpec user;
    user.form = FunctionalForm::user;
    user.g = [lo, hi](double t) { return (t > lo && t <= hi) ? 1.0 : 0.0; };
    user.g_breaks = {lo, hi};
    FunctionalSpec ident;
    FunctionalSpec uid;
    uid.form = FunctionalForm::user;
    uid.g = [](double t) { return t; };
    const MeanFunctional a = h_transform(ind, k), b = h_transform(user, k);
    const MeanFunctional c = h_transform(ident, k), d = h_transform(uid, k);
    for (int i = 0; i < 10; ++i) {
      const double x = g.real(0.0, 5.0);
      if (std::abs(a.h(x) - b.h(x)) > 1e-6 * std::max(1e-3, std::abs(a.h(x)))) return "indicator h";
      if (std::abs(c.h(x) - d.h(x)) > 1e-6 * std::abs(c.h(x))) return "identity h";
    }
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("property: h is linear in g") {
  const std::string fail = for_all(16, 50, [](Gen& g, int) -> std::string {
    const Kernel k = g.kernel();
    const double c1 = g.real(-2.0, 2.0), c2 = g.real(-2.0, 2.0);
    FunctionalSpec mix;
    mix.form = FunctionalForm::user;
    mix.g = [c1, c2](double t) { return c1 * t + c2 * 1.5; };
    FunctionalSpec cst;
    cst.form = FunctionalForm::constant;
    cst.constant = 1.5;
    const MeanFunctional id = h_transform(FunctionalSpec{}, k), cc = h_transform(cst, k), m = h_transform(mix, k);
    for (int i = 0; i < 5; ++i) {
      const double x = g.real(0.0, 5.0);
      const double lin = c1 * id.h(x) + c2 * cc.h(x);
      if (std::abs(m.h(x) - lin) > 1e-7 * std::max(1.0, std::abs(lin))) return "nonlinear";
    }
    return "";
  });
  CHECK_MESSAGE(fail.empty(), fail);
}

TEST_CASE("a divergent h is a nonintegrable error") {
  FunctionalSpec s;
  s.form = FunctionalForm::user;
  s.g = [](double t) { return std::exp(t * t); };
  const MeanFunctional f = h_transform(s, Kernel::exp_conv(2.0));
  try {
    f.h(1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::nonintegrable);
  }
}

TEST_CASE("validation of the worked example passes every condition") {
  const IapSpec spec(BaseMeasure::uniform(0.0, 5.0, 5.0), RateFunction::constant(1.0), {}, 10.0);
  const Kernel k = Kernel::exp_conv(2.0);
  const ValidationReport r = validate_spec(spec, k, h_transform(FunctionalSpec{}, k));
  CHECK(r.all_passed());
  for (const char* name : {"condition_I", "condition_II", "condition_III", "mean_existence"}) {
    REQUIRE(r.find(name) != nullptr);
    CHECK(r.find(name)->passed);
  }
}

TEST_CASE("validation flags a super-exponential g and a decreasing kernel") {
  const IapSpec spec(BaseMeasure::uniform(0.0, 5.0, 5.0), RateFunction::constant(1.0), {}, 10.0);
  const Kernel k = Kernel::exp_conv(2.0);
  FunctionalSpec s;
  s.form = FunctionalForm::user;
  s.g = [](double t) { return std::exp(t * t); };
  const ValidationReport r = validate_spec(spec, k, h_transform(s, k));
  CHECK_FALSE(r.all_passed());
  CHECK_FALSE(r.find("mean_existence")->passed);

  const Kernel dec = Kernel::tabulated({0.0, 1.0, 20.0}, {0.0, 5.0}, {0.0, 1.0, 0.5, 0.0, 1.0, 0.5});
  const ValidationReport r2 = validate_spec(spec, dec, h_transform(FunctionalSpec{}, dec));
  CHECK_FALSE(r2.find("condition_I")->passed);
}

TEST_CASE("specification invariants") {
  const BaseMeasure a = BaseMeasure::uniform(0.0, 5.0, 5.0);
  CHECK_THROWS_AS(IapSpec(a, RateFunction::constant(1.0), {{6.0, 1.0, 1.0}}, 5.0), Error);
  CHECK_THROWS_AS(IapSpec(a, RateFunction::constant(1.0), {{1.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}, 5.0), Error);
  CHECK_THROWS_AS(IapSpec(a, RateFunction::constant(0.0), {}, 5.0), Error);
  CHECK_THROWS_AS(IapSpec(a, RateFunction::constant(1.0), {}, -1.0), Error);
  const RateFunction b = RateFunction::tabulated({0.0, 2.0}, {1.0, 3.0});
  CHECK(b(1.0) == doctest::Approx(2.0));
  CHECK(b(-1.0) == doctest::Approx(1.0));
  CHECK(b(9.0) == doctest::Approx(3.0));
}
