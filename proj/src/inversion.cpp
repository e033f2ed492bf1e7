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

#include "iapdf/inversion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "iapdf/error.hpp"
#include "iapdf/numerics.hpp"
#include "iapdf/oracle.hpp"

namespace iapdf {

using cplx = std::complex<double>;

namespace detail {

namespace {

void append_gauss(ArgRule& r, const BaseMeasure& alpha, const std::function<double(double)>& z, double a, double b,
                  int n) {
  if (!(b > a)) return;
  const GaussRule& gl = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    const double x = mid + half * gl.nodes[i];
    const double w = half * gl.weights[i] * alpha.density(x);
    if (w > 0.0) r.add(x, z(x), w);
  }
}

// Panels on [a, b] graded geometrically toward the ends flagged as zeros of z.
void append_graded(ArgRule& r, const BaseMeasure& alpha, const std::function<double(double)>& z, double a, double b,
                   bool root_a, bool root_b, const InversionOptions& opt) {
  if (!(b > a)) return;
  if (root_a && root_b) {
    const double m = 0.5 * (a + b);
    append_graded(r, alpha, z, a, m, true, false, opt);
    append_graded(r, alpha, z, m, b, false, true, opt);
    return;
  }
  if (!root_a && !root_b) {
    append_gauss(r, alpha, z, a, b, opt.panel_nodes);
    return;
  }
  const double len = b - a;
  double outer = len;
  for (int k = 0; k < opt.grading_levels; ++k) {
    const double inner = 0.5 * outer;
    if (root_a) append_gauss(r, alpha, z, a + inner, a + outer, opt.graded_nodes);
    else append_gauss(r, alpha, z, b - outer, b - inner, opt.graded_nodes);
    outer = inner;
  }
  if (root_a) append_gauss(r, alpha, z, a, a + outer, opt.graded_nodes);
  else append_gauss(r, alpha, z, b - outer, b, opt.graded_nodes);
}

}  // namespace

ArgRule argument_rule(const BaseMeasure& alpha, const std::function<double(double)>& z, std::span<const double> breaks,
                      const InversionOptions& opt) {
  ArgRule r;
  if (alpha.has_density()) {
    const double lo = alpha.lower(), hi = alpha.upper();
    std::vector<double> edges = alpha.breakpoints();
    for (double b : breaks)
      if (b > lo && b < hi) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    constexpr int kScan = 64;
    std::vector<double> xs(kScan + 1), vs(kScan + 1);
    for (std::size_t p = 1; p < edges.size(); ++p) {
      const double a = edges[p - 1], b = edges[p];
      for (int i = 0; i <= kScan; ++i) {
        xs[i] = i == kScan ? b : a + (b - a) * i / kScan;
        vs[i] = z(xs[i]);
      }
      std::vector<double> roots;
      for (int i = 0; i < kScan; ++i) {
        if (vs[i] == 0.0) roots.push_back(xs[i]);
        else if ((vs[i] < 0.0) != (vs[i + 1] < 0.0) && vs[i + 1] != 0.0)
          roots.push_back(bisect_root(z, xs[i], xs[i + 1]));
      }
      if (vs[kScan] == 0.0) roots.push_back(b);
      std::vector<double> pts = {a};
      std::vector<bool> is_root = {false};
      for (double x : roots) {
        if (x == pts.back()) {
          is_root.back() = true;
          continue;
        }
        pts.push_back(x);
        is_root.push_back(true);
      }
      if (pts.back() != b) {
        pts.push_back(b);
        is_root.push_back(false);
      }
      for (std::size_t i = 1; i < pts.size(); ++i)
        append_graded(r, alpha, z, pts[i - 1], pts[i], is_root[i - 1], is_root[i], opt);
    }
  }
  for (const Atom& a : alpha.atoms()) r.add(a.location, z(a.location), a.mass);
  return r;
}

namespace {

struct SignSummary {
  bool pos = false, neg = false;
  double mean_abs = 0.0;
};

SignSummary signs(const ArgRule& r) {
  SignSummary s;
  double total = 0.0;
  for (std::size_t j = 0; j < r.z.size(); ++j) {
    if (r.z[j] > 0.0) s.pos = true;
    if (r.z[j] < 0.0) s.neg = true;
    total += r.w[j];
    s.mean_abs += r.w[j] * std::abs(r.z[j]);
  }
  if (total > 0.0) s.mean_abs /= total;
  return s;
}

// E(s) = sum w log(1 + s^2 z^2), P(s) = sum w arctan(s z).
void log_phase(const ArgRule& r, double s, double& E, double& P) {
  E = 0.0;
  P = 0.0;
  const std::size_t n = r.z.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double sz = s * r.z[j];
    E += r.w[j] * std::log1p(sz * sz);
    P += r.w[j] * std::atan(sz);
  }
}

double log_modulus(const ArgRule& r, double s) {
  double E = 0.0;
  for (std::size_t j = 0; j < r.z.size(); ++j) {
    const double sz = s * r.z[j];
    E += r.w[j] * std::log1p(sz * sz);
  }
  return E;
}

DecayOptions decay_options(const InversionOptions& opt, double mean_abs, bool keep = false) {
  DecayOptions d;
  d.first_panel = mean_abs > 0.0 ? 1.0 / mean_abs : 1.0;
  d.abs_tol = opt.abs_tol;
  d.rel_tol = opt.rel_tol;
  d.tail_tol = opt.tail_tol;
  d.max_panels = opt.max_panels;
  d.keep_intervals = keep;
  return d;
}

}  // namespace

PointEstimate cdf_from_rule(const ArgRule& r, const InversionOptions& opt) {
  const SignSummary sg = signs(r);
  if (!sg.pos && !sg.neg) return {0.5, 0.0};
  if (!sg.neg) return {0.0, 0.0};
  if (!sg.pos) return {1.0, 0.0};
  auto f = [&](double s) {
    double E, P;
    log_phase(r, s, E, P);
    return std::exp(-0.5 * E) * std::sin(P) / s;
  };
  auto env = [&](double s) { return std::exp(-0.5 * log_modulus(r, s)) / s; };
  const QuadResult q = integrate_decaying(f, env, decay_options(opt, sg.mean_abs));
  const double F = 0.5 - q.value / std::numbers::pi;
  return {std::clamp(F, 0.0, 1.0), q.error / std::numbers::pi};
}

PointEstimate density_from_rule(const ArgRule& r, double theta, const InversionOptions& opt) {
  if (!(theta > 1.0)) throw Error(ErrorKind::domain, "posterior density needs alpha*(R) > 1");
  const SignSummary sg = signs(r);
  if (!sg.pos && !sg.neg) return {std::numeric_limits<double>::infinity(), 0.0};
  if (!sg.neg || !sg.pos) return {0.0, 0.0};
  // The modulus decays like s^-(theta - m0), m0 the mass at z = 0; at or
  // below s^-1 the density is unbounded at this sigma.
  double m0 = 0.0;
  for (std::size_t j = 0; j < r.z.size(); ++j)
    if (r.z[j] == 0.0) m0 += r.w[j];
  if (theta - m0 <= 1.0) return {std::numeric_limits<double>::infinity(), 0.0};
  auto f = [&](double s) {
    double E, P;
    log_phase(r, s, E, P);
    return std::exp(-0.5 * E) * std::cos(P);
  };
  auto env = [&](double s) { return std::exp(-0.5 * log_modulus(r, s)); };
  const QuadResult q = integrate_decaying(f, env, decay_options(opt, sg.mean_abs));
  const double c = (theta - 1.0) / std::numbers::pi;
  return {c * q.value, c * q.error};
}

}  // namespace detail

namespace {

using detail::ArgRule;
using detail::PointEstimate;

double checked(const PointEstimate& p, const InversionOptions& opt, double sigma, const char* what) {
  if (!(p.error <= opt.fail_tol)) {
    std::ostringstream os;
    os << what << ": outer integral missed its tolerance at sigma=" << sigma << " (achieved " << p.error << ")";
    throw ToleranceError(os.str(), p.value, p.error);
  }
  return p.value;
}

std::vector<double> functional_breaks(const MeanFunctional& h) { return h.x_kinks(); }

PointEstimate dirichlet_cdf_point(double sigma, const MeanFunctional& h, const BaseMeasure& alpha,
                                  const InversionOptions& opt) {
  const std::vector<double> br = functional_breaks(h);
  const ArgRule r = detail::argument_rule(alpha, [&](double x) { return h.hbar(x) - sigma; }, br, opt);
  return detail::cdf_from_rule(r, opt);
}

PointEstimate general_cdf_point(double sigma, const MeanFunctional& h, const Kernel& kernel, const IapSpec& spec,
                                const InversionOptions& opt) {
  std::vector<double> br = functional_breaks(h);
  const std::vector<double> kk = kernel.x_kinks(), bk = spec.beta().kinks();
  br.insert(br.end(), kk.begin(), kk.end());
  br.insert(br.end(), bk.begin(), bk.end());
  const RateFunction& beta = spec.beta();
  auto z = [&](double x) {
    const double b = beta(x);
    if (!(b > 0.0)) throw Error(ErrorKind::config, "beta must be positive where alpha has mass");
    return (h.h(x) - sigma * kernel.limit(x)) / b;
  };
  ArgRule r = detail::argument_rule(spec.base(), z, br, opt);
  for (const FixedJump& j : spec.fixed_jumps())
    r.add(j.location, (h.h(j.location) - sigma * kernel.limit(j.location)) / j.rate, j.shape);
  return detail::cdf_from_rule(r, opt);
}

DistCurve make_curve(std::span<const double> grid, CurveKind kind) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::config, "sigma grid must be strictly increasing");
  DistCurve c;
  c.grid.assign(grid.begin(), grid.end());
  c.values.resize(grid.size());
  c.kind = kind;
  return c;
}

// Spike of unit trapezoid mass at the grid node nearest to `at`.
void spike(DistCurve& c, double at) {
  std::fill(c.values.begin(), c.values.end(), 0.0);
  const auto& g = c.grid;
  if (g.size() < 2 || at < g.front() || at > g.back()) return;
  std::size_t i = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), at) - g.begin());
  if (i > 0 && (i == g.size() || at - g[i - 1] < g[i] - at)) --i;
  const double left = i > 0 ? g[i] - g[i - 1] : 0.0;
  const double right = i + 1 < g.size() ? g[i + 1] - g[i] : 0.0;
  c.values[i] = 2.0 / (left + right);
}

// hbar constant over the support of the measure: the mean is that constant.
std::optional<double> degenerate_mean(const MeanFunctional& h, const BaseMeasure& m) {
  const QuadratureRule r = m.rule(functional_breaks(h), 8);
  std::optional<double> v;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r.weights[i] > 0.0)) continue;
    const double hv = h.hbar(r.nodes[i]);
    if (!v) v = hv;
    else if (hv != *v) return std::nullopt;
  }
  return v;
}

void require_density_kernel(const Kernel& kernel) {
  if (!kernel.has_density())
    throw Error(ErrorKind::unsupported, "posterior laws given observations need a kernel with a t-density");
}

}  // namespace

double prior_mean_cdf_general(double sigma, const MeanFunctional& h, const Kernel& kernel, const IapSpec& spec,
                              const InversionOptions& opt) {
  return checked(general_cdf_point(sigma, h, kernel, spec, opt), opt, sigma, "prior_mean_cdf_general");
}

double prior_mean_cdf_dirichlet(double sigma, const MeanFunctional& h, const BaseMeasure& alpha,
                                const InversionOptions& opt) {
  return checked(dirichlet_cdf_point(sigma, h, alpha, opt), opt, sigma, "prior_mean_cdf_dirichlet");
}

DistCurve prior_mean_cdf_general_curve(std::span<const double> grid, const MeanFunctional& h, const Kernel& kernel,
                                       const IapSpec& spec, const InversionOptions& opt) {
  DistCurve c = make_curve(grid, CurveKind::cdf);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PointEstimate p = general_cdf_point(grid[i], h, kernel, spec, opt);
    c.values[i] = checked(p, opt, grid[i], "prior_mean_cdf_general");
    c.quad_tol = std::max(c.quad_tol, p.error);
  }
  return c;
}

DistCurve prior_mean_cdf_dirichlet_curve(std::span<const double> grid, const MeanFunctional& h,
                                         const BaseMeasure& alpha, const InversionOptions& opt) {
  DistCurve c = make_curve(grid, CurveKind::cdf);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PointEstimate p = dirichlet_cdf_point(grid[i], h, alpha, opt);
    c.values[i] = checked(p, opt, grid[i], "prior_mean_cdf_dirichlet");
    c.quad_tol = std::max(c.quad_tol, p.error);
  }
  return c;
}

DistCurve prior_mean_density_dirichlet(std::span<const double> grid, const MeanFunctional& h,
                                       const BaseMeasure& alpha, const InversionOptions& opt) {
  DistCurve c = make_curve(grid, CurveKind::density);
  if (auto m = degenerate_mean(h, alpha)) {
    spike(c, *m);
    return c;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = 1e-4 * std::max(1.0, std::abs(grid[i]));
    const PointEstimate hi = dirichlet_cdf_point(grid[i] + d, h, alpha, opt);
    const PointEstimate lo = dirichlet_cdf_point(grid[i] - d, h, alpha, opt);
    checked(hi, opt, grid[i] + d, "prior_mean_density_dirichlet");
    checked(lo, opt, grid[i] - d, "prior_mean_density_dirichlet");
    c.values[i] = (hi.value - lo.value) / (2.0 * d);
    c.quad_tol = std::max(c.quad_tol, (hi.error + lo.error) / (2.0 * d));
  }
  return c;
}

double posterior_mean_density_latent(double sigma, const MeanFunctional& h, const BaseMeasure& alpha,
                                     std::span<const double> u, const InversionOptions& opt) {
  if (u.empty()) throw Error(ErrorKind::domain, "posterior density needs at least one latent");
  const BaseMeasure star = alpha.with_atoms(u);
  const std::vector<double> br = functional_breaks(h);
  const ArgRule r = detail::argument_rule(star, [&](double x) { return h.hbar(x) - sigma; }, br, opt);
  return checked(detail::density_from_rule(r, star.total_mass(), opt), opt, sigma, "posterior_mean_density_latent");
}

DistCurve posterior_mean_density_latent_curve(std::span<const double> grid, const MeanFunctional& h,
                                              const BaseMeasure& alpha, std::span<const double> u,
                                              const InversionOptions& opt) {
  if (u.empty()) throw Error(ErrorKind::domain, "posterior density needs at least one latent");
  DistCurve c = make_curve(grid, CurveKind::density);
  const BaseMeasure star = alpha.with_atoms(u);
  if (auto m = degenerate_mean(h, star)) {
    spike(c, *m);
    return c;
  }
  const std::vector<double> br = functional_breaks(h);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sigma = grid[i];
    const ArgRule r = detail::argument_rule(star, [&](double x) { return h.hbar(x) - sigma; }, br, opt);
    const PointEstimate p = detail::density_from_rule(r, star.total_mass(), opt);
    c.values[i] = checked(p, opt, sigma, "posterior_mean_density_latent");
    c.quad_tol = std::max(c.quad_tol, p.error);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Latent urn

LatentUrn::LatentUrn(std::vector<double> t, Kernel kernel, BaseMeasure alpha) : kernel_(std::move(kernel)) {
  require_density_kernel(kernel_);
  std::vector<double> kinks = kernel_.x_kinks();
  for (double tk : t) {
    if (!std::isfinite(tk)) throw Error(ErrorKind::data, "observations must be finite");
    Obs o{tk, 0.0, std::nullopt, 0.0, std::nullopt};
    std::vector<Atom> atoms, flat_atoms;
    for (const Atom& a : alpha.atoms()) {
      const double w = a.mass * kernel_.deriv(tk, a.location);
      if (w > 0.0) {
        atoms.push_back({a.location, w});
        flat_atoms.push_back(a);
      }
    }
    double lo = 0.0, hi = 0.0;
    BaseMeasure::Density dens, flat_dens;
    std::vector<double> kk;
    if (alpha.has_density()) {
      lo = alpha.lower();
      hi = alpha.upper();
      if (kernel_.family() == Kernel::Family::exp_conv) hi = std::min(hi, tk);
      const Kernel& kr = kernel_;
      const double tt = tk;
      // alpha is copied into the closure so the tilted measure owns it.
      dens = [alpha, kr, tt](double x) { return alpha.density(x) * kr.deriv(tt, x); };
      flat_dens = [alpha, kr, tt](double x) { return kr.deriv(tt, x) > 0.0 ? alpha.density(x) : 0.0; };
      for (double b : alpha.breakpoints()) kk.push_back(b);
      kk.insert(kk.end(), kinks.begin(), kinks.end());
      kk.push_back(tk);
      kk.erase(std::remove_if(kk.begin(), kk.end(), [&](double x) { return !(x > lo && x < hi); }), kk.end());
    }
    if (!(hi > lo)) dens = flat_dens = nullptr;
    if (dens || !atoms.empty()) {
      try {
        o.tilted.emplace(lo, hi, dens, kk, atoms);
        o.mass = o.tilted->total_mass();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::config) throw;
        o.tilted.reset();  // zero tilted mass
      }
      try {
        o.flat.emplace(lo, hi, flat_dens, kk, flat_atoms);
        o.flat_mass = o.flat->total_mass();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::config) throw;
        o.flat.reset();
      }
    }
    obs_.push_back(std::move(o));
  }
}

LatentDraw LatentUrn::sample(Rng& rng) const {
  LatentDraw d;
  d.u.reserve(obs_.size());
  std::vector<double> w;
  for (std::size_t k = 0; k < obs_.size(); ++k) {
    const Obs& o = obs_[k];
    w.assign(1, o.mass);
    for (double ui : d.u) w.push_back(kernel_.deriv(o.t, ui));
    double z = 0.0;
    for (double v : w) z += v;
    if (!(z > 0.0)) {
      std::ostringstream os;
      os << "observation t=" << o.t << " has zero latent mass";
      throw Error(ErrorKind::unsupported, os.str());
    }
    d.log_weight += std::log(z);
    const std::size_t pick = rng.categorical(w);
    d.u.push_back(pick == 0 ? o.tilted->quantile(rng.uniform()) : d.u[pick - 1]);
  }
  return d;
}

LatentDraw LatentUrn::sample_defensive(Rng& rng) const {
  LatentDraw d;
  d.u.reserve(obs_.size());
  const bool use_flat = rng.uniform() < 0.5;
  double log_a = 0.0, log_b = 0.0;  // log of target / tilted and target / flat
  std::vector<double> w1, w2;
  for (std::size_t k = 0; k < obs_.size(); ++k) {
    const Obs& o = obs_[k];
    w1.assign(1, o.mass);
    w2.assign(1, o.flat ? o.flat_mass : 0.0);
    for (double ui : d.u) {
      const double kd = kernel_.deriv(o.t, ui);
      w1.push_back(kd);
      w2.push_back(kd > 0.0 ? 1.0 : 0.0);
    }
    double z1 = 0.0, z2 = 0.0;
    for (double v : w1) z1 += v;
    for (double v : w2) z2 += v;
    if (!(z1 > 0.0) || !(z2 > 0.0)) {
      std::ostringstream os;
      os << "observation t=" << o.t << " has zero latent mass";
      throw Error(ErrorKind::unsupported, os.str());
    }
    const std::vector<double>& w = use_flat ? w2 : w1;
    const std::size_t pick = rng.categorical(w);
    double u;
    if (pick > 0)
      u = d.u[pick - 1];
    else
      u = use_flat ? o.flat->quantile(rng.uniform()) : o.tilted->quantile(rng.uniform());
    const double kd = kernel_.deriv(o.t, u);
    if (!(kd > 0.0)) {
      // Boundary of the flat support: the target gives it no mass.
      d.u.push_back(u);
      d.log_weight = -std::numeric_limits<double>::infinity();
      for (++k; k < obs_.size(); ++k) d.u.push_back(u);
      return d;
    }
    log_a += std::log(z1);
    log_b += std::log(kd) + std::log(z2);
    d.u.push_back(u);
  }
  // w = 1 / (1/(2A) + 1/(2B))
  const double m = std::max(-log_a, -log_b);
  d.log_weight = std::log(2.0) - (m + std::log(std::exp(-log_a - m) + std::exp(-log_b - m)));
  return d;
}

LatentDraw sample_latents_urn(std::span<const double> t, const Kernel& kernel, const BaseMeasure& alpha, Rng& rng) {
  return LatentUrn(std::vector<double>(t.begin(), t.end()), kernel, alpha).sample(rng);
}

// ---------------------------------------------------------------------------
// Mixture over latents

DistCurve posterior_mean_density_mixture(std::span<const double> grid, const MeanFunctional& h,
                                         const BaseMeasure& alpha, std::span<const double> t, const Kernel& kernel,
                                         int draws, Rng& rng, const InversionOptions& opt) {
  if (t.empty()) return prior_mean_density_dirichlet(grid, h, alpha, opt);
  if (draws < 1) throw Error(ErrorKind::config, "mixture needs at least one draw");
  const std::size_t n = t.size();
  const LatentUrn urn(std::vector<double>(t.begin(), t.end()), kernel, alpha);

  std::vector<std::vector<double>> hu(static_cast<std::size_t>(draws));
  std::vector<double> lw(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    LatentDraw ld = urn.sample_defensive(rng);
    lw[d] = ld.log_weight;
    hu[d].resize(n);
    for (std::size_t i = 0; i < n; ++i) hu[d][i] = h.hbar(ld.u[i]);
  }
  const double lmax = *std::max_element(lw.begin(), lw.end());
  std::vector<double> wn(lw.size());
  double wsum = 0.0, w2 = 0.0;
  for (std::size_t d = 0; d < lw.size(); ++d) wsum += wn[d] = std::exp(lw[d] - lmax);
  for (double& v : wn) {
    v /= wsum;
    w2 += v * v;
  }

  DistCurve c = make_curve(grid, CurveKind::density);
  c.std_error.assign(grid.size(), 0.0);
  c.ess = 1.0 / w2;
  c.low_ess = c.ess < 10.0;

  // Point mass: alpha and every latent share one hbar value.
  if (auto m = degenerate_mean(h, alpha)) {
    bool same = true;
    for (const auto& row : hu)
      for (double v : row) same = same && v == *m;
    if (same) {
      spike(c, *m);
      return c;
    }
  }

  const double theta = alpha.total_mass() + static_cast<double>(n);
  const double k = (theta - 1.0) / std::numbers::pi;
  const std::vector<double> br = functional_breaks(h);
  std::vector<double> z(n);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double sigma = grid[g];
    const ArgRule r = detail::argument_rule(alpha, [&](double x) { return h.hbar(x) - sigma; }, br, opt);
    bool pos = false, neg = false;
    double mean_abs = 0.0, tot = 0.0;
    for (std::size_t j = 0; j < r.z.size(); ++j) {
      pos = pos || r.z[j] > 0.0;
      neg = neg || r.z[j] < 0.0;
      mean_abs += r.w[j] * std::abs(r.z[j]);
      tot += r.w[j];
    }
    for (const auto& row : hu)
      for (double v : row) {
        pos = pos || v > sigma;
        neg = neg || v < sigma;
      }
    if (!pos || !neg) continue;  // outside the range: density 0

    auto phi = [&](double s) {
      double E, P;
      detail::log_phase(r, s, E, P);
      return std::polar(std::exp(-0.5 * E), -P);
    };
    auto latent_sum = [&](double s) {
      cplx acc = 0.0;
      for (std::size_t d = 0; d < hu.size(); ++d) {
        if (wn[d] == 0.0) continue;
        cplx p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p /= cplx(1.0, s * (hu[d][i] - sigma));
        acc += wn[d] * p;
      }
      return acc;
    };
    auto f = [&](double s) { return (phi(s) * latent_sum(s)).real(); };
    auto env = [&](double s) {
      double acc = 0.0;
      for (std::size_t d = 0; d < hu.size(); ++d) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double sz = s * (hu[d][i] - sigma);
          p /= std::sqrt(1.0 + sz * sz);
        }
        acc += wn[d] * p;
      }
      return std::exp(-0.5 * detail::log_modulus(r, s)) * acc;
    };
    const QuadResult q = integrate_decaying(f, env, detail::decay_options(opt, tot > 0.0 ? mean_abs / tot : 1.0, true));
    const PointEstimate est{k * q.value, k * q.error};
    c.values[g] = checked(est, opt, sigma, "posterior_mean_density_mixture");
    c.quad_tol = std::max(c.quad_tol, est.error);

    // Per-draw densities on the accepted s-panels give the standard error.
    QuadratureRule sr;
    for (const auto& [a, b] : q.intervals) append_kronrod_nodes(sr, a, b);
    std::vector<cplx> ph(sr.size());
    for (std::size_t j = 0; j < sr.size(); ++j) ph[j] = phi(sr.nodes[j]);
    std::vector<double> rho(hu.size(), 0.0);
    double mean = 0.0;
    for (std::size_t d = 0; d < hu.size(); ++d) {
      double acc = 0.0;
      for (std::size_t j = 0; j < sr.size(); ++j) {
        cplx p = ph[j];
        for (std::size_t i = 0; i < n; ++i) p /= cplx(1.0, sr.nodes[j] * (hu[d][i] - sigma));
        acc += sr.weights[j] * p.real();
      }
      rho[d] = k * acc;
      mean += wn[d] * rho[d];
    }
    double var = 0.0;
    for (std::size_t d = 0; d < hu.size(); ++d) var += wn[d] * wn[d] * (rho[d] - mean) * (rho[d] - mean);
    c.std_error[g] = std::sqrt(var);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Exact partition form

namespace {

std::vector<double> cell_integrals(const QuadratureRule& r, std::span<const double> t, const Kernel& kernel) {
  const std::size_t n = t.size();
  const std::size_t cells = std::size_t{1} << n;
  std::vector<double> I(cells, 0.0);
  std::vector<double> prod(cells);
  for (std::size_t j = 0; j < r.size(); ++j) {
    prod[0] = 1.0;
    for (std::size_t C = 1; C < cells; ++C) {
      const int low = std::countr_zero(C);
      prod[C] = prod[C & (C - 1)] * kernel.deriv(t[low], r.nodes[j]);
      I[C] += r.weights[j] * prod[C];
    }
  }
  return I;
}

}  // namespace

double partition_normalizer(const BaseMeasure& alpha, std::span<const double> t, const Kernel& kernel) {
  require_density_kernel(kernel);
  if (t.empty()) return 1.0;
  if (t.size() > static_cast<std::size_t>(PartitionEnumerator::kMaxN))
    throw Error(ErrorKind::size, "exact partition form supports at most 10 observations");
  std::vector<double> br(t.begin(), t.end());
  const std::vector<double> kk = kernel.x_kinks();
  br.insert(br.end(), kk.begin(), kk.end());
  const std::vector<double> I = cell_integrals(alpha.rule(br, 512), t, kernel);
  double fact[PartitionEnumerator::kMaxN + 1] = {1.0};
  for (int i = 1; i <= PartitionEnumerator::kMaxN; ++i) fact[i] = fact[i - 1] * i;
  PartitionEnumerator e(static_cast<int>(t.size()));
  double total = 0.0;
  do {
    double term = 1.0;
    for (std::uint32_t C : e.current().cells) term *= fact[std::popcount(C) - 1] * I[C];
    total += term;
  } while (e.next());
  return total;
}

DistCurve posterior_mean_density_exact_smalln(std::span<const double> grid, const MeanFunctional& h,
                                              const BaseMeasure& alpha, std::span<const double> t, const Kernel& kernel,
                                              const InversionOptions& opt) {
  const std::size_t n = t.size();
  if (n > static_cast<std::size_t>(PartitionEnumerator::kMaxN))
    throw Error(ErrorKind::size, "exact partition form supports at most 10 observations");
  if (n == 0) return prior_mean_density_dirichlet(grid, h, alpha, opt);
  require_density_kernel(kernel);
  const double denom = partition_normalizer(alpha, t, kernel);
  if (!(denom > 0.0)) throw Error(ErrorKind::unsupported, "observations have zero latent mass");

  DistCurve c = make_curve(grid, CurveKind::density);
  if (auto m = degenerate_mean(h, alpha)) {
    spike(c, *m);
    return c;
  }
  const std::size_t cells = std::size_t{1} << n;
  const std::size_t full = cells - 1;
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<int> size(cells);
  for (std::size_t C = 0; C < cells; ++C) size[C] = std::popcount(C);

  const double theta = alpha.total_mass() + static_cast<double>(n);
  const double k = (theta - 1.0) / std::numbers::pi;
  std::vector<double> br = functional_breaks(h);
  br.insert(br.end(), t.begin(), t.end());

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double sigma = grid[g];
    const ArgRule r = detail::argument_rule(alpha, [&](double x) { return h.hbar(x) - sigma; }, br, opt);
    const std::size_t m = r.z.size();
    // prodK[j * cells + C] = w_j prod_{p in C} k'(t_p, x_j).
    std::vector<double> prodK(m * cells);
    std::vector<std::size_t> active;  // nodes with some nonzero cell weight
    bool pos = false, neg = false;
    double mean_abs = 0.0, tot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double* pk = &prodK[j * cells];
      pk[0] = r.w[j];
      bool any = false;
      for (std::size_t C = 1; C < cells; ++C) {
        pk[C] = pk[C & (C - 1)] * kernel.deriv(t[std::countr_zero(C)], r.x[j]);
        any = any || pk[C] != 0.0;
      }
      if (any) active.push_back(j);
      pos = pos || r.z[j] > 0.0;
      neg = neg || r.z[j] < 0.0;
      mean_abs += r.w[j] * std::abs(r.z[j]);
      tot += r.w[j];
    }
    if (!pos || !neg) continue;

    std::vector<cplx> psi(cells), f(cells), qp(n + 1);
    std::vector<double> psi_abs(cells), fa(cells), qa(n + 1);
    // Partition sum via subsets: f(S) = sum over cells C containing the
    // lowest element of S of (|C|-1)! psi(C) f(S \ C).
    auto partition_sum = [&](auto& out, const auto& cellv) {
      out[0] = 1.0;
      for (std::size_t S = 1; S <= full; ++S) {
        const std::size_t low = S & (~S + 1);
        const std::size_t rest = S ^ low;
        out[S] = 0.0;
        for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
          const std::size_t C = sub | low;
          out[S] += fact[size[C] - 1] * cellv[C] * out[S ^ C];
          if (sub == 0) break;
        }
      }
      return out[full];
    };
    auto integrand = [&](double s) {
      double E, P;
      detail::log_phase(r, s, E, P);
      const cplx phi = std::polar(std::exp(-0.5 * E), -P);
      std::fill(psi.begin(), psi.end(), cplx(0.0));
      for (std::size_t j : active) {
        const cplx q = 1.0 / cplx(1.0, s * r.z[j]);
        qp[0] = 1.0;
        for (std::size_t i = 1; i <= n; ++i) qp[i] = qp[i - 1] * q;
        const double* pk = &prodK[j * cells];
        for (std::size_t C = 1; C < cells; ++C)
          if (pk[C] != 0.0) psi[C] += pk[C] * qp[size[C]];
      }
      return (phi * partition_sum(f, psi)).real();
    };
    auto env = [&](double s) {
      std::fill(psi_abs.begin(), psi_abs.end(), 0.0);
      for (std::size_t j : active) {
        const double sz = s * r.z[j];
        const double q = 1.0 / std::sqrt(1.0 + sz * sz);
        qa[0] = 1.0;
        for (std::size_t i = 1; i <= n; ++i) qa[i] = qa[i - 1] * q;
        const double* pk = &prodK[j * cells];
        for (std::size_t C = 1; C < cells; ++C) psi_abs[C] += pk[C] * qa[size[C]];
      }
      return std::exp(-0.5 * detail::log_modulus(r, s)) * partition_sum(fa, psi_abs);
    };
    const QuadResult q = integrate_decaying(integrand, env, detail::decay_options(opt, tot > 0.0 ? mean_abs / tot : 1.0));
    const PointEstimate est{k * q.value / denom, k * q.error / denom};
    c.values[g] = checked(est, opt, sigma, "posterior_mean_density_exact_smalln");
    c.quad_tol = std::max(c.quad_tol, est.error);
  }
  return c;
}

}  // namespace iapdf
