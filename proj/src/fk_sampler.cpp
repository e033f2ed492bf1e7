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

#include "iapdf/fk_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iapdf/error.hpp"
#include "iapdf/numerics.hpp"

namespace iapdf {

double JumpPath::random_mass() const {
  double m = 0.0;
  for (const Jump& j : random_jumps) m += j.size;
  return m;
}

double JumpPath::total_mass() const {
  double m = random_mass();
  for (const Jump& j : fixed_jumps) m += j.size;
  return m;
}

LevyTail::LevyTail(const BaseMeasure& alpha, const std::function<double(double)>& beta, double upsilon, int bins)
    : alpha_(alpha) {
  if (bins < 1) throw Error(ErrorKind::config, "LevyTail needs at least one bin");
  if (!alpha.has_density()) return;
  const double lo = alpha.lower();
  const double hi = std::min(alpha.upper(), upsilon);
  if (!(hi > lo)) return;
  const double width = (hi - lo) / bins;
  double below = alpha.continuous_cdf(lo);
  for (int b = 0; b < bins; ++b) {
    const double right = b + 1 == bins ? hi : lo + width * (b + 1);
    const double above = alpha.continuous_cdf(right);
    const double m = above - below;
    const double bv = beta(lo + width * (b + 0.5));
    if (m > 0.0) {
      if (!(bv > 0.0) || !std::isfinite(bv)) {
        std::ostringstream os;
        os << "beta must be positive where alpha has mass; beta(" << lo + width * (b + 0.5) << ") = " << bv;
        throw Error(ErrorKind::config, os.str());
      }
      if (!groups_.empty() && groups_.back().beta == bv && groups_.back().cum_start + groups_.back().mass == below)
        groups_.back().mass += m;
      else
        groups_.push_back({bv, m, below});
      mass_ += m;
    }
    below = above;
  }
  min_beta_ = std::numeric_limits<double>::infinity();
  for (const Group& g : groups_) min_beta_ = std::min(min_beta_, g.beta);
  weights_.resize(groups_.size());
}

double LevyTail::operator()(double v) const {
  if (!(v > 0.0)) throw Error(ErrorKind::domain, "Levy tail mass needs v > 0");
  double m = 0.0;
  for (const Group& g : groups_) m += g.mass * exp_integral_e1(g.beta * v);
  return m;
}

double LevyTail::derivative(double v) const {
  double d = 0.0;
  for (const Group& g : groups_) d -= g.mass * std::exp(-g.beta * v);
  return d / v;
}

double LevyTail::inverse(double m, double upper) const {
  if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorKind::domain, "Levy tail inverse needs a positive finite level");
  if (groups_.empty()) throw Error(ErrorKind::degenerate, "Levy tail of an empty intensity");
  // Newton on y = log v for r(y) = log M(e^y) - log m, which is close to
  // linear for small v; bisection takes over once a bracket exists.
  auto residual = [&](double y, double& slope) {
    const double v = std::exp(y);
    double M = 0.0, vd = 0.0;
    for (const Group& g : groups_) {
      const double bv = g.beta * v;
      M += g.mass * exp_integral_e1(bv);
      vd -= g.mass * std::exp(-bv);
    }
    if (!(M > 0.0)) {
      slope = 0.0;
      return -std::numeric_limits<double>::infinity();
    }
    slope = vd / M;
    return std::log(M) - std::log(m);
  };
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  // Start from the single-group approximation M(v) ~ -mass log(beta v).
  double y = -m / mass_ - std::log(min_beta_);
  if (upper > 0.0 && std::isfinite(upper)) {
    hi = std::log(upper) + 1e-12;
    y = std::min(y, hi);
  }
  for (int iter = 0; iter < 400; ++iter) {
    double slope = 0.0;
    const double r = residual(y, slope);
    if (r == 0.0) return std::exp(y);
    if (r > 0.0) lo = y; else hi = y;
    double next;
    if (std::isfinite(r) && slope < 0.0) {
      next = y - std::clamp(r / slope, -8.0, 8.0);
    } else {
      next = std::isfinite(lo) ? lo + 1.0 : y - 1.0;
    }
    if (std::isfinite(lo) && std::isfinite(hi) && !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    // Relative tolerance on v is an absolute tolerance on log v.
    if (std::abs(next - y) < 1e-11 || (std::isfinite(lo) && std::isfinite(hi) && hi - lo < 1e-11))
      return std::exp(next);
    y = next;
  }
  throw Error(ErrorKind::numeric, "Levy tail inverse did not converge");
}

double LevyTail::sample_location(double jump, Rng& rng) const {
  if (groups_.size() == 1) return alpha_.continuous_quantile(groups_[0].cum_start + rng.uniform() * groups_[0].mass);
  // Scale by exp(jump * min beta) to keep the largest weight near one.
  for (std::size_t i = 0; i < groups_.size(); ++i)
    weights_[i] = groups_[i].mass * std::exp(-jump * (groups_[i].beta - min_beta_));
  const Group& g = groups_[rng.categorical(weights_)];
  return alpha_.continuous_quantile(g.cum_start + rng.uniform() * g.mass);
}

double levy_tail_mass(const IapSpec& spec, double v) {
  if (!(v > 0.0)) throw Error(ErrorKind::domain, "Levy tail mass needs v > 0");
  const RateFunction& beta = spec.beta();
  LevyTail tail(spec.base(), [&](double x) { return beta(x); }, spec.upsilon());
  return tail(v);
}

void sample_random_jumps(const LevyTail& tail, double threshold, Rng& rng, JumpPath& path) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::config, "FK threshold must lie in (0, 1)");
  path.threshold = threshold;
  path.last_ratio = 1.0;
  path.stop_ratio = 0.0;
  if (tail.empty()) return;
  double xi = 0.0, total = 0.0;
  constexpr std::size_t kMaxJumps = 10'000'000;
  for (std::size_t k = 0; k < kMaxJumps; ++k) {
    xi += rng.exponential();
    const double J = tail.inverse(xi, path.random_jumps.empty() ? 0.0 : path.random_jumps.back().size);
    const double ratio = J / (total + J);
    if (ratio < threshold) {
      path.stop_ratio = ratio;
      return;
    }
    total += J;
    path.last_ratio = ratio;
    path.random_jumps.push_back({tail.sample_location(J, rng), J});
  }
  throw Error(ErrorKind::numeric, "Ferguson-Klass series did not reach the truncation threshold");
}

std::vector<FixedJump> prior_fixed_jumps(const IapSpec& spec) {
  std::vector<FixedJump> out = spec.fixed_jumps();
  for (const Atom& a : spec.base().atoms()) {
    if (a.location > spec.upsilon()) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const FixedJump& f) { return f.location == a.location; });
    const double rate = spec.beta()(a.location);
    if (it != out.end()) {
      // Independent gamma jumps with a common rate add their shapes.
      if (it->rate == rate) {
        it->shape += a.mass;
        continue;
      }
      throw Error(ErrorKind::unsupported, "fixed jump and alpha atom share a location with different rates");
    }
    out.push_back({a.location, a.mass, rate});
  }
  std::sort(out.begin(), out.end(), [](const FixedJump& x, const FixedJump& y) { return x.location < y.location; });
  return out;
}

JumpPath sample_jump_path(const IapSpec& spec, double threshold, Rng& rng) {
  JumpPath path;
  path.upsilon = spec.upsilon();
  const RateFunction& beta = spec.beta();
  LevyTail tail(spec.base(), [&](double x) { return beta(x); }, spec.upsilon());
  sample_random_jumps(tail, threshold, rng, path);
  for (const FixedJump& f : prior_fixed_jumps(spec)) path.fixed_jumps.push_back({f.location, rng.gamma(f.shape, f.rate)});
  return path;
}

double path_zbar(const JumpPath& path, const Kernel& kernel) {
  double z = 0.0;
  path.for_each([&](const Jump& j) { z += kernel.value(path.upsilon, j.location) * j.size; });
  return z;
}

ProcessValue eval_process(const JumpPath& path, const Kernel& kernel, double t) {
  if (path.empty()) throw Error(ErrorKind::degenerate, "empty jump path");
  ProcessValue out{0.0, 0.0, 0.0, 0.0};
  const double tc = std::min(t, path.upsilon);
  double slope = 0.0;
  path.for_each([&](const Jump& j) {
    out.Z += kernel.value(tc, j.location) * j.size;
    out.Zbar += kernel.value(path.upsilon, j.location) * j.size;
    slope += kernel.deriv(tc, j.location) * j.size;
  });
  if (!(out.Zbar > 0.0)) throw Error(ErrorKind::degenerate, "jump path has Zbar = 0");
  if (t >= path.upsilon) {
    out.F = 1.0;
    out.f = t > path.upsilon ? 0.0 : slope / out.Zbar;
  } else {
    out.F = std::min(1.0, out.Z / out.Zbar);
    out.f = slope / out.Zbar;
  }
  return out;
}

void eval_process_grid(const JumpPath& path, const Kernel& kernel, std::span<const double> ts, std::span<double> F,
                       std::span<double> f) {
  if (path.empty()) throw Error(ErrorKind::degenerate, "empty jump path");
  const double zbar = path_zbar(path, kernel);
  if (!(zbar > 0.0)) throw Error(ErrorKind::degenerate, "jump path has Zbar = 0");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    if (t > path.upsilon) {
      F[i] = 1.0;
      f[i] = 0.0;
      continue;
    }
    double z = 0.0, slope = 0.0;
    path.for_each([&](const Jump& j) {
      z += kernel.value(t, j.location) * j.size;
      slope += kernel.deriv(t, j.location) * j.size;
    });
    F[i] = std::min(1.0, z / zbar);
    f[i] = slope / zbar;
  }
}

}  // namespace iapdf
