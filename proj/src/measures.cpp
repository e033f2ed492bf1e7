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

#include "iapdf/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iapdf/error.hpp"

namespace iapdf {

namespace {

constexpr int kCumulativeNodes = 64;
constexpr int kMinCumulativePanels = 64;

bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> merged_breaks(std::span<const double> base, std::span<const double> extra, double lo, double hi) {
  std::vector<double> out(base.begin(), base.end());
  for (double x : extra)
    if (x > lo && x < hi) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double linear_interp(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + w * (ys[i + 1] - ys[i]);
}

}  // namespace

// ---------------------------------------------------------------------------
// BaseMeasure

BaseMeasure::BaseMeasure(double lo, double hi, Density density, std::vector<double> kinks, std::vector<Atom> atoms)
    : lo_(lo), hi_(hi), density_(std::move(density)), atoms_(std::move(atoms)) {
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.location)) throw Error(ErrorKind::config, "atom location must be finite");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw Error(ErrorKind::config, "atom mass must be positive and finite");
  }
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    if (atoms_[i].location == atoms_[i - 1].location) throw Error(ErrorKind::config, "atom locations must be distinct");

  const bool with_density = static_cast<bool>(density_) && hi > lo;
  if (with_density) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw Error(ErrorKind::config, "density support must be bounded");
    breaks_ = {lo, hi};
    breaks_ = merged_breaks(breaks_, kinks, lo, hi);
    // Refine so the cumulative table has at least kMinCumulativePanels panels.
    panel_edges_.push_back(lo);
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
      const double a = breaks_[i - 1], b = breaks_[i];
      const int pieces = std::max(1, static_cast<int>(std::ceil(kMinCumulativePanels * (b - a) / (hi - lo))));
      for (int k = 1; k <= pieces; ++k) panel_edges_.push_back(k == pieces ? b : a + (b - a) * k / pieces);
    }
    cumulative_.assign(panel_edges_.size(), 0.0);
    const GaussRule& gl = gauss_legendre(kCumulativeNodes);
    for (std::size_t i = 1; i < panel_edges_.size(); ++i) {
      const double a = panel_edges_[i - 1], b = panel_edges_[i];
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      double sum = 0.0;
      for (int k = 0; k < kCumulativeNodes; ++k) {
        const double d = density_(mid + half * gl.nodes[k]);
        if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::config, "density must be nonnegative and finite");
        sum += gl.weights[k] * d;
      }
      cumulative_[i] = cumulative_[i - 1] + half * sum;
    }
    continuous_mass_ = cumulative_.back();
  } else {
    density_ = nullptr;
    lo_ = hi_ = 0.0;
  }
  total_mass_ = continuous_mass_;
  for (const Atom& a : atoms_) total_mass_ += a.mass;
  if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_))
    throw Error(ErrorKind::config, "base measure must have finite positive total mass");
}

BaseMeasure BaseMeasure::uniform(double lo, double hi, double mass) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorKind::config, "uniform base measure needs a bounded interval lo < hi");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorKind::config, "uniform base measure needs mass > 0");
  const double level = mass / (hi - lo);
  BaseMeasure m(lo, hi, [level](double) { return level; }, {}, {});
  m.uniform_ = true;
  // Exact values rather than quadrature sums.
  for (std::size_t i = 0; i < m.panel_edges_.size(); ++i) m.cumulative_[i] = level * (m.panel_edges_[i] - lo);
  m.continuous_mass_ = mass;
  m.total_mass_ = mass;
  return m;
}

BaseMeasure BaseMeasure::tabulated(std::vector<double> xs, std::vector<double> values, std::vector<Atom> atoms) {
  if (xs.size() < 2 || xs.size() != values.size())
    throw Error(ErrorKind::config, "tabulated density needs at least two (x, value) pairs");
  if (!strictly_increasing(xs) || !all_finite(xs) || !all_finite(values))
    throw Error(ErrorKind::config, "tabulated density grid must be finite and strictly increasing");
  for (double v : values)
    if (v < 0.0) throw Error(ErrorKind::config, "tabulated density must be nonnegative");
  const double lo = xs.front(), hi = xs.back();
  auto shared_x = std::make_shared<const std::vector<double>>(xs);
  auto shared_y = std::make_shared<const std::vector<double>>(std::move(values));
  Density d = [shared_x, shared_y](double x) { return linear_interp(*shared_x, *shared_y, x); };
  std::vector<double> kinks(xs.begin() + 1, xs.end() - 1);
  return BaseMeasure(lo, hi, std::move(d), std::move(kinks), std::move(atoms));
}

BaseMeasure BaseMeasure::atoms_only(std::vector<Atom> atoms) {
  if (atoms.empty()) throw Error(ErrorKind::config, "atomic base measure needs at least one atom");
  return BaseMeasure(0.0, 0.0, nullptr, {}, std::move(atoms));
}

double BaseMeasure::support_min() const {
  double m = has_density() ? lo_ : std::numeric_limits<double>::infinity();
  if (!atoms_.empty()) m = std::min(m, atoms_.front().location);
  return m;
}

double BaseMeasure::support_max() const {
  double m = has_density() ? hi_ : -std::numeric_limits<double>::infinity();
  if (!atoms_.empty()) m = std::max(m, atoms_.back().location);
  return m;
}

double BaseMeasure::density(double x) const {
  if (!has_density() || x < lo_ || x > hi_) return 0.0;
  return density_(x);
}

double BaseMeasure::continuous_cdf_on_panel(std::size_t panel, double x) const {
  const double a = panel_edges_[panel];
  if (uniform_) return cumulative_[panel] + density_(a) * (x - a);
  const GaussRule& gl = gauss_legendre(32);
  const double half = 0.5 * (x - a), mid = 0.5 * (x + a);
  double sum = 0.0;
  for (int k = 0; k < 32; ++k) sum += gl.weights[k] * density_(mid + half * gl.nodes[k]);
  return cumulative_[panel] + half * sum;
}

double BaseMeasure::continuous_cdf(double x) const {
  if (!has_density() || x <= lo_) return 0.0;
  if (x >= hi_) return continuous_mass_;
  const auto it = std::upper_bound(panel_edges_.begin(), panel_edges_.end(), x);
  const std::size_t panel = static_cast<std::size_t>(it - panel_edges_.begin()) - 1;
  return continuous_cdf_on_panel(panel, x);
}

double BaseMeasure::cdf(double x) const {
  double m = continuous_cdf(x);
  for (const Atom& a : atoms_) {
    if (a.location > x) break;
    m += a.mass;
  }
  return m;
}

double BaseMeasure::continuous_quantile(double m) const {
  if (!has_density()) throw Error(ErrorKind::domain, "continuous_quantile on a purely atomic measure");
  if (m <= 0.0) return lo_;
  if (m >= continuous_mass_) return hi_;
  if (uniform_) return std::min(hi_, lo_ + m / density_(lo_));
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), m);
  std::size_t panel = static_cast<std::size_t>(it - cumulative_.begin());
  panel = std::clamp<std::size_t>(panel, 1, panel_edges_.size() - 1) - 1;
  double a = panel_edges_[panel], b = panel_edges_[panel + 1];
  // Newton steps kept inside the bracket [a, b], bisection as fallback.
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = continuous_cdf_on_panel(panel, x) - m;
    if (f > 0.0) b = x; else a = x;
    const double d = density_(x);
    double next = d > 0.0 ? x - f / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || b - a <= 1e-15 * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  return x;
}

double BaseMeasure::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "quantile level must lie in [0, 1]");
  const double target = p * total_mass_;
  double atoms_before = 0.0;
  for (const Atom& atom : atoms_) {
    const double before = continuous_cdf(atom.location) + atoms_before;
    if (target <= before && has_density() && target > atoms_before) return continuous_quantile(target - atoms_before);
    if (target <= before + atom.mass) return atom.location;
    atoms_before += atom.mass;
  }
  if (!has_density()) return atoms_.back().location;
  return continuous_quantile(target - atoms_before);
}

QuadratureRule BaseMeasure::rule(std::span<const double> extra_breaks, int nodes_per_panel) const {
  QuadratureRule r;
  if (has_density()) {
    const std::vector<double> edges = merged_breaks(breaks_, extra_breaks, lo_, hi_);
    r.nodes.reserve(edges.size() * nodes_per_panel + atoms_.size());
    r.weights.reserve(edges.size() * nodes_per_panel + atoms_.size());
    for (std::size_t i = 1; i < edges.size(); ++i) r.append_panel(edges[i - 1], edges[i], nodes_per_panel, density_);
  }
  for (const Atom& a : atoms_) r.append(a.location, a.mass);
  return r;
}

BaseMeasure BaseMeasure::with_atoms(std::span<const double> locations, double weight) const {
  if (!(weight > 0.0)) throw Error(ErrorKind::domain, "added atom weight must be positive");
  BaseMeasure out = *this;
  for (double x : locations) {
    if (!std::isfinite(x)) throw Error(ErrorKind::domain, "added atom location must be finite");
    auto it = std::lower_bound(out.atoms_.begin(), out.atoms_.end(), x,
                               [](const Atom& a, double loc) { return a.location < loc; });
    if (it != out.atoms_.end() && it->location == x) it->mass += weight;
    else out.atoms_.insert(it, Atom{x, weight});
    out.total_mass_ += weight;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::exp_conv(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorKind::config, "exp_conv kernel rate must be positive");
  Kernel k;
  k.family_ = Family::exp_conv;
  k.rate_ = rate;
  return k;
}

Kernel Kernel::indicator() {
  Kernel k;
  k.family_ = Family::indicator;
  return k;
}

Kernel Kernel::tabulated(std::vector<double> t_grid, std::vector<double> x_grid, std::vector<double> values) {
  if (t_grid.size() < 2 || x_grid.empty() || values.size() != t_grid.size() * x_grid.size())
    throw Error(ErrorKind::config, "tabulated kernel needs >= 2 t nodes, >= 1 x node and |t| * |x| values");
  if (!strictly_increasing(t_grid) || !strictly_increasing(x_grid) || !all_finite(t_grid) || !all_finite(x_grid))
    throw Error(ErrorKind::config, "tabulated kernel grids must be finite and strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::config, "tabulated kernel values must be nonnegative");
  Kernel k;
  k.family_ = Family::tabulated;
  k.table_ = std::make_shared<const Table>(Table{std::move(t_grid), std::move(x_grid), std::move(values)});
  return k;
}

namespace {

// Cell index i with grid[i] <= v < grid[i+1]; the last node maps to the last cell.
std::size_t cell_of(const std::vector<double>& grid, double v) {
  if (grid.size() == 1) return 0;
  auto it = std::upper_bound(grid.begin(), grid.end(), v);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  return std::clamp<std::size_t>(i, 1, grid.size() - 1) - 1;
}

}  // namespace

double Kernel::table_value(double t, double x) const {
  const Table& tb = *table_;
  if (t < tb.t.front() || t > tb.t.back() || (tb.x.size() > 1 && (x < tb.x.front() || x > tb.x.back()))) {
    std::ostringstream os;
    os << "tabulated kernel queried outside its table at (t=" << t << ", x=" << x << ")";
    throw Error(ErrorKind::domain, os.str());
  }
  const std::size_t nt = tb.t.size();
  const std::size_t it = cell_of(tb.t, t);
  const double wt = (t - tb.t[it]) / (tb.t[it + 1] - tb.t[it]);
  auto row = [&](std::size_t ix) { return tb.v[ix * nt + it] + wt * (tb.v[ix * nt + it + 1] - tb.v[ix * nt + it]); };
  if (tb.x.size() == 1) return row(0);
  const std::size_t ix = cell_of(tb.x, x);
  const double wx = (x - tb.x[ix]) / (tb.x[ix + 1] - tb.x[ix]);
  return row(ix) + wx * (row(ix + 1) - row(ix));
}

double Kernel::table_slope(double t, double x) const {
  const Table& tb = *table_;
  if (t < tb.t.front() || t > tb.t.back() || (tb.x.size() > 1 && (x < tb.x.front() || x > tb.x.back()))) {
    std::ostringstream os;
    os << "tabulated kernel queried outside its table at (t=" << t << ", x=" << x << ")";
    throw Error(ErrorKind::domain, os.str());
  }
  const std::size_t nt = tb.t.size();
  const std::size_t it = cell_of(tb.t, t);
  const double dt = tb.t[it + 1] - tb.t[it];
  auto slope = [&](std::size_t ix) { return (tb.v[ix * nt + it + 1] - tb.v[ix * nt + it]) / dt; };
  if (tb.x.size() == 1) return slope(0);
  const std::size_t ix = cell_of(tb.x, x);
  const double wx = (x - tb.x[ix]) / (tb.x[ix + 1] - tb.x[ix]);
  return slope(ix) + wx * (slope(ix + 1) - slope(ix));
}

double Kernel::value(double t, double x) const {
  switch (family_) {
    case Family::exp_conv:
      if (x < 0.0 || t < x) return 0.0;
      return -std::expm1(-rate_ * (t - x)) / rate_;
    case Family::indicator:
      return x <= t ? 1.0 : 0.0;
    case Family::tabulated:
      return table_value(t, x);
  }
  return 0.0;
}

double Kernel::deriv(double t, double x) const {
  switch (family_) {
    case Family::exp_conv:
      if (x < 0.0 || t < x) return 0.0;
      return std::exp(-rate_ * (t - x));
    case Family::indicator:
      return 0.0;
    case Family::tabulated:
      return table_slope(t, x);
  }
  return 0.0;
}

double Kernel::limit(double x) const {
  switch (family_) {
    case Family::exp_conv:
      return x < 0.0 ? 0.0 : 1.0 / rate_;
    case Family::indicator:
      return 1.0;
    case Family::tabulated:
      return table_value(table_->t.back(), x);
  }
  return 0.0;
}

KernelValue Kernel::eval(double t, double x) const { return {value(t, x), deriv(t, x), limit(x)}; }

std::vector<double> Kernel::x_kinks() const {
  switch (family_) {
    case Family::exp_conv: return {0.0};
    case Family::indicator: return {};
    case Family::tabulated: return table_->x;
  }
  return {};
}

std::vector<double> Kernel::t_breaks(double x) const {
  if (family_ == Family::tabulated) return table_->t;
  return {x};
}

std::pair<double, double> Kernel::t_support(double x) const {
  switch (family_) {
    case Family::exp_conv:
      if (x < 0.0) return {0.0, 0.0};
      return {x, std::numeric_limits<double>::infinity()};
    case Family::indicator:
      return {x, x};
    case Family::tabulated:
      return {table_->t.front(), table_->t.back()};
  }
  return {0.0, 0.0};
}

const std::vector<double>& Kernel::t_grid() const {
  static const std::vector<double> empty;
  return table_ ? table_->t : empty;
}

const std::vector<double>& Kernel::x_grid() const {
  static const std::vector<double> empty;
  return table_ ? table_->x : empty;
}

// ---------------------------------------------------------------------------
// RateFunction / IapSpec

RateFunction RateFunction::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw Error(ErrorKind::config, "beta must be nonnegative and finite");
  RateFunction r;
  r.value_ = value;
  return r;
}

RateFunction RateFunction::tabulated(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() < 2 || xs.size() != values.size() || !strictly_increasing(xs) || !all_finite(xs) || !all_finite(values))
    throw Error(ErrorKind::config, "tabulated beta needs >= 2 points on a strictly increasing finite grid");
  for (double v : values)
    if (v < 0.0) throw Error(ErrorKind::config, "beta must be nonnegative");
  RateFunction r;
  r.xs_ = std::move(xs);
  r.ys_ = std::move(values);
  r.value_ = r.ys_.front();
  return r;
}

double RateFunction::operator()(double x) const { return xs_.empty() ? value_ : linear_interp(xs_, ys_, x); }

IapSpec::IapSpec(BaseMeasure base, RateFunction beta, std::vector<FixedJump> fixed_jumps, double upsilon)
    : base_(std::move(base)), beta_(std::move(beta)), fixed_jumps_(std::move(fixed_jumps)), upsilon_(upsilon) {
  if (!(upsilon_ > 0.0) || !std::isfinite(upsilon_)) throw Error(ErrorKind::config, "upsilon must be positive and finite");
  std::sort(fixed_jumps_.begin(), fixed_jumps_.end(),
            [](const FixedJump& a, const FixedJump& b) { return a.location < b.location; });
  for (std::size_t i = 0; i < fixed_jumps_.size(); ++i) {
    const FixedJump& j = fixed_jumps_[i];
    if (!(j.shape > 0.0) || !(j.rate > 0.0) || !std::isfinite(j.shape) || !std::isfinite(j.rate))
      throw Error(ErrorKind::config, "fixed jump law needs positive finite shape and rate");
    if (!(j.location <= upsilon_)) throw Error(ErrorKind::config, "fixed jump locations must not exceed upsilon");
    if (i > 0 && j.location == fixed_jumps_[i - 1].location)
      throw Error(ErrorKind::config, "fixed jump locations must be distinct");
  }
  // beta > 0 alpha-a.e. on the observed range.
  const std::vector<double> cut = {upsilon_};
  const QuadratureRule r = base_.rule(cut, 16);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.nodes[i] > upsilon_ || r.weights[i] <= 0.0) continue;
    if (!(beta_(r.nodes[i]) > 0.0)) {
      std::ostringstream os;
      os << "beta must be positive alpha-a.e. on (-inf, upsilon]; beta(" << r.nodes[i] << ") = " << beta_(r.nodes[i]);
      throw Error(ErrorKind::config, os.str());
    }
  }
}

// ---------------------------------------------------------------------------
// MeanFunctional

MeanFunctional::MeanFunctional(FunctionalSpec spec, Kernel kernel) : spec_(std::move(spec)), kernel_(std::move(kernel)) {
  if (spec_.form == FunctionalForm::user && !spec_.g) throw Error(ErrorKind::config, "user functional needs g");
  if (spec_.form == FunctionalForm::indicator_interval && !(spec_.hi > spec_.lo))
    throw Error(ErrorKind::config, "indicator functional needs lo < hi");
}

MeanFunctional h_transform(const FunctionalSpec& g, const Kernel& kernel) { return MeanFunctional(g, kernel); }

double MeanFunctional::g(double t) const {
  switch (spec_.form) {
    case FunctionalForm::identity: return t;
    case FunctionalForm::constant: return spec_.constant;
    case FunctionalForm::indicator_interval: return (t >= spec_.lo && t <= spec_.hi) ? 1.0 : 0.0;
    case FunctionalForm::user: return spec_.g(t);
  }
  return 0.0;
}

bool MeanFunctional::closed_form() const {
  switch (spec_.form) {
    case FunctionalForm::constant:
    case FunctionalForm::indicator_interval:
      return true;
    case FunctionalForm::identity:
      return kernel_.family() != Kernel::Family::tabulated;
    case FunctionalForm::user:
      return kernel_.family() == Kernel::Family::indicator;
  }
  return false;
}

namespace {

// k(t, x) with t clamped into a tabulated kernel's t range.
double kernel_value_clamped(const Kernel& k, double t, double x) {
  if (k.family() == Kernel::Family::tabulated) {
    const auto& tg = k.t_grid();
    t = std::clamp(t, tg.front(), tg.back());
  }
  return k.value(t, x);
}

}  // namespace

double MeanFunctional::h_upto(double x, double horizon) const {
  const bool indicator_kernel = kernel_.family() == Kernel::Family::indicator;
  switch (spec_.form) {
    case FunctionalForm::constant:
      return spec_.constant * kernel_value_clamped(kernel_, horizon, x);
    case FunctionalForm::indicator_interval: {
      if (spec_.lo > horizon) return 0.0;
      const double hi = std::min(spec_.hi, horizon);
      if (indicator_kernel) return (x >= spec_.lo && x <= hi) ? 1.0 : 0.0;
      // g = 1 on [lo, hi]; k is continuous in t for these families.
      return kernel_value_clamped(kernel_, hi, x) - kernel_value_clamped(kernel_, spec_.lo, x);
    }
    case FunctionalForm::identity:
      if (indicator_kernel) return x <= horizon ? x : 0.0;
      if (kernel_.family() == Kernel::Family::exp_conv) {
        const double r = kernel_.rate();
        if (x < 0.0 || x > horizon) return 0.0;
        const double full = x / r + 1.0 / (r * r);
        if (std::isinf(horizon)) return full;
        return full - std::exp(-r * (horizon - x)) * (horizon / r + 1.0 / (r * r));
      }
      return h_quadrature(x, horizon, false);
    case FunctionalForm::user:
      if (indicator_kernel) return x <= horizon ? spec_.g(x) : 0.0;
      return h_quadrature(x, horizon, false);
  }
  return 0.0;
}

double MeanFunctional::h(double x) const { return h_upto(x, std::numeric_limits<double>::infinity()); }

double MeanFunctional::h_abs(double x) const {
  switch (spec_.form) {
    case FunctionalForm::constant:
      return std::abs(spec_.constant) * kernel_.limit(x);
    case FunctionalForm::indicator_interval:
      return h(x);
    case FunctionalForm::identity:
      if (kernel_.family() == Kernel::Family::indicator) return std::abs(x);
      if (kernel_.family() == Kernel::Family::exp_conv) return h(x);  // t >= x >= 0 on the support of k'
      return h_quadrature(x, std::numeric_limits<double>::infinity(), true);
    case FunctionalForm::user:
      if (kernel_.family() == Kernel::Family::indicator) return std::abs(spec_.g(x));
      return h_quadrature(x, std::numeric_limits<double>::infinity(), true);
  }
  return 0.0;
}

double MeanFunctional::hbar(double x) const {
  const double kbar = kernel_.limit(x);
  if (!(kbar > 0.0)) return 0.0;
  return h(x) / kbar;
}

double MeanFunctional::h_quadrature(double x, double horizon, bool absolute) const {
  auto [ta, tb] = kernel_.t_support(x);
  tb = std::min(tb, horizon);
  if (!(tb > ta)) return 0.0;
  auto integrand = [&](double t) {
    const double gv = g(t);
    return (absolute ? std::abs(gv) : gv) * kernel_.deriv(t, x);
  };
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os << "h(x) diverges at x=" << x << ": " << why;
    throw Error(ErrorKind::nonintegrable, os.str());
  };

  // Finite-range pieces between breaks in k'(., x) and g.
  std::vector<double> cuts = kernel_.t_breaks(x);
  cuts.insert(cuts.end(), spec_.g_breaks.begin(), spec_.g_breaks.end());
  const double finite_end = std::isfinite(tb) ? tb : ta + 1.0 / kernel_.rate();
  std::vector<double> edges = {ta, finite_end};
  for (double c : cuts)
    if (c > ta && c < finite_end) edges.push_back(c);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    QuadResult r = integrate_adaptive(integrand, edges[i - 1], edges[i], 1e-15, 1e-13, 2000);
    if (!std::isfinite(r.value)) fail("integrand is not finite");
    sum += r.value;
  }
  if (std::isfinite(tb)) return sum;

  // Semi-infinite tail: doubling panels until contributions vanish.
  double a = finite_end;
  double width = 1.0 / kernel_.rate();
  for (int panel = 0; panel < 200; ++panel) {
    const double b = a + width;
    std::vector<double> pe = {a, b};
    for (double c : spec_.g_breaks)
      if (c > a && c < b) pe.push_back(c);
    std::sort(pe.begin(), pe.end());
    double piece = 0.0;
    for (std::size_t i = 1; i < pe.size(); ++i) {
      QuadResult r = integrate_adaptive(integrand, pe[i - 1], pe[i], 1e-16, 1e-13, 2000);
      if (!std::isfinite(r.value)) fail("integrand is not finite");
      piece += r.value;
    }
    sum += piece;
    if (!std::isfinite(sum)) fail("partial sums are not finite");
    // A zero running sum only means g has not been reached yet.
    if (sum != 0.0 && std::abs(piece) <= 1e-15 * std::abs(sum)) return sum;
    if (piece == 0.0 && kernel_.deriv(b, x) == 0.0) return sum;
    a = b;
    width *= 2.0;
    if (kernel_.rate() * (a - x) > 1400.0) break;
  }
  fail("tail contributions do not decay");
  return sum;
}

std::vector<double> MeanFunctional::x_kinks() const {
  std::vector<double> k = kernel_.x_kinks();
  if (spec_.form == FunctionalForm::indicator_interval) {
    k.push_back(spec_.lo);
    k.push_back(spec_.hi);
  }
  if (spec_.form == FunctionalForm::user) k.insert(k.end(), spec_.g_breaks.begin(), spec_.g_breaks.end());
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed || !c.required; });
}

const ConditionCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

// Probe locations: coarse Gauss nodes of alpha, its atoms and the fixed jumps.
std::vector<double> probe_locations(const IapSpec& spec) {
  std::vector<double> xs;
  const QuadratureRule r = spec.base().rule({}, 8);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r.weights[i] > 0.0) xs.push_back(r.nodes[i]);
  for (const FixedJump& j : spec.fixed_jumps()) xs.push_back(j.location);
  return xs;
}

ConditionCheck check_monotone_kernel(const IapSpec& spec, const Kernel& kernel) {
  ConditionCheck c{"condition_I", true, true, "k(., x) nondecreasing, right-continuous, vanishing at -inf on probe grid"};
  std::ostringstream os;
  try {
    for (double x : probe_locations(spec)) {
      std::vector<double> ts;
      if (kernel.family() == Kernel::Family::tabulated) {
        const auto& tg = kernel.t_grid();
        for (std::size_t i = 0; i < tg.size(); ++i) {
          ts.push_back(tg[i]);
          if (i + 1 < tg.size()) ts.push_back(0.5 * (tg[i] + tg[i + 1]));
        }
        const auto& xg = kernel.x_grid();
        if (xg.size() > 1 && (x < xg.front() || x > xg.back())) {
          os << "alpha charges x=" << x << " outside the kernel table";
          return {c.name, false, true, os.str()};
        }
      } else {
        const double scale = kernel.family() == Kernel::Family::exp_conv ? 1.0 / kernel.rate() : 1.0;
        for (double m : {-1e6, -100.0, -10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0, 100.0}) ts.push_back(x + m * scale);
        ts.push_back(spec.upsilon());
        std::sort(ts.begin(), ts.end());
      }
      const double kbar = kernel.limit(x);
      double prev = -std::numeric_limits<double>::infinity();
      for (double t : ts) {
        const double v = kernel.value(t, x);
        if (v < prev - 1e-12) {
          os << "k(t, x) decreases in t at x=" << x << ", t=" << t;
          return {c.name, false, true, os.str()};
        }
        if (v < -1e-12 || v > kbar + 1e-12) {
          os << "k(t, x) outside [0, kbar(x)] at x=" << x << ", t=" << t;
          return {c.name, false, true, os.str()};
        }
        prev = v;
      }
      if (kernel.value(ts.front(), x) > 1e-12) {
        os << "k(t, x) does not vanish as t -> -inf at x=" << x;
        return {c.name, false, true, os.str()};
      }
    }
  } catch (const Error& e) {
    return {c.name, false, true, e.what()};
  }
  return c;
}

}  // namespace

ValidationReport validate_spec(const IapSpec& spec, const Kernel& kernel, const MeanFunctional& functional) {
  ValidationReport report;
  report.checks.push_back(check_monotone_kernel(spec, kernel));

  const BaseMeasure& alpha = spec.base();
  const std::vector<double> kinks = functional.x_kinks();

  // (II): int log(1 + lambda kbar / beta) d alpha finite, the gamma-family
  // form of int (1 - exp(-lambda v kbar)) nu(dx dv).
  {
    ConditionCheck c{"condition_II", true, true, ""};
    std::ostringstream os;
    os << "gamma family: int log(1 + lambda kbar/beta) d alpha =";
    try {
      for (double lambda : {0.1, 1.0, 10.0}) {
        double v = alpha.integrate([&](double x) { return std::log1p(lambda * kernel.limit(x) / spec.beta()(x)); }, kinks);
        for (const FixedJump& j : spec.fixed_jumps()) v += j.shape * std::log1p(lambda * kernel.limit(j.location) / j.rate);
        os << " " << v << " (lambda=" << lambda << ")";
        if (!std::isfinite(v)) c.passed = false;
      }
    } catch (const Error& e) {
      c.passed = false;
      os << " error: " << e.what();
    }
    c.detail = os.str();
    report.checks.push_back(c);
  }

  report.checks.push_back({"condition_III", alpha.total_mass() > 0.0, true,
                           "gamma family: infinite total intensity holds analytically since alpha(R) > 0"});

  // Mean existence, gamma form of the Proposition-1 criterion; reduces to
  // int log(1 + lambda |h|) d alpha < inf in the Dirichlet case.
  {
    ConditionCheck c{"mean_existence", true, true, ""};
    std::ostringstream os;
    os << "int log(1 + lambda |h|/beta) d alpha =";
    try {
      for (double lambda : {0.1, 1.0, 10.0}) {
        const double v = alpha.integrate(
            [&](double x) { return std::log1p(lambda * functional.h_abs(x) / spec.beta()(x)); }, kinks);
        os << " " << v << " (lambda=" << lambda << ")";
        if (!std::isfinite(v)) c.passed = false;
      }
    } catch (const Error& e) {
      c.passed = false;
      os << " failed: " << e.what();
    }
    c.detail = os.str();
    report.checks.push_back(c);
  }

  // Informational: kbar and beta constant on the support of alpha, in which
  // case F is a mixture of a Dirichlet process and the exact mean laws apply.
  {
    bool constant = spec.beta().is_constant() && spec.fixed_jumps().empty();
    double first = std::numeric_limits<double>::quiet_NaN();
    try {
      for (double x : probe_locations(spec)) {
        const double kb = kernel.limit(x);
        if (std::isnan(first)) first = kb;
        if (std::abs(kb - first) > 1e-12 * std::max(1.0, std::abs(first))) constant = false;
      }
    } catch (const Error&) {
      constant = false;
    }
    report.checks.push_back({"dirichlet_reduction", constant, false,
                             constant ? "kbar constant and beta constant: Dirichlet-mean formulas apply"
                                      : "kbar or beta varies over alpha: use the general inversion"});
  }
  return report;
}

}  // namespace iapdf
