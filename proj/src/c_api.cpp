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

#include "iapdf/iapdf.h"

#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "iapdf/error.hpp"
#include "iapdf/fk_sampler.hpp"
#include "iapdf/gibbs.hpp"
#include "iapdf/inversion.hpp"
#include "iapdf/measures.hpp"
#include "iapdf/oracle.hpp"

struct iapdf_measure {
  iapdf::BaseMeasure m;
};
struct iapdf_kernel {
  iapdf::Kernel k;
};
struct iapdf_functional {
  iapdf::MeanFunctional f;
};
struct iapdf_spec {
  iapdf::IapSpec s;
};
struct iapdf_path {
  iapdf::JumpPath p;
};
struct iapdf_chain {
  iapdf::PosteriorSummary s;
};

namespace {

thread_local std::string g_last_error;
thread_local double g_tol_estimate = std::numeric_limits<double>::quiet_NaN();
thread_local double g_tol_achieved = std::numeric_limits<double>::quiet_NaN();

iapdf_status status_of(iapdf::ErrorKind k) {
  using iapdf::ErrorKind;
  switch (k) {
    case ErrorKind::config: return IAPDF_ERR_CONFIG;
    case ErrorKind::data: return IAPDF_ERR_DATA;
    case ErrorKind::domain: return IAPDF_ERR_DOMAIN;
    case ErrorKind::numeric: return IAPDF_ERR_NUMERIC;
    case ErrorKind::degenerate: return IAPDF_ERR_DEGENERATE;
    case ErrorKind::nonintegrable: return IAPDF_ERR_NONINTEGRABLE;
    case ErrorKind::size: return IAPDF_ERR_SIZE;
    case ErrorKind::unsupported: return IAPDF_ERR_UNSUPPORTED;
  }
  return IAPDF_ERR_INTERNAL;
}

struct NullArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class F>
iapdf_status guard(F&& f) {
  g_last_error.clear();
  g_tol_estimate = g_tol_achieved = std::numeric_limits<double>::quiet_NaN();
  try {
    f();
    return IAPDF_OK;
  } catch (const iapdf::ToleranceError& e) {
    g_last_error = e.what();
    g_tol_estimate = e.estimate();
    g_tol_achieved = e.achieved_tolerance();
    return IAPDF_ERR_NUMERIC;
  } catch (const iapdf::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const NullArgument& e) {
    g_last_error = e.what();
    return IAPDF_ERR_NULL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IAPDF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IAPDF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw NullArgument(std::string("null argument: ") + what);
}

std::vector<double> vec(const double* p, std::size_t n) {
  if (n > 0 && !p) throw NullArgument("null array with nonzero length");
  return n ? std::vector<double>(p, p + n) : std::vector<double>();
}

void write_curve(const iapdf::DistCurve& c, double* values, iapdf_curve_info* info) {
  std::copy(c.values.begin(), c.values.end(), values);
  if (info) {
    info->quad_tol = c.quad_tol;
    info->ess = c.ess;
    info->low_ess = c.low_ess ? 1 : 0;
  }
}

iapdf::FunctionalSpec tabulated_g(std::vector<double> xs, std::vector<double> gs) {
  if (xs.size() < 2 || xs.size() != gs.size())
    throw iapdf::Error(iapdf::ErrorKind::config, "tabulated g needs at least two (x, g) pairs");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw iapdf::Error(iapdf::ErrorKind::config, "tabulated g grid must be increasing");
  iapdf::FunctionalSpec fs;
  fs.form = iapdf::FunctionalForm::user;
  fs.g_breaks = xs;
  auto x = std::make_shared<const std::vector<double>>(std::move(xs));
  auto y = std::make_shared<const std::vector<double>>(std::move(gs));
  fs.g = [x, y](double t) {
    const auto& X = *x;
    const auto& Y = *y;
    if (t <= X.front()) return Y.front();
    if (t >= X.back()) return Y.back();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(X.begin(), X.end(), t) - X.begin()) - 1;
    return Y[i] + (t - X[i]) / (X[i + 1] - X[i]) * (Y[i + 1] - Y[i]);
  };
  return fs;
}

iapdf_status new_functional(const iapdf_kernel* k, const iapdf::FunctionalSpec& fs, iapdf_functional** out) {
  return guard([&] {
    need(k, "kernel");
    need(out, "out");
    *out = new iapdf_functional{iapdf::h_transform(fs, k->k)};
  });
}

}  // namespace

extern "C" {

const char* iapdf_version(void) { return "0.1.0"; }

const char* iapdf_status_name(iapdf_status s) {
  switch (s) {
    case IAPDF_OK: return "ok";
    case IAPDF_ERR_CONFIG: return "config";
    case IAPDF_ERR_DATA: return "data";
    case IAPDF_ERR_DOMAIN: return "domain";
    case IAPDF_ERR_NUMERIC: return "numeric";
    case IAPDF_ERR_DEGENERATE: return "degenerate";
    case IAPDF_ERR_NONINTEGRABLE: return "nonintegrable";
    case IAPDF_ERR_SIZE: return "size";
    case IAPDF_ERR_UNSUPPORTED: return "unsupported";
    case IAPDF_ERR_NULL: return "null";
    case IAPDF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* iapdf_last_error(void) { return g_last_error.c_str(); }

void iapdf_last_tolerance(double* estimate, double* achieved) {
  if (estimate) *estimate = g_tol_estimate;
  if (achieved) *achieved = g_tol_achieved;
}

// ---- measures

iapdf_status iapdf_measure_uniform(double lo, double hi, double mass, iapdf_measure** out) {
  return guard([&] {
    need(out, "out");
    *out = new iapdf_measure{iapdf::BaseMeasure::uniform(lo, hi, mass)};
  });
}

iapdf_status iapdf_measure_atoms(const double* locations, const double* masses, size_t n, iapdf_measure** out) {
  return guard([&] {
    need(out, "out");
    std::vector<iapdf::Atom> atoms;
    const auto l = vec(locations, n), m = vec(masses, n);
    for (size_t i = 0; i < n; ++i) atoms.push_back({l[i], m[i]});
    *out = new iapdf_measure{iapdf::BaseMeasure::atoms_only(std::move(atoms))};
  });
}

iapdf_status iapdf_measure_tabulated(const double* xs, const double* values, size_t n, const double* atom_locations,
                                     const double* atom_masses, size_t n_atoms, iapdf_measure** out) {
  return guard([&] {
    need(out, "out");
    std::vector<iapdf::Atom> atoms;
    const auto l = vec(atom_locations, n_atoms), m = vec(atom_masses, n_atoms);
    for (size_t i = 0; i < n_atoms; ++i) atoms.push_back({l[i], m[i]});
    *out = new iapdf_measure{iapdf::BaseMeasure::tabulated(vec(xs, n), vec(values, n), std::move(atoms))};
  });
}

iapdf_status iapdf_measure_with_atoms(const iapdf_measure* m, const double* locations, size_t n, double weight,
                                      iapdf_measure** out) {
  return guard([&] {
    need(m, "measure");
    need(out, "out");
    const auto l = vec(locations, n);
    *out = new iapdf_measure{m->m.with_atoms(l, weight)};
  });
}

void iapdf_measure_free(iapdf_measure* m) { delete m; }

iapdf_status iapdf_measure_total_mass(const iapdf_measure* m, double* out) {
  return guard([&] {
    need(m, "measure");
    need(out, "out");
    *out = m->m.total_mass();
  });
}

iapdf_status iapdf_measure_cdf(const iapdf_measure* m, double x, double* out) {
  return guard([&] {
    need(m, "measure");
    need(out, "out");
    *out = m->m.cdf(x);
  });
}

iapdf_status iapdf_measure_quantile(const iapdf_measure* m, double p, double* out) {
  return guard([&] {
    need(m, "measure");
    need(out, "out");
    *out = m->m.quantile(p);
  });
}

// ---- kernels

iapdf_status iapdf_kernel_exp_conv(double rate, iapdf_kernel** out) {
  return guard([&] {
    need(out, "out");
    *out = new iapdf_kernel{iapdf::Kernel::exp_conv(rate)};
  });
}

iapdf_status iapdf_kernel_indicator(iapdf_kernel** out) {
  return guard([&] {
    need(out, "out");
    *out = new iapdf_kernel{iapdf::Kernel::indicator()};
  });
}

iapdf_status iapdf_kernel_tabulated(const double* t_grid, size_t nt, const double* x_grid, size_t nx,
                                    const double* values, iapdf_kernel** out) {
  return guard([&] {
    need(out, "out");
    *out = new iapdf_kernel{iapdf::Kernel::tabulated(vec(t_grid, nt), vec(x_grid, nx), vec(values, nt * nx))};
  });
}

void iapdf_kernel_free(iapdf_kernel* k) { delete k; }

iapdf_status iapdf_kernel_eval(const iapdf_kernel* k, double t, double x, double* value, double* deriv, double* limit) {
  return guard([&] {
    need(k, "kernel");
    const iapdf::KernelValue v = k->k.eval(t, x);
    if (value) *value = v.value;
    if (deriv) *deriv = v.deriv;
    if (limit) *limit = v.limit;
  });
}

// ---- functionals

iapdf_status iapdf_functional_identity(const iapdf_kernel* k, iapdf_functional** out) {
  return new_functional(k, iapdf::FunctionalSpec{}, out);
}

iapdf_status iapdf_functional_constant(const iapdf_kernel* k, double c, iapdf_functional** out) {
  iapdf::FunctionalSpec fs;
  fs.form = iapdf::FunctionalForm::constant;
  fs.constant = c;
  return new_functional(k, fs, out);
}

iapdf_status iapdf_functional_indicator(const iapdf_kernel* k, double lo, double hi, iapdf_functional** out) {
  iapdf::FunctionalSpec fs;
  fs.form = iapdf::FunctionalForm::indicator_interval;
  fs.lo = lo;
  fs.hi = hi;
  return new_functional(k, fs, out);
}

iapdf_status iapdf_functional_tabulated(const iapdf_kernel* k, const double* xs, const double* gs, size_t n,
                                        iapdf_functional** out) {
  iapdf::FunctionalSpec fs;
  const iapdf_status st = guard([&] { fs = tabulated_g(vec(xs, n), vec(gs, n)); });
  if (st != IAPDF_OK) return st;
  return new_functional(k, fs, out);
}

iapdf_status iapdf_functional_user(const iapdf_kernel* k, iapdf_g_callback g, void* ctx, iapdf_functional** out) {
  if (!g) {
    g_last_error = "null argument: g";
    return IAPDF_ERR_NULL;
  }
  iapdf::FunctionalSpec fs;
  fs.form = iapdf::FunctionalForm::user;
  fs.g = [g, ctx](double t) { return g(t, ctx); };
  return new_functional(k, fs, out);
}

void iapdf_functional_free(iapdf_functional* f) { delete f; }

iapdf_status iapdf_functional_h(const iapdf_functional* f, double x, double* out) {
  return guard([&] {
    need(f, "functional");
    need(out, "out");
    *out = f->f.h(x);
  });
}

// ---- spec

iapdf_status iapdf_spec_create(const iapdf_measure* alpha, const double* beta_x, const double* beta_values,
                               size_t n_beta, const double* jump_locations, const double* jump_shapes,
                               const double* jump_rates, size_t n_jumps, double upsilon, iapdf_spec** out) {
  return guard([&] {
    need(alpha, "alpha");
    need(out, "out");
    iapdf::RateFunction beta = n_beta == 0 ? iapdf::RateFunction::constant(beta_values ? beta_values[0] : 1.0)
                                           : iapdf::RateFunction::tabulated(vec(beta_x, n_beta), vec(beta_values, n_beta));
    std::vector<iapdf::FixedJump> jumps;
    const auto l = vec(jump_locations, n_jumps), s = vec(jump_shapes, n_jumps), r = vec(jump_rates, n_jumps);
    for (size_t i = 0; i < n_jumps; ++i) jumps.push_back({l[i], s[i], r[i]});
    *out = new iapdf_spec{iapdf::IapSpec(alpha->m, std::move(beta), std::move(jumps), upsilon)};
  });
}

void iapdf_spec_free(iapdf_spec* s) { delete s; }

iapdf_status iapdf_validate(const iapdf_spec* s, const iapdf_kernel* k, const iapdf_functional* f, iapdf_check* checks,
                            size_t capacity, size_t* count) {
  return guard([&] {
    need(s, "spec");
    need(k, "kernel");
    need(f, "functional");
    const iapdf::ValidationReport r = iapdf::validate_spec(s->s, k->k, f->f);
    if (count) *count = r.checks.size();
    for (size_t i = 0; i < r.checks.size() && i < capacity && checks; ++i) {
      iapdf_check& c = checks[i];
      std::memset(&c, 0, sizeof c);
      std::strncpy(c.name, r.checks[i].name.c_str(), sizeof c.name - 1);
      std::strncpy(c.detail, r.checks[i].detail.c_str(), sizeof c.detail - 1);
      c.passed = r.checks[i].passed ? 1 : 0;
      c.required = r.checks[i].required ? 1 : 0;
    }
  });
}

// ---- paths

iapdf_status iapdf_levy_tail_mass(const iapdf_spec* s, double v, double* out) {
  return guard([&] {
    need(s, "spec");
    need(out, "out");
    *out = iapdf::levy_tail_mass(s->s, v);
  });
}

iapdf_status iapdf_path_sample(const iapdf_spec* s, double threshold, uint64_t seed, uint64_t stream,
                               iapdf_path** out) {
  return guard([&] {
    need(s, "spec");
    need(out, "out");
    iapdf::Rng rng(seed, stream);
    *out = new iapdf_path{iapdf::sample_jump_path(s->s, threshold, rng)};
  });
}

void iapdf_path_free(iapdf_path* p) { delete p; }

iapdf_status iapdf_path_jumps(const iapdf_path* p, double* locations, double* sizes, size_t capacity, size_t* count) {
  return guard([&] {
    need(p, "path");
    if (count) *count = p->p.size();
    size_t i = 0;
    p->p.for_each([&](const iapdf::Jump& j) {
      if (i < capacity) {
        if (locations) locations[i] = j.location;
        if (sizes) sizes[i] = j.size;
      }
      ++i;
    });
  });
}

iapdf_status iapdf_path_eval(const iapdf_path* p, const iapdf_kernel* k, double t, double* Z, double* Zbar, double* F,
                             double* f) {
  return guard([&] {
    need(p, "path");
    need(k, "kernel");
    const iapdf::ProcessValue v = iapdf::eval_process(p->p, k->k, t);
    if (Z) *Z = v.Z;
    if (Zbar) *Zbar = v.Zbar;
    if (F) *F = v.F;
    if (f) *f = v.f;
  });
}

// ---- laws of the mean

iapdf_status iapdf_prior_cdf_dirichlet(const iapdf_functional* f, const iapdf_measure* alpha, const double* grid,
                                       size_t n, double* values, iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(values, "values");
    write_curve(iapdf::prior_mean_cdf_dirichlet_curve(vec(grid, n), f->f, alpha->m), values, info);
  });
}

iapdf_status iapdf_prior_cdf_general(const iapdf_functional* f, const iapdf_kernel* k, const iapdf_spec* s,
                                     const double* grid, size_t n, double* values, iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(k, "kernel");
    need(s, "spec");
    need(values, "values");
    write_curve(iapdf::prior_mean_cdf_general_curve(vec(grid, n), f->f, k->k, s->s), values, info);
  });
}

iapdf_status iapdf_prior_density_dirichlet(const iapdf_functional* f, const iapdf_measure* alpha, const double* grid,
                                           size_t n, double* values, iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(values, "values");
    write_curve(iapdf::prior_mean_density_dirichlet(vec(grid, n), f->f, alpha->m), values, info);
  });
}

iapdf_status iapdf_posterior_density_latent(const iapdf_functional* f, const iapdf_measure* alpha, const double* u,
                                            size_t n_u, const double* grid, size_t n, double* values,
                                            iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(values, "values");
    write_curve(iapdf::posterior_mean_density_latent_curve(vec(grid, n), f->f, alpha->m, vec(u, n_u)), values, info);
  });
}

iapdf_status iapdf_posterior_density_mixture(const iapdf_functional* f, const iapdf_measure* alpha,
                                             const iapdf_kernel* k, const double* data, size_t n_data, int draws,
                                             uint64_t seed, const double* grid, size_t n, double* values,
                                             double* std_error, iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(k, "kernel");
    need(values, "values");
    iapdf::Rng rng(seed);
    const iapdf::DistCurve c =
        iapdf::posterior_mean_density_mixture(vec(grid, n), f->f, alpha->m, vec(data, n_data), k->k, draws, rng);
    write_curve(c, values, info);
    if (std_error) {
      for (size_t i = 0; i < n; ++i) std_error[i] = c.std_error.empty() ? 0.0 : c.std_error[i];
    }
  });
}

iapdf_status iapdf_posterior_density_exact(const iapdf_functional* f, const iapdf_measure* alpha,
                                           const iapdf_kernel* k, const double* data, size_t n_data,
                                           const double* grid, size_t n, double* values, iapdf_curve_info* info) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(k, "kernel");
    need(values, "values");
    write_curve(iapdf::posterior_mean_density_exact_smalln(vec(grid, n), f->f, alpha->m, vec(data, n_data), k->k),
                values, info);
  });
}

// ---- oracle

iapdf_status iapdf_oracle_mean_cdf(const iapdf_functional* f, const iapdf_measure* alpha, int samples, uint64_t seed,
                                   const double* grid, size_t n, double* values, double* std_error) {
  return guard([&] {
    need(f, "functional");
    need(alpha, "alpha");
    need(values, "values");
    iapdf::Rng rng(seed);
    const iapdf::MeanFunctional& h = f->f;
    const iapdf::DistCurve c =
        iapdf::mc_mean_cdf(alpha->m, [&](double x) { return h.hbar(x); }, samples, vec(grid, n), rng);
    std::copy(c.values.begin(), c.values.end(), values);
    if (std_error) std::copy(c.std_error.begin(), c.std_error.end(), std_error);
  });
}

iapdf_status iapdf_bell_number(int n, uint64_t* out) {
  return guard([&] {
    need(out, "out");
    *out = iapdf::bell_number(n);
  });
}

iapdf_status iapdf_sample_gamma(uint64_t seed, uint64_t stream, double shape, double rate, size_t n, double* out) {
  return guard([&] {
    need(out, "out");
    if (!(shape > 0.0) || !(rate > 0.0)) throw iapdf::Error(iapdf::ErrorKind::config, "gamma needs shape, rate > 0");
    iapdf::Rng rng(seed, stream);
    for (size_t i = 0; i < n; ++i) out[i] = rng.gamma(shape, rate);
  });
}

// ---- Gibbs

void iapdf_gibbs_config_default(iapdf_gibbs_config* c) {
  if (!c) return;
  const iapdf::GibbsConfig d;
  c->iterations = d.iterations;
  c->burn_in = d.burn_in;
  c->threshold = d.threshold;
  c->upsilon = d.upsilon;
  c->seed = d.seed;
  c->bins = d.bins;
  c->keep_curves = d.keep_curves ? 1 : 0;
}

iapdf_status iapdf_gibbs_run(const iapdf_gibbs_config* c, const double* t_grid, size_t n_grid, const double* data,
                             size_t n_data, const iapdf_spec* s, const iapdf_kernel* k, const iapdf_functional* f,
                             iapdf_progress_callback progress, void* ctx, iapdf_chain** out) {
  return guard([&] {
    need(c, "config");
    need(s, "spec");
    need(k, "kernel");
    need(f, "functional");
    need(out, "out");
    iapdf::GibbsConfig cfg;
    cfg.iterations = c->iterations;
    cfg.burn_in = c->burn_in;
    cfg.threshold = c->threshold;
    cfg.upsilon = c->upsilon;
    cfg.seed = c->seed;
    cfg.bins = c->bins;
    cfg.keep_curves = c->keep_curves != 0;
    cfg.t_grid = vec(t_grid, n_grid);
    iapdf::GibbsCallback cb;
    if (progress) cb = [&](const iapdf::GibbsState& st, const iapdf::IterationRecord&) { progress(st.iter, ctx); };
    *out = new iapdf_chain{iapdf::run_chain(cfg, vec(data, n_data), s->s, k->k, f->f, cb)};
  });
}

void iapdf_chain_free(iapdf_chain* ch) { delete ch; }

iapdf_status iapdf_chain_summary(const iapdf_chain* ch, double* mean_functional, double* upsilon, int* kept,
                                 int* path_resamples) {
  return guard([&] {
    need(ch, "chain");
    if (mean_functional) *mean_functional = ch->s.mean_functional;
    if (upsilon) *upsilon = ch->s.upsilon;
    if (kept) *kept = ch->s.kept;
    if (path_resamples) *path_resamples = ch->s.path_resamples;
  });
}

iapdf_status iapdf_chain_curves(const iapdf_chain* ch, double* mean_F, double* sd_F, double* mean_f, double* sd_f) {
  return guard([&] {
    need(ch, "chain");
    const auto& s = ch->s;
    if (mean_F) std::copy(s.mean_F.begin(), s.mean_F.end(), mean_F);
    if (sd_F) std::copy(s.sd_F.begin(), s.sd_F.end(), sd_F);
    if (mean_f) std::copy(s.mean_f.begin(), s.mean_f.end(), mean_f);
    if (sd_f) std::copy(s.sd_f.begin(), s.sd_f.end(), sd_f);
  });
}

iapdf_status iapdf_chain_trace(const iapdf_chain* ch, size_t index, iapdf_trace_record* out) {
  return guard([&] {
    need(ch, "chain");
    need(out, "out");
    if (index >= ch->s.trace.size()) throw iapdf::Error(iapdf::ErrorKind::domain, "trace index out of range");
    const iapdf::IterationRecord& r = ch->s.trace[index];
    *out = {r.iter, r.mean_functional, r.zbar, r.jumps, r.u_mean, r.path_resamples};
  });
}

iapdf_status iapdf_chain_draw(const iapdf_chain* ch, size_t index, double* F, double* f) {
  return guard([&] {
    need(ch, "chain");
    if (index >= ch->s.F_draws.size())
      throw iapdf::Error(iapdf::ErrorKind::domain, "draw index out of range (were curves kept?)");
    if (F) std::copy(ch->s.F_draws[index].begin(), ch->s.F_draws[index].end(), F);
    if (f) std::copy(ch->s.f_draws[index].begin(), ch->s.f_draws[index].end(), f);
  });
}

}  // extern "C"
