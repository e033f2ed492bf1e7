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

/* C interface to iapdf. Objects are opaque handles released with the
 * matching *_free function. Every fallible call returns an iapdf_status;
 * on failure iapdf_last_error() describes the problem (thread-local).
 * Curves are written into caller-provided arrays of the grid's length. */

#ifndef IAPDF_IAPDF_H_
#define IAPDF_IAPDF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IAPDF_API __declspec(dllexport)
#else
#define IAPDF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iapdf_status {
  IAPDF_OK = 0,
  IAPDF_ERR_CONFIG = 1,
  IAPDF_ERR_DATA = 2,
  IAPDF_ERR_DOMAIN = 3,
  IAPDF_ERR_NUMERIC = 4,
  IAPDF_ERR_DEGENERATE = 5,
  IAPDF_ERR_NONINTEGRABLE = 6,
  IAPDF_ERR_SIZE = 7,
  IAPDF_ERR_UNSUPPORTED = 8,
  IAPDF_ERR_NULL = 9,
  IAPDF_ERR_INTERNAL = 10
} iapdf_status;

typedef struct iapdf_measure iapdf_measure;
typedef struct iapdf_kernel iapdf_kernel;
typedef struct iapdf_functional iapdf_functional;
typedef struct iapdf_spec iapdf_spec;
typedef struct iapdf_path iapdf_path;
typedef struct iapdf_chain iapdf_chain;

IAPDF_API const char* iapdf_version(void);
IAPDF_API const char* iapdf_status_name(iapdf_status status);
/* Message of the last failed call on this thread ("" if none). */
IAPDF_API const char* iapdf_last_error(void);
/* For IAPDF_ERR_NUMERIC raised by a quadrature: best estimate and achieved
 * tolerance. Both NaN otherwise. */
IAPDF_API void iapdf_last_tolerance(double* estimate, double* achieved);

/* ---- base measures ---------------------------------------------------- */
IAPDF_API iapdf_status iapdf_measure_uniform(double lo, double hi, double mass, iapdf_measure** out);
IAPDF_API iapdf_status iapdf_measure_atoms(const double* locations, const double* masses, size_t n,
                                           iapdf_measure** out);
/* Piecewise-linear density through (xs[i], values[i]) plus optional atoms. */
IAPDF_API iapdf_status iapdf_measure_tabulated(const double* xs, const double* values, size_t n,
                                               const double* atom_locations, const double* atom_masses,
                                               size_t n_atoms, iapdf_measure** out);
/* alpha + weight * sum_i delta_{locations[i]}. */
IAPDF_API iapdf_status iapdf_measure_with_atoms(const iapdf_measure* m, const double* locations, size_t n,
                                                double weight, iapdf_measure** out);
IAPDF_API void iapdf_measure_free(iapdf_measure* m);
IAPDF_API iapdf_status iapdf_measure_total_mass(const iapdf_measure* m, double* out);
IAPDF_API iapdf_status iapdf_measure_cdf(const iapdf_measure* m, double x, double* out);
IAPDF_API iapdf_status iapdf_measure_quantile(const iapdf_measure* m, double p, double* out);

/* ---- kernels ---------------------------------------------------------- */
IAPDF_API iapdf_status iapdf_kernel_exp_conv(double rate, iapdf_kernel** out);
IAPDF_API iapdf_status iapdf_kernel_indicator(iapdf_kernel** out);
/* values[ix * nt + it] = k(t_grid[it], x_grid[ix]). */
IAPDF_API iapdf_status iapdf_kernel_tabulated(const double* t_grid, size_t nt, const double* x_grid, size_t nx,
                                              const double* values, iapdf_kernel** out);
IAPDF_API void iapdf_kernel_free(iapdf_kernel* k);
IAPDF_API iapdf_status iapdf_kernel_eval(const iapdf_kernel* k, double t, double x, double* value, double* deriv,
                                         double* limit);

/* ---- mean functionals ------------------------------------------------- */
IAPDF_API iapdf_status iapdf_functional_identity(const iapdf_kernel* k, iapdf_functional** out);
IAPDF_API iapdf_status iapdf_functional_constant(const iapdf_kernel* k, double c, iapdf_functional** out);
IAPDF_API iapdf_status iapdf_functional_indicator(const iapdf_kernel* k, double lo, double hi,
                                                  iapdf_functional** out);
/* g piecewise linear through (xs[i], gs[i]), constant beyond the ends. */
IAPDF_API iapdf_status iapdf_functional_tabulated(const iapdf_kernel* k, const double* xs, const double* gs, size_t n,
                                                  iapdf_functional** out);
typedef double (*iapdf_g_callback)(double t, void* ctx);
/* ctx must outlive the functional. */
IAPDF_API iapdf_status iapdf_functional_user(const iapdf_kernel* k, iapdf_g_callback g, void* ctx,
                                             iapdf_functional** out);
IAPDF_API void iapdf_functional_free(iapdf_functional* f);
IAPDF_API iapdf_status iapdf_functional_h(const iapdf_functional* f, double x, double* out);

/* ---- process specification ---------------------------------------------- */
/* beta is constant (n_beta == 0, beta_values[0] or 1 if NULL) or piecewise
 * linear through (beta_x[i], beta_values[i]). Fixed jumps have gamma laws. */
IAPDF_API iapdf_status iapdf_spec_create(const iapdf_measure* alpha, const double* beta_x, const double* beta_values,
                                         size_t n_beta, const double* jump_locations, const double* jump_shapes,
                                         const double* jump_rates, size_t n_jumps, double upsilon, iapdf_spec** out);
IAPDF_API void iapdf_spec_free(iapdf_spec* s);

typedef struct iapdf_check {
  char name[32];
  int passed;
  int required;
  char detail[256];
} iapdf_check;

/* Writes up to `capacity` checks; *count receives the number available. */
IAPDF_API iapdf_status iapdf_validate(const iapdf_spec* s, const iapdf_kernel* k, const iapdf_functional* f,
                                      iapdf_check* checks, size_t capacity, size_t* count);

/* ---- Ferguson-Klass paths ------------------------------------------------ */
IAPDF_API iapdf_status iapdf_levy_tail_mass(const iapdf_spec* s, double v, double* out);
IAPDF_API iapdf_status iapdf_path_sample(const iapdf_spec* s, double threshold, uint64_t seed, uint64_t stream,
                                         iapdf_path** out);
IAPDF_API void iapdf_path_free(iapdf_path* p);
/* Random jumps first (decreasing size), then fixed jumps. */
IAPDF_API iapdf_status iapdf_path_jumps(const iapdf_path* p, double* locations, double* sizes, size_t capacity,
                                        size_t* count);
IAPDF_API iapdf_status iapdf_path_eval(const iapdf_path* p, const iapdf_kernel* k, double t, double* Z, double* Zbar,
                                       double* F, double* f);

/* ---- laws of the mean --------------------------------------------------- */
typedef struct iapdf_curve_info {
  double quad_tol;
  double ess;
  int low_ess;
} iapdf_curve_info;

IAPDF_API iapdf_status iapdf_prior_cdf_dirichlet(const iapdf_functional* f, const iapdf_measure* alpha,
                                                 const double* grid, size_t n, double* values, iapdf_curve_info* info);
IAPDF_API iapdf_status iapdf_prior_cdf_general(const iapdf_functional* f, const iapdf_kernel* k, const iapdf_spec* s,
                                               const double* grid, size_t n, double* values, iapdf_curve_info* info);
IAPDF_API iapdf_status iapdf_prior_density_dirichlet(const iapdf_functional* f, const iapdf_measure* alpha,
                                                     const double* grid, size_t n, double* values,
                                                     iapdf_curve_info* info);
IAPDF_API iapdf_status iapdf_posterior_density_latent(const iapdf_functional* f, const iapdf_measure* alpha,
                                                      const double* u, size_t n_u, const double* grid, size_t n,
                                                      double* values, iapdf_curve_info* info);
/* std_error may be NULL. */
IAPDF_API iapdf_status iapdf_posterior_density_mixture(const iapdf_functional* f, const iapdf_measure* alpha,
                                                       const iapdf_kernel* k, const double* data, size_t n_data,
                                                       int draws, uint64_t seed, const double* grid, size_t n,
                                                       double* values, double* std_error, iapdf_curve_info* info);
IAPDF_API iapdf_status iapdf_posterior_density_exact(const iapdf_functional* f, const iapdf_measure* alpha,
                                                     const iapdf_kernel* k, const double* data, size_t n_data,
                                                     const double* grid, size_t n, double* values,
                                                     iapdf_curve_info* info);

/* ---- oracle ------------------------------------------------------------ */
IAPDF_API iapdf_status iapdf_oracle_mean_cdf(const iapdf_functional* f, const iapdf_measure* alpha, int samples,
                                             uint64_t seed, const double* grid, size_t n, double* values,
                                             double* std_error);
IAPDF_API iapdf_status iapdf_bell_number(int n, uint64_t* out);
/* n gamma(shape, rate) variates from substream `stream` of the library generator. */
IAPDF_API iapdf_status iapdf_sample_gamma(uint64_t seed, uint64_t stream, double shape, double rate, size_t n,
                                          double* out);

/* ---- Gibbs sampler ------------------------------------------------------ */
typedef struct iapdf_gibbs_config {
  int iterations;
  int burn_in;
  double threshold;
  double upsilon; /* 0: 1.5 * max(data) */
  uint64_t seed;
  int bins;
  int keep_curves;
} iapdf_gibbs_config;

IAPDF_API void iapdf_gibbs_config_default(iapdf_gibbs_config* c);

typedef struct iapdf_trace_record {
  long iter;
  double mean_functional;
  double zbar;
  size_t jumps;
  double u_mean;
  int path_resamples;
} iapdf_trace_record;

typedef void (*iapdf_progress_callback)(long iter, void* ctx);

IAPDF_API iapdf_status iapdf_gibbs_run(const iapdf_gibbs_config* c, const double* t_grid, size_t n_grid,
                                       const double* data, size_t n_data, const iapdf_spec* s, const iapdf_kernel* k,
                                       const iapdf_functional* f, iapdf_progress_callback progress, void* ctx,
                                       iapdf_chain** out);
IAPDF_API void iapdf_chain_free(iapdf_chain* ch);
IAPDF_API iapdf_status iapdf_chain_summary(const iapdf_chain* ch, double* mean_functional, double* upsilon, int* kept,
                                           int* path_resamples);
/* Arrays of the t grid's length; any may be NULL. */
IAPDF_API iapdf_status iapdf_chain_curves(const iapdf_chain* ch, double* mean_F, double* sd_F, double* mean_f,
                                          double* sd_f);
IAPDF_API iapdf_status iapdf_chain_trace(const iapdf_chain* ch, size_t index, iapdf_trace_record* out);
/* F and f of kept iteration `index` (requires keep_curves). */
IAPDF_API iapdf_status iapdf_chain_draw(const iapdf_chain* ch, size_t index, double* F, double* f);

#ifdef __cplusplus
}
#endif

#endif /* IAPDF_IAPDF_H_ */
