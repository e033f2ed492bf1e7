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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"

using namespace iapdf::cli;

namespace {

struct Options {
  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool exact = false;
  bool mixture = false;
  bool quiet = false;
};

struct Context {
  Config config;
  std::vector<double> data;
  std::uint64_t seed = 1;
};

Context load(const Options& o, bool want_data) {
  Context c;
  if (!o.config_path.empty()) c.config = Config::load(o.config_path);
  std::string data_path = o.data_path;
  if (data_path.empty()) data_path = c.config.get("data", "");
  if (want_data && !data_path.empty()) c.data = read_data(data_path);
  c.seed = o.seed_given ? o.seed : c.config.u64("seed", 1);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw CliError(kConfigError, "config", "cannot create output directory '" + o.out_dir + "'");
  return c;
}

std::string out_path(const Options& o, const std::string& name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

void note(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int positive_int(const Config& c, const std::string& key, int fallback) {
  const std::int64_t v = c.integer(key, fallback);
  if (v < 1 || v > 100000000) throw CliError(kConfigError, "config", key + " must be a positive integer");
  return static_cast<int>(v);
}

double trapezoid_mean_cdf(const std::vector<double>& x, const std::vector<double>& F) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += 0.5 * (F[i] + F[i - 1]) * (x[i] - x[i - 1]);
  return x.back() - area - x.front() * F.front();
}

std::vector<double> prior_cdf(const Context& ctx, const Model& m, const std::vector<double>& g) {
  std::vector<double> v(g.size());
  iapdf_curve_info info{};
  const std::string method = ctx.config.get("prior.method", "dirichlet");
  if (method == "dirichlet") {
    check(iapdf_prior_cdf_dirichlet(m.functional.get(), m.alpha.get(), g.data(), g.size(), v.data(), &info));
  } else if (method == "general") {
    check(iapdf_prior_cdf_general(m.functional.get(), m.kernel.get(), m.spec.get(), g.data(), g.size(), v.data(),
                                  &info));
  } else {
    throw CliError(kConfigError, "config", "prior.method must be dirichlet or general");
  }
  return v;
}

iapdf_gibbs_config gibbs_config(const Context& ctx, const Model& m) {
  iapdf_gibbs_config g;
  iapdf_gibbs_config_default(&g);
  g.iterations = positive_int(ctx.config, "gibbs.iterations", g.iterations);
  const std::int64_t burn = ctx.config.integer("gibbs.burn_in", g.burn_in);
  if (burn < 0 || burn >= g.iterations)
    throw CliError(kConfigError, "config", "gibbs.burn_in must lie in [0, gibbs.iterations)");
  g.burn_in = static_cast<int>(burn);
  g.threshold = ctx.config.number("fk.threshold", g.threshold);
  g.bins = positive_int(ctx.config, "gibbs.bins", g.bins);
  g.keep_curves = ctx.config.flag("gibbs.keep_curves", true) ? 1 : 0;
  g.upsilon = m.upsilon;
  g.seed = ctx.seed;
  return g;
}

void progress(long iter, void* ctx) {
  const auto* o = static_cast<const Options*>(ctx);
  if (!o->quiet && iter % 1000 == 0) std::cerr << "  sweep " << iter << "\n";
}

Chain run_gibbs(const Options& o, const iapdf_gibbs_config& g, const std::vector<double>& t,
                const std::vector<double>& data, const Model& m) {
  iapdf_chain* ch = nullptr;
  check(iapdf_gibbs_run(&g, t.data(), t.size(), data.data(), data.size(), m.spec.get(), m.kernel.get(),
                        m.functional.get(), progress, const_cast<Options*>(&o), &ch));
  return Chain(ch);
}

void write_chain(const Options& o, const iapdf_chain* ch, const std::vector<double>& t, bool keep_curves) {
  double mean = 0.0, ups = 0.0;
  int kept = 0, resamples = 0;
  check(iapdf_chain_summary(ch, &mean, &ups, &kept, &resamples));

  Table trace{{"iter", "mean_functional", "zbar", "jumps", "u_mean", "path_resamples"}, {}};
  for (int i = 0; i < kept; ++i) {
    iapdf_trace_record r{};
    check(iapdf_chain_trace(ch, static_cast<size_t>(i), &r));
    trace.rows.push_back({static_cast<double>(r.iter), r.mean_functional, r.zbar, static_cast<double>(r.jumps),
                          r.u_mean, static_cast<double>(r.path_resamples)});
  }
  write_file(out_path(o, "gibbs_trace.csv"), to_csv(trace));

  const std::size_t n = t.size();
  std::vector<double> mF(n), sF(n), mf(n), sf(n);
  check(iapdf_chain_curves(ch, mF.data(), sF.data(), mf.data(), sf.data()));
  Table curves{{"t", "mean_F", "sd_F", "mean_f", "sd_f"}, {}};
  for (std::size_t i = 0; i < n; ++i) curves.rows.push_back({t[i], mF[i], sF[i], mf[i], sf[i]});
  write_file(out_path(o, "gibbs_curves.csv"), to_csv(curves));

  if (keep_curves) {
    Table draws{{"iter", "t", "F", "f"}, {}};
    std::vector<double> F(n), f(n);
    for (int i = 0; i < kept; ++i) {
      iapdf_trace_record r{};
      check(iapdf_chain_trace(ch, static_cast<size_t>(i), &r));
      check(iapdf_chain_draw(ch, static_cast<size_t>(i), F.data(), f.data()));
      for (std::size_t j = 0; j < n; ++j) draws.rows.push_back({static_cast<double>(r.iter), t[j], F[j], f[j]});
    }
    write_file(out_path(o, "gibbs_draws.csv"), to_csv(draws));
  }

  Table summary{{"mean_functional", "upsilon", "kept", "path_resamples"},
                {{mean, ups, static_cast<double>(kept), static_cast<double>(resamples)}}};
  write_file(out_path(o, "gibbs_summary.csv"), to_csv(summary));
}

int cmd_validate(const Options& o) {
  Context ctx = load(o, true);
  Model m = build_model(ctx.config, ctx.data);
  std::vector<iapdf_check> checks(16);
  size_t count = 0;
  check(iapdf_validate(m.spec.get(), m.kernel.get(), m.functional.get(), checks.data(), checks.size(), &count));
  checks.resize(std::min(count, checks.size()));
  std::string report;
  Table t{{"check", "passed", "required"}, {}};
  bool ok = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const iapdf_check& c = checks[i];
    report += std::string(c.passed ? "PASS" : "FAIL") + " " + c.name + (c.required ? "" : " (informational)") + ": " +
              c.detail + "\n";
    t.rows.push_back({static_cast<double>(i), static_cast<double>(c.passed), static_cast<double>(c.required)});
    if (c.required && !c.passed) ok = false;
  }
  write_file(out_path(o, "validate.csv"), to_csv(t));
  write_file(out_path(o, "validate.txt"), report);
  if (!o.quiet) std::cout << report;
  if (!ok) throw CliError(kConfigError, "validation", "a required condition failed; see validate.txt");
  return kOk;
}

int cmd_prior_cdf(const Options& o) {
  Context ctx = load(o, true);
  Model m = build_model(ctx.config, ctx.data);
  const auto g = grid(ctx.config, "sigma", 0.0, 1.0, 101);
  const auto v = prior_cdf(ctx, m, g);
  Table t{{"sigma", "cdf"}, {}};
  for (std::size_t i = 0; i < g.size(); ++i) t.rows.push_back({g[i], v[i]});
  write_file(out_path(o, "prior_cdf.csv"), to_csv(t));
  return kOk;
}

int cmd_posterior_density(const Options& o) {
  Context ctx = load(o, true);
  if (ctx.data.empty()) throw CliError(kDataError, "data", "posterior-density needs observations (--data)");
  Model m = build_model(ctx.config, ctx.data);
  const auto g = grid(ctx.config, "sigma", 0.0, 1.0, 101);
  std::string method = ctx.config.get("posterior.method", ctx.data.size() <= 6 ? "exact" : "mixture");
  if (o.exact) method = "exact";
  if (o.mixture) method = "mixture";
  std::vector<double> v(g.size()), se(g.size(), 0.0);
  iapdf_curve_info info{};
  if (method == "exact") {
    check(iapdf_posterior_density_exact(m.functional.get(), m.alpha.get(), m.kernel.get(), ctx.data.data(),
                                        ctx.data.size(), g.data(), g.size(), v.data(), &info));
  } else if (method == "mixture") {
    const int draws = positive_int(ctx.config, "mixture.draws", 2000);
    check(iapdf_posterior_density_mixture(m.functional.get(), m.alpha.get(), m.kernel.get(), ctx.data.data(),
                                          ctx.data.size(), draws, ctx.seed, g.data(), g.size(), v.data(), se.data(),
                                          &info));
    if (info.low_ess) note(o, "warning: effective sample size " + format_number(info.ess) + " is low");
  } else {
    throw CliError(kConfigError, "config", "posterior.method must be exact or mixture");
  }
  Table t{{"sigma", "density", "std_error"}, {}};
  for (std::size_t i = 0; i < g.size(); ++i) t.rows.push_back({g[i], v[i], se[i]});
  write_file(out_path(o, "posterior_density.csv"), to_csv(t));
  return kOk;
}

int cmd_gibbs(const Options& o) {
  Context ctx = load(o, true);
  Model m = build_model(ctx.config, ctx.data);
  const iapdf_gibbs_config g = gibbs_config(ctx, m);
  const auto t = grid(ctx.config, "t", 0.0, m.upsilon, 101);
  const auto t0 = std::chrono::steady_clock::now();
  Chain ch = run_gibbs(o, g, t, ctx.data, m);
  write_chain(o, ch.get(), t, g.keep_curves != 0);
  double mean = 0.0;
  check(iapdf_chain_summary(ch.get(), &mean, nullptr, nullptr, nullptr));
  if (!o.quiet) std::cout << "expected_mean " << format_number(mean) << "\n";
  note(o, "runtime_seconds " + format_number(seconds_since(t0)));
  return kOk;
}

int cmd_oracle(const Options& o) {
  Context ctx = load(o, true);
  Model m = build_model(ctx.config, ctx.data);
  const auto g = grid(ctx.config, "sigma", 0.0, 1.0, 101);
  const int samples = positive_int(ctx.config, "oracle.samples", 100000);
  std::vector<double> v(g.size()), se(g.size());
  check(iapdf_oracle_mean_cdf(m.functional.get(), m.alpha.get(), samples, ctx.seed, g.data(), g.size(), v.data(),
                              se.data()));
  Table t{{"sigma", "cdf", "std_error"}, {}};
  for (std::size_t i = 0; i < g.size(); ++i) t.rows.push_back({g[i], v[i], se[i]});
  write_file(out_path(o, "oracle_cdf.csv"), to_csv(t));
  return kOk;
}

double prior_chain_mean(const Options& o, const Context& ctx, const Model& m, double upsilon, int sweeps) {
  iapdf_gibbs_config g = gibbs_config(ctx, m);
  g.iterations = sweeps;
  g.burn_in = 0;
  g.upsilon = upsilon;
  g.keep_curves = 0;
  g.seed = ctx.seed + 1;
  const std::vector<double> t{upsilon};
  Config c = ctx.config;
  c.set("upsilon", format_number(upsilon));
  Model pm = build_model(c, {});
  Chain ch = run_gibbs(o, g, t, {}, pm);
  double mean = 0.0;
  check(iapdf_chain_summary(ch.get(), &mean, nullptr, nullptr, nullptr));
  return mean;
}

int cmd_replicate(const Options& o) {
  Context ctx = load(o, false);
  Config base = example_config();
  for (const auto& [k, v] : ctx.config.values()) base.set(k, v);
  ctx.config = base;
  if (!o.seed_given && !ctx.config.has("seed")) ctx.seed = 7;
  const auto t0 = std::chrono::steady_clock::now();

  const int n = positive_int(ctx.config, "replicate.n", 100);
  ctx.data.resize(static_cast<std::size_t>(n));
  check(iapdf_sample_gamma(ctx.seed, 1, 1.0, 1.0, ctx.data.size(), ctx.data.data()));
  Table data{{"t"}, {}};
  for (double x : ctx.data) data.rows.push_back({x});
  write_file(out_path(o, "replicate_data.csv"), to_csv(data));

  Model m = build_model(ctx.config, ctx.data);
  const auto sg = grid(ctx.config, "sigma", 0.5, 5.5, 201);
  note(o, "prior law of the mean");
  const auto F = prior_cdf(ctx, m, sg);
  Table prior{{"sigma", "cdf"}, {}};
  for (std::size_t i = 0; i < sg.size(); ++i) prior.rows.push_back({sg[i], F[i]});
  write_file(out_path(o, "prior_cdf.csv"), to_csv(prior));
  const double prior_mean = trapezoid_mean_cdf(sg, F);

  note(o, "posterior chain");
  const iapdf_gibbs_config g = gibbs_config(ctx, m);
  const auto t = grid(ctx.config, "t", 0.0, m.upsilon, 101);
  Chain ch = run_gibbs(o, g, t, ctx.data, m);
  write_chain(o, ch.get(), t, g.keep_curves != 0);
  double post_mean = 0.0;
  int kept = 0;
  check(iapdf_chain_summary(ch.get(), &post_mean, nullptr, &kept, nullptr));

  note(o, "prior chains");
  const int sweeps = positive_int(ctx.config, "replicate.prior_paths", 10000);
  const double data_max = *std::max_element(ctx.data.begin(), ctx.data.end());
  const double prior_sim_max = prior_chain_mean(o, ctx, m, data_max, sweeps);
  const double prior_sim_ups = prior_chain_mean(o, ctx, m, m.upsilon, sweeps);

  const double sample_mean = std::accumulate(ctx.data.begin(), ctx.data.end(), 0.0) / n;
  Table summary{{"posterior_expected_mean", "prior_expected_mean", "prior_simulated_mean_upsilon_data_max",
                 "prior_simulated_mean_upsilon", "upsilon", "data_max", "sample_mean", "n", "kept"},
                {{post_mean, prior_mean, prior_sim_max, prior_sim_ups, m.upsilon, data_max, sample_mean,
                  static_cast<double>(n), static_cast<double>(kept)}}};
  write_file(out_path(o, "replicate_summary.csv"), to_csv(summary));
  if (!o.quiet) {
    std::cout << "posterior_expected_mean " << format_number(post_mean) << "\n"
              << "prior_expected_mean " << format_number(prior_mean) << "\n"
              << "prior_simulated_mean_upsilon_data_max " << format_number(prior_sim_max) << "\n"
              << "prior_simulated_mean_upsilon " << format_number(prior_sim_ups) << "\n"
              << "sample_mean " << format_number(sample_mean) << "\n";
  }
  note(o, "runtime_seconds " + format_number(seconds_since(t0)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laws of random means of increasing additive process densities"};
  app.set_version_flag("--version", iapdf_version());
  app.require_subcommand(1);
  Options o;
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "key = value configuration file");
    sub->add_option("--data", o.data_path, "observations, one positive value per line");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", seed_text, "64-bit seed");
    sub->add_flag("--quiet", o.quiet, "suppress progress and reports");
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"validate", "check the process conditions", cmd_validate},
      {"prior-cdf", "prior law of the mean as a CDF", cmd_prior_cdf},
      {"posterior-density", "posterior density of the mean", cmd_posterior_density},
      {"gibbs", "run the Gibbs sampler", cmd_gibbs},
      {"oracle", "Monte Carlo CDF of the Dirichlet mean", cmd_oracle},
      {"replicate-example", "worked example with gamma(1, 1) data", cmd_replicate},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "posterior-density") {
      auto* ex = sub->add_flag("--exact", o.exact, "exact partition sum (small n)");
      auto* mx = sub->add_flag("--mixture", o.mixture, "importance-sampling mixture");
      ex->excludes(mx);
    }
    subs.emplace_back(sub, c.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << error_line(CliError(kConfigError, "usage", msg)) << "\n";
    return kConfigError;
  }

  try {
    if (!seed_text.empty()) {
      o.seed = parse_u64(seed_text, "--seed");
      o.seed_given = true;
    }
    for (auto& [sub, run] : subs)
      if (sub->parsed()) return run(o);
  } catch (const CliError& e) {
    std::cerr << error_line(e) << "\n";
    return e.code();
  } catch (const std::bad_alloc&) {
    std::cerr << error_line(CliError(kNumericError, "size", "out of memory")) << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << error_line(CliError(kNumericError, "internal", e.what())) << "\n";
    return kNumericError;
  }
  return kOk;
}
