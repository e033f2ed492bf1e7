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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "cli_support.hpp"

using namespace iapdf::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(IAPDF_TEST_WORKDIR) / "cli";

struct Run {
  int status;
  std::string err;
};

// Runs the command-line program with `args`; stderr is captured.
Run run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = std::string(IAPDF_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(err.string())};
}

std::string write(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  write_file(p.string(), text);
  return p.string();
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse("# comment\nseed = 12\nalpha.kind = uniform  # trailing\n\nsigma.grid = 0.1, 0.2\n");
  CHECK(c.u64("seed", 0) == 12);
  CHECK(c.get("alpha.kind", "") == "uniform");
  CHECK(c.list("sigma.grid") == std::vector<double>{0.1, 0.2});
  CHECK(c.number("kernel.rate", 3.0) == 3.0);
  CHECK_THROWS_AS(Config::parse("alpha.knd = uniform\n"), CliError);
  CHECK_THROWS_AS(Config::parse("seed = 1\nseed = 2\n"), CliError);
  CHECK_THROWS_AS(Config::parse("seed\n"), CliError);
  CHECK_THROWS_AS(Config::parse("kernel.rate = fast\n").number("kernel.rate", 1.0), CliError);
  CHECK_THROWS_AS(Config::parse("seed = -3\n").u64("seed", 0), CliError);
  const auto jumps = Config::parse("fixed_jumps = 1:2:3, 4:5:6\n").tuples("fixed_jumps", 3);
  REQUIRE(jumps.size() == 2);
  CHECK(jumps[1][2] == 6.0);
  CHECK_THROWS_AS(Config::parse("fixed_jumps = 1:2\n").tuples("fixed_jumps", 3), CliError);
  try {
    Config::parse("a = 1\n", "x.cfg");
    FAIL("expected an error");
  } catch (const CliError& e) {
    CHECK(e.code() == kConfigError);
    CHECK(std::string(e.what()).find("x.cfg:1") != std::string::npos);
  }
}

TEST_CASE("data parsing") {
  const auto d = parse_data("# header\n1.5\n\n  2 \n3e-1\n", "d");
  CHECK(d == std::vector<double>{1.5, 2.0, 0.3});
  for (const char* bad : {"1\nx\n", "0\n", "-1\n", "1 2\n", "nan\n"}) {
    try {
      parse_data(bad, "d");
      FAIL("accepted bad data");
    } catch (const CliError& e) {
      CHECK(e.code() == kDataError);
    }
  }
}

TEST_CASE("CSV format and round trip") {
  Table t{{"sigma", "cdf"}, {{0.1, 1.0 / 3.0}, {2.0, 1e-12}}};
  const std::string csv = to_csv(t);
  CHECK(csv == "sigma,cdf\n0.1,0.333333333\n2,1e-12\n");
  const Table back = parse_csv(csv, "t");
  CHECK(back.header == t.header);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0][1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(to_csv(back) == csv);
}

TEST_CASE("error line is a single parsable line") {
  const std::string line = error_line(CliError(kDataError, "data", "bad\nvalue \"x\""));
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.rfind("error kind=data exit=3 message=", 0) == 0);
}

TEST_CASE("model construction from a config") {
  const Model m = build_model(example_config(), {1.0, 2.0});
  CHECK(m.upsilon == doctest::Approx(3.0));
  double h = 0.0;
  check(iapdf_functional_h(m.functional.get(), 1.0, &h));
  CHECK(h == doctest::Approx(0.75));
  CHECK_THROWS_AS(build_model(Config::parse("alpha.kind = sphere\n"), {}), CliError);
  CHECK_THROWS_AS(build_model(Config::parse("alpha.hi = -1\n"), {}), CliError);
  const Config grid_cfg = Config::parse("sigma.lo = 1\nsigma.hi = 2\nsigma.n = 3\n");
  CHECK(grid(grid_cfg, "sigma", 0, 1, 5) == std::vector<double>{1.0, 1.5, 2.0});
  CHECK_THROWS_AS(grid(Config::parse("sigma.grid = 1, 0.5\n"), "sigma", 0, 1, 5), CliError);
}

TEST_CASE("prior-cdf command: symmetric row and valid CSV") {
  const std::string cfg = write("sym.cfg", "kernel.family = indicator\nsigma.lo = 0\nsigma.hi = 1\nsigma.n = 11\n");
  const Run r = run("prior-cdf --config " + cfg + " --out " + (kWork / "sym").string());
  REQUIRE(r.status == 0);
  const Table t = parse_csv(read_file((kWork / "sym" / "prior_cdf.csv").string()), "prior_cdf.csv");
  CHECK(t.header == std::vector<std::string>{"sigma", "cdf"});
  REQUIRE(t.rows.size() == 11);
  CHECK(t.rows[5][0] == 0.5);
  CHECK(std::abs(t.rows[5][1] - 0.5) < 1e-4);
}

TEST_CASE("exit codes and error lines") {
  const Run missing = run("prior-cdf --config " + (kWork / "absent.cfg").string());
  CHECK(missing.status == 2);
  CHECK(missing.err.rfind("error kind=config exit=2", 0) == 0);

  const std::string typo = write("typo.cfg", "kernel.rat = 2\n");
  CHECK(run("prior-cdf --config " + typo).status == 2);

  const std::string data = write("bad.dat", "1.0\nabc\n");
  const Run bad = run("gibbs --data " + data + " --out " + (kWork / "bad").string());
  CHECK(bad.status == 3);
  CHECK(bad.err.rfind("error kind=data exit=3", 0) == 0);

  CHECK(run("no-such-command").status == 2);
  CHECK(run("prior-cdf --seed banana").status == 2);

  const std::string diverge = write("div.cfg", "functional.form = tabulated\nfunctional.x = 0, 1\nfunctional.g = 0, 1\n"
                                                "kernel.family = tabulated\nkernel.t_grid = 0, 1\nkernel.x_grid = 0\n"
                                                "kernel.values = 1, 0\n");
  const Run invalid = run("validate --config " + diverge + " --out " + (kWork / "div").string());
  CHECK(invalid.status == 2);
}

TEST_CASE("posterior-density command: exact and mixture agree") {
  const std::string cfg = write("post.cfg", "alpha.hi = 2\nalpha.mass = 2\nkernel.rate = 2\nsigma.lo = 0.5\n"
                                            "sigma.hi = 2.5\nsigma.n = 21\nmixture.draws = 400\n");
  const std::string data = write("three.dat", "0.6\n1.4\n0.9\n");
  REQUIRE(run("posterior-density --exact --config " + cfg + " --data " + data + " --out " + (kWork / "ex").string())
              .status == 0);
  REQUIRE(run("posterior-density --mixture --config " + cfg + " --data " + data + " --out " + (kWork / "mx").string())
              .status == 0);
  const Table ex = parse_csv(read_file((kWork / "ex" / "posterior_density.csv").string()), "ex");
  const Table mx = parse_csv(read_file((kWork / "mx" / "posterior_density.csv").string()), "mx");
  REQUIRE(ex.rows.size() == mx.rows.size());
  for (std::size_t i = 0; i < ex.rows.size(); ++i)
    CHECK(std::abs(ex.rows[i][1] - mx.rows[i][1]) <= 3.0 * mx.rows[i][2] + 1e-6);
  CHECK(run("posterior-density --exact --mixture --config " + cfg + " --data " + data).status == 2);
}

TEST_CASE("gibbs command: outputs are byte-identical across runs") {
  const std::string cfg = write("g.cfg", "gibbs.iterations = 120\ngibbs.burn_in = 20\nt.n = 11\nseed = 5\n");
  const std::string data = write("g.dat", "0.5\n1.5\n0.8\n2.2\n");
  REQUIRE(run("gibbs --config " + cfg + " --data " + data + " --out " + (kWork / "g1").string()).status == 0);
  REQUIRE(run("gibbs --config " + cfg + " --data " + data + " --out " + (kWork / "g2").string()).status == 0);
  for (const char* f : {"gibbs_trace.csv", "gibbs_curves.csv", "gibbs_draws.csv", "gibbs_summary.csv"}) {
    const std::string a = read_file((kWork / "g1" / f).string());
    CHECK_MESSAGE(a == read_file((kWork / "g2" / f).string()), f);
    CHECK_NOTHROW(parse_csv(a, f));
  }
  REQUIRE(run("gibbs --config " + cfg + " --data " + data + " --seed 6 --out " + (kWork / "g3").string()).status == 0);
  CHECK(read_file((kWork / "g1" / "gibbs_trace.csv").string()) !=
        read_file((kWork / "g3" / "gibbs_trace.csv").string()));
}
