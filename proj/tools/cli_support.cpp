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

#include "cli_support.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace iapdf::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void config_error(const std::string& msg) { throw CliError(kConfigError, "config", msg); }

}  // namespace

int exit_code(iapdf_status s) {
  switch (s) {
    case IAPDF_OK: return kOk;
    case IAPDF_ERR_DATA: return kDataError;
    case IAPDF_ERR_NUMERIC:
    case IAPDF_ERR_DEGENERATE:
    case IAPDF_ERR_INTERNAL:
      return kNumericError;
    default:
      return kConfigError;
  }
}

void check(iapdf_status s) {
  if (s == IAPDF_OK) return;
  throw CliError(exit_code(s), iapdf_status_name(s), iapdf_last_error());
}

std::string error_line(const CliError& e) {
  std::string msg = e.what();
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::replace(msg.begin(), msg.end(), '"', '\'');
  std::ostringstream os;
  os << "error kind=" << e.kind() << " exit=" << e.code() << " message=\"" << msg << "\"";
  return os.str();
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) config_error(what + ": empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    config_error(what + ": not a finite number: '" + t + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-') config_error(what + ": not an unsigned integer: '" + t + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) config_error(what + ": not an unsigned integer: '" + t + "'");
  return v;
}

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "seed", "upsilon", "data",
      "alpha.kind", "alpha.lo", "alpha.hi", "alpha.mass", "alpha.atoms", "alpha.x", "alpha.density",
      "beta", "beta.x", "beta.values", "fixed_jumps",
      "kernel.family", "kernel.rate", "kernel.t_grid", "kernel.x_grid", "kernel.values",
      "functional.form", "functional.constant", "functional.lo", "functional.hi", "functional.x", "functional.g",
      "sigma.lo", "sigma.hi", "sigma.n", "sigma.grid", "t.lo", "t.hi", "t.n", "t.grid",
      "gibbs.iterations", "gibbs.burn_in", "gibbs.bins", "gibbs.keep_curves", "fk.threshold",
      "prior.method", "posterior.method", "mixture.draws", "oracle.samples",
      "replicate.n", "replicate.prior_paths"};
  return keys;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  static const std::set<std::string> known(known_keys().begin(), known_keys().end());
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) config_error(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) config_error(where + ": unknown key '" + key + "'");
    if (c.values_.count(key)) config_error(where + ": repeated key '" + key + "'");
    c.values_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path) { return parse(read_file(path), path); }

void Config::set(const std::string& key, const std::string& value) {
  const auto& k = known_keys();
  if (std::find(k.begin(), k.end(), key) == k.end()) config_error("unknown key '" + key + "'");
  values_[key] = value;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::number(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number(it->second, key);
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_number(it->second, key);
  if (v != std::floor(v) || std::abs(v) > 9e15) config_error(key + ": not an integer: '" + it->second + "'");
  return static_cast<std::int64_t>(v);
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_u64(it->second, key);
}

std::vector<double> Config::list(const std::string& key) const {
  std::vector<double> out;
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return out;
  for (const std::string& s : split(it->second, ',')) out.push_back(parse_number(s, key));
  return out;
}

std::vector<std::vector<double>> Config::tuples(const std::string& key, std::size_t width) const {
  std::vector<std::vector<double>> out;
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return out;
  for (const std::string& item : split(it->second, ',')) {
    std::vector<double> tup;
    for (const std::string& s : split(item, ':')) tup.push_back(parse_number(s, key));
    if (tup.size() != width) config_error(key + ": expected " + std::to_string(width) + " ':'-separated numbers");
    out.push_back(std::move(tup));
  }
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  config_error(key + ": expected true or false");
}

std::vector<double> parse_data(const std::string& text, const std::string& origin) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(line.c_str(), &end);
    if (end != line.c_str() + line.size() || errno == ERANGE || !std::isfinite(v))
      throw CliError(kDataError, "data", where + ": not a number: '" + line + "'");
    if (!(v > 0.0)) throw CliError(kDataError, "data", where + ": observations must be positive");
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_data(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kDataError, "data", "cannot read data file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_data(ss.str(), path);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text, const std::string& origin) {
  Table t;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      t.header = split(line, ',');
      continue;
    }
    std::vector<double> row;
    for (const std::string& s : split(line, ',')) {
      if (s == "inf" || s == "-inf" || s == "nan") {
        row.push_back(std::strtod(s.c_str(), nullptr));
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size())
        throw CliError(kDataError, "data", origin + ":" + std::to_string(lineno) + ": bad CSV field '" + s + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw CliError(kDataError, "data", origin + ":" + std::to_string(lineno) + ": wrong number of fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError(kConfigError, "config", "cannot write '" + path + "'");
  out << contents;
  if (!out) throw CliError(kConfigError, "config", "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> grid(const Config& c, const std::string& prefix, double lo, double hi, int n) {
  std::vector<double> g = c.list(prefix + ".grid");
  if (g.empty()) {
    lo = c.number(prefix + ".lo", lo);
    hi = c.number(prefix + ".hi", hi);
    n = static_cast<int>(c.integer(prefix + ".n", n));
    if (n < 2 || !(hi > lo)) config_error(prefix + " grid needs n >= 2 and lo < hi");
    g.resize(n);
    for (int i = 0; i < n; ++i) g[i] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
  }
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) config_error(prefix + " grid must be strictly increasing");
  return g;
}

Model build_model(const Config& c, const std::vector<double>& data) {
  Model m;
  iapdf_measure* alpha = nullptr;
  const std::string kind = c.get("alpha.kind", "uniform");
  std::vector<double> atom_loc, atom_mass;
  for (const auto& t : c.tuples("alpha.atoms", 2)) {
    atom_loc.push_back(t[0]);
    atom_mass.push_back(t[1]);
  }
  if (kind == "uniform") {
    if (!atom_loc.empty()) config_error("alpha.atoms needs alpha.kind = atoms or tabulated");
    check(iapdf_measure_uniform(c.number("alpha.lo", 0.0), c.number("alpha.hi", 1.0), c.number("alpha.mass", 1.0),
                                &alpha));
  } else if (kind == "atoms") {
    check(iapdf_measure_atoms(atom_loc.data(), atom_mass.data(), atom_loc.size(), &alpha));
  } else if (kind == "tabulated") {
    const auto x = c.list("alpha.x"), d = c.list("alpha.density");
    if (x.size() != d.size()) config_error("alpha.x and alpha.density differ in length");
    check(iapdf_measure_tabulated(x.data(), d.data(), x.size(), atom_loc.data(), atom_mass.data(), atom_loc.size(),
                                  &alpha));
  } else {
    config_error("alpha.kind must be uniform, atoms or tabulated");
  }
  m.alpha.reset(alpha);

  iapdf_kernel* kernel = nullptr;
  const std::string family = c.get("kernel.family", "exp_conv");
  if (family == "exp_conv") {
    check(iapdf_kernel_exp_conv(c.number("kernel.rate", 1.0), &kernel));
  } else if (family == "indicator") {
    check(iapdf_kernel_indicator(&kernel));
  } else if (family == "tabulated") {
    const auto tg = c.list("kernel.t_grid"), xg = c.list("kernel.x_grid"), v = c.list("kernel.values");
    if (v.size() != tg.size() * xg.size()) config_error("kernel.values needs |t_grid| * |x_grid| entries");
    check(iapdf_kernel_tabulated(tg.data(), tg.size(), xg.data(), xg.size(), v.data(), &kernel));
  } else {
    config_error("kernel.family must be exp_conv, indicator or tabulated");
  }
  m.kernel.reset(kernel);

  iapdf_functional* f = nullptr;
  const std::string form = c.get("functional.form", "identity");
  if (form == "identity") {
    check(iapdf_functional_identity(kernel, &f));
  } else if (form == "constant") {
    check(iapdf_functional_constant(kernel, c.number("functional.constant", 1.0), &f));
  } else if (form == "indicator") {
    check(iapdf_functional_indicator(kernel, c.number("functional.lo", 0.0), c.number("functional.hi", 1.0), &f));
  } else if (form == "tabulated") {
    const auto x = c.list("functional.x"), g = c.list("functional.g");
    if (x.size() != g.size()) config_error("functional.x and functional.g differ in length");
    check(iapdf_functional_tabulated(kernel, x.data(), g.data(), x.size(), &f));
  } else {
    config_error("functional.form must be identity, constant, indicator or tabulated");
  }
  m.functional.reset(f);

  std::vector<double> jl, js, jr;
  for (const auto& t : c.tuples("fixed_jumps", 3)) {
    jl.push_back(t[0]);
    js.push_back(t[1]);
    jr.push_back(t[2]);
  }
  if (c.has("upsilon")) {
    m.upsilon = c.number("upsilon", 0.0);
  } else if (!data.empty()) {
    m.upsilon = 1.5 * *std::max_element(data.begin(), data.end());
  } else {
    double top = 0.0;
    check(iapdf_measure_quantile(alpha, 1.0, &top));
    for (double x : jl) top = std::max(top, x);
    m.upsilon = top > 0.0 ? 1.5 * top : 1.0;
  }
  const auto bx = c.list("beta.x"), bv = c.list("beta.values");
  iapdf_spec* spec = nullptr;
  if (!bx.empty()) {
    if (c.has("beta")) config_error("give either beta or beta.x / beta.values");
    if (bx.size() != bv.size()) config_error("beta.x and beta.values differ in length");
    check(iapdf_spec_create(alpha, bx.data(), bv.data(), bx.size(), jl.data(), js.data(), jr.data(), jl.size(),
                            m.upsilon, &spec));
  } else {
    const double b = c.number("beta", 1.0);
    check(iapdf_spec_create(alpha, nullptr, &b, 0, jl.data(), js.data(), jr.data(), jl.size(), m.upsilon, &spec));
  }
  m.spec.reset(spec);
  return m;
}

Config example_config() {
  return Config::parse(
      "alpha.kind = uniform\n"
      "alpha.lo = 0\n"
      "alpha.hi = 5\n"
      "alpha.mass = 5\n"
      "beta = 1\n"
      "kernel.family = exp_conv\n"
      "kernel.rate = 2\n"
      "functional.form = identity\n"
      "gibbs.iterations = 10000\n"
      "gibbs.burn_in = 1000\n"
      "fk.threshold = 0.0001\n"
      "replicate.n = 100\n",
      "<example>");
}

}  // namespace iapdf::cli
