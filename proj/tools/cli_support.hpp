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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iapdf/iapdf.h"

namespace iapdf::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kNumericError = 4 };

/// Failure carrying the process exit code and a short kind name.
class CliError : public std::runtime_error {
 public:
  CliError(int code, std::string kind, const std::string& what)
      : std::runtime_error(what), code_(code), kind_(std::move(kind)) {}
  int code() const { return code_; }
  const std::string& kind() const { return kind_; }

 private:
  int code_;
  std::string kind_;
};

int exit_code(iapdf_status s);
/// Throws CliError built from iapdf_last_error() unless s is IAPDF_OK.
void check(iapdf_status s);
/// The single-line machine-parsable error message.
std::string error_line(const CliError& e);

/// Flat key=value configuration. Keys are dotted; '#' starts a comment.
/// Unknown keys and repeated keys are config errors.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> list(const std::string& key) const;
  /// "a:b:c, ..." groups of `width` numbers.
  std::vector<std::vector<double>> tuples(const std::string& key, std::size_t width) const;
  bool flag(const std::string& key, bool fallback) const;

  static const std::vector<std::string>& known_keys();
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

double parse_number(const std::string& text, const std::string& what);
std::uint64_t parse_u64(const std::string& text, const std::string& what);

/// One positive real per line; blank lines and '#' comments ignored.
std::vector<double> read_data(const std::string& path);
std::vector<double> parse_data(const std::string& text, const std::string& origin);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// 9 significant digits, '.' separator, '\n' endings.
std::string format_number(double v);
std::string to_csv(const Table& t);
Table parse_csv(const std::string& text, const std::string& origin);
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Measure = std::unique_ptr<iapdf_measure, Deleter<iapdf_measure, iapdf_measure_free>>;
using KernelH = std::unique_ptr<iapdf_kernel, Deleter<iapdf_kernel, iapdf_kernel_free>>;
using Functional = std::unique_ptr<iapdf_functional, Deleter<iapdf_functional, iapdf_functional_free>>;
using Spec = std::unique_ptr<iapdf_spec, Deleter<iapdf_spec, iapdf_spec_free>>;
using Chain = std::unique_ptr<iapdf_chain, Deleter<iapdf_chain, iapdf_chain_free>>;

/// Objects described by a configuration.
struct Model {
  Measure alpha;
  KernelH kernel;
  Functional functional;
  Spec spec;
  double upsilon = 0.0;
};

/// Builds the model; `data` supplies the default upsilon (1.5 max).
Model build_model(const Config& c, const std::vector<double>& data);

/// Grid from <prefix>.grid (explicit list) or <prefix>.lo/.hi/.n.
std::vector<double> grid(const Config& c, const std::string& prefix, double lo, double hi, int n);

/// Settings of the worked example: uniform alpha on [0, 5], beta = 1,
/// exp_conv kernel with rate 2, identity g, 100 gamma(1, 1) observations.
Config example_config();

}  // namespace iapdf::cli
