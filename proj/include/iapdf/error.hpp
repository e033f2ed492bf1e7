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

#include <stdexcept>
#include <string>

namespace iapdf {

/// Failure categories surfaced by the library. The C API maps these onto
/// its status codes and the CLI onto its exit codes.
enum class ErrorKind {
  config,         // malformed or inconsistent model description
  data,           // bad observations
  domain,         // argument outside the operation's domain
  numeric,        // a quadrature or root finder missed its tolerance
  degenerate,     // e.g. an empty jump path (Zbar = 0)
  nonintegrable,  // h(x) = int g(t) k'(t, x) dt diverges
  size,           // problem too large for an exhaustive method
  unsupported,    // observation with zero latent mass
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an iterative numerical method stops short of its target.
/// Carries the best estimate obtained so far.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double estimate, double achieved)
      : Error(ErrorKind::numeric, what), estimate_(estimate), achieved_(achieved) {}

  double estimate() const noexcept { return estimate_; }
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double estimate_;
  double achieved_;
};

}  // namespace iapdf
