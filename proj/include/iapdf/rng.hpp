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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace iapdf {

/// Seeded generator with explicitly specified variate algorithms, so that a
/// given seed reproduces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for substream `index` of this generator's seed.
  Rng substream(std::uint64_t index) const { return Rng(seed_, index + 1 + stream_ * 0x9E3779B97F4A7C15ULL); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential() { return -std::log(uniform()); }
  /// Gamma with the given shape and unit rate (Marsaglia-Tsang).
  double gamma(double shape);
  double gamma(double shape, double rate) { return gamma(shape) / rate; }
  double beta(double a, double b);
  /// Index drawn with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace iapdf
